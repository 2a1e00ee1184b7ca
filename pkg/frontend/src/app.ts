/** Page bootstrap: loads one project and wires every panel to the shared
 * timebase, the label filter and the annotation store.
 *
 * Streams render incrementally: scheduling jobs subscribes to each job's
 * push feed and re-fetches the affected streams on partial and terminal
 * events, so tracks fill in while filters are still running.
 */

import { ApiClient } from "./api.js";
import { AnnotationStore } from "./annotations.js";
import { LabelFilter } from "./filters.js";
import { Timebase } from "./timebase.js";
import { TimelinePanel, type Track } from "./timeline.js";
import { TranscriptPanel } from "./transcript.js";
import { PLAYBACK_RATES, SKIP_MS, VideoController } from "./video.js";
import type {
  AnnotationRow,
  EventRecord,
  FilterRow,
  StreamInfo,
  TextRecord,
} from "./types.js";

const VARIANT_ORDER: Record<string, number> = {
  thumbnail: 0, text: 1, event: 2, continuous: 3,
};
const PRESELECT_MS = 10_000;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function formatClock(ms: number): string {
  const total = Math.floor(ms / 1000);
  return `${Math.floor(total / 60)}:${String(total % 60).padStart(2, "0")}`;
}

class App {
  private api = new ApiClient();
  private projectId!: string;
  private timebase!: Timebase;
  private filter = new LabelFilter();
  private timeline!: TimelinePanel;
  private transcript!: TranscriptPanel;
  private annotations!: AnnotationStore;
  private filtersById = new Map<string, FilterRow>();
  private tracksByStream = new Map<string, Track>();
  private watched = new Set<string>();

  async start(): Promise<void> {
    const params = new URLSearchParams(location.search);
    const projects = await this.api.listProjects();
    this.populateProjectPicker(projects.map((p) => p.project_id), params.get("project"));
    if (!projects.length) {
      el("status").textContent = "no projects yet; ingest recordings first";
      return;
    }
    this.projectId = params.get("project") ?? projects[0]!.project_id;

    const [recordings, filterRows] = await Promise.all([
      this.api.listRecordings(this.projectId),
      this.api.listFilters(),
    ]);
    for (const f of filterRows) this.filtersById.set(f.filter_id, f);
    const durationMs = Math.max(1000, ...recordings.map((r) => r.duration_ms));
    this.timebase = new Timebase(durationMs);

    const telemetry = (kind: string, tMs: number, payload?: Record<string, unknown>) =>
      this.api.telemetry(this.projectId, kind, tMs, payload);

    this.timeline = new TimelinePanel(el("timeline"), this.timebase, this.filter, {
      thumbUrl: (sid, name) => this.api.thumbUrl(this.projectId, sid, name),
      telemetry,
      onIntervalSelect: (t0, t1) => this.showSelection(t0, t1),
    });
    this.transcript = new TranscriptPanel(el("transcript"), this.timebase, telemetry);
    this.annotations = new AnnotationStore(this.api, this.projectId);
    this.annotations.onChange(() => this.renderAnnotationTable());

    this.wireVideo(telemetry, params.get("video"));
    this.wireControls();
    this.wireAnnotationForm();

    const preselectEnd = Math.min(PRESELECT_MS, durationMs);
    this.timeline.setSelection(0, preselectEnd);
    this.showSelection(0, preselectEnd);

    await this.reloadStreams();
    await this.annotations.refresh();
    el("status").textContent =
      `${this.projectId}: ${this.tracksByStream.size} stream(s), ${formatClock(durationMs)}`;
  }

  private populateProjectPicker(ids: string[], current: string | null): void {
    const picker = el<HTMLSelectElement>("project-picker");
    picker.replaceChildren(...ids.map((id) => new Option(id, id, false, id === current)));
    picker.addEventListener("change", () => {
      location.search = `?project=${encodeURIComponent(picker.value)}`;
    });
  }

  private wireVideo(telemetry: (k: string, t: number, p?: Record<string, unknown>) => void,
                    videoUrl: string | null): void {
    const video = el<HTMLVideoElement>("video");
    if (videoUrl) video.src = videoUrl;
    el<HTMLInputElement>("video-file").addEventListener("change", (event) => {
      const file = (event.target as HTMLInputElement).files?.[0];
      if (file) video.src = URL.createObjectURL(file);
    });
    const controller = new VideoController(video, this.timebase, telemetry);

    el("play-toggle").addEventListener("click", () => controller.togglePlay());
    el("skip-back").addEventListener("click", () => controller.skip(-SKIP_MS));
    el("skip-forward").addEventListener("click", () => controller.skip(SKIP_MS));
    const rates = el("rates");
    for (const rate of PLAYBACK_RATES) {
      const btn = document.createElement("button");
      btn.textContent = `${rate}x`;
      btn.classList.toggle("active", rate === 1);
      btn.addEventListener("click", () => {
        controller.setRate(rate);
        rates.querySelectorAll("button").forEach((b) => b.classList.remove("active"));
        btn.classList.add("active");
      });
      rates.appendChild(btn);
    }
    this.timebase.onChange(() => {
      el("clock").textContent =
        `${formatClock(this.timebase.currentMs)} / ${formatClock(this.timebase.durationMs)}`;
    });
  }

  private wireControls(): void {
    el("zoom-clear").addEventListener("click", () => {
      this.timebase.clearZoom();
      this.api.telemetry(this.projectId, "brush", this.timebase.currentMs,
                         { cleared: true });
    });
    const lens = el<HTMLInputElement>("lens-toggle");
    lens.addEventListener("change", () => this.timeline.setLens(lens.checked));
    el("run-filters").addEventListener("click", () => void this.runFilters());
  }

  private wireAnnotationForm(): void {
    el("annotate").addEventListener("click", () => void this.submitAnnotation());
  }

  private showSelection(t0: number, t1: number): void {
    el("selection-label").textContent =
      t0 === t1 ? formatClock(t0) : `${formatClock(t0)} - ${formatClock(t1)}`;
  }

  private async submitAnnotation(): Promise<void> {
    const range = this.timeline.getSelection();
    const streamPicker = el<HTMLSelectElement>("annotation-stream");
    if (!range || !streamPicker.value) return;
    const [t0, t1] = range;
    const text = el<HTMLInputElement>("annotation-text").value.trim();
    const author = el<HTMLInputElement>("annotation-author").value.trim() || "anonymous";
    try {
      await this.annotations.create({
        stream_id: streamPicker.value,
        kind: t0 === t1 ? "point" : "interval",
        t0_ms: t0, t1_ms: t1, text, author,
      });
      el<HTMLInputElement>("annotation-text").value = "";
    } catch (err) {
      el("status").textContent = `annotation rejected: ${(err as Error).message}`;
    }
  }

  private renderAnnotationTable(): void {
    const body = el("annotation-rows");
    body.replaceChildren(...this.annotations.rows().map((row) => this.annotationRow(row)));
  }

  private annotationRow(row: AnnotationRow): HTMLTableRowElement {
    const tr = document.createElement("tr");
    tr.classList.toggle("pending", this.annotations.isPending(row.id));
    const when = row.kind === "point" ? formatClock(row.t0_ms)
      : `${formatClock(row.t0_ms)} - ${formatClock(row.t1_ms)}`;
    const track = this.tracksByStream.get(row.stream_id);
    for (const text of [when, track?.title ?? row.stream_id, row.text, row.author]) {
      const td = document.createElement("td");
      td.textContent = text;
      tr.appendChild(td);
    }
    const actions = document.createElement("td");
    if (!this.annotations.isPending(row.id)) {
      const view = document.createElement("a");
      view.textContent = "svg";
      view.href = this.api.annotletteUrl(row.id);
      view.target = "_blank";
      const del = document.createElement("button");
      del.textContent = "x";
      del.addEventListener("click", (event) => {
        event.stopPropagation();
        void this.annotations.remove(row.id);
      });
      actions.append(view, " ", del);
    }
    tr.appendChild(actions);
    tr.addEventListener("click", () => this.timebase.seek(row.t0_ms));
    return tr;
  }

  private trackTitle(info: StreamInfo): string {
    const name = this.filtersById.get(info.filter_id)?.display_name ?? info.filter_id;
    return `${name} (${info.variant})`;
  }

  private async reloadStreams(streamIds?: string[]): Promise<void> {
    const infos = await this.api.listStreams(this.projectId);
    const wanted = streamIds ? infos.filter((s) => streamIds.includes(s.id))
      : infos.filter((s) => !this.tracksByStream.has(s.id));
    await Promise.all(wanted.map(async (info) => {
      const page = await this.api.streamPage(info.id, 0, this.timebase.durationMs);
      this.tracksByStream.set(info.id, {
        info, title: this.trackTitle(info), records: page.records,
      });
    }));
    this.refreshDerivedViews();
  }

  private refreshDerivedViews(): void {
    const tracks = [...this.tracksByStream.values()].sort((x, y) =>
      (VARIANT_ORDER[x.info.variant] ?? 9) - (VARIANT_ORDER[y.info.variant] ?? 9)
      || x.title.localeCompare(y.title));
    this.timeline.setTracks(tracks);

    const textTrack = tracks.find((t) => t.info.variant === "text");
    this.transcript.setSegments(textTrack ? textTrack.records as TextRecord[] : []);

    const labels = new Set<string>();
    for (const t of tracks) {
      if (t.info.variant !== "event") continue;
      for (const r of t.records as EventRecord[]) labels.add(r.label);
    }
    this.renderFilterChips([...labels].sort());
    this.populateAnnotationStreams(tracks);
    this.renderAnnotationTable();
  }

  private renderFilterChips(labels: string[]): void {
    const host = el("label-chips");
    host.replaceChildren(...labels.map((label) => {
      const chip = document.createElement("button");
      chip.className = "chip";
      chip.textContent = label;
      chip.classList.toggle("selected", this.filter.isSelected(label));
      chip.addEventListener("click", () => {
        this.filter.toggle(label);
        chip.classList.toggle("selected", this.filter.isSelected(label));
        this.api.telemetry(this.projectId, "filter-toggle", this.timebase.currentMs,
                           { label, selected: this.filter.isSelected(label) });
      });
      return chip;
    }));
  }

  private populateAnnotationStreams(tracks: Track[]): void {
    const picker = el<HTMLSelectElement>("annotation-stream");
    const current = picker.value;
    picker.replaceChildren(...tracks.map((t) =>
      new Option(t.title, t.info.id, false, t.info.id === current)));
  }

  private async runFilters(): Promise<void> {
    const ids = [...this.filtersById.keys()];
    if (!ids.length) return;
    const jobs = await this.api.scheduleJobs(this.projectId, ids);
    el("status").textContent = `scheduled ${jobs.length} job(s)`;
    let open = 0;
    for (const job of jobs) {
      if (this.watched.has(job.job_id)) continue;
      this.watched.add(job.job_id);
      open += 1;
      this.api.jobEvents(job.job_id, (event) => {
        if (event.type === "partial" || event.type === "done" || event.type === "cached") {
          const ids = (event.stream_ids as string[] | undefined) ?? [];
          void this.reloadStreams(ids.length ? ids : undefined);
        }
        if (event.type === "done" || event.type === "failed" || event.type === "cached") {
          open -= 1;
          el("status").textContent = open > 0
            ? `${open} job(s) still running`
            : `all jobs finished`;
          if (event.type === "failed") {
            el("status").textContent = `${job.filter_id} failed: ${event.error ?? ""}`;
          }
        }
      });
    }
  }
}

new App().start().catch((err) => {
  el("status").textContent = `failed to load: ${(err as Error).message}`;
});
