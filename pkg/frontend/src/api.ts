/** Thin typed client for the analysis server HTTP API.
 *
 * Mutations carry a request_id so a retried POST replays the original
 * response instead of duplicating the effect.  Telemetry is buffered and
 * flushed in batches; losing a batch on page close is acceptable.
 */

import type {
  AnnotationDraft,
  AnnotationRow,
  FilterRow,
  JobEvent,
  JobRow,
  ProjectRow,
  RecordingRow,
  StreamInfo,
  StreamPage,
  TelemetryEvent,
} from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, readonly code: string, message: string) {
    super(message);
  }
}

function requestId(): string {
  return crypto.randomUUID();
}

const TELEMETRY_FLUSH_MS = 2000;

export class ApiClient {
  private telemetryBuffer: TelemetryEvent[] = [];
  private telemetryTimer: ReturnType<typeof setTimeout> | null = null;
  private telemetryProject: string | null = null;

  constructor(readonly base = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await fetch(this.base + path, {
      headers: init?.body ? { "content-type": "application/json" } : {},
      ...init,
    });
    if (!resp.ok) {
      let code = "error";
      let message = `${resp.status} ${resp.statusText}`;
      try {
        const body = await resp.json();
        code = body.code ?? code;
        message = body.message ?? message;
      } catch {
        // non-JSON error body; keep the status line
      }
      throw new ApiError(resp.status, code, message);
    }
    return resp.json() as Promise<T>;
  }

  async listProjects(): Promise<ProjectRow[]> {
    const out = await this.request<{ projects: ProjectRow[] }>("/projects");
    return out.projects;
  }

  async listRecordings(projectId: string): Promise<RecordingRow[]> {
    const out = await this.request<{ recordings: RecordingRow[] }>(
      `/projects/${projectId}/recordings`);
    return out.recordings;
  }

  async listFilters(): Promise<FilterRow[]> {
    const out = await this.request<{ filters: FilterRow[] }>("/filters");
    return out.filters;
  }

  async listStreams(projectId: string): Promise<StreamInfo[]> {
    const out = await this.request<{ streams: StreamInfo[] }>(
      `/projects/${projectId}/streams`);
    return out.streams;
  }

  streamPage(streamId: string, fromMs?: number, toMs?: number): Promise<StreamPage> {
    const q = new URLSearchParams();
    if (fromMs !== undefined) q.set("from", String(fromMs));
    if (toMs !== undefined) q.set("to", String(toMs));
    const suffix = q.size ? `?${q}` : "";
    return this.request<StreamPage>(`/streams/${streamId}${suffix}`);
  }

  async scheduleJobs(projectId: string, filterIds: string[],
                     params?: Record<string, unknown>): Promise<JobRow[]> {
    const out = await this.request<{ jobs: JobRow[] }>(`/projects/${projectId}/jobs`, {
      method: "POST",
      body: JSON.stringify({ filter_ids: filterIds, params: params ?? {},
                             request_id: requestId() }),
    });
    return out.jobs;
  }

  getJob(jobId: string): Promise<JobRow> {
    return this.request<JobRow>(`/jobs/${jobId}`);
  }

  /** Subscribe to a job's push feed; the source closes itself on a terminal event. */
  jobEvents(jobId: string, onEvent: (event: JobEvent) => void): EventSource {
    const source = new EventSource(`${this.base}/jobs/${jobId}/events`);
    source.onmessage = (msg) => {
      const event = JSON.parse(msg.data) as JobEvent;
      onEvent(event);
      if (event.type === "done" || event.type === "failed" || event.type === "cached") {
        source.close();
      }
    };
    return source;
  }

  createAnnotation(projectId: string, draft: AnnotationDraft): Promise<AnnotationRow> {
    return this.request<AnnotationRow>(`/projects/${projectId}/annotations`, {
      method: "POST",
      body: JSON.stringify({ ...draft, request_id: requestId() }),
    });
  }

  async listAnnotations(projectId: string): Promise<AnnotationRow[]> {
    const out = await this.request<{ annotations: AnnotationRow[] }>(
      `/projects/${projectId}/annotations`);
    return out.annotations;
  }

  updateAnnotation(projectId: string, annotationId: string,
                   patch: Partial<AnnotationDraft>): Promise<AnnotationRow> {
    return this.request<AnnotationRow>(
      `/projects/${projectId}/annotations/${annotationId}`,
      { method: "PATCH", body: JSON.stringify(patch) });
  }

  async deleteAnnotation(projectId: string, annotationId: string): Promise<void> {
    await this.request<{ deleted: string }>(
      `/projects/${projectId}/annotations/${annotationId}`, { method: "DELETE" });
  }

  annotletteUrl(annotationId: string): string {
    return `${this.base}/annotations/${annotationId}/annotlette.svg`;
  }

  thumbUrl(projectId: string, streamId: string, name: string): string {
    return `${this.base}/projects/${projectId}/thumbs/${streamId}/${name}`;
  }

  /** Queue an interaction event; batches are flushed every few seconds. */
  telemetry(projectId: string, kind: string, tVideoMs: number,
            payload?: Record<string, unknown>): void {
    this.telemetryProject = projectId;
    this.telemetryBuffer.push({
      kind, t_video_ms: Math.round(tVideoMs), ...(payload ? { payload } : {}),
    });
    if (this.telemetryTimer === null) {
      this.telemetryTimer = setTimeout(() => void this.flushTelemetry(),
                                       TELEMETRY_FLUSH_MS);
    }
  }

  async flushTelemetry(): Promise<void> {
    if (this.telemetryTimer !== null) {
      clearTimeout(this.telemetryTimer);
      this.telemetryTimer = null;
    }
    const events = this.telemetryBuffer.splice(0);
    const project = this.telemetryProject;
    if (!events.length || !project) return;
    try {
      await this.request(`/projects/${project}/telemetry`, {
        method: "POST",
        body: JSON.stringify({ events, request_id: requestId() }),
      });
    } catch {
      // telemetry is best-effort; drop the batch rather than disturb the UI
    }
  }
}
