/** Stacked multi-track timeline rendered with d3.
 *
 * Every track shares one x mapping derived from the timebase domain, with
 * an optional fisheye lens centered under the cursor.  Brushing the axis
 * zooms all tracks at once (the timebase is the only holder of the zoom
 * state), dragging the plot pans while zoomed, and a plain click seeks.
 */

import * as d3 from "d3";

import { fisheyeInverse, fisheyePosition } from "./fisheye.js";
import type { LabelFilter } from "./filters.js";
import type { Timebase } from "./timebase.js";
import type {
  EventRecord,
  SampleRecord,
  StreamInfo,
  StreamRecord,
  TextRecord,
  ThumbnailRecord,
} from "./types.js";
import type { TelemetrySink } from "./video.js";

export interface Track {
  info: StreamInfo;
  title: string;
  records: StreamRecord[];
}

export interface TimelineOptions {
  thumbUrl: (streamId: string, name: string) => string;
  telemetry: TelemetrySink;
  onIntervalSelect: (t0Ms: number, t1Ms: number) => void;
}

const AXIS_H = 26;
const ROW_H = 56;
const LABEL_W = 150;
const LENS_DISTORTION = 3;
const CLICK_SLOP_PX = 3;

function formatTick(ms: number): string {
  const total = Math.floor(ms / 1000);
  return `${Math.floor(total / 60)}:${String(total % 60).padStart(2, "0")}`;
}

export class TimelinePanel {
  private tracks: Track[] = [];
  private svg: d3.Selection<SVGSVGElement, unknown, null, undefined>;
  private tooltip: d3.Selection<HTMLDivElement, unknown, null, undefined>;
  private brush: d3.BrushBehavior<unknown>;
  private brushG: d3.Selection<SVGGElement, unknown, null, undefined>;
  private width = 900;
  private lensOn = false;
  private lensFocus: number | null = null;
  private selection: [number, number] | null = null;
  private clearingBrush = false;

  constructor(private container: HTMLElement, private timebase: Timebase,
              private filter: LabelFilter, private opts: TimelineOptions) {
    this.svg = d3.select(container).append("svg").attr("class", "timeline");
    this.tooltip = d3.select(container).append("div")
      .attr("class", "tooltip").style("display", "none");
    this.brush = d3.brushX()
      .on("end", (event: d3.D3BrushEvent<unknown>) => this.onBrushEnd(event));
    this.brushG = this.svg.append("g").attr("class", "brush");

    timebase.onChange((event) => {
      if (event === "domain") this.render();
      else this.renderPlayhead();
    });
    filter.onChange(() => this.render());
    new ResizeObserver(() => {
      const w = container.clientWidth;
      if (w > 0 && w !== this.width) {
        this.width = w;
        this.render();
      }
    }).observe(container);
  }

  setTracks(tracks: Track[]): void {
    this.tracks = tracks;
    this.render();
  }

  setLens(on: boolean): void {
    this.lensOn = on;
    if (!on) this.lensFocus = null;
    this.render();
  }

  /** Current annotation target range, kept after zooming away. */
  setSelection(t0Ms: number, t1Ms: number): void {
    this.selection = [t0Ms, t1Ms];
    this.render();
  }

  getSelection(): [number, number] | null {
    return this.selection;
  }

  private get innerWidth(): number {
    return Math.max(50, this.width - LABEL_W);
  }

  private get plotHeight(): number {
    return AXIS_H + this.tracks.length * ROW_H;
  }

  /** Time to pixel under the current domain and lens state. */
  private xAt(tMs: number): number {
    const { a, b } = this.timebase.domain;
    const n = (tMs - a) / (b - a);
    const pos = this.lensOn && this.lensFocus !== null
      ? fisheyePosition(n, this.lensFocus, LENS_DISTORTION)
      : Math.min(1, Math.max(0, n));
    return LABEL_W + pos * this.innerWidth;
  }

  /** Pixel back to time; exact inverse of xAt. */
  private msAt(px: number): number {
    const { a, b } = this.timebase.domain;
    const pos = (px - LABEL_W) / this.innerWidth;
    const n = this.lensOn && this.lensFocus !== null
      ? fisheyeInverse(pos, this.lensFocus, LENS_DISTORTION)
      : Math.min(1, Math.max(0, pos));
    return a + n * (b - a);
  }

  private onBrushEnd(event: d3.D3BrushEvent<unknown>): void {
    if (this.clearingBrush || !event.sourceEvent) return;
    if (!event.selection) return;
    const [x0, x1] = event.selection as [number, number];
    const t0 = Math.round(this.msAt(x0));
    const t1 = Math.round(this.msAt(x1));
    this.clearingBrush = true;
    this.brushG.call(this.brush.move, null);
    this.clearingBrush = false;
    this.selection = [Math.min(t0, t1), Math.max(t0, t1)];
    this.opts.onIntervalSelect(this.selection[0], this.selection[1]);
    this.timebase.setDomain(t0, t1);
    this.opts.telemetry("brush", this.timebase.currentMs,
                        { t0_ms: t0, t1_ms: t1 });
  }

  private showTooltip(event: MouseEvent, text: string): void {
    const bounds = this.container.getBoundingClientRect();
    this.tooltip
      .style("display", "block")
      .style("left", `${event.clientX - bounds.left + 12}px`)
      .style("top", `${event.clientY - bounds.top + 12}px`)
      .text(text);
  }

  private hideTooltip(): void {
    this.tooltip.style("display", "none");
  }

  render(): void {
    const { a, b } = this.timebase.domain;
    this.svg.attr("width", this.width).attr("height", this.plotHeight);
    this.svg.selectAll("g.row, g.axis, rect.backdrop, line.playhead, rect.selection-overlay")
      .remove();

    const backdrop = this.svg.insert("rect", ":first-child")
      .attr("class", "backdrop")
      .attr("x", LABEL_W).attr("y", 0)
      .attr("width", this.innerWidth).attr("height", this.plotHeight);
    this.attachPlotGestures(backdrop);

    const axis = this.svg.append("g").attr("class", "axis");
    const ticks = d3.scaleLinear().domain([a, b]).ticks(8);
    for (const t of ticks) {
      const x = this.xAt(t);
      const g = axis.append("g").attr("transform", `translate(${x},0)`);
      g.append("line").attr("y1", AXIS_H - 6).attr("y2", this.plotHeight);
      g.append("text").attr("y", AXIS_H - 10).text(formatTick(t));
    }

    this.tracks.forEach((track, i) => {
      const row = this.svg.append("g")
        .attr("class", `row variant-${track.info.variant}`)
        .attr("transform", `translate(0,${AXIS_H + i * ROW_H})`);
      row.append("text").attr("class", "row-label")
        .attr("x", 6).attr("y", ROW_H / 2).text(track.title);
      row.append("line").attr("class", "row-sep")
        .attr("x1", 0).attr("x2", this.width)
        .attr("y1", ROW_H).attr("y2", ROW_H);
      const body = row.append("g");
      switch (track.info.variant) {
        case "continuous":
          this.renderContinuous(body, track);
          break;
        case "event":
          this.renderEvents(body, track);
          break;
        case "text":
          this.renderText(body, track);
          break;
        case "thumbnail":
          this.renderThumbnails(body, track);
          break;
      }
    });

    if (this.selection) {
      const [s0, s1] = this.selection;
      if (s1 >= a && s0 <= b) {
        this.svg.append("rect").attr("class", "selection-overlay")
          .attr("x", this.xAt(Math.max(s0, a)))
          .attr("width", Math.max(1, this.xAt(Math.min(s1, b)) - this.xAt(Math.max(s0, a))))
          .attr("y", AXIS_H).attr("height", this.plotHeight - AXIS_H);
      }
    }

    this.brushG.raise()
      .call(this.brush.extent([[LABEL_W, 0], [this.width, AXIS_H]]));
    this.svg.append("line").attr("class", "playhead")
      .attr("y1", 0).attr("y2", this.plotHeight);
    this.renderPlayhead();
  }

  private renderPlayhead(): void {
    const x = this.xAt(this.timebase.currentMs);
    this.svg.select("line.playhead").attr("x1", x).attr("x2", x);
  }

  private attachPlotGestures(
      backdrop: d3.Selection<SVGRectElement, unknown, null, undefined>): void {
    let moved = 0;
    const drag = d3.drag<SVGRectElement, unknown>()
      .on("start", () => { moved = 0; })
      .on("drag", (event: d3.D3DragEvent<SVGRectElement, unknown, unknown>) => {
        moved += Math.abs(event.dx);
        if (!this.timebase.zoomed) return;
        const { a, b } = this.timebase.domain;
        const msPerPx = (b - a) / this.innerWidth;
        this.timebase.panBy(-event.dx * msPerPx);
      })
      .on("end", (event: d3.D3DragEvent<SVGRectElement, unknown, unknown>) => {
        if (moved < CLICK_SLOP_PX) {
          const t = Math.round(this.msAt(event.x));
          this.timebase.seek(t);
          this.opts.telemetry("seek", t, { via: "timeline" });
        } else if (this.timebase.zoomed) {
          const { a, b } = this.timebase.domain;
          this.opts.telemetry("pan", this.timebase.currentMs,
                              { t0_ms: Math.round(a), t1_ms: Math.round(b) });
        }
      });
    backdrop.call(drag);
    backdrop.on("mousemove", (event: MouseEvent) => {
      if (!this.lensOn) return;
      const [px] = d3.pointer(event, this.svg.node());
      this.lensFocus = Math.min(1, Math.max(0, (px - LABEL_W) / this.innerWidth));
      this.render();
    });
    backdrop.on("mouseleave", () => {
      if (!this.lensOn || this.lensFocus === null) return;
      this.lensFocus = null;
      this.render();
    });
  }

  private visible<T extends StreamRecord>(records: T[],
                                          start: (r: T) => number,
                                          end: (r: T) => number): T[] {
    const { a, b } = this.timebase.domain;
    return records.filter((r) => end(r) >= a && start(r) <= b);
  }

  private renderContinuous(g: d3.Selection<SVGGElement, unknown, null, undefined>,
                           track: Track): void {
    const samples = track.records as SampleRecord[];
    const voiced = samples.filter((s) => s.voiced !== false && s.value !== null);
    const extent = d3.extent(voiced, (s) => s.value);
    const lo = extent[0] ?? 0;
    const hi = extent[1] ?? 1;
    const y = d3.scaleLinear()
      .domain(lo === hi ? [lo - 1, hi + 1] : [lo, hi])
      .range([ROW_H - 8, 8]);
    const inDomain = this.visible(samples, (s) => s.t_ms, (s) => s.t_ms);
    const line = d3.line<SampleRecord>()
      .defined((s) => s.voiced !== false && s.value !== null)
      .x((s) => this.xAt(s.t_ms))
      .y((s) => y(s.value));
    g.append("path").attr("class", "series").attr("d", line(inDomain) ?? "");
    g.append("rect").attr("class", "hover-capture")
      .attr("x", LABEL_W).attr("y", 0)
      .attr("width", this.innerWidth).attr("height", ROW_H)
      .on("mousemove", (event: MouseEvent) => {
        const [px] = d3.pointer(event, this.svg.node());
        const t = this.msAt(px);
        const near = d3.least(inDomain, (s) => Math.abs(s.t_ms - t));
        if (!near) return;
        const val = near.voiced === false ? "unvoiced"
          : `${near.value.toFixed(2)}${track.info.unit ? " " + track.info.unit : ""}`;
        this.showTooltip(event, `${formatTick(near.t_ms)}  ${val}`);
      })
      .on("mouseleave", () => this.hideTooltip());
  }

  private renderEvents(g: d3.Selection<SVGGElement, unknown, null, undefined>,
                       track: Track): void {
    const events = this.visible(track.records as EventRecord[],
                                (r) => r.t0_ms, (r) => r.t1_ms);
    const labels = [...new Set((track.records as EventRecord[]).map((r) => r.label))];
    const color = d3.scaleOrdinal<string>().domain(labels.sort())
      .range(d3.schemeTableau10);
    g.selectAll("rect.event").data(events).join("rect")
      .attr("class", "event")
      .attr("x", (r) => this.xAt(Math.max(r.t0_ms, this.timebase.domain.a)))
      .attr("width", (r) => Math.max(2,
        this.xAt(Math.min(r.t1_ms, this.timebase.domain.b))
          - this.xAt(Math.max(r.t0_ms, this.timebase.domain.a))))
      .attr("y", 10).attr("height", ROW_H - 24)
      .attr("fill", (r) => color(r.label))
      .attr("opacity", (r) => this.filter.opacity(r.label))
      .on("mousemove", (event: MouseEvent, r) => {
        this.showTooltip(event,
          `${r.label}  p=${r.p.toFixed(2)}  ${formatTick(r.t0_ms)}-${formatTick(r.t1_ms)}`);
      })
      .on("mouseleave", () => this.hideTooltip())
      .on("click", (_event, r) => {
        this.timebase.seek(r.t0_ms);
        this.opts.telemetry("seek", r.t0_ms, { via: "event" });
      });
  }

  private renderText(g: d3.Selection<SVGGElement, unknown, null, undefined>,
                     track: Track): void {
    const segs = this.visible(track.records as TextRecord[],
                              (r) => r.t0_ms, (r) => r.t1_ms);
    const block = g.selectAll("g.text-seg").data(segs).join("g")
      .attr("class", "text-seg");
    block.append("rect")
      .attr("x", (r) => this.xAt(Math.max(r.t0_ms, this.timebase.domain.a)))
      .attr("width", (r) => Math.max(2,
        this.xAt(Math.min(r.t1_ms, this.timebase.domain.b))
          - this.xAt(Math.max(r.t0_ms, this.timebase.domain.a))))
      .attr("y", 12).attr("height", ROW_H - 28)
      .on("mousemove", (event: MouseEvent, r) => this.showTooltip(event, r.text))
      .on("mouseleave", () => this.hideTooltip())
      .on("click", (_event, r) => {
        this.timebase.seek(r.t0_ms);
        this.opts.telemetry("seek", r.t0_ms, { via: "timeline-text" });
      });
    block.append("text")
      .attr("x", (r) => this.xAt(Math.max(r.t0_ms, this.timebase.domain.a)) + 4)
      .attr("y", ROW_H / 2 + 4)
      .text((r) => {
        const w = this.xAt(r.t1_ms) - this.xAt(r.t0_ms);
        const chars = Math.max(0, Math.floor(w / 7) - 1);
        return r.text.length > chars ? r.text.slice(0, chars) : r.text;
      });
  }

  private renderThumbnails(g: d3.Selection<SVGGElement, unknown, null, undefined>,
                           track: Track): void {
    const thumbs = this.visible(track.records as ThumbnailRecord[],
                                (r) => r.t_ms, (r) => r.t_ms);
    g.selectAll("image.thumb").data(thumbs).join("image")
      .attr("class", "thumb")
      .attr("x", (r) => this.xAt(r.t_ms))
      .attr("y", 6).attr("height", ROW_H - 12)
      .attr("preserveAspectRatio", "xMinYMin meet")
      .attr("href", (r) => this.opts.thumbUrl(track.info.id, r.image))
      .on("mousemove", (event: MouseEvent, r) =>
        this.showTooltip(event, formatTick(r.t_ms)))
      .on("mouseleave", () => this.hideTooltip())
      .on("click", (_event, r) => {
        this.timebase.seek(r.t_ms);
        this.opts.telemetry("seek", r.t_ms, { via: "thumbnail" });
      });
  }
}
