/** Shared time model for every synchronized view.
 *
 * One Timebase instance is the single source of truth for the visible
 * domain (zoom/pan state) and the playhead position.  Views never keep
 * their own copy of either; they subscribe and re-read on change, which
 * is what keeps all timelines, the video player and the transcript in
 * lockstep.
 */

export interface TimeDomain {
  readonly a: number;
  readonly b: number;
}

export type TimebaseEvent = "domain" | "seek" | "tick";
export type TimebaseListener = (event: TimebaseEvent) => void;

export class Timebase {
  private dom: TimeDomain;
  private playheadMs = 0;
  private listeners: TimebaseListener[] = [];

  constructor(readonly durationMs: number) {
    this.dom = { a: 0, b: durationMs };
  }

  get domain(): TimeDomain {
    return this.dom;
  }

  get currentMs(): number {
    return this.playheadMs;
  }

  get zoomed(): boolean {
    return this.dom.a > 0 || this.dom.b < this.durationMs;
  }

  /** Set the visible domain; a degenerate or inverted range resets to full extent. */
  setDomain(aMs: number, bMs: number): void {
    const a = Math.max(0, Math.min(aMs, this.durationMs));
    const b = Math.max(0, Math.min(bMs, this.durationMs));
    if (b - a < 1) {
      this.clearZoom();
      return;
    }
    this.dom = { a, b };
    this.emit("domain");
  }

  /** Shift the domain by deltaMs, preserving width and clamping to the recording. */
  panBy(deltaMs: number): void {
    const width = this.dom.b - this.dom.a;
    let a = this.dom.a + deltaMs;
    a = Math.max(0, Math.min(a, this.durationMs - width));
    this.dom = { a, b: a + width };
    this.emit("domain");
  }

  clearZoom(): void {
    this.dom = { a: 0, b: this.durationMs };
    this.emit("domain");
  }

  /** Move the playhead deliberately (click, skip button, transcript line). */
  seek(ms: number): void {
    this.playheadMs = Math.max(0, Math.min(ms, this.durationMs));
    this.emit("seek");
  }

  /** Follow playback; same clamp as seek but a distinct event so views can ignore it. */
  tick(ms: number): void {
    this.playheadMs = Math.max(0, Math.min(ms, this.durationMs));
    this.emit("tick");
  }

  onChange(fn: TimebaseListener): void {
    this.listeners.push(fn);
  }

  private emit(event: TimebaseEvent): void {
    for (const fn of this.listeners) fn(event);
  }
}
