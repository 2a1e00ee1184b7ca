/** Video element glue: playback follows the shared timebase and vice versa.
 *
 * The timebase owns the playhead.  Deliberate seeks flow timebase -> video;
 * ordinary playback flows video -> timebase via tick so subscribers can
 * distinguish the two.
 */

import type { Timebase } from "./timebase.js";

export const PLAYBACK_RATES = [0.5, 1, 1.5, 2] as const;
export const SKIP_MS = 10_000;

export type TelemetrySink = (kind: string, tVideoMs: number,
                             payload?: Record<string, unknown>) => void;

export class VideoController {
  constructor(private el: HTMLVideoElement, private timebase: Timebase,
              private telemetry: TelemetrySink) {
    el.addEventListener("timeupdate", () => {
      timebase.tick(el.currentTime * 1000);
    });
    el.addEventListener("play", () => {
      this.telemetry("play", el.currentTime * 1000);
    });
    el.addEventListener("pause", () => {
      this.telemetry("pause", el.currentTime * 1000);
    });
    timebase.onChange((event) => {
      if (event !== "seek") return;
      const target = timebase.currentMs / 1000;
      if (Math.abs(el.currentTime - target) > 0.05) el.currentTime = target;
    });
  }

  get currentMs(): number {
    return this.el.currentTime * 1000;
  }

  togglePlay(): void {
    if (this.el.paused) void this.el.play();
    else this.el.pause();
  }

  setRate(rate: number): void {
    this.el.playbackRate = rate;
    this.telemetry("rate-change", this.currentMs, { rate });
  }

  skip(deltaMs: number): void {
    this.timebase.seek(this.timebase.currentMs + deltaMs);
    this.telemetry("seek", this.timebase.currentMs, { via: "skip", delta_ms: deltaMs });
  }
}
