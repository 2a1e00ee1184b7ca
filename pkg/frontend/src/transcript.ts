/** Scrolling transcript list linked to the shared timebase.
 *
 * Clicking a line is a navigation gesture: it seeks the playhead to the
 * line's start time.  During playback the line under the playhead is
 * highlighted and kept in view.
 */

import type { Timebase } from "./timebase.js";
import type { TextRecord } from "./types.js";
import type { TelemetrySink } from "./video.js";

function formatClock(ms: number): string {
  const total = Math.floor(ms / 1000);
  const m = Math.floor(total / 60);
  const s = total % 60;
  return `${m}:${String(s).padStart(2, "0")}`;
}

export class TranscriptPanel {
  private lineEls: HTMLElement[] = [];
  private segments: TextRecord[] = [];

  constructor(private container: HTMLElement, private timebase: Timebase,
              private telemetry: TelemetrySink) {
    timebase.onChange((event) => {
      if (event === "seek" || event === "tick") this.highlight(timebase.currentMs);
    });
  }

  setSegments(segments: TextRecord[]): void {
    this.segments = [...segments].sort((a, b) => a.t0_ms - b.t0_ms);
    this.container.replaceChildren();
    this.lineEls = this.segments.map((seg) => {
      const line = document.createElement("div");
      line.className = "transcript-line";
      const stamp = document.createElement("span");
      stamp.className = "transcript-time";
      stamp.textContent = formatClock(seg.t0_ms);
      const text = document.createElement("span");
      text.textContent = seg.text;
      line.append(stamp, text);
      line.addEventListener("click", () => {
        this.timebase.seek(seg.t0_ms);
        this.telemetry("seek", seg.t0_ms, { via: "transcript" });
      });
      this.container.appendChild(line);
      return line;
    });
    this.highlight(this.timebase.currentMs);
  }

  private highlight(tMs: number): void {
    this.segments.forEach((seg, i) => {
      const active = seg.t0_ms <= tMs && tMs < seg.t1_ms;
      const el = this.lineEls[i];
      if (!el) return;
      const was = el.classList.contains("active");
      el.classList.toggle("active", active);
      if (active && !was) el.scrollIntoView({ block: "nearest" });
    });
  }
}
