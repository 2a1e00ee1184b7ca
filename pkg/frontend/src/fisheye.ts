/** Cartesian fisheye distortion for the timeline focus lens.
 *
 * Positions are normalized to [0, 1].  The lens keeps the focus point and
 * both endpoints fixed while stretching the neighbourhood of the focus at
 * the expense of the periphery.  Distortion 0 is the identity.
 */

function profile(t: number, d: number): number {
  return ((d + 1) * t) / (d * t + 1);
}

function clamp01(v: number): number {
  return Math.min(1, Math.max(0, v));
}

export function fisheyePosition(x: number, focus: number, distortion = 3): number {
  const f = clamp01(focus);
  const xi = clamp01(x);
  if (distortion <= 0 || xi === f) return xi;
  if (xi > f) {
    const span = 1 - f;
    return f + span * profile((xi - f) / span, distortion);
  }
  return f - f * profile((f - xi) / f, distortion);
}

/** Exact inverse of fisheyePosition over [0, 1]; used to map clicks back to time. */
export function fisheyeInverse(y: number, focus: number, distortion = 3): number {
  const f = clamp01(focus);
  const yi = clamp01(y);
  if (distortion <= 0 || yi === f) return yi;
  const unprofile = (u: number) => u / (distortion + 1 - distortion * u);
  if (yi > f) {
    const span = 1 - f;
    return f + span * unprofile((yi - f) / span);
  }
  return f - f * unprofile((f - yi) / f);
}
