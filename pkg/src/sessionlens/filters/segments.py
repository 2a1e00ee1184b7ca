"""E-divisive change-point detection on one-dimensional series.

Hierarchical divisive estimation with an energy-statistic divergence:
within each current segment the candidate split maximizes the scaled
divergence Q-hat between the two halves; the globally best candidate is
kept only if a permutation test rejects homogeneity. Estimation stops at
the first non-significant candidate, so the number of change points falls
out of the significance level rather than being fixed up front.

The divergence between samples X (size m) and Y (size n) at power
``alpha`` is::

    E(X, Y) = 2/(m n) * sum_ij |Xi - Yj|^a
              - C(m,2)^-1 * sum_{i<k} |Xi - Xk|^a
              - C(n,2)^-1 * sum_{j<k} |Yj - Yk|^a
    Q(X, Y) = m n / (m + n) * E(X, Y)

Memory is O(n^2) in the series length (one pairwise distance matrix);
intended for session-scale series, not raw multi-hour frame counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInputError
from ..model import DataStream, EventSpan, Sample

_PERM_BATCH = 32


@dataclass
class SplitStat:
    """One accepted split: global sample index, observed Q-hat, permutation p."""

    index: int
    q_hat: float
    p_value: float


@dataclass
class SegmentationResult:
    """Change points plus the segment partition they induce.

    ``segments`` encode half-open index intervals: ``t0_ms`` is the first
    sample index of the segment and ``t1_ms`` the exclusive end index, so
    consecutive segments share a boundary without overlapping. Labels are
    ``segment-0``, ``segment-1``, ... in time order.
    """

    change_points: list[int] = field(default_factory=list)
    segments: list[EventSpan] = field(default_factory=list)
    splits: list[SplitStat] = field(default_factory=list)


def sample_divergence(x, y, alpha: float = 1.0) -> tuple[float, float]:
    """Energy divergence (E-hat, Q-hat) between two samples.

    Parameters
    ----------
    x, y : array-like of float
        The two samples; each needs at least 2 elements.
    alpha : float
        Distance power, in (0, 2].

    Returns
    -------
    (float, float)
        ``E_hat`` and the size-scaled statistic ``Q_hat``.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    m, n = len(x), len(y)
    if m < 2 or n < 2:
        raise InvalidInputError("parameter error: both samples need size >= 2")
    if not 0.0 < alpha <= 2.0:
        raise InvalidInputError("parameter error: alpha must be in (0, 2]")
    cross = np.abs(x[:, None] - y[None, :]) ** alpha
    within_x = np.abs(x[:, None] - x[None, :]) ** alpha
    within_y = np.abs(y[:, None] - y[None, :]) ** alpha
    e_hat = (2.0 / (m * n)) * cross.sum() \
        - within_x.sum() / (m * (m - 1)) \
        - within_y.sum() / (n * (n - 1))
    q_hat = (m * n / (m + n)) * e_hat
    return float(e_hat), float(q_hat)


def _qhat_curve(D: np.ndarray) -> np.ndarray:
    """Q-hat for every within-segment split of a distance matrix.

    Parameters
    ----------
    D : ndarray, shape (..., n, n)
        Pairwise distances ``|x_i - x_j|^alpha`` with zero diagonal;
        leading axes batch independent (permuted) copies.

    Returns
    -------
    ndarray, shape (..., n-1)
        ``out[..., j]`` is Q-hat for the split at tau = j + 1 (left half
        ``[0, tau)``, right half ``[tau, n)``). Prefix sums over one row
        cumsum give all splits in O(n^2) total.
    """
    n = D.shape[-1]
    row_cum = D.cumsum(axis=-1)
    row_tot = row_cum[..., :, -1]
    idx = np.arange(1, n)
    below = np.zeros(D.shape[:-2] + (n,))
    below[..., 1:] = row_cum[..., idx, idx - 1]  # sum_{j<i} D[i, j]
    diag = np.diagonal(D, axis1=-2, axis2=-1)
    within_upto = np.cumsum(2.0 * below + diag, axis=-1)  # full double sum over [0, t]
    rows_upto = np.cumsum(row_tot, axis=-1)

    tau = np.arange(1, n, dtype=np.float64)
    within_left = within_upto[..., :-1]
    cross = rows_upto[..., :-1] - within_left
    within_right = within_upto[..., -1:] - within_left - 2.0 * cross
    m, k = tau, n - tau
    e_hat = 2.0 * cross / (m * k)
    with np.errstate(divide="ignore", invalid="ignore"):
        e_hat = e_hat - np.where(m > 1, within_left / np.where(m > 1, m * (m - 1), 1.0), 0.0)
        e_hat = e_hat - np.where(k > 1, within_right / np.where(k > 1, k * (k - 1), 1.0), 0.0)
    return (m * k / n) * e_hat


def _best_split(D: np.ndarray, min_size: int) -> tuple[int, float]:
    """Earliest argmax (local tau, Q-hat) over tau in [min_size, n - min_size]."""
    n = D.shape[-1]
    q = _qhat_curve(D)[min_size - 1: n - min_size]
    j = int(np.argmax(q))  # first occurrence = smallest tau on ties
    return min_size + j, float(q[j])


def _permutation_pvalue(D: np.ndarray, observed_q: float, min_size: int,
                        n_permutations: int, p_threshold: float,
                        rng: np.random.Generator) -> tuple[float, bool]:
    """Permutation test of the observed best split.

    Returns ``(p_value, accepted)``. Permutations are drawn sequentially
    from ``rng`` and evaluated in batches. Once the exceedance count
    guarantees ``p > p_threshold`` the test stops early: the partial count
    is already enough to reject, and accepted splits by construction run
    every permutation, so their reported p-values are exact.
    """
    n = D.shape[-1]
    max_exceed = int(np.floor(p_threshold * (1 + n_permutations))) - 1
    exceed = 0
    done = 0
    while done < n_permutations:
        b = min(_PERM_BATCH, n_permutations - done)
        perms = np.stack([rng.permutation(n) for _ in range(b)])
        Dp = D[perms[:, :, None], perms[:, None, :]]
        q = _qhat_curve(Dp)[:, min_size - 1: n - min_size]
        exceed += int((q.max(axis=-1) >= observed_q).sum())
        done += b
        if exceed > max_exceed:
            return (1 + exceed) / (1 + done), False
    p = (1 + exceed) / (1 + n_permutations)
    return p, p <= p_threshold


def e_divisive(values, alpha: float = 1.0, min_size: int = 30,
               n_permutations: int = 199, p_threshold: float = 0.05,
               seed: int = 0) -> SegmentationResult:
    """Detect change points in a series by divisive bisection.

    Parameters
    ----------
    values : array-like of float
        The observed series.
    alpha : float
        Distance power in (0, 2].
    min_size : int
        Minimum segment length; candidate splits satisfy
        ``min_size <= tau <= len(segment) - min_size``.
    n_permutations : int
        Shuffles per significance test.
    p_threshold : float
        Accept a split iff its permutation p-value is <= this.
    seed : int
        Seeds a counter-based generator keyed additionally by segment
        bounds, so results are reproducible regardless of evaluation
        order.

    Returns
    -------
    SegmentationResult
        Change points in increasing order; segments partition ``[0, n)``;
        one SplitStat per accepted split in acceptance order.

    Notes
    -----
    A series shorter than ``2 * min_size`` yields a single segment (not an
    error). Estimation stops at the first candidate whose test fails, so
    every reported split passed its own test.
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    if not 0.0 < alpha <= 2.0:
        raise InvalidInputError("parameter error: alpha must be in (0, 2]")
    if min_size < 2:
        raise InvalidInputError("parameter error: min_size must be >= 2")
    if n_permutations < 1 or not 0.0 < p_threshold < 1.0:
        raise InvalidInputError("parameter error: bad permutation test settings")
    n = len(x)
    if n < 2 * min_size:
        return _result([], [], n)

    D = np.abs(x[:, None] - x[None, :]) ** alpha
    # candidate best split per open segment: (start, end) -> (abs index, q)
    candidates: dict[tuple[int, int], tuple[int, float]] = {}

    def evaluate(s: int, e: int) -> None:
        if e - s >= 2 * min_size:
            tau, q = _best_split(D[s:e, s:e], min_size)
            candidates[(s, e)] = (s + tau, q)

    evaluate(0, n)
    change_points: list[int] = []
    splits: list[SplitStat] = []
    while candidates:
        # globally best candidate: max q, ties toward the earliest index
        (s, e), (tau_abs, q) = min(candidates.items(),
                                   key=lambda kv: (-kv[1][1], kv[1][0]))
        rng = np.random.Generator(np.random.Philox(key=seed, counter=[0, s, e, 0]))
        p, accepted = _permutation_pvalue(D[s:e, s:e], q, min_size,
                                          n_permutations, p_threshold, rng)
        if not accepted:
            break
        del candidates[(s, e)]
        change_points.append(tau_abs)
        splits.append(SplitStat(index=tau_abs, q_hat=q, p_value=p))
        evaluate(s, tau_abs)
        evaluate(tau_abs, e)
    change_points.sort()
    return _result(change_points, splits, n)


def _result(change_points: list[int], splits: list[SplitStat], n: int) -> SegmentationResult:
    bounds = [0] + list(change_points) + [n]
    segments = [EventSpan(t0_ms=bounds[i], t1_ms=bounds[i + 1],
                          label=f"segment-{i}", probability=1.0)
                for i in range(len(bounds) - 1)]
    return SegmentationResult(change_points=list(change_points),
                              segments=segments, splits=splits)


def e_divisive_segments(series: DataStream, alpha: float = 1.0, min_size: int = 30,
                        n_permutations: int = 199, p_threshold: float = 0.05,
                        seed: int = 0) -> SegmentationResult:
    """Run :func:`e_divisive` on the sample values of a continuous stream."""
    values = [r.value for r in series.payload if isinstance(r, Sample)]
    return e_divisive(values, alpha=alpha, min_size=min_size,
                      n_permutations=n_permutations, p_threshold=p_threshold,
                      seed=seed)


def spans_to_time(result: SegmentationResult, series: DataStream,
                  duration_ms: int | None = None) -> list[EventSpan]:
    """Map index-interval segments onto the series' sample timestamps.

    Each segment ``[i, j)`` becomes a span from the i-th sample time to
    the j-th sample time (or the recording end for the final segment).
    """
    times = [r.t_ms for r in series.payload if isinstance(r, Sample)]
    if not times:
        return []
    end_default = duration_ms if duration_ms is not None else times[-1]
    spans = []
    for seg in result.segments:
        t0 = times[seg.t0_ms]
        t1 = times[seg.t1_ms] if seg.t1_ms < len(times) else end_default
        spans.append(EventSpan(t0_ms=t0, t1_ms=t1, label=seg.label,
                               probability=seg.probability))
    return spans
