"""Constructors for the classical families of triples.

Each constructor returns a validated triple ready for every other module:
regular diffusions, snapping-out motion, step-scale random walks, birth-death
chains (with a uniqueness/conservativeness report evaluated from the rates),
and finite-depth Cantor staircases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boundary import SeriesVerdict, classify_partial_sums
from .scale import (
    INF,
    GeneralizedScale,
    Jump,
    MeasureSpec,
    PiecewiseLinear,
    Triple,
    validate_triple,
)


def _validated(triple: Triple) -> Triple:
    report = validate_triple(triple)
    if not report.passed:
        raise ValueError(f"constructed triple fails validation: {report.failures()}")
    return triple


# ---------------------------------------------------------------------------
# Regular diffusions
# ---------------------------------------------------------------------------


def regular_diffusion(breakpoints, pieces, *, l: float | None = None, r: float | None = None,
                      atoms=(), endpoint_masses=(0.0, 0.0), tail_slopes=(0.0, 0.0)) -> Triple:
    """Continuous strictly increasing scale with a fully supported measure."""
    xs = np.array([p[0] for p in breakpoints], dtype=float)
    ys = np.array([p[1] for p in breakpoints], dtype=float)
    if np.any(np.diff(ys) <= 0):
        raise ValueError("scale must be strictly increasing; use the raw constructors for plateaus")
    l = float(xs[0]) if l is None else l
    r = float(xs[-1]) if r is None else r
    cont = PiecewiseLinear(xs, ys, left_slope=tail_slopes[0], right_slope=tail_slopes[1])
    if (not math.isfinite(l) and tail_slopes[0] <= 0) or (not math.isfinite(r) and tail_slopes[1] <= 0):
        raise ValueError("unbounded strictly increasing scales need positive tail slopes")
    scale = GeneralizedScale(l, r, cont)
    measure = MeasureSpec(l, r, pieces=tuple(pieces), atoms=tuple(atoms),
                          endpoint_mass_l=endpoint_masses[0], endpoint_mass_r=endpoint_masses[1])
    return _validated(Triple(scale, measure))


def brownian_motion(l: float = -INF, r: float = INF,
                    endpoint_masses=(0.0, 0.0)) -> Triple:
    """Identity scale with Lebesgue measure: Brownian motion on the interval."""
    a = l if math.isfinite(l) else -1.0
    b = r if math.isfinite(r) else 1.0
    return regular_diffusion(
        [(a, a), (b, b)], [(l, r, 1.0)], l=l, r=r,
        endpoint_masses=endpoint_masses,
        tail_slopes=(0.0 if math.isfinite(l) else 1.0, 0.0 if math.isfinite(r) else 1.0))


# ---------------------------------------------------------------------------
# Snapping-out motion
# ---------------------------------------------------------------------------


def snapping_out(kappa: float) -> Triple:
    """Identity scale with a left gap 2/kappa at the origin, Lebesgue measure.

    The image state space is (-inf, 0] u [2/kappa, inf); the unit step across
    the origin has energy kappa/4 times the squared jump.
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    cont = PiecewiseLinear(np.array([-1.0, 1.0]), np.array([-1.0, 1.0]),
                           left_slope=1.0, right_slope=1.0)
    scale = GeneralizedScale(-INF, INF, cont, (Jump(0.0, left=2.0 / kappa, right=0.0),))
    measure = MeasureSpec(-INF, INF, pieces=((-INF, INF, 1.0),),
                          endpoint_mass_l=INF, endpoint_mass_r=INF)
    return _validated(Triple(scale, measure))


# ---------------------------------------------------------------------------
# Step-scale random walks
# ---------------------------------------------------------------------------


def random_walk(levels, interval_masses, *, p: int = 0) -> Triple:
    """Step scale s = levels[k] on [k, k+1) with one mass per unit interval.

    Indices run from -p to q = len(levels)-1-p; the regularized chain lives
    on the level values with state masses equal to the interval masses.
    """
    levels = [float(c) for c in levels]
    masses = [float(m) for m in interval_masses]
    if len(levels) < 2:
        raise ValueError("need at least two levels")
    if len(masses) != len(levels):
        raise ValueError("need one interval mass per level")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("levels must be strictly increasing")
    if any(m <= 0 for m in masses):
        raise ValueError("interval masses must be positive")
    lo = -p
    hi = len(levels) - p  # = q + 1
    cont = PiecewiseLinear(np.array([lo, hi], dtype=float),
                           np.array([levels[0], levels[0]]))
    jumps = tuple(Jump(float(lo + k), left=levels[k] - levels[k - 1], right=0.0)
                  for k in range(1, len(levels)))
    scale = GeneralizedScale(float(lo), float(hi), cont, jumps)
    pieces = tuple((float(lo + k), float(lo + k + 1), masses[k]) for k in range(len(levels)))
    measure = MeasureSpec(float(lo), float(hi), pieces=pieces)
    return _validated(Triple(scale, measure))


def natural_scale_conductances(levels) -> np.ndarray:
    """Edge conductances 1/(2 spacing) for a list of level values."""
    return 1.0 / (2.0 * np.diff(np.asarray(levels, dtype=float)))


def constant_speed_masses(levels) -> list[float]:
    """State masses making every holding time unit mean (mass = total conductance)."""
    cond = natural_scale_conductances(levels)
    left = np.concatenate([[0.0], cond])
    right = np.concatenate([cond, [0.0]])
    return list(left + right)


# ---------------------------------------------------------------------------
# Birth-death chains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UniquenessReport:
    """Divergence verdicts for the uniqueness criteria of a birth-death family.

    `conservative` (equivalently Q-process uniqueness) holds iff the weighted
    series sum_k dc_k * (m_0 + ... + m_k) diverges; `sigma_divergence` is the
    independent arrival-integral evaluation, which must agree.
    """

    symmetric_unique: bool | None
    conservative: bool | None
    series: SeriesVerdict
    sigma: SeriesVerdict
    level_series: SeriesVerdict
    mass_series: SeriesVerdict
    q_max: int
    n_terms: int

    @property
    def agree(self) -> bool:
        return (_as_bool(self.series) == _as_bool(self.sigma))

    def to_dict(self) -> dict:
        return {
            "symmetric_unique": self.symmetric_unique,
            "conservative": self.conservative,
            "series_verdict": self.series.verdict,
            "sigma_verdict": self.sigma.verdict,
            "agree": self.agree,
            "q_max": self.q_max,
            "n_terms": self.n_terms,
        }


def _as_bool(v: SeriesVerdict) -> bool | None:
    return {"diverges": True, "converges": False}.get(v.verdict)


@dataclass(frozen=True)
class BirthDeathModel:
    triple: Triple
    levels: np.ndarray          # natural-scale positions of the states
    state_masses: np.ndarray
    birth: np.ndarray           # rates b_0 .. b_{q_max}
    death: np.ndarray           # rates a_0 (=0), a_1 .. a_{q_max}
    q_max: int
    uniqueness: UniquenessReport


def _rate_array(rate, n: int, first: int) -> np.ndarray:
    if callable(rate):
        return np.array([float(rate(k)) for k in range(first, n)], dtype=float)
    arr = [float(v) for v in rate]
    if len(arr) < n - first:
        arr = arr + [arr[-1]] * (n - first - len(arr))
    return np.array(arr[: n - first], dtype=float)


def birth_death(birth, death, q_max: int = 40, series_terms: int = 400) -> BirthDeathModel:
    """Triple of a birth-death chain, plus its uniqueness report.

    `birth` / `death` are sequences or callables giving b_k (k >= 0) and a_k
    (k >= 1); short sequences repeat their last value.  The state space is
    truncated at q_max with a reflecting right end (recorded here); the
    uniqueness verdicts are computed from the rate sequences directly, over
    `series_terms` terms with a ratio-bounded tail classification.
    """
    n = max(q_max + 1, series_terms)
    b = _rate_array(birth, n, 0)
    a = np.concatenate([[0.0], _rate_array(death, n, 1)])
    if np.any(b <= 0) or np.any(a[1:] <= 0):
        raise ValueError("rates must be positive")

    # Product recurrences stop at float under/overflow: the classified prefix
    # is all that is representable, and the tail ratios are already settled.
    dc = [1.0 / (2.0 * b[0])]   # dc[k] = c_{k+1} - c_k
    m = [1.0]                   # m[k] = state mass
    with np.errstate(over="ignore"):
        for k in range(1, n):
            nxt_dc = dc[k - 1] * a[k] / b[k]
            nxt_m = m[k - 1] * b[k - 1] / a[k]
            if nxt_dc <= 0 or not (np.isfinite(nxt_dc) and np.isfinite(nxt_m)):
                break
            dc.append(nxt_dc)
            m.append(nxt_m)
    dc = np.array(dc)
    m = np.array(m)
    n = len(dc)
    levels = np.concatenate([[0.0], np.cumsum(dc)])

    cum_mass = np.cumsum(m)
    with np.errstate(over="ignore", invalid="ignore"):
        series = classify_partial_sums(dc * cum_mass)
        sigma = classify_partial_sums(dc[1:] * (cum_mass[1:] - m[0]))
    level_series = classify_partial_sums(dc)
    mass_series = classify_partial_sums(m)
    sym = None
    if _as_bool(level_series) or _as_bool(mass_series):
        sym = True
    elif _as_bool(level_series) is False and _as_bool(mass_series) is False:
        sym = False
    uniqueness = UniquenessReport(
        symmetric_unique=sym, conservative=_as_bool(series),
        series=series, sigma=sigma, level_series=level_series,
        mass_series=mass_series, q_max=q_max, n_terms=n)

    # The triple keeps only the prefix whose levels stay strictly increasing
    # in float (explosive families accumulate at a finite level).
    realized = np.diff(levels)
    flat = np.flatnonzero(realized <= 0)
    q = min(q_max, int(flat[0]) if flat.size else n - 1)
    triple = random_walk(levels[: q + 1], m[: q + 1], p=0)
    return BirthDeathModel(
        triple=triple, levels=levels[: q + 1], state_masses=m[: q + 1],
        birth=b[: q + 1], death=a[: q + 1], q_max=q, uniqueness=uniqueness)


# ---------------------------------------------------------------------------
# Cantor staircases
# ---------------------------------------------------------------------------


def cantor_cells(depth: int) -> list[tuple[float, float]]:
    """Middle-third construction on [0, 1] truncated at the given depth."""
    cells = [(0.0, 1.0)]
    for _ in range(depth):
        nxt = []
        for a, b in cells:
            w = (b - a) / 3.0
            nxt.append((a, a + w))
            nxt.append((b - w, b))
        cells = nxt
    return cells


def cantor_gaps(depth: int) -> list[tuple[float, float]]:
    cells = cantor_cells(depth)
    return [(b1, a2) for (_, b1), (a2, _) in zip(cells, cells[1:])]


def cantor_examples(depth: int, variant: str = "timechange") -> Triple:
    """Finite-depth staircase scale on [0, 1].

    The scale is the identity on the retained cells and constant across the
    removed middle thirds, with a compensating jump at each gap's right edge.
    Variants: 'timechange' puts Lebesgue measure on the cells;
    'bm_on_cantor' adds atoms of half the gap length at both gap edges.
    """
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if variant not in ("timechange", "bm_on_cantor"):
        raise ValueError("variant must be 'timechange' or 'bm_on_cantor'")
    cells = cantor_cells(depth)
    gaps_ = cantor_gaps(depth)
    xs, ys = [0.0], [0.0]
    y = 0.0
    for a, b in cells:
        if a > xs[-1]:
            xs.append(a)
            ys.append(y)
        y += b - a
        xs.append(b)
        ys.append(y)
    cont = PiecewiseLinear(np.array(xs), np.array(ys))
    jumps = tuple(Jump(b, left=b - a, right=0.0) for a, b in gaps_)
    scale = GeneralizedScale(0.0, 1.0, cont, jumps)
    pieces = tuple((a, b, 1.0) for a, b in cells)
    atoms: tuple = ()
    if variant == "bm_on_cantor":
        got = []
        for a, b in gaps_:
            half = (b - a) / 2.0
            got.append((a, half))
            got.append((b, half))
        atoms = tuple(sorted(got))
    measure = MeasureSpec(0.0, 1.0, pieces=pieces, atoms=atoms)
    return _validated(Triple(scale, measure))
