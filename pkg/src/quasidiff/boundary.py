"""Feller boundary classification for the image process.

The two classifying integrals are evaluated in closed form from the
piecewise-constant-plus-atoms representation of the image measure, with
infinities detected symbolically (unbounded endpoint over positive density,
or a divergent moment) rather than by overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .regularize import RegularizedPackage
from .scale import INF, MeasureSpec, is_finite


@dataclass(frozen=True)
class EndpointReport:
    side: str
    sigma: float
    lam: float
    feller_class: str       # regular | exit | entrance | natural
    accessible: bool
    included: bool
    boundary: str | None    # reflecting | absorbing | None


@dataclass(frozen=True)
class FellerReport:
    left: EndpointReport
    right: EndpointReport
    conservative: bool

    def endpoint(self, side: str) -> EndpointReport:
        return self.left if side == "l" else self.right


def _pick_base(measure: MeasureSpec) -> float:
    if measure.l < 0 < measure.r and all(x != 0 for x, _ in measure.atoms):
        return 0.0
    pts = [e for e in (measure.l, measure.r) if is_finite(e)]
    pts += [x for x, _ in measure.atoms]
    for a, b, _ in measure.pieces:
        pts += [e for e in (a, b) if is_finite(e)]
    if not pts:
        return 0.0
    lo, hi = min(pts), max(pts)
    mid = (lo + hi) / 2 if hi > lo else lo + 1.0
    while any(x == mid for x, _ in measure.atoms):
        mid = np.nextafter(mid, hi)
    return float(mid)


def _sigma_lambda_right(measure: MeasureSpec, t0: float) -> tuple[float, float]:
    """sigma(r) = int_{t0}^{r} mu((t0, y]) dy and lam(r) = int_{(t0, r)} y-t0 d mu."""
    r = measure.r
    events = {t0}
    for a, b, rho in measure.pieces:
        for e in (a, b):
            if is_finite(e) and t0 < e < r:
                events.add(e)
    for x, _ in measure.atoms:
        if t0 < x < r:
            events.add(x)
    grid = sorted(events)
    if is_finite(r):
        grid.append(r)
    else:
        grid.append(INF)
    sigma = 0.0
    lam = 0.0
    mass = 0.0  # mu((t0, y]) accumulated so far
    for u, w in zip(grid, grid[1:]):
        rho = 0.0
        for pa, pb, prho in measure.pieces:
            if pa <= u and w <= pb:
                rho = prho
                break
        if w == INF:
            if rho > 0:
                return INF, INF
            if mass > 0:
                sigma = INF
            for x, m in measure.atoms:
                if x > u:
                    lam += (x - t0) * m  # beyond the last finite event: none by construction
            return sigma, lam
        dlen = w - u
        sigma += mass * dlen + rho * dlen * dlen / 2
        lam += rho * ((w - t0) ** 2 - (u - t0) ** 2) / 2
        mass += rho * dlen
        for x, m in measure.atoms:
            if x == w:
                mass += m
                lam += (x - t0) * m
    return sigma, lam


def _mirror(measure: MeasureSpec) -> MeasureSpec:
    pieces = tuple(sorted((-b, -a, rho) for a, b, rho in measure.pieces))
    atoms = tuple(sorted((-x, m) for x, m in measure.atoms))
    return MeasureSpec(-measure.r, -measure.l, pieces=pieces, atoms=atoms,
                       endpoint_mass_l=measure.endpoint_mass_r,
                       endpoint_mass_r=measure.endpoint_mass_l)


def sigma_lambda(package: RegularizedPackage, base: float | None = None) -> dict[str, tuple[float, float]]:
    """The classifying integrals (sigma, lambda) for both endpoints.

    Computed from a base point inside the image span (0 when the span allows,
    else an interior point clear of atoms); finiteness is base independent.
    """
    m = package.measure
    t0 = _pick_base(m) if base is None else base
    right = _sigma_lambda_right(m, t0)
    left = _sigma_lambda_right(_mirror(m), -t0)
    return {"l": left, "r": right}


def feller_classify(package: RegularizedPackage) -> FellerReport:
    """Feller classes, endpoint accessibility and global conservativeness.

    An endpoint is accessible iff its sigma integral is finite; the process
    is conservative iff sigma diverges at every endpoint excluded from the
    state space.
    """
    sl = sigma_lambda(package)
    reports = {}
    for side in ("l", "r"):
        sigma, lam = sl[side]
        if sigma < INF and lam < INF:
            cls = "regular"
        elif sigma < INF:
            cls = "exit"
        elif lam < INF:
            cls = "entrance"
        else:
            cls = "natural"
        included = package.set.l_in if side == "l" else package.set.r_in
        reports[side] = EndpointReport(
            side=side, sigma=sigma, lam=lam, feller_class=cls,
            accessible=sigma < INF, included=included,
            boundary=package.endpoint(side).boundary)
    conservative = all(
        reports[side].sigma == INF
        for side in ("l", "r")
        if not (package.set.l_in if side == "l" else package.set.r_in))
    return FellerReport(left=reports["l"], right=reports["r"], conservative=conservative)


# ---------------------------------------------------------------------------
# Divergence classification for nonnegative series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeriesVerdict:
    verdict: str        # diverges | converges | inconclusive
    partial_sum: float
    bound: float | None  # upper bound on the full sum when convergent
    n_terms: int


def classify_partial_sums(terms, *, window: int = 10, ratio_cap: float = 0.98,
                          big: float = 1e12) -> SeriesVerdict:
    """Divergence test for a nonnegative series given a finite prefix.

    Diverges when the partial sum explodes or the tail terms stop decaying;
    converges when the tail ratios are bounded below 1 and not drifting
    upwards (a geometric tail bound is then valid); otherwise inconclusive
    at this truncation (e.g. harmonic-type tails).
    """
    t = np.asarray(list(terms), dtype=float)
    if np.any(t < 0):
        raise ValueError("series terms must be nonnegative")
    partial = float(np.sum(t))
    n = len(t)
    if partial > big or np.any(~np.isfinite(t)):
        return SeriesVerdict("diverges", partial, None, n)
    if n < window + 2:
        return SeriesVerdict("inconclusive", partial, None, n)
    tail = t[-(window + 1):]
    if np.all(tail > 0):
        ratios = tail[1:] / tail[:-1]
        rmax = float(np.max(ratios))
        drifting = np.any(np.diff(ratios) > 1e-9 * rmax)
        if rmax <= ratio_cap and not drifting:
            bound = partial + float(tail[-1]) * rmax / (1 - rmax)
            return SeriesVerdict("converges", partial, bound, n)
        if float(np.min(ratios)) >= 1.0 - 1e-12:
            return SeriesVerdict("diverges", partial, None, n)
    if np.all(tail == 0):
        return SeriesVerdict("converges", partial, partial, n)
    return SeriesVerdict("inconclusive", partial, None, n)
