"""Regularization of a triple: scale completion plus darning, in image coordinates.

Scale completion splits each jump point of the scale into one-sided copies;
darning collapses each plateau to a point.  Working directly in the image of
the scale, the completed-and-darned state space is the closure of s(I) with
non-reflecting endpoints removed, the transported measure is the image
measure m o s^{-1}, and the pullback map sends image points to their
preimages (darned points go to a recorded plateau representative).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scale import (
    INF,
    EndpointClass,
    GeneralizedScale,
    Jump,
    MeasureSpec,
    PiecewiseLinear,
    Triple,
    classify_endpoint_triple,
    compute_supports,
    is_finite,
    validate_triple,
)


@dataclass(frozen=True)
class NearlyClosedSet:
    """A nearly closed subset of the line: closed components plus endpoint flags.

    `components` are closed intervals (singletons allowed) whose union is the
    closure of the set intersected with the reals; `l_in` / `r_in` record
    whether the finite endpoints themselves belong to the set.
    """

    components: tuple[tuple[float, float], ...]
    l_in: bool
    r_in: bool

    def __post_init__(self):
        comps = tuple((float(a), float(b)) for a, b in self.components)
        if not comps:
            raise ValueError("need at least one component")
        for a, b in comps:
            if a > b:
                raise ValueError("components must satisfy a <= b")
        for (_, b1), (a2, _) in zip(comps, comps[1:]):
            if a2 <= b1:
                raise ValueError("components must be disjoint and sorted")
        object.__setattr__(self, "components", comps)

    @property
    def l_hat(self) -> float:
        return self.components[0][0]

    @property
    def r_hat(self) -> float:
        return self.components[-1][1]

    def gaps(self) -> list[tuple[float, float]]:
        """The finite open intervals separating consecutive components."""
        return [(b1, a2) for (_, b1), (a2, _) in zip(self.components, self.components[1:])]

    def contains(self, x: float) -> bool:
        if x == self.l_hat and not self.l_in:
            return False
        if x == self.r_hat and not self.r_in:
            return False
        return any(a <= x <= b for a, b in self.components)

    def length_within(self, a: float, b: float) -> float:
        """Lebesgue measure of the set intersected with (a, b)."""
        if b <= a:
            return 0.0
        total = 0.0
        for ca, cb in self.components:
            lo, hi = max(a, ca), min(b, cb)
            if hi > lo:
                total += hi - lo
        return total


@dataclass(frozen=True)
class PullbackMap:
    """Right inverse of the scale: image coordinate back to the base interval.

    Affine branches invert the strictly increasing stretches; `specials` pin
    jump values, one-sided limit values and darned plateau values to their
    base points (plateaus use the midpoint of the preimage closure as the
    recorded representative).
    """

    branches: tuple[tuple[float, float, float, float, float], ...]
    # (y_lo, y_hi, anchor_x, anchor_y, inv_slope): x = anchor_x + (y - anchor_y) * inv_slope
    specials: tuple[tuple[float, float, str], ...]  # (y, x, kind)

    def classify(self, yhat: float) -> tuple[float, str]:
        """Return (base point, kind).

        Kinds: 'point' (attained value), 'left'/'right' (unattained one-sided
        limit at a jump), 'plateau' (darned value, mapped to the recorded
        representative).
        """
        for v, x, kind in self.specials:
            if yhat == v:
                return x, kind
        for y_lo, y_hi, ax, ay, inv in self.branches:
            if y_lo <= yhat <= y_hi:
                return ax + (yhat - ay) * inv, "point"
        raise ValueError(f"{yhat} is not an image coordinate of the scale")

    def __call__(self, yhat: float) -> float:
        return self.classify(yhat)[0]


@dataclass(frozen=True)
class RegularizedPackage:
    """The image regularization of a triple, ready for analysis and simulation."""

    set: NearlyClosedSet
    measure: MeasureSpec          # image measure on (l_hat, r_hat)
    endpoint_l: EndpointClass
    endpoint_r: EndpointClass
    pullback: PullbackMap
    source: Triple

    @property
    def gaps(self) -> list[tuple[float, float]]:
        return self.set.gaps()

    @property
    def l_hat(self) -> float:
        return self.set.l_hat

    @property
    def r_hat(self) -> float:
        return self.set.r_hat

    def endpoint(self, side: str) -> EndpointClass:
        return self.endpoint_l if side == "l" else self.endpoint_r

    def to_triple(self) -> Triple:
        """Canonical triple whose image regularization is this package.

        Identity scale on the set, plateau across each gap with a compensating
        jump at its right edge, the image measure itself, and infinite mass at
        each excluded endpoint.
        """
        comps = self.set.components
        l_hat, r_hat = self.l_hat, self.r_hat
        # A trailing singleton would put its compensating jump at the right
        # endpoint; extend the interval with a plateau so the jump stays
        # interior (the step-scale pattern), moving the endpoint mass to an
        # atom at the old endpoint.
        extend = is_finite(r_hat) and comps[-1][0] == comps[-1][1] and len(comps) > 1
        r_ext = r_hat + (r_hat - comps[-2][1]) if extend else r_hat
        xs, ys, jumps = [], [], []
        cumgap = 0.0
        for i, (a, b) in enumerate(comps):
            if i > 0:
                gap = a - comps[i - 1][1]
                jumps.append(Jump(a, left=gap, right=0.0))
                cumgap += gap
            for e in (a, b):
                if is_finite(e) and (not xs or e > xs[-1]):
                    xs.append(e)
                    ys.append(e - cumgap)
        if extend:
            xs.append(r_ext)
            ys.append(ys[-1])
        cont = PiecewiseLinear(
            np.array(xs), np.array(ys),
            left_slope=0.0 if is_finite(l_hat) else 1.0,
            right_slope=0.0 if is_finite(r_hat) else 1.0)
        scale = GeneralizedScale(l_hat, r_ext, cont, tuple(jumps))
        m = self.measure
        atoms = m.atoms
        em_r = m.endpoint_mass_r if self.set.r_in else INF
        if extend and self.set.r_in and m.endpoint_mass_r > 0:
            atoms = atoms + ((r_hat, m.endpoint_mass_r),)
            em_r = 0.0
        measure = MeasureSpec(
            l_hat, r_ext, pieces=m.pieces, atoms=atoms,
            endpoint_mass_l=m.endpoint_mass_l if self.set.l_in else INF,
            endpoint_mass_r=em_r)
        return Triple(scale, measure)


class ValidationError(ValueError):
    """Raised when a triple fails its standing assumptions."""

    def __init__(self, report):
        self.report = report
        msgs = "; ".join(f"{c.name}: {c.witness}" for c in report.failures())
        super().__init__(f"triple fails validation ({msgs})")


# ---------------------------------------------------------------------------
# Cell decomposition of the base interval
# ---------------------------------------------------------------------------


def _cells(scale: GeneralizedScale, extra_edges: tuple[float, ...] = ()) -> list[tuple[float, float]]:
    """Nodes (u == w) and open cells (u < w) covering [l, r].

    Cells never straddle a jump, a breakpoint of the continuous part, or a
    listed extra edge, so the scale is affine on every open cell.
    """
    pts = sorted(set(scale.critical_points()) | {e for e in extra_edges if scale.l < e < scale.r and is_finite(e)})
    out: list[tuple[float, float]] = []
    prev = scale.l
    for p in pts:
        if p > prev:
            out.append((prev, p))
        out.append((p, p))
        prev = p
    if scale.r > prev:
        out.append((prev, scale.r))
    return out


def _cell_values(scale: GeneralizedScale, u: float, w: float) -> tuple[float, float]:
    """One-sided scale values (s(u+), s(w-)) spanning the open cell (u, w)."""
    ya = scale.right_limit(u) if is_finite(u) else scale.value_at_left_end()
    yb = scale.left_limit(w) if is_finite(w) else scale.value_at_right_end()
    return ya, yb


def _cell_slope(scale: GeneralizedScale, u: float, w: float) -> float:
    if not is_finite(u):
        return scale.cont.left_slope
    if not is_finite(w):
        return scale.cont.right_slope
    return scale.cont.slope_between(u, w)


def _invert_cell(scale: GeneralizedScale, u: float, w: float, v: float) -> float:
    """Point of the open affine cell (u, w) where the scale equals v."""
    ya, yb = _cell_values(scale, u, w)
    sigma = _cell_slope(scale, u, w)
    if is_finite(u):
        return u + (v - ya) / sigma
    return w - (yb - v) / sigma


def _preimage_interval(scale: GeneralizedScale, v: float) -> tuple[float, float, bool, bool]:
    """Maximal interval {x : s(x) = v} with endpoint-inclusion flags.

    Unattained one-sided limit values return an empty interval (alpha > beta).
    """
    alpha = beta = None

    def extend(a, b):
        nonlocal alpha, beta
        alpha = a if alpha is None else min(alpha, a)
        beta = b if beta is None else max(beta, b)

    for u, w in _cells(scale):
        if u == w:
            if scale.value(u) == v:
                extend(u, u)
            continue
        ya, yb = _cell_values(scale, u, w)
        if ya == v and yb == v:
            extend(u, w)
        elif ya < v < yb:
            x = _invert_cell(scale, u, w, v)
            extend(x, x)
    if alpha is None:
        return (1.0, 0.0, False, False)
    inc_a = is_finite(alpha) and scale.value(alpha) == v
    inc_b = is_finite(beta) and scale.value(beta) == v
    return (alpha, beta, inc_a, inc_b)


# ---------------------------------------------------------------------------
# Image set
# ---------------------------------------------------------------------------


def image_set(scale: GeneralizedScale) -> NearlyClosedSet:
    """Closure of the range of the scale, as closed components.

    Each jump removes its open left/right gap intervals from [s(l), s(r)];
    the jump value itself stays (an isolated point when both gaps are
    positive), and each plateau contributes its single darned value.
    """
    l_hat = scale.value_at_left_end()
    r_hat = scale.value_at_right_end()
    comps: list[tuple[float, float]] = []
    cur = l_hat
    for j in scale.jumps:
        v = scale.value(j.x)
        if j.left > 0:
            comps.append((cur, scale.left_limit(j.x)))
            cur = v
        if j.right > 0:
            comps.append((cur, v))
            cur = scale.right_limit(j.x)
    comps.append((cur, r_hat))
    return NearlyClosedSet(tuple(comps), l_in=is_finite(l_hat), r_in=is_finite(r_hat))


def gaps(nearly_closed: NearlyClosedSet) -> list[tuple[float, float]]:
    """The open intervals forming the complement of the set inside its span."""
    return nearly_closed.gaps()


# ---------------------------------------------------------------------------
# Image regularization
# ---------------------------------------------------------------------------


def image_regularization(triple: Triple) -> RegularizedPackage:
    """Regularize a validated triple and transport it to image coordinates."""
    report = validate_triple(triple)
    if not report.passed:
        raise ValidationError(report)
    scale, m = triple.scale, triple.measure
    sup = compute_supports(scale)
    cls_l = classify_endpoint_triple("l", triple)
    cls_r = classify_endpoint_triple("r", triple)

    iset = image_set(scale)
    iset = NearlyClosedSet(iset.components, l_in=cls_l.reflecting, r_in=cls_r.reflecting)
    l_hat, r_hat = iset.l_hat, iset.r_hat

    # Atom values: darned plateaus, jump values, transported atoms, endpoints.
    candidates: set[float] = set()
    for a, b in sup.plateaus:
        candidates.add(scale.right_limit(a) if is_finite(a) else scale.value_at_left_end())
    for j in scale.jumps:
        candidates.add(scale.value(j.x))
    for x, _ in m.atoms:
        candidates.add(scale.value(x))
    if iset.l_in:
        candidates.add(l_hat)
    if iset.r_in:
        candidates.add(r_hat)
    atoms: list[tuple[float, float]] = []
    em_l = em_r = 0.0
    for v in sorted(candidates):
        alpha, beta, inc_a, inc_b = _preimage_interval(scale, v)
        if alpha > beta:
            continue
        mass = m.mass(alpha, beta, inc_a, inc_b)
        if mass <= 0:
            continue
        if v == l_hat:
            if iset.l_in:
                em_l = mass
            # mass collapsing onto an excluded endpoint lies outside the
            # state space: arrival there ends the lifetime instead
        elif v == r_hat:
            if iset.r_in:
                em_r = mass
        else:
            atoms.append((v, mass))

    # Density pieces and affine pullback branches from the increasing cells.
    extra = [x for x, _ in m.atoms]
    for a, b, _ in m.pieces:
        extra.extend([a, b])
    pieces: list[list[float]] = []
    branches: list[tuple[float, float, float, float, float]] = []
    for u, w in _cells(scale, tuple(extra)):
        if u == w:
            continue
        ya, yb = _cell_values(scale, u, w)
        if yb <= ya:
            continue
        sigma = _cell_slope(scale, u, w)
        anchor = (u, ya) if is_finite(u) else (w, yb)
        branches.append((ya, yb, anchor[0], anchor[1], 1.0 / sigma))
        rho = 0.0
        for pa, pb, prho in m.pieces:
            if pa <= u and w <= pb:
                rho = prho
                break
        if rho > 0:
            if pieces and pieces[-1][1] == ya and pieces[-1][2] == rho / sigma:
                pieces[-1][1] = yb
            else:
                pieces.append([ya, yb, rho / sigma])

    measure = MeasureSpec(
        l_hat, r_hat,
        pieces=tuple((a, b, rho) for a, b, rho in pieces),
        atoms=tuple(atoms),
        endpoint_mass_l=em_l,
        endpoint_mass_r=em_r,
    )

    # Pullback specials: darned values first (they own their fibers), then
    # jump values and unattained one-sided limits.
    specials: list[tuple[float, float, str]] = []
    seen: set[float] = set()
    for a, b in sup.plateaus:
        v = scale.right_limit(a) if is_finite(a) else scale.value_at_left_end()
        if v in seen:
            continue
        alpha, beta, _, _ = _preimage_interval(scale, v)
        rep = (alpha + beta) / 2 if is_finite(alpha) and is_finite(beta) else (beta if is_finite(beta) else alpha)
        specials.append((v, rep, "plateau"))
        seen.add(v)
    for j in scale.jumps:
        for v, kind in ((scale.value(j.x), "point"),
                        (scale.left_limit(j.x), "left"),
                        (scale.right_limit(j.x), "right")):
            if v in seen:
                continue
            alpha, beta, _, _ = _preimage_interval(scale, v)
            if kind != "point" and alpha <= beta:
                continue  # attained elsewhere; the affine branches cover it
            specials.append((v, j.x, kind))
            seen.add(v)
    pullback = PullbackMap(tuple(branches), tuple(specials))

    return RegularizedPackage(
        set=iset, measure=measure, endpoint_l=cls_l, endpoint_r=cls_r,
        pullback=pullback, source=triple)


def pullback_map(triple: Triple, package: RegularizedPackage) -> PullbackMap:
    """The map from image coordinates back to the base interval."""
    if package.source is not triple:
        raise ValueError("package was built from a different triple")
    return package.pullback


def increasing_cells(scale: GeneralizedScale):
    """Yield (u, w, ya, yb, slope) for the strictly increasing affine cells."""
    for u, w in _cells(scale):
        if u == w:
            continue
        ya, yb = _cell_values(scale, u, w)
        if yb <= ya:
            continue
        yield u, w, ya, yb, _cell_slope(scale, u, w)
