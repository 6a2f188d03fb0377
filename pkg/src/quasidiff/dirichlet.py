"""Energy forms on both sides of the regularization, and the function lift.

A function on the triple side is stored through its decomposition: a constant,
a piecewise-constant density against the continuous scale measure, and one
coefficient per one-sided jump gap.  Its lift is piecewise linear in image
coordinates with affine interpolation across the gaps; both energies are
finite closed-form sums, and they agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .regularize import RegularizedPackage, increasing_cells
from .scale import INF, GeneralizedScale, MeasureSpec, Triple, decompose_scale, is_finite


# ---------------------------------------------------------------------------
# Triple-side functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TripleFunction:
    """Function on the base interval via its scale decomposition.

    `g_c` is a piecewise-constant density against the continuous scale
    measure (zero off the listed cells); `g_plus` / `g_minus` assign one
    coefficient per right/left jump gap.  `c0` is the value at the scale's
    base point.  Functions of this form are automatically constant on
    plateaus and have one-sided limits at the jumps.
    """

    c0: float = 0.0
    g_c: tuple[tuple[float, float, float], ...] = ()
    g_plus: tuple[tuple[float, float], ...] = ()
    g_minus: tuple[tuple[float, float], ...] = ()

    def g_c_at(self, x: float) -> float:
        for a, b, v in self.g_c:
            if a <= x < b:
                return v
        return 0.0

    def _coef(self, table, x: float) -> float:
        for xx, v in table:
            if xx == x:
                return v
        return 0.0


def _integral_g_c(tf: TripleFunction, mu_c: MeasureSpec, p: float, q: float) -> float:
    """Integral of g_c over (p, q) against the continuous scale measure."""
    total = 0.0
    for a, b, v in tf.g_c:
        if v == 0.0:
            continue
        lo, hi = max(a, p), min(b, q)
        if hi > lo:
            total += v * mu_c.mass(lo, hi)
    return total


def triple_value(tf: TripleFunction, scale: GeneralizedScale, x: float, side: str = "") -> float:
    """Evaluate the function (or its one-sided limit when side is '+'/'-')."""
    decomp = decompose_scale(scale)
    base = scale.base
    if x >= base:
        f_c = tf.c0 + _integral_g_c(tf, decomp.mu_c, base, x)
    else:
        f_c = tf.c0 - _integral_g_c(tf, decomp.mu_c, x, base)
    f_p = f_m = 0.0
    for j in scale.jumps:
        cp = tf._coef(tf.g_plus, j.x) * j.right
        cm = tf._coef(tf.g_minus, j.x) * j.left
        if x >= base:
            if base < j.x < x:
                f_p += cp
            if base < j.x <= x:
                f_m += cm
        else:
            if x <= j.x < base:
                f_p -= cp
            if x < j.x < base:
                f_m -= cm
        if j.x == x:
            if side == "+":
                f_p += cp
            elif side == "-":
                f_m -= cm
    return f_c + f_p + f_m


# ---------------------------------------------------------------------------
# Image-side functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LiftedFunction:
    """Piecewise-linear host on the image coordinate line.

    Restricting to the image set gives the lifted function; across the gaps
    the host interpolates affinely by construction.  Outside the breakpoint
    span it continues with the constant tail slopes.
    """

    xs: np.ndarray
    vals: np.ndarray
    left_slope: float = 0.0
    right_slope: float = 0.0

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        vals = np.asarray(self.vals, dtype=float)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "vals", vals)
        if xs.ndim != 1 or xs.shape != vals.shape or len(xs) < 1:
            raise ValueError("need matching 1-d breakpoint arrays")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("breakpoints must be strictly increasing")

    def value(self, y: float) -> float:
        xs, vals = self.xs, self.vals
        if y <= xs[0]:
            return float(vals[0] + self.left_slope * (y - xs[0])) if y > -INF else (
                float(vals[0]) if self.left_slope == 0.0 else -np.sign(self.left_slope) * INF)
        if y >= xs[-1]:
            return float(vals[-1] + self.right_slope * (y - xs[-1])) if y < INF else (
                float(vals[-1]) if self.right_slope == 0.0 else np.sign(self.right_slope) * INF)
        i = int(np.searchsorted(xs, y, side="right")) - 1
        if vals[i + 1] == vals[i]:
            return float(vals[i])
        t = (y - xs[i]) / (xs[i + 1] - xs[i])
        return float(vals[i] + t * (vals[i + 1] - vals[i]))

    def segments(self):
        """(lo, hi, slope) for every bounded linear segment."""
        out = []
        for i in range(len(self.xs) - 1):
            dx = self.xs[i + 1] - self.xs[i]
            out.append((float(self.xs[i]), float(self.xs[i + 1]), float((self.vals[i + 1] - self.vals[i]) / dx)))
        return out


def unit_contraction(lf: LiftedFunction) -> LiftedFunction:
    """Clip to [0, 1] breakpoint-wise, flattening the tails.

    Every segment slope of the result is dominated by the original's, so the
    image energy never increases (the exact pointwise clip would only have
    smaller energy still).
    """
    vals = np.minimum(np.maximum(lf.vals, 0.0), 1.0)
    return LiftedFunction(lf.xs.copy(), vals, 0.0, 0.0)


# ---------------------------------------------------------------------------
# Lift
# ---------------------------------------------------------------------------


def lift(tf: TripleFunction, package: RegularizedPackage) -> LiftedFunction:
    """Transport a triple-side function to image coordinates.

    Values follow the scale: attained points map through the function, jump
    points carry their one-sided limits to the split image points, plateaus
    map to the common plateau value, and gaps are interpolated affinely by
    the piecewise-linear host.
    """
    scale = package.source.scale
    ys: set[float] = set()
    for a, b in package.set.components:
        for e in (a, b):
            if is_finite(e):
                ys.add(e)
    for j in scale.jumps:
        ys.add(scale.value(j.x))
        ys.add(scale.left_limit(j.x))
        ys.add(scale.right_limit(j.x))
    for a, b, _ in tf.g_c:
        for e in (a, b):
            if is_finite(e) and scale.l <= e <= scale.r:
                ys.add(scale.value(e))
    if not ys:
        ys.add(scale.value(scale.base))
    xs = np.array(sorted(ys))
    vals = np.empty_like(xs)
    for i, y in enumerate(xs):
        x, kind = package.pullback.classify(float(y))
        side = {"left": "-", "right": "+"}.get(kind, "")
        vals[i] = triple_value(tf, scale, x, side)
    left_slope = right_slope = 0.0
    if not is_finite(package.l_hat):
        left_slope = tf.g_c_at(package.pullback(float(xs[0])) - 1.0)
    if not is_finite(package.r_hat):
        right_slope = tf.g_c_at(package.pullback(float(xs[-1])) + 1.0)
    return LiftedFunction(xs, vals, left_slope, right_slope)


def triple_function_from_host(lf: LiftedFunction, package: RegularizedPackage) -> TripleFunction:
    """Pull an image-side host back to a triple-side representation.

    The continuous density is the host's slope transported along the strictly
    increasing cells; each jump's coefficient is the host increment across
    the corresponding split divided by the gap.
    """
    scale = package.source.scale

    def x_of(y, u, w, ya, yb, sigma):
        if is_finite(u):
            return u + (y - ya) / sigma
        if y == -INF:
            return -INF
        return w - (yb - y) / sigma

    g_cells = []
    for u, w, ya, yb, sigma in increasing_cells(scale):
        cuts = [ya] + [float(t) for t in lf.xs if ya < t < yb] + [yb]
        for y0, y1 in zip(cuts, cuts[1:]):
            if not is_finite(y0):
                slope = lf.left_slope
            elif not is_finite(y1):
                slope = lf.right_slope
            else:
                slope = (lf.value(y1) - lf.value(y0)) / (y1 - y0)
            if slope != 0.0:
                g_cells.append((x_of(y0, u, w, ya, yb, sigma),
                                x_of(y1, u, w, ya, yb, sigma), slope))
    g_plus, g_minus = [], []
    for j in scale.jumps:
        v = scale.value(j.x)
        if j.right > 0:
            g_plus.append((j.x, (lf.value(scale.right_limit(j.x)) - lf.value(v)) / j.right))
        if j.left > 0:
            g_minus.append((j.x, (lf.value(v) - lf.value(scale.left_limit(j.x))) / j.left))
    c0 = lf.value(scale.value(scale.base))
    return TripleFunction(c0=c0, g_c=tuple(g_cells),
                          g_plus=tuple(g_plus), g_minus=tuple(g_minus))


# ---------------------------------------------------------------------------
# Energies
# ---------------------------------------------------------------------------


def energy_triple(tf: TripleFunction, scale: GeneralizedScale) -> float:
    """Dirichlet energy from the decomposition: continuous and jump parts."""
    decomp = decompose_scale(scale)
    local = 0.0
    for a, b, v in tf.g_c:
        if v != 0.0:
            local += v * v * decomp.mu_c.mass(a, b)
    jump_part = 0.0
    for j in scale.jumps:
        if j.right > 0:
            jump_part += tf._coef(tf.g_plus, j.x) ** 2 * j.right
        if j.left > 0:
            jump_part += tf._coef(tf.g_minus, j.x) ** 2 * j.left
    return 0.5 * (local + jump_part)


def energy_image(lf: LiftedFunction, package: RegularizedPackage) -> float:
    """Dirichlet energy in image coordinates: local part plus gap terms."""
    st = package.set
    local = 0.0
    for lo, hi, slope in lf.segments():
        if slope != 0.0:
            local += slope * slope * st.length_within(lo, hi)
    if lf.left_slope != 0.0:
        ln = st.length_within(-INF, float(lf.xs[0]))
        local += INF if ln == INF else lf.left_slope ** 2 * ln
    if lf.right_slope != 0.0:
        ln = st.length_within(float(lf.xs[-1]), INF)
        local += INF if ln == INF else lf.right_slope ** 2 * ln
    gap_part = 0.0
    for a, b in package.gaps:
        d = lf.value(b) - lf.value(a)
        gap_part += d * d / (b - a)
    return 0.5 * (local + gap_part)


def l2_norm_sq(lf: LiftedFunction, measure: MeasureSpec) -> float:
    """Integral of the squared host against the image measure."""
    total = 0.0
    for a, b, rho in measure.pieces:
        if rho == 0.0:
            continue
        cuts = [a] + [float(x) for x in lf.xs if a < x < b] + [b]
        for lo, hi in zip(cuts, cuts[1:]):
            if not (is_finite(lo) and is_finite(hi)):
                v_out = lf.value(lo) if not is_finite(lo) else lf.value(hi)
                sl = lf.left_slope if not is_finite(lo) else lf.right_slope
                if v_out != 0.0 or sl != 0.0:
                    return INF
                continue
            v0, v1 = lf.value(lo), lf.value(hi)
            total += rho * (hi - lo) * (v0 * v0 + v0 * v1 + v1 * v1) / 3.0
    for x, m in measure.atoms:
        v = lf.value(x)
        total += m * v * v
    if measure.endpoint_mass_l > 0:
        v = lf.value(measure.l)
        total += measure.endpoint_mass_l * v * v if v != 0.0 else 0.0
    if measure.endpoint_mass_r > 0:
        v = lf.value(measure.r)
        total += measure.endpoint_mass_r * v * v if v != 0.0 else 0.0
    return total


def membership_F(lf: LiftedFunction, package: RegularizedPackage, tol: float = 1e-12) -> bool:
    """Whether the lifted function belongs to the image form domain.

    Requires finite energy, square integrability against the image measure,
    and zero boundary value at every finite endpoint excluded from the set.
    """
    if not np.isfinite(energy_image(lf, package)):
        return False
    if not np.isfinite(l2_norm_sq(lf, package.measure)):
        return False
    for v_end, included in ((package.l_hat, package.set.l_in), (package.r_hat, package.set.r_in)):
        if is_finite(v_end) and not included:
            if abs(lf.value(v_end)) > tol:
                return False
    return True


def transience(package: RegularizedPackage) -> str:
    """'transient' iff some finite endpoint is excluded from the state space."""
    l_out = is_finite(package.l_hat) and not package.set.l_in
    r_out = is_finite(package.r_hat) and not package.set.r_in
    return "transient" if (l_out or r_out) else "recurrent"


# ---------------------------------------------------------------------------
# Arclength coordinates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ArclengthMaps:
    """Signed arclength of the set from 0 and its right-continuous inverse."""

    package: RegularizedPackage

    def forward(self, x: float) -> float:
        st = self.package.set
        if x >= 0:
            return st.length_within(0.0, x)
        return -st.length_within(x, 0.0)

    def inverse(self, t: float) -> float:
        st = self.package.set
        comps = st.components
        arcs = [(self.forward(a), self.forward(b), a) for a, b in comps]
        if t < arcs[0][0]:
            return st.l_hat
        for fa, fb, a in arcs:
            if fa <= t < fb:
                return a + (t - fa)
            if t < fa:
                return a
        return INF


def arclength_maps(package: RegularizedPackage) -> ArclengthMaps:
    return ArclengthMaps(package)
