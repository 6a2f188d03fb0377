"""Discontinuous increasing scale functions and speed measures on an interval.

A scale is represented as a continuous piecewise-linear part plus a finite
list of jumps (left gap / right gap per jump point); a measure as finitely
many constant-density pieces plus atoms, with possibly infinite masses pinned
to the interval endpoints.  All downstream modules (regularization, energies,
boundary classification, simulation) consume these two types.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
import numpy as np

INF = math.inf


def is_finite(x: float) -> bool:
    return math.isfinite(x)


# ---------------------------------------------------------------------------
# Continuous piecewise-linear functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-linear function.

    Defined by breakpoints on [xs[0], xs[-1]] and extended outside with the
    constant tail slopes.  Plateaus are detected by exact equality of stored
    y-values, never by differencing.
    """

    xs: np.ndarray
    ys: np.ndarray
    left_slope: float = 0.0
    right_slope: float = 0.0

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        if xs.ndim != 1 or xs.shape != ys.shape or len(xs) < 1:
            raise ValueError("breakpoints must be two equal-length 1-d arrays")
        if not np.all(np.isfinite(xs)) or not np.all(np.isfinite(ys)):
            raise ValueError("breakpoints must be finite")
        if not (is_finite(self.left_slope) and is_finite(self.right_slope)):
            raise ValueError("tail slopes must be finite")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("breakpoint abscissae must be strictly increasing")

    def value(self, x: float) -> float:
        xs, ys = self.xs, self.ys
        if x <= xs[0]:
            if x == xs[0]:
                return float(ys[0])
            if self.left_slope == 0.0:
                return float(ys[0])
            if x == -INF:
                return -INF if self.left_slope > 0 else INF
            return float(ys[0] + self.left_slope * (x - xs[0]))
        if x >= xs[-1]:
            if x == xs[-1]:
                return float(ys[-1])
            if self.right_slope == 0.0:
                return float(ys[-1])
            if x == INF:
                return INF if self.right_slope > 0 else -INF
            return float(ys[-1] + self.right_slope * (x - xs[-1]))
        i = int(np.searchsorted(xs, x, side="right")) - 1
        if ys[i + 1] == ys[i]:
            return float(ys[i])
        t = (x - xs[i]) / (xs[i + 1] - xs[i])
        return float(ys[i] + t * (ys[i + 1] - ys[i]))

    def slope_between(self, a: float, b: float) -> float:
        """Slope on (a, b), which must not straddle a breakpoint."""
        if a >= b:
            raise ValueError("need a < b")
        if b <= self.xs[0]:
            return self.left_slope
        if a >= self.xs[-1]:
            return self.right_slope
        i = int(np.searchsorted(self.xs, a, side="right")) - 1
        i = max(i, 0)
        if b > self.xs[i + 1] + 0.0:
            raise ValueError("interval straddles a breakpoint")
        if self.ys[i + 1] == self.ys[i]:
            return 0.0
        return float((self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i]))


# ---------------------------------------------------------------------------
# Scale functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Jump:
    """A discontinuity of the scale: s(x)-s(x-) = left, s(x+)-s(x) = right."""

    x: float
    left: float = 0.0
    right: float = 0.0

    def __post_init__(self):
        if not is_finite(self.x):
            raise ValueError("jump position must be finite")
        if self.left < 0 or self.right < 0 or self.left + self.right <= 0:
            raise ValueError("jump gaps must be nonnegative with positive sum")
        if not (is_finite(self.left) and is_finite(self.right)):
            raise ValueError("jump gaps must be finite")


@dataclass(frozen=True)
class GeneralizedScale:
    """Increasing, possibly discontinuous, possibly non-strict scale on (l, r).

    `cont` is the continuous part; `jumps` carry the one-sided gaps.  The
    total scale is s(x) = cont(x) + sum of gaps of jumps below x (plus the
    left gap of a jump at x itself).  `base` is a continuity point anchoring
    the decomposition conventions for the jump parts.
    """

    l: float
    r: float
    cont: PiecewiseLinear
    jumps: tuple[Jump, ...] = ()
    base: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "jumps", tuple(self.jumps))
        if not self.l < self.r:
            raise ValueError("need l < r")
        xs = self.cont.xs
        if is_finite(self.l) and xs[0] != self.l:
            raise ValueError("breakpoints must start at l when l is finite")
        if is_finite(self.r) and xs[-1] != self.r:
            raise ValueError("breakpoints must end at r when r is finite")
        if np.any(np.diff(self.cont.ys) < 0) or self.cont.left_slope < 0 or self.cont.right_slope < 0:
            raise ValueError("scale must be non-decreasing")
        jx = [j.x for j in self.jumps]
        if any(not (self.l < x < self.r) for x in jx):
            raise ValueError("jumps must lie strictly inside (l, r)")
        if any(b <= a for a, b in zip(jx, jx[1:])):
            raise ValueError("jump positions must be strictly increasing")
        object.__setattr__(self, "_jx", np.array(jx, dtype=float))
        object.__setattr__(self, "_jl", np.array([j.left for j in self.jumps], dtype=float))
        object.__setattr__(self, "_jr", np.array([j.right for j in self.jumps], dtype=float))
        cum = np.concatenate([[0.0], np.cumsum(self._jl + self._jr)])
        object.__setattr__(self, "_jcum", cum)  # gap mass strictly below jump i
        if self.value_at_right_end() - self.value_at_left_end() <= 0:
            raise ValueError("scale must be non-constant")
        if self.base is None:
            object.__setattr__(self, "base", self._pick_base())
        elif not self._is_continuity_point(self.base):
            raise ValueError("base must be a continuity point inside (l, r)")

    # -- construction helpers ------------------------------------------------

    def _is_continuity_point(self, x: float) -> bool:
        return self.l < x < self.r and not np.any(self._jx == x)

    def _pick_base(self) -> float:
        if self._is_continuity_point(0.0):
            return 0.0
        lo = self.l if is_finite(self.l) else min(self.cont.xs[0], *(self._jx.tolist() or [0.0])) - 1.0
        hi = self.r if is_finite(self.r) else max(self.cont.xs[-1], *(self._jx.tolist() or [0.0])) + 1.0
        edges = sorted({lo, hi, *self._jx.tolist()})
        mids = [(a + b) / 2 for a, b in zip(edges, edges[1:]) if b > a]
        return min(mids, key=abs)

    # -- evaluation ----------------------------------------------------------

    def _gap_mass_below(self, x: float) -> float:
        """Total gap mass of jumps strictly below x plus the left gap at x."""
        i = int(np.searchsorted(self._jx, x, side="left"))
        out = self._jcum[i]
        if i < len(self._jx) and self._jx[i] == x:
            out += self._jl[i]
        return float(out)

    def value(self, x: float) -> float:
        if not (self.l <= x <= self.r):
            raise ValueError(f"x={x} outside [{self.l}, {self.r}]")
        return self.cont.value(x) + self._gap_mass_below(x)

    def right_limit(self, x: float) -> float:
        i = int(np.searchsorted(self._jx, x, side="left"))
        extra = self._jr[i] if i < len(self._jx) and self._jx[i] == x else 0.0
        return self.value(x) + float(extra)

    def left_limit(self, x: float) -> float:
        i = int(np.searchsorted(self._jx, x, side="left"))
        extra = self._jl[i] if i < len(self._jx) and self._jx[i] == x else 0.0
        return self.value(x) - float(extra)

    def value_at_left_end(self) -> float:
        """s(l) := lim x->l+ s(x); -inf when unapproachable."""
        return self.cont.value(self.l)

    def value_at_right_end(self) -> float:
        """s(r) := lim x->r- s(x); +inf when unapproachable."""
        v = self.cont.value(self.r)
        if v == INF:
            return INF
        return v + float(self._jcum[-1])

    # -- structural queries ----------------------------------------------------

    @property
    def jump_positions(self) -> np.ndarray:
        return self._jx

    def d_plus(self) -> list[float]:
        return [j.x for j in self.jumps if j.right > 0]

    def d_minus(self) -> list[float]:
        return [j.x for j in self.jumps if j.left > 0]

    def d_zero(self) -> list[float]:
        return [j.x for j in self.jumps if j.left > 0 and j.right > 0]

    def critical_points(self) -> list[float]:
        """Finite positions where the scale representation changes."""
        pts = set(self.cont.xs.tolist()) | set(self._jx.tolist())
        for e in (self.l, self.r):
            if is_finite(e):
                pts.add(e)
        return sorted(pts)


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeasureSpec:
    """Radon measure on (l, r): constant-density pieces plus atoms.

    Interior atoms are finite and positive; masses at the endpoints live in
    `endpoint_mass_l` / `endpoint_mass_r` and may be infinite.
    """

    l: float
    r: float
    pieces: tuple[tuple[float, float, float], ...] = ()
    atoms: tuple[tuple[float, float], ...] = ()
    endpoint_mass_l: float = 0.0
    endpoint_mass_r: float = 0.0

    def __post_init__(self):
        if not self.l < self.r:
            raise ValueError("need l < r")
        pieces = []
        for a, b, rho in self.pieces:
            if not a < b:
                raise ValueError(f"piece ({a},{b}) must have a < b")
            if not (self.l <= a and b <= self.r):
                raise ValueError(f"piece ({a},{b}) outside [{self.l},{self.r}]")
            if not (rho >= 0 and is_finite(rho)):
                raise ValueError("densities must be finite and nonnegative")
            pieces.append((float(a), float(b), float(rho)))
        pieces.sort()
        for (a1, b1, _), (a2, _, _) in zip(pieces, pieces[1:]):
            if a2 < b1:
                raise ValueError("piece interiors must be disjoint")
        atoms = []
        em_l, em_r = float(self.endpoint_mass_l), float(self.endpoint_mass_r)
        for x, m in self.atoms:
            if m <= 0:
                raise ValueError("atom masses must be positive")
            if x == self.l:
                em_l += m
            elif x == self.r:
                em_r += m
            elif self.l < x < self.r:
                if not is_finite(m):
                    raise ValueError("infinite atoms are permitted only at the endpoints")
                atoms.append((float(x), float(m)))
            else:
                raise ValueError(f"atom at {x} outside [{self.l},{self.r}]")
        atoms.sort()
        if any(y == x for (x, _), (y, _) in zip(atoms, atoms[1:])):
            raise ValueError("atom positions must be distinct")
        if not (em_l >= 0 and em_r >= 0):
            raise ValueError("endpoint masses must be nonnegative")
        object.__setattr__(self, "pieces", tuple(pieces))
        object.__setattr__(self, "atoms", tuple(atoms))
        object.__setattr__(self, "endpoint_mass_l", em_l)
        object.__setattr__(self, "endpoint_mass_r", em_r)

    # -- mass queries ----------------------------------------------------------

    def mass(self, a: float, b: float, include_a: bool = False, include_b: bool = False) -> float:
        """m of the interval from a to b with the given endpoint inclusions."""
        if a > b or (a == b and not (include_a and include_b)):
            return 0.0
        total = 0.0
        if a < b:
            for pa, pb, rho in self.pieces:
                if rho == 0.0:
                    continue
                lo, hi = max(a, pa), min(b, pb)
                if hi > lo:
                    total += rho * (hi - lo)
        for x, m in self.atoms:
            if (a < x < b) or (x == a and include_a) or (x == b and include_b and x != a):
                total += m
        if include_a and a == self.l:
            total += self.endpoint_mass_l
        if include_b and b == self.r:
            total += self.endpoint_mass_r
        return total

    def total_mass(self, include_endpoints: bool = True) -> float:
        return self.mass(self.l, self.r, include_endpoints, include_endpoints)

    def boundary_mass_finite(self, side: str) -> bool:
        """Whether m((l, l+eps)) resp. m((r-eps, r)) is finite for some eps."""
        e = self.l if side == "l" else self.r
        if is_finite(e):
            return True  # finite piece/atom lists are Radon near a finite endpoint
        for a, b, rho in self.pieces:
            if rho > 0 and ((side == "l" and a == -INF) or (side == "r" and b == INF)):
                return False
        return True

    def endpoint_mass(self, side: str) -> float:
        return self.endpoint_mass_l if side == "l" else self.endpoint_mass_r

    def null_intervals(self) -> list[tuple[float, float]]:
        """Maximal open subintervals of (l, r) carrying no mass."""
        covered: list[tuple[float, float]] = []
        for a, b, rho in self.pieces:
            if rho > 0:
                covered.append((a, b))
        for x, _ in self.atoms:
            covered.append((x, x))
        covered.sort()
        out = []
        cur = self.l
        for a, b in covered:
            if a > cur:
                out.append((cur, a))
            cur = max(cur, b)
        if cur < self.r:
            out.append((cur, self.r))
        return out

    def support_points(self) -> list[float]:
        pts = [x for x, _ in self.atoms]
        for a, b, rho in self.pieces:
            if rho > 0:
                pts.extend([a, b])
        return sorted(set(pts))


# ---------------------------------------------------------------------------
# Supports of the scale
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScaleSupports:
    """Plateau structure of a scale: U, its complement E_s, and the jump sets."""

    plateaus: tuple[tuple[float, float], ...]  # maximal open intervals where s is constant
    includes_l: bool                            # l belongs to U (s constant on [l, l+eps))
    includes_r: bool
    d_plus: tuple[float, ...]
    d_minus: tuple[float, ...]
    d_zero: tuple[float, ...]
    isolated: tuple[tuple[float, float], ...]   # plateaus with both ends in D or {l, r}

    def support_intervals(self, l: float, r: float) -> list[tuple[float, float]]:
        """E_s = I minus U, as closed intervals (singletons allowed)."""
        out = []
        cur = l
        for a, b in self.plateaus:
            if a == l:  # plateau touches l, so l itself belongs to U
                cur = b
                continue
            out.append((cur, a))
            cur = b
        if not (self.plateaus and self.plateaus[-1][1] == r):
            out.append((cur, r))
        return out


def compute_supports(scale: GeneralizedScale) -> ScaleSupports:
    """Maximal plateaus of the scale plus the one-sided jump sets."""
    xs, ys = scale.cont.xs, scale.cont.ys
    flat: list[tuple[float, float]] = []
    if scale.cont.left_slope == 0.0 and xs[0] > scale.l:
        flat.append((scale.l, float(xs[0])))
    for i in range(len(xs) - 1):
        if ys[i + 1] == ys[i]:
            flat.append((float(xs[i]), float(xs[i + 1])))
    if scale.cont.right_slope == 0.0 and xs[-1] < scale.r:
        flat.append((float(xs[-1]), scale.r))
    # merge touching flats, then split at interior jump points
    merged: list[list[float]] = []
    for a, b in flat:
        if merged and merged[-1][1] == a:
            merged[-1][1] = b
        else:
            merged.append([a, b])
    plateaus: list[tuple[float, float]] = []
    for a, b in merged:
        cuts = [x for x in scale.jump_positions if a < x < b]
        for lo, hi in zip([a] + cuts, cuts + [b]):
            if hi > lo:
                plateaus.append((lo, hi))
    dp, dm, dz = scale.d_plus(), scale.d_minus(), scale.d_zero()
    dset = set(dp) | set(dm) | {scale.l, scale.r}
    isolated = tuple((a, b) for a, b in plateaus if a in dset and b in dset)
    return ScaleSupports(
        plateaus=tuple(plateaus),
        includes_l=any(a == scale.l for a, _ in plateaus),
        includes_r=any(b == scale.r for _, b in plateaus),
        d_plus=tuple(dp),
        d_minus=tuple(dm),
        d_zero=tuple(dz),
        isolated=isolated,
    )


# ---------------------------------------------------------------------------
# Decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScaleDecomposition:
    """s = s_c + s_d_plus + s_d_minus, with the jump parts anchored at `base`.

    s_d_plus collects right gaps and is left continuous; s_d_minus collects
    left gaps and is right continuous; s_c is the continuous remainder.
    """

    scale: GeneralizedScale
    mu_c: MeasureSpec
    mu_d_plus: MeasureSpec
    mu_d_minus: MeasureSpec

    def s_d_plus(self, x: float) -> float:
        s = self.scale
        if x >= s.base:
            sel = (s._jx > s.base) & (s._jx < x)
            return float(np.sum(s._jr[sel]))
        sel = (s._jx >= x) & (s._jx < s.base)
        return -float(np.sum(s._jr[sel]))

    def s_d_minus(self, x: float) -> float:
        s = self.scale
        if x >= s.base:
            sel = (s._jx > s.base) & (s._jx <= x)
            return float(np.sum(s._jl[sel]))
        sel = (s._jx > x) & (s._jx < s.base)
        return -float(np.sum(s._jl[sel]))

    def s_c(self, x: float) -> float:
        return self.scale.value(x) - self.s_d_plus(x) - self.s_d_minus(x)


def decompose_scale(scale: GeneralizedScale) -> ScaleDecomposition:
    """Split a scale into continuous part and one-sided jump measures."""
    jl, jr = [], []
    for j in scale.jumps:
        if j.right > 0:
            jr.append((j.x, j.right))
        if j.left > 0:
            jl.append((j.x, j.left))
    mu_d_plus = MeasureSpec(scale.l, scale.r, atoms=tuple(jr))
    mu_d_minus = MeasureSpec(scale.l, scale.r, atoms=tuple(jl))
    xs, ys = scale.cont.xs, scale.cont.ys
    pieces = []
    if scale.cont.left_slope > 0 and xs[0] > scale.l:
        pieces.append((scale.l, float(xs[0]), scale.cont.left_slope))
    for i in range(len(xs) - 1):
        if ys[i + 1] > ys[i]:
            pieces.append((float(xs[i]), float(xs[i + 1]), float((ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))))
    if scale.cont.right_slope > 0 and xs[-1] < scale.r:
        pieces.append((float(xs[-1]), scale.r, scale.cont.right_slope))
    mu_c = MeasureSpec(scale.l, scale.r, pieces=tuple(pieces))
    return ScaleDecomposition(scale, mu_c, mu_d_plus, mu_d_minus)


# ---------------------------------------------------------------------------
# Triples and validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Triple:
    """The basic datum: an interval, a scale on it and a measure on it."""

    scale: GeneralizedScale
    measure: MeasureSpec

    def __post_init__(self):
        if (self.scale.l, self.scale.r) != (self.measure.l, self.measure.r):
            raise ValueError("scale and measure must share the interval")

    @property
    def l(self) -> float:
        return self.scale.l

    @property
    def r(self) -> float:
        return self.scale.r


@dataclass(frozen=True)
class Clause:
    name: str
    passed: bool
    witness: str = ""


@dataclass(frozen=True)
class ValidationReport:
    clauses: tuple[Clause, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    def failures(self) -> list[Clause]:
        return [c for c in self.clauses if not c.passed]


@dataclass(frozen=True)
class EndpointClass:
    """Classification of one endpoint from the pair (scale, measure)."""

    side: str
    approachable: bool
    regular: bool
    boundary: str | None  # 'reflecting' | 'absorbing' | None

    @property
    def reflecting(self) -> bool:
        return self.boundary == "reflecting"


def classify_endpoint_triple(side: str, triple: Triple) -> EndpointClass:
    """Approachable / regular / reflecting-or-absorbing for one endpoint.

    Monotone by construction: reflecting implies regular implies approachable.
    """
    s, m = triple.scale, triple.measure
    sval = s.value_at_left_end() if side == "l" else s.value_at_right_end()
    approachable = is_finite(sval)
    regular = approachable and m.boundary_mass_finite(side)
    boundary = None
    if regular:
        boundary = "reflecting" if is_finite(m.endpoint_mass(side)) else "absorbing"
    return EndpointClass(side, approachable, regular, boundary)


def validate_triple(triple: Triple) -> ValidationReport:
    """Check the standing assumptions tying the measure to the scale.

    The no-interior-killing clause requires a reflecting endpoint wherever an
    isolated plateau touches it; the measure-support clauses force the
    regularized measure to have full support.
    """
    s, m = triple.scale, triple.measure
    sup = compute_supports(s)
    clauses: list[Clause] = []

    bad = []
    for a, b in m.null_intervals():
        if not any(pa <= a and b <= pb for pa, pb in sup.plateaus):
            bad.append((a, b))
    clauses.append(Clause(
        "measure_support_covers_scale_support", not bad,
        "" if not bad else f"measure vanishes on {bad[0]} where the scale increases"))

    bad_pts = [x for x in sup.d_zero if m.mass(x, x, True, True) <= 0]
    clauses.append(Clause(
        "two_sided_jump_points_carry_mass", not bad_pts,
        "" if not bad_pts else f"no atom at two-sided jump point {bad_pts[0]}"))

    dp = set(sup.d_plus)
    dm = set(sup.d_minus)
    bad_iv = []
    for a, b in sup.isolated:
        inc_a = a not in dp
        inc_b = b not in dm
        if m.mass(a, b, inc_a, inc_b) <= 0:
            bad_iv.append((a, b))
    clauses.append(Clause(
        "isolated_plateaus_carry_mass", not bad_iv,
        "" if not bad_iv else f"isolated plateau {bad_iv[0]} carries no mass"))

    bad_end = []
    for a, b in sup.isolated:
        if a == s.l and not classify_endpoint_triple("l", triple).reflecting:
            bad_end.append(("l", (a, b)))
        if b == s.r and not classify_endpoint_triple("r", triple).reflecting:
            bad_end.append(("r", (a, b)))
    clauses.append(Clause(
        "no_killing_inside", not bad_end,
        "" if not bad_end else f"endpoint {bad_end[0][0]} bounds isolated plateau {bad_end[0][1]} but is not reflecting"))

    return ValidationReport(tuple(clauses))


# ---------------------------------------------------------------------------
# JSON schema
# ---------------------------------------------------------------------------


def _num_from_json(v) -> float:
    if v == "inf":
        return INF
    if v == "-inf":
        return -INF
    return float(v)


def _num_to_json(x: float):
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    return x


def triple_from_json(doc: dict) -> Triple:
    """Parse the interchange schema shared by the CLI and the service."""
    try:
        l = _num_from_json(doc["interval"]["l"])
        r = _num_from_json(doc["interval"]["r"])
        sc = doc["scale"]
        bps = sc["breakpoints"]
        jumps = tuple(Jump(float(x), float(lg), float(rg)) for x, lg, rg in sc.get("jumps", []))
        tails = sc.get("tail_slopes", [0.0, 0.0])
        cont = PiecewiseLinear(
            np.array([b[0] for b in bps], dtype=float),
            np.array([b[1] for b in bps], dtype=float),
            left_slope=float(tails[0]), right_slope=float(tails[1]))
        scale = GeneralizedScale(l, r, cont, jumps)
        ms = doc["measure"]
        pieces = tuple((_num_from_json(a), _num_from_json(b), float(rho)) for a, b, rho in ms.get("pieces", []))
        atoms = tuple((_num_from_json(x), _num_from_json(mass)) for x, mass in ms.get("atoms", []))
        measure = MeasureSpec(l, r, pieces=pieces, atoms=atoms)
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed triple document: {exc}") from exc
    return Triple(scale, measure)


def triple_to_json(triple: Triple) -> dict:
    s, m = triple.scale, triple.measure
    atoms = [[x, _num_to_json(mass)] for x, mass in m.atoms]
    if m.endpoint_mass_l > 0:
        atoms.insert(0, [_num_to_json(m.l), _num_to_json(m.endpoint_mass_l)])
    if m.endpoint_mass_r > 0:
        atoms.append([_num_to_json(m.r), _num_to_json(m.endpoint_mass_r)])
    doc = {
        "interval": {"l": _num_to_json(s.l), "r": _num_to_json(s.r)},
        "scale": {
            "breakpoints": [[float(x), float(y)] for x, y in zip(s.cont.xs, s.cont.ys)],
            "jumps": [[j.x, j.left, j.right] for j in s.jumps],
        },
        "measure": {
            "pieces": [[_num_to_json(a), _num_to_json(b), rho] for a, b, rho in m.pieces],
            "atoms": atoms,
        },
    }
    if s.cont.left_slope != 0.0 or s.cont.right_slope != 0.0:
        doc["scale"]["tail_slopes"] = [s.cont.left_slope, s.cont.right_slope]
    return doc
