"""Exact hitting and exit quantities for skip-free chains on atomic measures.

The chain is the nearest-neighbour walk attached to an atomic speed measure
on the natural scale: conductance 1/(2 spacing) between consecutive states,
exponential holding with mean mass/total-conductance.  Mean exit times solve
a tridiagonal first-step system; the speed measure is recovered back from
the one-sided slopes of the piecewise-linear exit-time profile.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded


class ConcavityError(ValueError):
    """Exit-time profile is not concave; the input is inconsistent."""


@dataclass(frozen=True)
class SkipFreeChain:
    """Continuous-time nearest-neighbour chain on an ordered state list.

    `absorbing` marks killing-on-arrival states (used for window solves and
    accessible excluded endpoints); masses at absorbing states are ignored.
    Rates are derived from the stored conductances, so the generator is
    exactly mass-symmetric by representation.
    """

    states: np.ndarray
    masses: np.ndarray
    conductances: np.ndarray
    absorbing: np.ndarray

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        masses = np.asarray(self.masses, dtype=float)
        cond = np.asarray(self.conductances, dtype=float)
        absorbing = np.asarray(self.absorbing, dtype=bool)
        n = len(states)
        if n < 1 or masses.shape != (n,) or absorbing.shape != (n,) or cond.shape != (max(n - 1, 0),):
            raise ValueError("inconsistent chain arrays")
        if np.any(np.diff(states) <= 0):
            raise ValueError("states must be strictly increasing")
        if np.any(cond <= 0):
            raise ValueError("conductances must be positive")
        if np.any(~absorbing & ~(masses > 0)):
            raise ValueError("non-absorbing states need positive finite mass")
        for arr, name in ((states, "states"), (masses, "masses"), (cond, "conductances"),
                          (absorbing, "absorbing")):
            object.__setattr__(self, name, arr)
        cl = np.concatenate([[0.0], cond])
        cr = np.concatenate([cond, [0.0]])
        object.__setattr__(self, "cond_left", cl)
        object.__setattr__(self, "cond_right", cr)
        with np.errstate(divide="ignore", invalid="ignore"):
            total = cl + cr
            rate = np.where(absorbing, 0.0, total / masses)
            p_right = np.where(total > 0, cr / total, 0.0)
        object.__setattr__(self, "rate_total", rate)
        object.__setattr__(self, "p_right", p_right)

    @property
    def n(self) -> int:
        return len(self.states)

    def index_of(self, x: float, tol: float = 1e-9) -> int:
        i = int(np.argmin(np.abs(self.states - x)))
        span = self.states[-1] - self.states[0]
        if abs(self.states[i] - x) > tol * max(1.0, span):
            raise ValueError(f"{x} is not a state of the chain")
        return i

    def nearest_index(self, x: float) -> int:
        return int(np.argmin(np.abs(self.states - x)))

    def holding_mean(self, i: int) -> float:
        return float(self.masses[i] / (self.cond_left[i] + self.cond_right[i]))


def natural_conductances(states: np.ndarray) -> np.ndarray:
    """Conductance 1/(2 spacing) between consecutive states."""
    return 1.0 / (2.0 * np.diff(np.asarray(states, dtype=float)))


def window_chain(chain: SkipFreeChain, a: float, b: float) -> SkipFreeChain:
    """Sub-chain on [a, b] with absorbing states at a and b.

    a and b must lie on states or strictly between them (new absorbing states
    are inserted with the natural conductance to their inner neighbour).
    """
    if not a < b:
        raise ValueError("need a < b")
    states = chain.states
    inner = np.flatnonzero((states > a) & (states < b))
    if inner.size == 0:
        raise ValueError("window contains no interior state")
    i0, i1 = int(inner[0]), int(inner[-1])
    new_states = [a] + states[i0:i1 + 1].tolist() + [b]
    new_masses = [1.0] + chain.masses[i0:i1 + 1].tolist() + [1.0]
    cond_inner = chain.conductances[i0:i1].tolist()
    left_edge = chain.conductances[i0 - 1] if i0 > 0 and states[i0 - 1] == a else 1.0 / (2.0 * (states[i0] - a))
    right_edge = chain.conductances[i1] if i1 + 1 < chain.n and states[i1 + 1] == b else 1.0 / (2.0 * (b - states[i1]))
    conds = [float(left_edge)] + cond_inner + [float(right_edge)]
    absorbing = [True] + [False] * (i1 - i0 + 1) + [True]
    return SkipFreeChain(np.array(new_states), np.array(new_masses),
                         np.array(conds), np.array(absorbing))


# ---------------------------------------------------------------------------
# Hitting probabilities
# ---------------------------------------------------------------------------


def hitting_probability(x: float, a: float, b: float, scale=None) -> float:
    """P(hit b before a) from x via the scale; identity scale by default."""
    if a == b:
        raise ValueError("degenerate window a == b")
    s = (lambda t: t) if scale is None else scale
    sa, sx, sb = s(a), s(x), s(b)
    if not sa <= sx <= sb:
        raise ValueError("need a <= x <= b in scale order")
    return (sx - sa) / (sb - sa)


def hitting_probability_chain(chain: SkipFreeChain, x: float, a: float, b: float) -> float:
    """Gambler's-ruin solve on the embedded jump chain of the window.

    Independent of the scale formula: the linear system uses only the jump
    probabilities derived from the conductances.
    """
    w = window_chain(chain, a, b)
    m = w.n - 2
    i = w.index_of(x)
    if i == 0:
        return 0.0
    if i == w.n - 1:
        return 1.0
    cl = w.cond_left[1:-1]
    cr = w.cond_right[1:-1]
    tot = cl + cr
    pl, pr = cl / tot, cr / tot
    ab = np.zeros((3, m))
    ab[0, 1:] = pr[:-1]       # superdiagonal
    ab[1, :] = -1.0
    ab[2, :-1] = pl[1:]       # subdiagonal
    rhs = np.zeros(m)
    rhs[-1] = -pr[-1]         # h(b) = 1
    h = solve_banded((1, 1), ab, rhs)
    return float(h[i - 1])


# ---------------------------------------------------------------------------
# Exit times
# ---------------------------------------------------------------------------


def exit_times_absorbing(chain: SkipFreeChain) -> np.ndarray:
    """Mean time to absorption from every state of a chain with absorbing ends.

    Solves the first-step tridiagonal system: for interior k,
    c_{k-1,k} (h_{k-1} - h_k) + c_{k,k+1} (h_{k+1} - h_k) = -mass_k.
    """
    n = chain.n
    if not (chain.absorbing[0] and chain.absorbing[-1]) or np.any(chain.absorbing[1:-1]):
        raise ValueError("expected absorbing states exactly at both ends")
    m = n - 2
    if m <= 0:
        return np.zeros(n)
    cl = chain.cond_left[1:-1]
    cr = chain.cond_right[1:-1]
    ab = np.zeros((3, m))
    ab[0, 1:] = cr[:-1]
    ab[1, :] = -(cl + cr)
    ab[2, :-1] = cl[1:]
    rhs = -chain.masses[1:-1]
    h = solve_banded((1, 1), ab, rhs)
    out = np.zeros(n)
    out[1:-1] = h
    return out


def exit_time_oracle(chain: SkipFreeChain, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """(states, mean exit times) over the window [a, b] with absorbing ends."""
    w = window_chain(chain, a, b)
    return w.states, exit_times_absorbing(w)


def exit_time_one_sided(chain: SkipFreeChain, target: float, side: str = "right") -> tuple[np.ndarray, np.ndarray]:
    """Mean hitting time of a single target with the far end reflecting.

    The case split over closed endpoints collapses to the boundary row: the
    reflecting end gets a Neumann-type first-step row instead of a Dirichlet
    zero.
    """
    if side not in ("right", "left"):
        raise ValueError("side must be 'left' or 'right'")
    j = chain.index_of(target)
    if side == "right":
        states = chain.states[: j + 1]
        masses = chain.masses[: j + 1]
        cond = chain.conductances[:j]
    else:
        states = chain.states[j:]
        masses = chain.masses[j:]
        cond = chain.conductances[j:]
    n = len(states)
    if n < 2:
        return states, np.zeros(n)
    m = n - 1
    ab = np.zeros((3, m))
    rhs = np.empty(m)
    if side == "right":
        cl = np.concatenate([[0.0], cond])[:m]
        cr = cond[:m]
        ab[1, :] = -(cl + cr)
        ab[0, 1:] = cr[:-1]
        ab[2, :-1] = cl[1:]
        rhs[:] = -masses[:m]
        h = solve_banded((1, 1), ab, rhs)
        return states, np.concatenate([h, [0.0]])
    cl = cond[:m]
    cr = np.concatenate([cond, [0.0]])[1:m + 1]
    ab[1, :] = -(cl + cr)
    ab[0, 1:] = cr[:-1]
    ab[2, :-1] = cl[1:]
    rhs[:] = -masses[1:]
    h = solve_banded((1, 1), ab, rhs)
    return states, np.concatenate([[0.0], h])


# ---------------------------------------------------------------------------
# Speed measure recovery
# ---------------------------------------------------------------------------


def speed_from_exit_times(states: np.ndarray, h: np.ndarray,
                          concavity_tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Recover interior atom masses from an exit-time profile.

    The piecewise-linear extension of h is concave; each interior state
    carries mass -(h'(x+) - h'(x-))/2.  Raises ConcavityError when the
    profile bends the wrong way beyond tolerance.
    """
    states = np.asarray(states, dtype=float)
    h = np.asarray(h, dtype=float)
    if len(states) != len(h) or len(states) < 3:
        raise ValueError("need matching arrays with at least 3 points")
    slopes = np.diff(h) / np.diff(states)
    scale = max(1.0, float(np.max(np.abs(slopes))))
    if np.any(np.diff(slopes) > concavity_tol * scale):
        raise ConcavityError("exit-time profile is not concave")
    masses = -0.5 * np.diff(slopes)
    return states[1:-1], masses
