"""Sample-path generation for skip-free chains on atomic speed measures.

Continuous density pieces are first discretized into mass-exact midpoint
atoms; the resulting chain holds at state k for an exponential time with
mean mass_k / total conductance and jumps to a nearest neighbour with
probability proportional to the conductances.  Paths are generated in
vectorized lockstep with counter-based randomness, so results are identical
for any thread count and any block split.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .boundary import feller_classify
from .exit_solver import SkipFreeChain, natural_conductances
from .regularize import PullbackMap, RegularizedPackage
from .scale import INF, MeasureSpec, is_finite


# ---------------------------------------------------------------------------
# Measure discretization and chain construction
# ---------------------------------------------------------------------------


def discretize_measure(measure: MeasureSpec, delta: float) -> MeasureSpec:
    """Replace density pieces by midpoint atoms at spacing <= delta.

    Mass-exact per cell; existing atoms and endpoint masses are preserved.
    Pieces must be bounded (window the measure first).
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    mass_at: dict[float, float] = {}
    for x, m in measure.atoms:
        mass_at[x] = mass_at.get(x, 0.0) + m
    for a, b, rho in measure.pieces:
        if rho == 0.0:
            continue
        if not (is_finite(a) and is_finite(b)):
            raise ValueError("cannot discretize an unbounded density piece; window it first")
        cells = max(1, math.ceil((b - a) / delta))
        w = (b - a) / cells
        for i in range(cells):
            x = a + (i + 0.5) * w
            mass_at[x] = mass_at.get(x, 0.0) + rho * w
    atoms = tuple(sorted(mass_at.items()))
    return MeasureSpec(measure.l, measure.r, atoms=atoms,
                       endpoint_mass_l=measure.endpoint_mass_l,
                       endpoint_mass_r=measure.endpoint_mass_r)


def window_measure(measure: MeasureSpec, a: float, b: float) -> MeasureSpec:
    """Restriction of a measure to the window [a, b].

    Atoms at the window edges (and inherited endpoint masses when an edge
    coincides with the original endpoint) become endpoint masses of the
    restricted measure; infinite ones are dropped, since a windowed chain
    treats its edges explicitly.
    """
    pieces = []
    for pa, pb, rho in measure.pieces:
        lo, hi = max(pa, a), min(pb, b)
        if hi > lo:
            pieces.append((lo, hi, rho))
    atoms = tuple((x, m) for x, m in measure.atoms if a < x < b)
    em_l = measure.endpoint_mass_l if a == measure.l else 0.0
    em_r = measure.endpoint_mass_r if b == measure.r else 0.0
    em_l += sum(m for x, m in measure.atoms if x == a)
    em_r += sum(m for x, m in measure.atoms if x == b)
    if not is_finite(em_l):
        em_l = 0.0
    if not is_finite(em_r):
        em_r = 0.0
    return MeasureSpec(a, b, pieces=tuple(pieces), atoms=atoms,
                       endpoint_mass_l=em_l, endpoint_mass_r=em_r)


def build_chain(atomic: MeasureSpec, left: str = "reflect", right: str = "reflect") -> SkipFreeChain:
    """Chain of an atomic measure with the given boundary behaviours.

    Boundary kinds: 'reflect' (one-sided rates at the edge state), 'kill'
    (absorbing state inserted at the finite endpoint: lifetime ends on
    arrival), 'none' (inaccessible endpoint, no special handling).  A
    reflecting endpoint carrying mass becomes an ordinary (sticky) state.
    """
    positions = [x for x, _ in atomic.atoms]
    masses = [m for _, m in atomic.atoms]
    if atomic.endpoint_mass_l > 0 and left == "reflect":
        if not is_finite(atomic.endpoint_mass_l):
            raise ValueError("reflecting endpoint cannot carry infinite mass")
        positions.insert(0, atomic.l)
        masses.insert(0, atomic.endpoint_mass_l)
    if atomic.endpoint_mass_r > 0 and right == "reflect":
        if not is_finite(atomic.endpoint_mass_r):
            raise ValueError("reflecting endpoint cannot carry infinite mass")
        positions.append(atomic.r)
        masses.append(atomic.endpoint_mass_r)
    absorbing = [False] * len(positions)
    if left == "kill" and (not positions or positions[0] != atomic.l):
        if not is_finite(atomic.l):
            raise ValueError("killing boundary needs a finite endpoint")
        positions.insert(0, atomic.l)
        masses.insert(0, 1.0)
        absorbing.insert(0, True)
    if right == "kill" and positions[-1] != atomic.r:
        if not is_finite(atomic.r):
            raise ValueError("killing boundary needs a finite endpoint")
        positions.append(atomic.r)
        masses.append(1.0)
        absorbing.append(True)
    if len(positions) < 2:
        raise ValueError("need at least two states to build a chain")
    states = np.array(positions, dtype=float)
    return SkipFreeChain(states, np.array(masses, dtype=float),
                         natural_conductances(states), np.array(absorbing, dtype=bool))


def chain_from_package(package: RegularizedPackage, delta: float,
                       window: tuple[float, float] | None = None) -> SkipFreeChain:
    """Discretize the image measure of a package and build its chain.

    Without a window, boundary kinds follow the classification: included
    endpoints reflect, accessible excluded endpoints kill, inaccessible
    endpoints get no special handling.  With a window, both edges absorb.
    """
    m = package.measure
    if window is not None:
        a, b = window
        atomic = discretize_measure(window_measure(m, a, b), delta)
        return build_chain(atomic, left="kill", right="kill")
    rep = feller_classify(package)
    kinds = {}
    for side in ("l", "r"):
        ep = rep.endpoint(side)
        if ep.included:
            kinds[side] = "reflect"
        elif ep.accessible:
            kinds[side] = "kill"
        else:
            kinds[side] = "none"
    atomic = discretize_measure(m, delta)
    return build_chain(atomic, left=kinds["l"], right=kinds["r"])


def default_delta(a: float, b: float) -> float:
    """Default grid spacing: a hundredth of the window diameter."""
    return 0.01 * (b - a)


# ---------------------------------------------------------------------------
# Lockstep engine
# ---------------------------------------------------------------------------


@dataclass
class RunResult:
    """Aggregated outcome of a block of simulated paths."""

    start_index: int
    final_index: np.ndarray
    final_time: np.ndarray
    absorbed: np.ndarray
    absorption_time: np.ndarray
    truncated: np.ndarray
    occ_track: np.ndarray | None = None
    cp_pos: np.ndarray | None = None
    cp_occ: np.ndarray | None = None
    cp_jumps: np.ndarray | None = None
    visit_counts: np.ndarray | None = None
    visit_time_sums: np.ndarray | None = None
    events: list | None = None

    @staticmethod
    def concatenate(parts: list["RunResult"]) -> "RunResult":
        def cat(name):
            vals = [getattr(p, name) for p in parts]
            return None if vals[0] is None else np.concatenate(vals)
        events = None
        if parts[0].events is not None:
            events = [ev for p in parts for ev in p.events]
        return RunResult(
            start_index=parts[0].start_index,
            final_index=cat("final_index"), final_time=cat("final_time"),
            absorbed=cat("absorbed"), absorption_time=cat("absorption_time"),
            truncated=cat("truncated"), occ_track=cat("occ_track"),
            cp_pos=cat("cp_pos"), cp_occ=cat("cp_occ"), cp_jumps=cat("cp_jumps"),
            visit_counts=cat("visit_counts"), visit_time_sums=cat("visit_time_sums"),
            events=events)


def run_paths(chain: SkipFreeChain, start_index: int, path_ids: np.ndarray, seed: int, *,
              horizon: float | None = None, max_steps: int = 1_000_000,
              checkpoints=None, track_state: int | None = None,
              track_edge: tuple[int, int] | None = None,
              track_visits: bool = False, record: bool = False) -> RunResult:
    """Advance a block of paths in lockstep until horizon/absorption/step cap.

    Each path's randomness is a pure function of (seed, path id, step), so
    the result does not depend on how paths are grouped into blocks.
    """
    if max_steps > rng.MAX_STEPS:
        raise ValueError(f"max_steps above counter budget {rng.MAX_STEPS}")
    if chain.absorbing[start_index]:
        raise ValueError("cannot start at an absorbing state")
    path_ids = np.asarray(path_ids, dtype=np.uint64)
    n = len(path_ids)
    key = rng.seed_key(seed)
    cps = None if checkpoints is None else np.asarray(checkpoints, dtype=float)
    if cps is not None:
        if np.any(cps < 0) or (horizon is not None and np.any(cps > horizon)):
            raise ValueError("checkpoints must be nonnegative and within the horizon")

    idx = np.full(n, start_index, dtype=np.int64)
    t = np.zeros(n)
    absorbed = np.zeros(n, dtype=bool)
    absorption_time = np.full(n, INF)
    truncated = np.zeros(n, dtype=bool)
    occ = np.zeros(n) if track_state is not None else None
    jump_count = np.zeros(n, dtype=np.int64) if track_edge is not None else None
    if cps is not None:
        k = len(cps)
        cp_pos = np.full((n, k), chain.states[start_index])
        cp_occ = np.zeros((n, k)) if occ is not None else None
        cp_jumps = np.zeros((n, k), dtype=np.int64) if jump_count is not None else None
    else:
        cp_pos = cp_occ = cp_jumps = None
    if track_visits:
        visits = np.zeros((n, chain.n))
        visit_times = np.zeros((n, chain.n))
        visits[:, start_index] = 1.0
    else:
        visits = visit_times = None
    ev_rows, ev_times, ev_idx = [], [], []

    act = np.arange(n)
    rate = chain.rate_total
    p_right = chain.p_right
    states = chain.states

    for step in range(max_steps):
        if act.size == 0:
            break
        cur = idx[act]
        u1 = rng.uniforms(key, path_ids[act], step, 0)
        with np.errstate(divide="ignore"):
            hold = -np.log(u1) / rate[cur]
        t_act = t[act]
        t_new = t_act + hold

        if cps is not None:
            for j, tau in enumerate(cps):
                crossed = (t_act < tau) & (t_new >= tau)
                if np.any(crossed):
                    rows = act[crossed]
                    cp_pos[rows, j] = states[idx[rows]]
                    if cp_occ is not None:
                        extra = np.where(idx[rows] == track_state, tau - t[rows], 0.0)
                        cp_occ[rows, j] = occ[rows] + extra
                    if cp_jumps is not None:
                        cp_jumps[rows, j] = jump_count[rows]

        frozen = ~np.isfinite(t_new)
        done = frozen.copy()
        if horizon is not None:
            done |= t_new > horizon
        if np.any(done):
            rows = act[done]
            if horizon is not None:
                if occ is not None:
                    sel = rows[idx[rows] == track_state]
                    occ[sel] += horizon - t[sel]
                t[rows] = horizon
            else:
                truncated[rows] = True
        cont = ~done
        rows = act[cont]
        if rows.size:
            cur_c = idx[rows]
            hold_c = hold[cont]
            if occ is not None:
                sel = cur_c == track_state
                occ[rows[sel]] += hold_c[sel]
            u2 = rng.uniforms(key, path_ids[rows], step, 1)
            go_right = u2 < p_right[cur_c]
            new = cur_c + np.where(go_right, 1, -1)
            if jump_count is not None:
                sel = (cur_c == track_edge[0]) & (new == track_edge[1])
                jump_count[rows[sel]] += 1
            tn = t_new[cont]
            t[rows] = tn
            idx[rows] = new
            if track_visits:
                np.add.at(visits, (rows, new), 1.0)
                np.add.at(visit_times, (rows, new), tn)
            if record:
                ev_rows.append(rows.copy())
                ev_times.append(tn.copy())
                ev_idx.append(new.copy())
            died = chain.absorbing[new]
            if np.any(died):
                drows = rows[died]
                absorbed[drows] = True
                absorption_time[drows] = tn[died]
                if cps is not None:
                    td = tn[died]
                    for j, tau in enumerate(cps):
                        late = tau >= td
                        lr = drows[late]
                        cp_pos[lr, j] = states[idx[lr]]
                        if cp_occ is not None:
                            cp_occ[lr, j] = occ[lr]
                        if cp_jumps is not None:
                            cp_jumps[lr, j] = jump_count[lr]
            act = rows[~died]
        else:
            act = rows

    if act.size:
        truncated[act] = True

    events = None
    if record:
        events = _assemble_events(n, start_index, ev_rows, ev_times, ev_idx)
    return RunResult(
        start_index=start_index, final_index=idx, final_time=t,
        absorbed=absorbed, absorption_time=absorption_time, truncated=truncated,
        occ_track=occ, cp_pos=cp_pos, cp_occ=cp_occ, cp_jumps=cp_jumps,
        visit_counts=visits, visit_time_sums=visit_times, events=events)


def _assemble_events(n, start_index, ev_rows, ev_times, ev_idx):
    if ev_rows:
        rows = np.concatenate(ev_rows)
        times = np.concatenate(ev_times)
        idxs = np.concatenate(ev_idx)
        order = np.lexsort((times, rows))
        rows, times, idxs = rows[order], times[order], idxs[order]
    else:
        rows = np.zeros(0, dtype=np.int64)
        times = np.zeros(0)
        idxs = np.zeros(0, dtype=np.int64)
    events = []
    bounds = np.searchsorted(rows, np.arange(n + 1))
    for p in range(n):
        lo, hi = bounds[p], bounds[p + 1]
        events.append((
            np.concatenate([[0.0], times[lo:hi]]),
            np.concatenate([[start_index], idxs[lo:hi]]).astype(np.int64)))
    return events


def run_paths_parallel(chain: SkipFreeChain, start_index: int, n_paths: int, seed: int, *,
                       threads: int = 1, **kwargs) -> RunResult:
    """Split paths into blocks and run them on a thread pool.

    Identical output for every thread count: randomness is per path id and
    blocks are merged in path order.
    """
    ids = np.arange(n_paths, dtype=np.uint64)
    threads = max(1, threads)
    if threads == 1 or n_paths < 2048:
        return run_paths(chain, start_index, ids, seed, **kwargs)
    size = math.ceil(n_paths / threads)
    blocks = [ids[i:i + size] for i in range(0, n_paths, size)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        parts = list(ex.map(lambda b: run_paths(chain, start_index, b, seed, **kwargs), blocks))
    return RunResult.concatenate(parts)


# ---------------------------------------------------------------------------
# Path samples
# ---------------------------------------------------------------------------


@dataclass
class PathSample:
    """Event-time record of one simulated path."""

    path_index: int
    seed: int
    times: np.ndarray       # event times, starting at 0
    states: np.ndarray      # state positions, starting at x0
    horizon: float
    lifetime: float         # inf unless killed at a boundary
    absorbed_at: float | None
    truncated: bool
    occupation: dict[float, float] = field(default_factory=dict)

    @property
    def end_time(self) -> float:
        return min(self.horizon, self.lifetime)


def simulate_paths(chain: SkipFreeChain, x0: float, horizon: float, n_paths: int, seed: int, *,
                   threads: int = 1, max_steps: int = 1_000_000) -> list[PathSample]:
    """Independent trajectories from x0, each deterministic in (seed, index)."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if n_paths < 1:
        raise ValueError("need at least one path")
    start = chain.index_of(x0)
    res = run_paths_parallel(chain, start, n_paths, seed, threads=threads,
                             horizon=horizon, max_steps=max_steps, record=True)
    out = []
    for p in range(n_paths):
        times, idxs = res.events[p]
        positions = chain.states[idxs]
        life = float(res.absorption_time[p])
        end = min(horizon, life)
        occupation: dict[float, float] = {}
        for i in range(len(times)):
            t0 = times[i]
            t1 = times[i + 1] if i + 1 < len(times) else end
            t1 = min(t1, end)
            if t1 > t0 and not (res.absorbed[p] and i == len(times) - 1):
                pos = float(positions[i])
                occupation[pos] = occupation.get(pos, 0.0) + float(t1 - t0)
        out.append(PathSample(
            path_index=p, seed=seed, times=times, states=positions,
            horizon=horizon, lifetime=life,
            absorbed_at=float(chain.states[res.final_index[p]]) if res.absorbed[p] else None,
            truncated=bool(res.truncated[p]), occupation=occupation))
    return out


def markov_local_time(path: PathSample, x: float, chain: SkipFreeChain) -> tuple[np.ndarray, np.ndarray]:
    """Local time at a state: occupation time divided by the state's mass.

    Returns the node times and values of the piecewise-linear trajectory
    ell(t, x) up to the path's end time.
    """
    i = chain.index_of(x)
    m = float(chain.masses[i])
    if chain.absorbing[i] or not (0 < m < INF):
        raise ValueError("local time needs a state with positive finite mass")
    pos = float(chain.states[i])
    ts = [0.0]
    ell = [0.0]
    end = path.end_time
    for k in range(len(path.times)):
        t0 = float(path.times[k])
        t1 = float(path.times[k + 1]) if k + 1 < len(path.times) else end
        t1 = min(t1, end)
        if t1 <= t0:
            continue
        gain = (t1 - t0) / m if float(path.states[k]) == pos else 0.0
        ts.append(t1)
        ell.append(ell[-1] + gain)
    return np.array(ts), np.array(ell)


def project_unregularized(path: PathSample, pullback: PullbackMap) -> PathSample:
    """Push a path back to the base interval through the pullback map.

    Gap-crossing jumps whose edges share a fiber become removable; darned
    states land on their recorded plateau representative.
    """
    projected = np.array([pullback(float(s)) for s in path.states])
    occupation: dict[float, float] = {}
    for pos, dt in path.occupation.items():
        q = pullback(float(pos))
        occupation[q] = occupation.get(q, 0.0) + dt
    return PathSample(
        path_index=path.path_index, seed=path.seed, times=path.times.copy(),
        states=projected, horizon=path.horizon, lifetime=path.lifetime,
        absorbed_at=None if path.absorbed_at is None else pullback(float(path.absorbed_at)),
        truncated=path.truncated, occupation=occupation)


def skip_free_check(path: PathSample, states: np.ndarray) -> bool:
    """No jump's open interval may contain a state of the chain."""
    states = np.asarray(states, dtype=float)
    s = np.asarray(path.states, dtype=float)
    for a, b in zip(s, s[1:]):
        lo, hi = (a, b) if a <= b else (b, a)
        inside = np.searchsorted(states, hi, side="left") - np.searchsorted(states, lo, side="right")
        if inside > 0:
            return False
    return True
