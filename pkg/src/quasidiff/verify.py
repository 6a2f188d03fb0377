"""Monte Carlo cross-checks tying simulation to the closed-form theory.

Every check reports (estimate, stderr, reference, z) and passes at |z| <= 4;
the four-standard-error gate keeps multi-check suites stable (two-sided
false-alarm rate about 6e-5 per check).  All checks are deterministic under
a fixed seed and independent of the thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boundary import feller_classify
from .exit_solver import (
    SkipFreeChain,
    exit_times_absorbing,
    hitting_probability,
    hitting_probability_chain,
    speed_from_exit_times,
)
from .regularize import RegularizedPackage, image_regularization
from .scale import INF, Triple, is_finite
from .simulate import (
    build_chain,
    default_delta,
    discretize_measure,
    run_paths,
    run_paths_parallel,
    window_measure,
)

Z_GATE = 4.0


@dataclass
class CheckResult:
    name: str
    estimate: float
    stderr: float
    reference: float
    z: float
    n_paths: int
    truncated_fraction: float = 0.0
    passed: bool = True
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name, "estimate": self.estimate, "stderr": self.stderr,
            "reference": self.reference, "z": self.z, "n_paths": self.n_paths,
            "truncated_fraction": self.truncated_fraction, "passed": self.passed,
            "details": self.details,
        }


def _z(estimate: float, reference: float, stderr: float) -> float:
    if stderr == 0.0:
        return 0.0 if estimate == reference else INF
    return (estimate - reference) / stderr


def _package(triple_or_package) -> RegularizedPackage:
    if isinstance(triple_or_package, RegularizedPackage):
        return triple_or_package
    return image_regularization(triple_or_package)


def _check_window(package: RegularizedPackage, a: float, b: float) -> None:
    if not (is_finite(a) and is_finite(b) and a < b):
        raise ValueError("window must be a bounded interval with a < b")
    if not (package.l_hat <= a and b <= package.r_hat):
        raise ValueError("window exceeds the image span")
    for ga, gb in package.gaps:
        if ga < a < gb or ga < b < gb:
            raise ValueError("window edges must not lie inside a gap of the state space")
    rep = feller_classify(package)
    for edge, side in ((a, "l"), (b, "r")):
        ep = rep.endpoint(side)
        hat = package.l_hat if side == "l" else package.r_hat
        if edge == hat and not ep.included and not ep.accessible:
            raise ValueError(
                f"window edge {edge} is an inaccessible endpoint "
                "(its arrival integral sigma diverges)")


def _window_chain(package: RegularizedPackage, a: float, b: float, delta: float) -> SkipFreeChain:
    atomic = discretize_measure(window_measure(package.measure, a, b), delta)
    return build_chain(atomic, left="kill", right="kill")


# ---------------------------------------------------------------------------
# Hitting probabilities and exit times
# ---------------------------------------------------------------------------


def mc_hitting(triple, x: float, a: float, b: float, n_paths: int, seed: int, *,
               delta: float | None = None, threads: int = 1,
               max_steps: int = 200_000) -> CheckResult:
    """Empirical P(hit b before a) against the scale-ratio formula.

    The start point is snapped to the nearest chain state and the reference
    is evaluated at the snapped point, so estimate and reference always
    describe the same chain.
    """
    package = _package(triple)
    _check_window(package, a, b)
    delta = default_delta(a, b) if delta is None else delta
    chain = _window_chain(package, a, b, delta)
    idx0 = chain.nearest_index(x)
    if chain.absorbing[idx0]:
        raise ValueError("start point coincides with a window edge")
    x_used = float(chain.states[idx0])
    exact = hitting_probability(x_used, a, b)
    oracle = hitting_probability_chain(chain, x_used, a, b)
    res = run_paths_parallel(chain, idx0, n_paths, seed, threads=threads, max_steps=max_steps)
    hit_right = res.absorbed & (chain.states[res.final_index] == b)
    est = float(np.mean(hit_right))
    se = math.sqrt(exact * (1 - exact) / n_paths)
    z = _z(est, exact, se)
    return CheckResult(
        name="hitting", estimate=est, stderr=se, reference=exact, z=z,
        n_paths=n_paths, truncated_fraction=float(np.mean(res.truncated)),
        passed=abs(z) <= Z_GATE,
        details={"x_requested": x, "x_used": x_used, "window": [a, b],
                 "delta": delta, "chain_oracle": oracle})


def mc_exit_time(triple, x: float, a: float, b: float, n_paths: int, seed: int, *,
                 delta: float | None = None, threads: int = 1,
                 max_steps: int = 200_000) -> CheckResult:
    """Empirical mean of the two-sided exit time against the tridiagonal solve."""
    package = _package(triple)
    _check_window(package, a, b)
    delta = default_delta(a, b) if delta is None else delta
    chain = _window_chain(package, a, b, delta)
    idx0 = chain.nearest_index(x)
    if chain.absorbing[idx0]:
        raise ValueError("start point coincides with a window edge")
    x_used = float(chain.states[idx0])
    h = exit_times_absorbing(chain)
    ref = float(h[idx0])
    res = run_paths_parallel(chain, idx0, n_paths, seed, threads=threads, max_steps=max_steps)
    times = res.absorption_time[res.absorbed]
    est = float(np.mean(times))
    se = float(np.std(times, ddof=1) / math.sqrt(len(times)))
    z = _z(est, ref, se)
    return CheckResult(
        name="exit_time", estimate=est, stderr=se, reference=ref, z=z,
        n_paths=n_paths, truncated_fraction=float(np.mean(res.truncated)),
        passed=abs(z) <= Z_GATE,
        details={"x_requested": x, "x_used": x_used, "window": [a, b], "delta": delta})


# ---------------------------------------------------------------------------
# Speed-measure recovery
# ---------------------------------------------------------------------------


@dataclass
class SpeedRecoveryLevel:
    delta: float
    n_paths: int
    states: np.ndarray
    recovered: np.ndarray
    expected: np.ndarray
    mean_rel_error: float
    max_abs_error: float
    stderr: float            # jackknife stderr of the mean relative error

    def to_dict(self) -> dict:
        return {
            "delta": self.delta, "n_paths": self.n_paths,
            "states": self.states.tolist(), "recovered": self.recovered.tolist(),
            "expected": self.expected.tolist(), "mean_rel_error": self.mean_rel_error,
            "max_abs_error": self.max_abs_error, "stderr": self.stderr,
        }


@dataclass
class SpeedRecoveryReport:
    levels: list[SpeedRecoveryLevel]
    ratios: list[float]
    monotone_within_noise: bool
    decreasing_overall: bool

    @property
    def passed(self) -> bool:
        return self.monotone_within_noise and self.decreasing_overall

    def to_dict(self) -> dict:
        return {
            "levels": [lv.to_dict() for lv in self.levels], "ratios": self.ratios,
            "monotone_within_noise": self.monotone_within_noise,
            "decreasing_overall": self.decreasing_overall, "passed": self.passed,
        }


def mc_speed_recovery(triple, window: tuple[float, float], n_paths: int, deltas, seed: int, *,
                      paths_growth: float = 24.0, blocks: int = 32,
                      threads: int = 1, max_steps: int = 2_000_000) -> SpeedRecoveryReport:
    """Recover the atomic speed measure from Monte Carlo exit-time profiles.

    For each grid level the mean exit time at every state is estimated from
    one shared pool of paths (every visit to a state starts a sub-trajectory
    whose remaining time to absorption is an unbiased sample), the measure is
    recovered from the one-sided slopes, and the per-atom error against the
    exact cell masses is reported with a jackknife stderr over path blocks.

    The recovery is linear in the estimated profile and the oracle round
    trip is exact, so the error is purely statistical; finer grids amplify
    it through the second difference, hence each finer level runs
    `paths_growth` times more paths so the study can exhibit contraction.
    """
    package = _package(triple)
    a, b = window
    _check_window(package, a, b)
    levels: list[SpeedRecoveryLevel] = []
    for li, delta in enumerate(deltas):
        n = int(n_paths * paths_growth ** li)
        chain = _window_chain(package, a, b, delta)
        start = chain.nearest_index((a + b) / 2)
        nb = max(1, n // blocks)

        def run_block(blk):
            ids = np.arange(blk * nb, (blk + 1) * nb, dtype=np.uint64)
            res = run_paths(chain, start, ids, seed, track_visits=True, max_steps=max_steps)
            T = res.absorption_time
            ok = res.absorbed
            N = res.visit_counts[ok]
            S = res.visit_time_sums[ok]
            return ((N * T[ok, None] - S).sum(axis=0), N.sum(axis=0),
                    int(res.truncated.sum()))

        if threads > 1:
            from concurrent.futures import ThreadPoolExecutor
            with ThreadPoolExecutor(max_workers=threads) as ex:
                parts = list(ex.map(run_block, range(blocks)))
        else:
            parts = [run_block(blk) for blk in range(blocks)]
        A = np.array([p[0] for p in parts])
        C = np.array([p[1] for p in parts])
        trunc = sum(p[2] for p in parts)
        if trunc:
            raise RuntimeError(f"{trunc} paths failed to absorb; raise max_steps")

        def recover(Asum, Csum):
            h = np.where(Csum > 0, Asum / np.maximum(Csum, 1.0), 0.0)
            h[chain.absorbing] = 0.0
            _, rec = speed_from_exit_times(chain.states, h, concavity_tol=INF)
            return rec

        recovered = recover(A.sum(0), C.sum(0))
        expected = chain.masses[1:-1]
        rel = np.abs(recovered - expected) / expected
        loo_means = np.array([
            float(np.mean(np.abs(recover(A.sum(0) - A[blk], C.sum(0) - C[blk]) - expected) / expected))
            for blk in range(blocks)])
        jk = math.sqrt((blocks - 1) / blocks * float(np.sum((loo_means - loo_means.mean()) ** 2)))
        levels.append(SpeedRecoveryLevel(
            delta=float(delta), n_paths=nb * blocks, states=chain.states[1:-1],
            recovered=recovered, expected=expected,
            mean_rel_error=float(rel.mean()), max_abs_error=float(np.max(np.abs(recovered - expected))),
            stderr=jk))
    errs = [lv.mean_rel_error for lv in levels]
    ratios = [errs[i + 1] / errs[i] if errs[i] > 0 else INF for i in range(len(errs) - 1)]
    monotone = all(
        errs[i + 1] <= errs[i] + Z_GATE * (levels[i].stderr + levels[i + 1].stderr)
        for i in range(len(errs) - 1))
    decreasing = len(errs) < 2 or errs[-1] < errs[0]
    return SpeedRecoveryReport(levels, ratios, monotone, decreasing)


# ---------------------------------------------------------------------------
# Martingale checks
# ---------------------------------------------------------------------------


def mc_jump_rate_martingale(triple, gap_index: int, times, n_paths: int, seed: int, *,
                            delta: float | None = None, half_width: float = 1.5,
                            threads: int = 1) -> list[CheckResult]:
    """Jump counts across a gap against the local-time compensator.

    Counts upward crossings of the chain edge spanning the gap and compares
    with lambda * occupation(left state) / (2 * mass(left state)); the factor
    two converts the chain's symmetrizing measure into the speed function of
    the matching time-changed construction.  The realized edge of the
    discretized chain defines lambda, so the identity is exact for the
    simulated process and the paired z-test is sharp at any grid.
    """
    package = _package(triple)
    gap_list = package.gaps
    if not gap_list:
        raise ValueError("the state space has no gaps to test")
    ga, gb = gap_list[gap_index]
    wa = max(package.l_hat, ga - half_width)
    wb = min(package.r_hat, gb + half_width)
    for oa, ob in gap_list:
        if oa < wa < ob:
            wa = oa
        if oa < wb < ob:
            wb = ob
    delta = default_delta(wa, wb) if delta is None else delta
    atomic = discretize_measure(window_measure(package.measure, wa, wb), delta)
    chain = build_chain(atomic, left="reflect", right="reflect")
    i_left = int(np.searchsorted(chain.states, ga, side="right")) - 1
    i_right = i_left + 1
    if i_left < 0 or i_right >= chain.n or not (
            chain.states[i_left] <= ga and chain.states[i_right] >= gb):
        raise ValueError("the chain has no edge spanning the requested gap")
    lam = 1.0 / (chain.states[i_right] - chain.states[i_left])
    mass_left = float(chain.masses[i_left])
    times = sorted(float(t) for t in times)
    res = run_paths_parallel(
        chain, i_left, n_paths, seed, threads=threads, horizon=times[-1],
        checkpoints=times, track_state=i_left, track_edge=(i_left, i_right))
    out = []
    for j, t in enumerate(times):
        jumps = res.cp_jumps[:, j].astype(float)
        compensator = lam * res.cp_occ[:, j] / (2.0 * mass_left)
        diff = jumps - compensator
        se = float(np.std(diff, ddof=1) / math.sqrt(n_paths))
        z = _z(float(diff.mean()), 0.0, se)
        out.append(CheckResult(
            name=f"jump_rate_martingale@t={t:g}",
            estimate=float(jumps.mean()), stderr=se,
            reference=float(compensator.mean()), z=z, n_paths=n_paths,
            truncated_fraction=float(np.mean(res.truncated)), passed=abs(z) <= Z_GATE,
            details={"gap": [ga, gb], "chain_edge": [float(chain.states[i_left]), float(chain.states[i_right])],
                     "lambda": float(lam), "delta": delta}))
    return out


def mc_martingale_scale(triple, x: float, a: float, b: float, time_grid, n_paths: int, seed: int, *,
                        delta: float | None = None, threads: int = 1) -> CheckResult:
    """Mean of the stopped natural-scale process is constant over a time grid."""
    package = _package(triple)
    _check_window(package, a, b)
    delta = default_delta(a, b) if delta is None else delta
    chain = _window_chain(package, a, b, delta)
    idx0 = chain.nearest_index(x)
    if chain.absorbing[idx0]:
        raise ValueError("start point coincides with a window edge")
    x_used = float(chain.states[idx0])
    grid = sorted(float(t) for t in time_grid)
    res = run_paths_parallel(chain, idx0, n_paths, seed, threads=threads,
                             horizon=grid[-1], checkpoints=grid)
    zs, means, ses = [], [], []
    for j in range(len(grid)):
        pos = res.cp_pos[:, j]
        mean = float(pos.mean())
        se = float(np.std(pos, ddof=1) / math.sqrt(n_paths))
        means.append(mean)
        ses.append(se)
        zs.append(_z(mean, x_used, se))
    worst = int(np.argmax(np.abs(zs)))
    return CheckResult(
        name="martingale_scale", estimate=means[worst], stderr=ses[worst],
        reference=x_used, z=float(zs[worst]), n_paths=n_paths,
        truncated_fraction=float(np.mean(res.truncated)),
        passed=max(abs(z) for z in zs) <= Z_GATE,
        details={"x_requested": x, "x_used": x_used, "grid": grid,
                 "means": means, "stderrs": ses, "z_values": [float(z) for z in zs],
                 "window": [a, b], "delta": delta})


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


@dataclass
class SuiteReport:
    suite: str
    checks: list
    speed: SpeedRecoveryReport | None = None
    seed: int = 0
    n_paths: int = 0

    @property
    def passed(self) -> bool:
        ok = all(c.passed for c in self.checks)
        if self.speed is not None:
            ok = ok and self.speed.passed
        return ok

    def to_dict(self) -> dict:
        doc = {"suite": self.suite, "passed": self.passed,
               "seed": self.seed, "n_paths": self.n_paths,
               "checks": [c.to_dict() for c in self.checks]}
        if self.speed is not None:
            doc["speed_recovery"] = self.speed.to_dict()
        return doc


def _auto_window(package: RegularizedPackage) -> tuple[float, float]:
    feats = []
    for a, b, _ in package.measure.pieces:
        feats += [e for e in (a, b) if is_finite(e)]
    feats += [x for x, _ in package.measure.atoms]
    for a, b in package.gaps:
        feats += [a, b]
    lo = package.l_hat if is_finite(package.l_hat) else (min(feats) - 2.0 if feats else -2.0)
    hi = package.r_hat if is_finite(package.r_hat) else (max(feats) + 2.0 if feats else 2.0)
    for ga, gb in package.gaps:
        if ga < lo < gb:
            lo = ga
        if ga < hi < gb:
            hi = gb
    return lo, hi


def verify_suite(triple: Triple, suite: str = "all", n_paths: int = 200_000, seed: int = 0, *,
                 threads: int = 1, delta: float | None = None) -> SuiteReport:
    """Run a named battery of Monte Carlo gates on one triple.

    Windows and start points are chosen automatically from the package
    structure; use the individual mc_* functions for hand-picked settings.
    """
    known = {"hitting", "exit", "speed", "jumps", "martingale", "all"}
    if suite not in known:
        raise ValueError(f"unknown suite {suite!r}; choose from {sorted(known)}")
    package = _package(triple)
    a, b = _auto_window(package)
    # gate references are chain-exact at any grid, so the suite defaults to a
    # coarser spacing than the simulation default to keep every gate fast
    d = (b - a) / 40 if delta is None else delta
    x0 = (a + b) / 2
    checks: list[CheckResult] = []
    speed = None
    if suite in ("hitting", "all"):
        checks.append(mc_hitting(package, x0, a, b, n_paths, seed, delta=d, threads=threads))
    if suite in ("exit", "all"):
        checks.append(mc_exit_time(package, x0, a, b, n_paths, seed, delta=d, threads=threads))
    if suite in ("speed", "all"):
        speed = mc_speed_recovery(package, (a, b), max(500, n_paths // 100),
                                  [(b - a) / 4, (b - a) / 8, (b - a) / 16], seed,
                                  threads=threads)
    if suite in ("jumps", "all"):
        if package.gaps:
            chain_probe = _window_chain(package, a, b, d)
            h = exit_times_absorbing(chain_probe)
            t_ref = max(float(np.max(h)), 1e-6)
            checks.extend(mc_jump_rate_martingale(
                package, 0, [t_ref / 2, t_ref], n_paths, seed, delta=d, threads=threads))
    if suite in ("martingale", "all"):
        chain_probe = _window_chain(package, a, b, d)
        h = exit_times_absorbing(chain_probe)
        t_ref = max(float(np.max(h)), 1e-6)
        grid = [t_ref * f for f in (0.2, 0.4, 0.6, 0.8, 1.0)]
        checks.append(mc_martingale_scale(package, x0, a, b, grid, n_paths, seed,
                                          delta=d, threads=threads))
    return SuiteReport(suite=suite, checks=checks, speed=speed, seed=seed, n_paths=n_paths)
