"""End-to-end runs through validate -> regularize -> energies -> chain -> MC."""

import math

import numpy as np
import pytest

from quasidiff.boundary import feller_classify
from quasidiff.dirichlet import TripleFunction, energy_image, energy_triple, lift
from quasidiff.regularize import image_regularization
from quasidiff.scale import (
    GeneralizedScale,
    Jump,
    MeasureSpec,
    PiecewiseLinear,
    Triple,
    compute_supports,
    validate_triple,
)
from quasidiff.simulate import (
    build_chain,
    discretize_measure,
    simulate_paths,
    skip_free_check,
)
from quasidiff.verify import mc_exit_time, mc_hitting


def two_sided_jump_triple() -> Triple:
    """Unit-slope scale with a two-sided jump at 1: an isolated image point."""
    cont = PiecewiseLinear(np.array([0.0, 2.0]), np.array([0.0, 2.0]))
    scale = GeneralizedScale(0.0, 2.0, cont, (Jump(1.0, left=0.5, right=0.5),))
    measure = MeasureSpec(0.0, 2.0, pieces=((0.0, 2.0, 1.0),), atoms=((1.0, 0.75),))
    return Triple(scale, measure)


def kitchen_sink_triple() -> Triple:
    """Plateau, one-sided jump, two-sided jump, atoms and mixed densities."""
    cont = PiecewiseLinear(np.array([0.0, 1.0, 2.0, 3.0, 4.0]),
                           np.array([0.0, 1.0, 1.0, 2.0, 4.0]))
    scale = GeneralizedScale(
        0.0, 4.0, cont,
        (Jump(2.0, left=0.5, right=0.0), Jump(3.0, left=0.25, right=0.25)))
    measure = MeasureSpec(
        0.0, 4.0,
        pieces=((0.0, 2.0, 1.0), (2.0, 3.0, 2.0), (3.0, 4.0, 0.5)),
        atoms=((1.5, 0.3), (3.0, 0.4)))
    return Triple(scale, measure)


def test_two_sided_jump_pipeline():
    t = two_sided_jump_triple()
    assert validate_triple(t).passed
    sup = compute_supports(t.scale)
    assert sup.d_zero == (1.0,)
    pkg = image_regularization(t)
    # the jump value is an isolated point of the state space
    assert (1.5, 1.5) in pkg.set.components
    assert pkg.gaps == [(1.0, 1.5), (1.5, 2.0)]
    assert (1.5, 0.75) in pkg.measure.atoms
    # pullback: all three split values share the fiber {1}
    assert pkg.pullback(1.0) == 1.0
    assert pkg.pullback(1.5) == 1.0
    assert pkg.pullback(2.0) == 1.0

    # energies across the two one-sided gaps agree
    tf = TripleFunction(c0=0.0, g_c=((0.0, 2.0, 1.0),),
                        g_plus=((1.0, -0.5),), g_minus=((1.0, 2.0),))
    assert energy_image(lift(tf, pkg), pkg) == pytest.approx(
        energy_triple(tf, t.scale), rel=1e-12)

    # the chain visits the isolated atom and stays skip free
    chain = build_chain(discretize_measure(pkg.measure, 0.25))
    paths = simulate_paths(chain, 1.5, horizon=4.0, n_paths=30, seed=3)
    assert all(skip_free_check(p, chain.states) for p in paths)
    visited = {s for p in paths for s in p.states.tolist()}
    assert 1.5 in visited and len(visited) > 3

    res = mc_hitting(t, 1.5, 0.0, 3.0, n_paths=30_000, seed=4, delta=0.25)
    assert res.passed


def test_kitchen_sink_pipeline():
    t = kitchen_sink_triple()
    assert validate_triple(t).passed
    pkg = image_regularization(t)
    # mass conservation through the transport
    assert pkg.measure.total_mass() == pytest.approx(t.measure.total_mass(), rel=1e-12)
    rep = feller_classify(pkg)
    assert rep.conservative
    # random function battery stays consistent on this shape too
    rng = np.random.default_rng(41)
    for _ in range(5):
        edges = np.concatenate([[0.0], np.sort(rng.uniform(0, 4, 2)), [4.0]])
        tf = TripleFunction(
            c0=float(rng.uniform(-1, 1)),
            g_c=tuple((float(a), float(b), float(rng.uniform(-2, 2)))
                      for a, b in zip(edges, edges[1:])),
            g_plus=tuple((j.x, float(rng.uniform(-1, 1)))
                         for j in t.scale.jumps if j.right > 0),
            g_minus=tuple((j.x, float(rng.uniform(-1, 1)))
                          for j in t.scale.jumps if j.left > 0))
        assert energy_image(lift(tf, pkg), pkg) == pytest.approx(
            energy_triple(tf, t.scale), rel=1e-10, abs=1e-12)
    res = mc_exit_time(t, 1.0, 0.0, 3.5, n_paths=30_000, seed=5, delta=0.25)
    assert res.passed


def test_plateau_touching_left_endpoint():
    # scale constant on [0, 0.5) then rising: the plateau darns into the
    # left endpoint value, whose state mass is the plateau's measure
    cont = PiecewiseLinear(np.array([0.0, 0.5, 1.0]), np.array([0.0, 0.0, 1.0]))
    scale = GeneralizedScale(0.0, 1.0, cont)
    t = Triple(scale, MeasureSpec(0.0, 1.0, pieces=((0.0, 1.0, 2.0),)))
    assert validate_triple(t).passed
    sup = compute_supports(t.scale)
    assert sup.includes_l and sup.plateaus == ((0.0, 0.5),)
    pkg = image_regularization(t)
    assert pkg.set.components == ((0.0, 1.0),)
    assert pkg.measure.endpoint_mass_l == pytest.approx(1.0)  # 2 * |[0, 0.5]|
    assert pkg.measure.pieces == ((0.0, 1.0, pytest.approx(1.0)),)  # density / slope
    assert pkg.pullback(0.0) == pytest.approx(0.25)  # plateau representative
    chain = build_chain(discretize_measure(pkg.measure, 0.25))
    paths = simulate_paths(chain, float(chain.states[0]), horizon=2.0, n_paths=8, seed=6)
    assert all(skip_free_check(p, chain.states) for p in paths)
