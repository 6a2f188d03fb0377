import numpy as np
import pytest

from quasidiff.scale import GeneralizedScale, Jump, MeasureSpec, PiecewiseLinear, Triple


@pytest.fixture
def plateau_jump_triple() -> Triple:
    """Unit-slope scale with a plateau on (1,2) and a left jump at 2, on [0,3].

    The image state space is [0,1] u [2,3] with a unit atom at the darned
    point 1 when the measure is Lebesgue.
    """
    cont = PiecewiseLinear(np.array([0.0, 1.0, 2.0, 3.0]), np.array([0.0, 1.0, 1.0, 2.0]))
    scale = GeneralizedScale(0.0, 3.0, cont, (Jump(2.0, left=1.0, right=0.0),))
    measure = MeasureSpec(0.0, 3.0, pieces=((0.0, 3.0, 1.0),))
    return Triple(scale, measure)


@pytest.fixture
def identity_triple() -> Triple:
    """Identity scale with Lebesgue measure on [0, 1], both ends reflecting."""
    cont = PiecewiseLinear(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    scale = GeneralizedScale(0.0, 1.0, cont)
    measure = MeasureSpec(0.0, 1.0, pieces=((0.0, 1.0, 1.0),))
    return Triple(scale, measure)


@pytest.fixture
def absorbing_interval_triple() -> Triple:
    """Identity scale on [0,1] with infinite endpoint masses: both ends absorbing."""
    cont = PiecewiseLinear(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    scale = GeneralizedScale(0.0, 1.0, cont)
    measure = MeasureSpec(0.0, 1.0, pieces=((0.0, 1.0, 1.0),),
                          endpoint_mass_l=np.inf, endpoint_mass_r=np.inf)
    return Triple(scale, measure)
