import numpy as np
import pytest

from fracmax.corpus import plateau, tent
from fracmax.profile import PiecewiseLinearProfile, RadialFunction
from fracmax.verify import VerifyConfig

# small sample counts for unit-level runs of the checks
FAST = VerifyConfig(
    n_identity=12,
    n_good=8,
    n_sobolev=5,
    sobolev_core=200,
    betas=(0.25, 0.5),
    n_luiro=12,
    n_sandwich=10,
    n_sandwich_radial=2,
    n_pairs=30,
    n_lemma=12,
    n_lipschitz=10,
    n_level_set=6,
    n_annulus=8,
    n_key=6,
    n_radial=0,
    radial_dims=(2,),
    radial_core=40,
    continuity_points=301,
)


@pytest.fixture
def fast_cfg():
    return FAST


@pytest.fixture
def tent_p():
    return tent()


@pytest.fixture
def plateau_radial2():
    return RadialFunction(2, plateau().restrict_half_line())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_line_profile(rng, n=8):
    knots = np.sort(rng.uniform(-3, 3, n))
    vals = rng.uniform(-1, 1, n)
    vals[0] = vals[-1] = 0.0
    return PiecewiseLinearProfile(knots, vals)
