import functools

import numpy as np
import pytest

from nldstab.grid import make_grid
from nldstab.linop import assemble_JL
from nldstab.model import make_model
from nldstab.profile import solve_profile
from nldstab.spectrum import eigen_slice


@functools.lru_cache(maxsize=None)
def cached_profile(family, k, omega, M=512, stretch="auto", scheme="fourier", R=None):
    model = make_model(family, k)
    grid = make_grid(model, omega, M=M, scheme=scheme, R=R, stretch=stretch)
    return solve_profile(model, omega, grid)


@functools.lru_cache(maxsize=None)
def cached_slice(family, k, omega, M=511, stretch="auto"):
    prof = cached_profile(family, k, omega, M=M, stretch=stretch)
    return eigen_slice(assemble_JL(prof.model, prof), prof)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
