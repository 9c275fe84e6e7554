import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.kernel_math import fractional_order, make_nonlinearity  # noqa: E402
from core.weighted_grid import build_grid  # noqa: E402
from models.grid import Field  # noqa: E402
from services.extension_service import ExtensionService  # noqa: E402


@pytest.fixture
def allen_cahn():
    return make_nonlinearity('allen_cahn')


@pytest.fixture
def zero_force():
    return make_nonlinearity('custom', f=lambda u: 0.0 * u, range_=(-100.0, 100.0))


@pytest.fixture
def small_grid():
    return build_grid(1, 4.0, 4.0, 16, 8, 1.0)


def constant(grid, value, s):
    return Field(grid, np.full(grid.shape, float(value)), fractional_order(s))


@pytest.fixture(scope='session')
def small_layer():
    """Allen-Cahn layer at s = 1/2 on (-8, 8) x (0, 8), 32 x 16 cells"""
    nl = make_nonlinearity('allen_cahn')
    field, report = ExtensionService().solve_layer(0.5, nl, 8.0, Nx=32, Nlambda=16)
    return field, report, nl
