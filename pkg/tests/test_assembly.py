from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from core.assembly import (FORM_CACHE_SIZE, DirichletForm, base_measure, cylinder_cell_mask, dirichlet_form,
                           disk_measure, dual_lengths, halfball_cell_fractions, snap_height, snap_radius)
from core.kernel_math import fractional_order
from core.weighted_grid import build_grid, default_grading


@pytest.fixture
def graded():
    return build_grid(1, 2.0, 1.5, 12, 10, q=2.0)


def test_dual_lengths():
    np.testing.assert_allclose(dual_lengths(np.array([0.0, 1.0, 3.0])), [0.5, 1.5, 1.0])


@pytest.mark.parametrize('s', [0.25, 0.5, 0.75])
def test_matrix_is_symmetric_with_zero_row_sums(graded, s):
    K = DirichletForm(graded, fractional_order(s)).matrix()
    assert abs(K - K.T).max() < 1e-14
    np.testing.assert_allclose(K @ np.ones(graded.num_nodes), 0.0, atol=1e-12)
    off_diagonal = K.copy()
    off_diagonal.setdiag(0.0)
    assert off_diagonal.max() <= 0.0


@pytest.mark.parametrize('n', [1, 2])
def test_cell_energy_sums_to_quadratic_form(n):
    grid = build_grid(n, 1.0, 1.0, 6, 5, q=1.5)
    form = DirichletForm(grid, fractional_order(0.3))
    values = np.random.default_rng(7).normal(size=grid.shape)
    assert form.cell_energy(values).sum() == pytest.approx(form.energy(values), rel=1e-12)


@pytest.mark.parametrize('s', [0.25, 0.5, 0.75])
def test_linear_field_is_discrete_harmonic(graded, s):
    K = DirichletForm(graded, fractional_order(s)).matrix()
    x, _ = graded.coordinates()
    interior = ~(graded.lateral_mask() | graded.top_mask() | graded.bottom_mask())
    residual = (K @ x.reshape(-1)).reshape(graded.shape)
    np.testing.assert_allclose(residual[interior], 0.0, atol=1e-12)


@pytest.mark.parametrize('n', [1, 2])
@pytest.mark.parametrize('s', [0.25, 0.5, 0.75])
def test_energy_of_linear_field_on_unit_cylinder(n, s):
    grid = build_grid(n, 1.0, 1.0, 8, 8, q=2.0)
    x = grid.coordinates()[0]
    energy = DirichletForm(grid, fractional_order(s)).energy(x)
    assert energy == pytest.approx(2.0 ** n / (2.0 - 2.0 * s), rel=1e-12)


def test_dirichlet_form_is_shared(graded):
    order = fractional_order(0.5)
    assert dirichlet_form(graded, order) is dirichlet_form(graded, order)


@pytest.mark.parametrize('n', [1, 2])
def test_base_measure_covers_base(n):
    grid = build_grid(n, 3.0, 1.0, 12, 4)
    assert base_measure(grid).sum() == pytest.approx((2 * 3.0) ** n)
    assert base_measure(grid, (-1.5, 1.5)).sum() == pytest.approx(3.0 ** n)


def test_disk_measure():
    line = build_grid(1, 4.0, 4.0, 16, 4)
    assert disk_measure(line, 2.0).sum() == pytest.approx(4.0)
    square = build_grid(2, 4.0, 4.0, 64, 4)
    assert disk_measure(square, 3.0).sum() == pytest.approx(np.pi * 9.0, rel=1e-2)


def test_cylinder_cell_mask(graded):
    mask = cylinder_cell_mask(graded, -1.0, 1.0, graded.Lambda)
    assert mask.shape == graded.cell_shape
    # 6 of 12 x cells, every lambda cell
    assert mask.sum() == 6 * 10
    shifted = cylinder_cell_mask(graded, -0.5, 0.5, graded.Lambda, center=1.0)
    assert shifted[8:10].all() and not shifted[:8].any()


def test_halfball_fractions_approximate_area():
    grid = build_grid(1, 2.0, 2.0, 64, 32)
    fractions = halfball_cell_fractions(grid, 1.5)
    areas = grid.hx * grid.lambda_steps[None, :]
    assert np.sum(fractions * areas) == pytest.approx(0.5 * np.pi * 1.5 ** 2, rel=0.02)
    assert fractions.min() >= 0.0 and fractions.max() <= 1.0


def test_snapping(graded):
    assert snap_radius(graded, 0.8) == pytest.approx(2.0 / 3.0)
    assert snap_radius(graded, 0.0) == pytest.approx(1.0 / 3.0)
    assert snap_height(graded, 1.0) >= 1.0
    assert snap_height(graded, 10.0) == graded.Lambda


@pytest.mark.parametrize('s', [0.25, 0.5, 0.75])
def test_energy_of_power_field(s):
    grid = build_grid(1, 1.0, 1.0, 8, 256, q=default_grading(s))
    lam = grid.coordinates()[1]
    energy = DirichletForm(grid, fractional_order(s)).energy(lam ** (2.0 * s))
    assert energy == pytest.approx(2.0 * s * 2.0, rel=0.02)


def test_matrix_is_built_once_across_threads():
    form = DirichletForm(build_grid(1, 2.0, 2.0, 32, 32, q=2.0), fractional_order(0.3))
    with ThreadPoolExecutor(max_workers=4) as pool:
        matrices = list(pool.map(lambda _: form.matrix(), range(8)))
    assert all(m is matrices[0] for m in matrices)


def test_form_cache_is_bounded():
    dirichlet_form.cache_clear()
    order = fractional_order(0.5)
    for nx in range(4, 4 + 2 * FORM_CACHE_SIZE):
        dirichlet_form(build_grid(1, 1.0, 1.0, nx, 4), order)
    assert dirichlet_form.cache_info().currsize == FORM_CACHE_SIZE
