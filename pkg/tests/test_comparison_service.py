import numpy as np
import pytest

from conftest import constant
from core.errors import DomainError
from core.fracnorm import CylinderBoundary, psi_s
from core.weighted_grid import build_grid
from services.comparison_service import ComparisonService, cutoff
from services.extension_service import ExtensionService


@pytest.fixture
def service():
    return ComparisonService(ExtensionService())


@pytest.mark.parametrize('x_sup, expected', [
    (0.0, 1.0),
    (3.0, 1.0),
    (3.5, 0.5),
    (4.0, 0.0),
    (6.0, 0.0),
])
def test_cutoff(x_sup, expected):
    assert float(cutoff(np.array(x_sup), 4.0)) == pytest.approx(expected)


def test_cutoff_is_monotone():
    values = cutoff(np.linspace(2.5, 4.5, 41), 4.0)
    assert np.all(np.diff(values) <= 0.0)


def test_comparison_of_constant_minimizer(service, small_grid, allen_cahn):
    wbar, report = service.comparison_function(constant(small_grid, 0.5, 0.5), allen_cahn)
    np.testing.assert_allclose(wbar.values, 0.5, atol=1e-12)
    assert report.tau == pytest.approx(0.5)
    assert report.c_u == pytest.approx(0.140625)
    assert report.E_v == pytest.approx(0.0, abs=1e-12)
    assert report.E_wbar == pytest.approx(0.0, abs=1e-12)
    assert report.minimality_ok
    assert report.potential_ok
    assert report.ratio == pytest.approx(0.0, abs=1e-10)
    assert report.bound > 0.0


def test_comparison_needs_wide_cylinder(service, allen_cahn):
    grid = build_grid(1, 2.0, 2.0, 8, 4)
    with pytest.raises(DomainError):
        service.comparison_function(constant(grid, 0.0, 0.5), allen_cahn)


def test_comparison_radius_must_match_grid(service, small_grid, allen_cahn):
    with pytest.raises(DomainError):
        service.comparison_function(constant(small_grid, 0.0, 0.5), allen_cahn, R=5.0)


def test_comparison_of_layer(service, small_layer):
    field, _, nl = small_layer
    wbar, report = service.comparison_function(field, nl)
    assert report.tau == pytest.approx(float(np.min(field.trace)))
    assert report.minimality_ok
    assert report.potential_ok
    # competitor trace is frozen at tau on |x| <= R - 1
    np.testing.assert_allclose(wbar.trace[2:31], report.tau, atol=1e-12)
    scaled = report.R ** (1.0 - 2.0 * report.s) * report.dirichlet_rescaled
    assert scaled == pytest.approx(report.E_wbar - report.potential_wbar, rel=1e-8)


def test_comparison_trace_lives_on_unit_cylinder(service, small_layer):
    field, _, nl = small_layer
    wbar, _ = service.comparison_function(field, nl)
    trace = service.comparison_trace(wbar)
    points = np.array([[0.0, 0.0], [1.0, 0.5], [-0.25, 1.0]])
    values = trace(points)
    assert values[0] == pytest.approx(wbar.trace[16])
    assert values[1] == pytest.approx(wbar.values[-1, 8])
    assert np.isfinite(values[2])


@pytest.mark.parametrize('s', [0.25, 0.5, 0.75])
def test_extension_energy_of_linear_trace(service, s):
    result = service.extension_inequality_check(lambda z: z[..., 0], s, tol=1e-12)
    assert result.lhs == pytest.approx(2.0 / (2.0 - 2.0 * s), rel=1e-6)
    assert result.rhs > 0.0
    assert result.ratio == pytest.approx(result.lhs / result.rhs)


def test_extension_energy_of_constant_trace(service):
    result = service.extension_inequality_check(lambda z: np.full(z.shape[:-1], 1.5), 0.4)
    assert result.rhs == pytest.approx(1.5 ** 2 * 6.0)
    assert result.ratio == pytest.approx(0.0, abs=1e-10)


def test_random_traces_are_seeded():
    points = np.random.default_rng(0).uniform(-1.0, 1.0, size=(10, 2))
    first = ComparisonService.random_smooth_traces(3, 1, seed=5)
    again = ComparisonService.random_smooth_traces(3, 1, seed=5)
    other = ComparisonService.random_smooth_traces(3, 1, seed=6)
    assert len(first) == 3
    for a, b in zip(first, again):
        np.testing.assert_array_equal(a(points), b(points))
    assert not np.allclose(first[0](points), other[0](points))


def test_random_traces_accept_surface_points():
    boundary_points = np.zeros((4, 5, 3))
    trace = ComparisonService.random_smooth_traces(1, 2, seed=1)[0]
    assert trace(boundary_points).shape == (4, 5)


@pytest.mark.parametrize('epsilon, cells_per_unit, cells_per_eps, expected', [
    (1 / 8, 8, 4, 32),
    (1 / 64, 8, 4, 256),
    (1 / 64, 8, 0, 8),
    (0.4, 16, 4, 16),
    (0.3, 8, 4, 14),
])
def test_surface_resolution(epsilon, cells_per_unit, cells_per_eps, expected):
    assert ComparisonService.surface_resolution(epsilon, cells_per_unit, cells_per_eps) == expected


def test_psi_for_trace_resolves_epsilon(service):
    trace = lambda z: z[..., 0]
    direct = psi_s(trace, CylinderBoundary.build(1, 32), 0.25, 1 / 8)
    assert service.psi_for_trace(trace, 0.25, 1 / 8).total == pytest.approx(direct.total)


def test_random_traces_are_zero_mean_single_band_modes():
    h = 1e-3
    points = np.random.default_rng(2).uniform(-2.0, 2.0, size=(50, 2))
    for trace in ComparisonService.random_smooth_traces(10, 1, seed=9, modes=1):
        values = trace(points)
        laplacian = sum(
            (trace(points + h * e) - 2.0 * values + trace(points - h * e)) / h ** 2
            for e in np.eye(2)
        )
        # a single cosine mode without offset satisfies -laplacian w = |k|^2 w
        k2 = float(-laplacian @ values / (values @ values))
        assert 1.0 - 1e-3 <= k2 <= 9.0 + 1e-3
        np.testing.assert_allclose(-laplacian, k2 * values, atol=1e-3)
