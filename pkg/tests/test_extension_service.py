import numpy as np
import pytest

from conftest import constant
from core.errors import DomainError
from core.kernel_math import explicit_half_layer, fractional_order, make_nonlinearity
from core.weighted_grid import build_grid
from models.grid import BoundarySpec, Field
from services.extension_service import ExtensionService


@pytest.fixture
def service():
    return ExtensionService()


@pytest.mark.parametrize('value', [-1.0, 0.0, 0.5])
def test_constant_field_energy_is_potential_only(service, small_grid, allen_cahn, value):
    energy = service.discrete_energy(constant(small_grid, value, 0.3), allen_cahn)
    G = 0.25 * (1.0 - value ** 2) ** 2
    assert energy.dirichlet == pytest.approx(0.0, abs=1e-14)
    assert energy.potential == pytest.approx(2.0 * small_grid.R * G)
    assert energy.total == energy.dirichlet + energy.potential
    assert energy.clip_count == 0


def test_c_shift_moves_potential(service, small_grid, allen_cahn):
    field = constant(small_grid, 0.5, 0.5)
    plain = service.discrete_energy(field, allen_cahn)
    shifted = service.discrete_energy(field, allen_cahn, c_shift=0.140625)
    assert shifted.potential == pytest.approx(plain.potential - 8.0 * 0.140625)
    assert shifted.potential == pytest.approx(0.0, abs=1e-14)


def test_clipped_trace_is_counted(service, small_grid, allen_cahn):
    energy = service.discrete_energy(constant(small_grid, 1.5, 0.5), allen_cahn)
    assert energy.clip_count == small_grid.nx + 1


def test_linear_dirichlet_accepts_order_or_float(service):
    grid = build_grid(1, 1.0, 1.0, 8, 8, q=2.0)
    x, lam = grid.coordinates()
    bc = BoundarySpec.from_values(grid, x ** 2 - lam)
    by_float, _ = service.solve_linear_dirichlet(grid, 0.3, bc)
    by_order, _ = service.solve_linear_dirichlet(grid, fractional_order(0.3), bc)
    np.testing.assert_array_equal(by_float.values, by_order.values)


def test_layer_is_monotone_and_odd(small_layer):
    field, report, _ = small_layer
    assert report.converged
    assert report.is_monotone()
    assert np.all(np.diff(field.trace) > 0)
    assert abs(field.trace[16]) < 1e-8
    np.testing.assert_allclose(field.trace, -field.trace[::-1], atol=1e-8)
    assert field.trace[0] > -1.0 - 1e-12 and field.trace[-1] < 1.0 + 1e-12


def test_layer_boundary_data(service, allen_cahn):
    grid = build_grid(1, 4.0, 4.0, 8, 4)
    bc = service.layer_boundary(grid, 0.5, allen_cahn)
    assert not bc.bottom.is_dirichlet
    flat_x = grid.coordinates()[0].reshape(-1)
    lateral_x = flat_x[grid.lateral_indices()]
    np.testing.assert_array_equal(bc.lateral, np.sign(lateral_x))
    top_x = flat_x[grid.top_indices()]
    np.testing.assert_allclose(bc.top, 2.0 / np.pi * np.arctan(top_x / 4.0), atol=1e-12)


def test_lift_multiplies_energy_by_width(service, small_layer):
    field, _, nl = small_layer
    lifted = service.lift_layer(field, 2)
    assert lifted.grid.n == 2
    assert lifted.grid.shape == (33, 33, 17)
    np.testing.assert_array_equal(lifted.values[5], field.values)
    flat = service.discrete_energy(field, nl).total
    assert service.discrete_energy(lifted, nl).total == pytest.approx(2.0 * field.grid.R * flat, rel=1e-10)


def test_lift_rejects(service, small_layer):
    field, _, _ = small_layer
    with pytest.raises(DomainError):
        service.lift_layer(field, 3)
    with pytest.raises(DomainError):
        service.lift_layer(service.lift_layer(field, 2), 2)


def test_gradient_bounds_of_affine_field(service):
    grid = build_grid(1, 2.0, 1.0, 8, 8, q=2.0)
    x, lam = grid.coordinates()
    bounds = service.gradient_bounds(Field(grid, 3.0 * x + 2.0 * lam, fractional_order(0.5)))
    assert bounds.grad_x == pytest.approx(3.0)
    assert bounds.flux == pytest.approx(2.0)
    assert 0.0 < bounds.lambda_grad < np.sqrt(13.0)


def test_sliding_profile_decays(service, small_layer):
    field, _, nl = small_layer
    profile = service.sliding_energy_profile(field, nl, [0.0, 2.0, 4.0], 2.0)
    assert [e.region.center for e in profile] == [0.0, 2.0, 4.0]
    decay = service.sliding_decay(profile)
    assert decay[0] == 1.0
    assert decay[-1] < decay[0]


def test_sliding_window_must_stay_inside(service, small_layer):
    field, _, nl = small_layer
    with pytest.raises(DomainError):
        service.sliding_energy_profile(field, nl, [7.0], 2.0)


@pytest.mark.parametrize('s', [0.25, 0.75])
def test_weighted_flux_of_power_field(service, s):
    grid = build_grid(1, 1.0, 1.0, 4, 16, q=2.0)
    lam = grid.coordinates()[1]
    bounds = service.gradient_bounds(Field(grid, lam ** (2.0 * s), fractional_order(s)))
    assert bounds.flux == pytest.approx(2.0 * s)
    assert bounds.grad_x == pytest.approx(0.0, abs=1e-14)


def test_gradient_bounds_of_explicit_layer(service):
    grid = build_grid(1, 10.0, 10.0, 80, 40, q=1.0)
    x, lam = grid.coordinates()
    bounds = service.gradient_bounds(Field(grid, explicit_half_layer(x, lam), fractional_order(0.5)))
    assert max(bounds) <= 1.0


@pytest.mark.slow
def test_sine_layer_matches_arctan(service):
    nl = make_nonlinearity('sine_halfs')
    field, report = service.solve_layer(0.5, nl, 40.0, Nx=512, Nlambda=256)
    assert report.converged
    near = np.abs(field.grid.x) <= 10.0
    error = np.max(np.abs(field.trace[near] - explicit_half_layer(field.grid.x[near], 0.0)))
    assert error <= 2e-2


@pytest.mark.parametrize('value, defect', [(1.0, 0.0), (-1.0, 0.0), (0.5, 0.375)])
def test_neumann_defect_of_constant_field(service, small_grid, allen_cahn, value, defect):
    assert service.neumann_defect(constant(small_grid, value, 0.4), allen_cahn) == pytest.approx(defect, abs=1e-14)


def _explicit_layer_defect(service, nx):
    grid = build_grid(1, 10.0, 10.0, nx, nx // 2, q=1.0)
    x, lam = grid.coordinates()
    field = Field(grid, explicit_half_layer(x, lam), fractional_order(0.5))
    return service.neumann_defect(field, make_nonlinearity('sine_halfs'))


def test_neumann_defect_of_explicit_layer_shrinks_under_refinement(service):
    defects = [_explicit_layer_defect(service, nx) for nx in (40, 80, 160)]
    for coarse, fine in zip(defects, defects[1:]):
        assert coarse / fine >= 1.5



@pytest.mark.parametrize('s', [0.25, 0.5, 0.75])
def test_layer_from_tanh_start_reaches_both_wells(service, allen_cahn, s):
    field, report = service.solve_layer(s, allen_cahn, 8.0, Nx=32, Nlambda=16)
    assert report.converged
    assert not report.stalled
    assert report.is_monotone()
    trace = field.trace
    assert trace[0] == pytest.approx(-1.0) and trace[-1] == pytest.approx(1.0)
    assert np.all(np.diff(trace) > 0)
    assert trace[24] > 0.3 and trace[8] < -0.3


@pytest.mark.slow
def test_sliding_layer_decays_on_quarter_window(service, allen_cahn):
    field, _ = service.solve_layer(0.5, allen_cahn, 32.0, Nx=256, Nlambda=128)
    profile = service.sliding_energy_profile(field, allen_cahn, np.linspace(0.0, 24.0, 7), 8.0)
    decay = service.sliding_decay(profile)
    assert all(b <= a + 1e-3 for a, b in zip(decay, decay[1:]))
    assert decay[-1] <= 0.2
