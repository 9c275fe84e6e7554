import numpy as np
import pytest

from core.errors import DomainError
from core.kernel_math import fractional_order
from core.weighted_grid import (build_grid, default_grading, dump_field, field_gradient, interpolate_field,
                                interpolate_gradient, load_field, rescale_field, weight_integral,
                                weight_integrals)
from models.grid import Field


def test_graded_lambda_nodes():
    grid = build_grid(1, 1.0, 1.0, 4, 4, q=2.0)
    np.testing.assert_allclose(grid.lambda_nodes, [0.0, 1 / 16, 1 / 4, 9 / 16, 1.0])
    np.testing.assert_allclose(grid.x, [-1.0, -0.5, 0.0, 0.5, 1.0])


def test_node_count():
    grid = build_grid(2, 1.0, 1.0, 64, 32)
    assert grid.num_nodes == 65 * 65 * 33
    assert grid.cell_shape == (64, 64, 32)


@pytest.mark.parametrize('args', [
    (3, 1.0, 1.0, 8, 8, 1.0),
    (1, -1.0, 1.0, 8, 8, 1.0),
    (1, 1.0, 1.0, 2, 8, 1.0),
    (1, 1.0, 1.0, 8, 8, 0.5),
])
def test_build_grid_rejects(args):
    with pytest.raises(DomainError):
        build_grid(*args)


def test_default_grading():
    assert default_grading(0.25) == 2.0
    assert default_grading(0.75) == 1.0
    assert default_grading(0.1) == 4.0


def test_weight_integrals():
    assert weight_integral(0.0, 0.5, 0.0) == pytest.approx(0.5)
    assert weight_integral(0.0, 1.0, -0.5) == pytest.approx(2.0)
    assert weight_integral(1.0, 4.0, 0.5) == pytest.approx(14.0 / 3.0)
    with pytest.raises(DomainError):
        weight_integral(0.0, 1.0, 1.0)


def test_cell_weights_sum_to_full_integral():
    grid = build_grid(1, 1.0, 2.0, 4, 16, q=2.0)
    weights = weight_integrals(grid, -0.5)
    assert weights.integrals.sum() == pytest.approx(2.0 * np.sqrt(2.0))
    assert np.all(weights.centroids > grid.lambda_nodes[:-1])
    assert np.all(weights.centroids < grid.lambda_nodes[1:])


def test_affine_gradient():
    grid = build_grid(1, 2.0, 1.0, 8, 8, q=2.0)
    x, lam = grid.coordinates()
    field = Field(grid, 3.0 * x + 2.0 * lam, fractional_order(0.5))
    gradient = field_gradient(field)
    assert gradient.shape == (8, 8, 2)
    np.testing.assert_allclose(gradient[..., 0], 3.0)
    np.testing.assert_allclose(gradient[..., 1], 2.0)


def test_interpolation_reproduces_affine_fields():
    grid = build_grid(2, 1.0, 1.0, 6, 6, q=1.5)
    x1, x2, lam = grid.coordinates()
    field = Field(grid, 1.0 - x1 + 4.0 * x2 + 0.5 * lam, fractional_order(0.3))
    points = np.array([[0.1, -0.3, 0.2], [0.9, 0.9, 0.95], [-0.5, 0.0, 0.01]])
    expected = 1.0 - points[:, 0] + 4.0 * points[:, 1] + 0.5 * points[:, 2]
    np.testing.assert_allclose(interpolate_field(field, points), expected)
    np.testing.assert_allclose(interpolate_gradient(field, points), np.tile([-1.0, 4.0, 0.5], (3, 1)))


def test_rescale_field():
    grid = build_grid(1, 8.0, 8.0, 16, 8, q=2.0)
    x, lam = grid.coordinates()
    field = Field(grid, x * lam, fractional_order(0.25))
    scaled = rescale_field(field, 8.0)
    assert scaled.grid.R == 1.0
    assert scaled.grid.Lambda == 1.0
    np.testing.assert_array_equal(scaled.values, field.values)
    with pytest.raises(DomainError):
        rescale_field(field, 0.0)


@pytest.mark.parametrize('binary', [False, True])
def test_field_dump(tmp_path, binary):
    grid = build_grid(1, 2.0, 3.0, 8, 6, q=1.5)
    x, lam = grid.coordinates()
    field = Field(grid, np.sin(x) * np.exp(-lam) + 0.1, fractional_order(0.3))
    path = dump_field(field, str(tmp_path / 'layer.csx'), binary=binary)
    loaded = load_field(path)
    assert loaded.s == 0.3
    assert loaded.grid.shape == grid.shape
    np.testing.assert_array_equal(loaded.grid.lambda_nodes, grid.lambda_nodes)
    np.testing.assert_array_equal(loaded.values, field.values)


def test_text_dump_header(tmp_path):
    grid = build_grid(1, 2.0, 3.0, 4, 4)
    path = dump_field(Field(grid, np.zeros(grid.shape), fractional_order(0.5)), str(tmp_path / 'f.csx'))
    with open(path, encoding='utf-8') as f:
        assert f.readline().split() == ['CSX', '1', '2.0', '3.0', '0.5', '1.0', '4', '4']


def test_load_rejects_other_files(tmp_path):
    path = tmp_path / 'other.txt'
    path.write_text("hello world\n1\n")
    with pytest.raises(DomainError):
        load_field(str(path))
