import numpy as np
import pytest

from levy_heat.errors import ValidationError
from levy_heat.fem import make_mesh, project_l2
from levy_heat.functionals import (BilinearProductMap, ConstantMap, LinearMap,
                                   QuadraticMap, covariance_estimate,
                                   covariance_triple, dirac, eval_functional,
                                   finite_difference_slope, inner_product,
                                   integrate_path, projections)
from levy_heat.noise import empty_path, sample_indexed_path
from levy_heat.solvers import run_reference, run_scheme
from levy_heat.spectral import laplacian_basis, unit_field
from levy_heat.types import (PathFunctional, QuadraticInitialValue,
                             SpectralField, TimeMeasure)

from .common import (fem, linear_problem, single_jump, small_model,
                     small_reference, spectral)


def e(j: int, n_modes: int = 8):
  return unit_field(laplacian_basis(n_modes), j)


def test_linear_and_bilinear_maps():
  linear = LinearMap(directions=[e(1), e(2)])
  assert linear.value(np.array([1.0, 2.0])) == 3.0
  assert np.array_equal(linear.derivative(np.array([1.0, 2.0])), [1.0, 1.0])
  product = BilinearProductMap(directions=[e(1), e(2)])
  assert product.value(np.array([3.0, 2.0])) == 6.0
  assert np.array_equal(product.derivative(np.array([3.0, 2.0])), [2.0, 3.0])
  assert product.lipschitz_constant() == pytest.approx(np.sqrt(2.0))
  with pytest.raises(ValidationError):
    BilinearProductMap(directions=[e(1)])


def test_quadratic_map_checks_arguments():
  with pytest.raises(ValidationError):
    QuadraticMap(directions=[e(1)], weights=[1.0, 2.0])
  with pytest.raises(ValidationError):
    QuadraticMap(directions=[e(1)], smoothing=-1.0)
  assert QuadraticMap(directions=[e(1)], smoothing=0.5).lipschitz_constant(
  ) is None


def test_constant_map_ignores_the_path():
  outer = ConstantMap(constant=2.5)
  assert outer.n_components == 0
  assert outer.value(np.zeros(0)) == 2.5


def test_finite_differences_of_outer_maps():
  point, direction = [0.3, -0.7], [1.0, 0.5]
  slope, errors = finite_difference_slope(
      QuadraticMap(directions=[e(1), e(2)], weights=[1.0, 2.0]), point,
      direction)
  assert slope is None
  assert max(errors) < 1e-10
  slope, _ = finite_difference_slope(
      QuadraticMap(directions=[e(1), e(2)], smoothing=0.8), point, direction)
  assert 1.8 <= slope <= 2.2


def test_integrate_trajectory():
  record = run_scheme(linear_problem(), spectral(8, 10),
                      single_jump(0.25, 3, 1.5))
  point = integrate_path(record, dirac(0.15, 2.0))
  assert np.allclose(point.coeffs, 2.0 * record.values[1])
  lebesgue = integrate_path(record, TimeMeasure(density=1.0))
  assert np.allclose(lebesgue.coeffs, 0.1 * record.values[:10].sum(axis=0))
  with pytest.raises(ValidationError):
    integrate_path(record, dirac(1.5))
  with pytest.raises(ValidationError):
    integrate_path(record, TimeMeasure(density=-1.0))


def test_integrate_fem_trajectory_keeps_the_mesh():
  record = run_scheme(linear_problem(), fem(8, 10), single_jump(0.25, 1, 1.0))
  total = integrate_path(record, TimeMeasure(atoms=[(0.5, 1.0)], density=1.0))
  assert len(total.nodal_values) == 7
  assert total.mesh.n_cells == 8


def test_integrate_reference_against_heat_decay():
  problem = linear_problem()
  problem.initial = QuadraticInitialValue(amplitude=1.0)
  record = run_reference(problem, empty_path(1.0, 8), small_reference(8, 1024))
  total = integrate_path(record, TimeMeasure(density=1.0))
  lam = np.pi**2
  initial = problem.initial.coefficients(8)[0]
  assert total.coeffs[0] == pytest.approx(initial * -np.expm1(-lam) / lam,
                                          rel=1e-2)


def test_projections_need_enough_measures():
  record = run_scheme(linear_problem(), spectral(8, 10),
                      single_jump(0.25, 1, 1.0))
  functional = PathFunctional(measures=[dirac(0.5)],
                              outer=LinearMap(directions=[e(1), e(2)]))
  with pytest.raises(ValidationError):
    projections(functional, record)


def test_spectral_and_fem_functionals_agree_roughly():
  path = sample_indexed_path(small_model(), 1.0, 0, 3)
  functional = PathFunctional(measures=[TimeMeasure(density=1.0)],
                              outer=QuadraticMap(directions=[e(1)]))
  a = eval_functional(functional, run_scheme(linear_problem(),
                                             spectral(32, 64), path))
  b = eval_functional(functional, run_scheme(linear_problem(), fem(32, 64),
                                             path))
  assert a == pytest.approx(b, rel=5e-2, abs=1e-6)


def test_covariance_triple_rejects_time_zero():
  with pytest.raises(ValidationError):
    covariance_triple(0.0, 0.5, e(1), e(1), 1.0)
  f1, f2, f3 = covariance_triple(0.25, 0.5, e(1), e(2), 1.0)
  assert f1.outer.n_components == 2
  assert f2.measures[0].atoms == [(0.25, 1.0)]
  assert f3.measures[0].atoms == [(0.5, 1.0)]


def test_covariance_estimate_by_sampling():
  rng = np.random.default_rng(12)
  n = 4000
  z1, z2 = rng.standard_normal(n), rng.standard_normal(n)
  f2, f3 = z1, z1 + z2
  cov, se = covariance_estimate(f2 * f3, f2, f3)
  assert abs(cov - 1.0) <= 4 * se
  with pytest.raises(ValidationError):
    covariance_estimate([1.0], [1.0], [1.0])


def test_inner_products_on_both_backends():
  v = SpectralField(basis=laplacian_basis(3), coeffs=np.array([1.0, 2.0, 3.0]))
  assert inner_product(v, e(2, 8)) == 2.0
  assert inner_product(v, e(5, 8)) == 0.0
  mesh = make_mesh(32)
  projected = project_l2(e(1), mesh)
  assert inner_product(projected, e(1)) == pytest.approx(1.0, rel=1e-2)
  assert inner_product(projected, e(2)) == pytest.approx(0.0, abs=1e-2)
