import numpy as np
import pytest

from levy_heat.constants import PROFILE_DRIFT
from levy_heat.errors import ValidationError
from levy_heat.functionals import LinearMap
from levy_heat.malliavin import (ConstantFunctional, SchemeEndState,
                                 SchemeFunctional, add_point, chain_rule_check,
                                 closed_form_linear_duality,
                                 compensated_integral,
                                 derivative_equation_residual,
                                 derivative_of_solution, duality_check,
                                 dyadic_pairs, m1pq_seminorm, norm_of,
                                 profile_depth, registered_duality_pairs,
                                 regularity_profile,
                                 remove_point, restrict_path,
                                 scheme_seminorm_profile,
                                 time_integral_commutation_check)
from levy_heat.noise import empty_path, sample_indexed_path
from levy_heat.spectral import laplacian_basis, unit_field
from levy_heat.types import (DualityPair, PathFunctional, PointInsertion,
                             PredictableBlock, TimeMeasure)

from .common import (fem, linear_problem, nonlinear_problem, single_jump,
                     small_model, small_reference, spectral)


def mark(mode: int, value: float = 1.0, n_modes: int = 8):
  return unit_field(laplacian_basis(n_modes), mode) * value


def test_add_and_remove_point():
  path = sample_indexed_path(small_model(rate=10.0), 1.0, 0, 0)
  insertion = PointInsertion(time=0.4, mark=mark(2, 0.7))
  bigger = add_point(path, insertion)
  assert len(bigger) == len(path) + 1
  assert np.all(np.diff(bigger.times) >= 0)
  smaller = remove_point(bigger, insertion)
  assert np.array_equal(smaller.times, path.times)
  assert np.array_equal(smaller.values, path.values)
  with pytest.raises(ValidationError):
    remove_point(path, insertion)


def test_inserted_point_goes_after_simultaneous_jumps():
  path = single_jump(0.5, 1, 1.0)
  bigger = add_point(path, PointInsertion(time=0.5, mark=mark(3, 2.0)))
  assert list(bigger.modes) == [1, 3]


def test_insertions_are_checked():
  path = empty_path(1.0, 4)
  with pytest.raises(ValidationError):
    add_point(path, PointInsertion(time=0.0, mark=mark(1, n_modes=4)))
  with pytest.raises(ValidationError):
    add_point(path, PointInsertion(time=0.5, mark=mark(6)))


def test_restrict_path_keeps_jumps_up_to_t():
  path = sample_indexed_path(small_model(rate=20.0), 1.0, 1, 0)
  early = restrict_path(path, 0.5)
  assert np.all(early.times <= 0.5)
  assert len(early) == int(np.sum(path.times <= 0.5))


def test_derivative_recursion_matches_rerun():
  path = sample_indexed_path(small_model(rate=10.0), 1.0, 2, 0)
  insertion = PointInsertion(time=0.33, mark=mark(2, 1.3))
  for disc in (spectral(8, 16), fem(8, 16)):
    for t in (0.5, 1.0):
      rerun, recursion = derivative_of_solution(nonlinear_problem(), disc,
                                                path, insertion, t)
      assert norm_of(rerun - recursion) <= 1e-10 * max(1.0, norm_of(rerun))


def test_derivative_vanishes_before_insertion():
  path = sample_indexed_path(small_model(rate=10.0), 1.0, 2, 1)
  insertion = PointInsertion(time=0.6, mark=mark(1))
  rerun, recursion = derivative_of_solution(nonlinear_problem(),
                                            spectral(8, 16), path, insertion,
                                            0.3)
  assert norm_of(rerun) == 0.0
  assert norm_of(recursion) == 0.0


def test_linear_derivative_does_not_depend_on_the_path():
  insertion = PointInsertion(time=0.3, mark=mark(1))
  disc = spectral(8, 16)
  values = [
      derivative_of_solution(linear_problem(), disc,
                             sample_indexed_path(small_model(), 1.0, 3, i),
                             insertion, 1.0)[0].coeffs for i in range(3)
  ]
  assert np.allclose(values[0], values[1])
  assert np.allclose(values[0], values[2])


def test_chain_rule_and_commutation():
  path = sample_indexed_path(small_model(rate=10.0), 1.0, 4, 0)
  insertion = PointInsertion(time=0.45, mark=mark(1, -0.8))
  functional = SchemeFunctional(
      problem=nonlinear_problem(),
      discretization=spectral(8, 16),
      functional=PathFunctional(measures=[TimeMeasure(atoms=[(1.0, 1.0)])],
                                outer=LinearMap(directions=[mark(1)])))
  assert chain_rule_check(functional, np.tanh, path, insertion) <= 1e-12
  gap = time_integral_commutation_check(nonlinear_problem(), spectral(8, 16),
                                        path, insertion,
                                        TimeMeasure(atoms=[(0.7, 1.0)],
                                                    density=1.0), mark(1))
  assert gap <= 1e-10


def test_derivative_equation_without_drift():
  path = sample_indexed_path(small_model(rate=10.0), 1.0, 5, 0)
  insertion = PointInsertion(time=0.25, mark=mark(3, 0.5))
  residual = derivative_equation_residual(linear_problem(), path, insertion,
                                          1.0, small_reference(8, 64))
  assert residual <= 1e-12
  assert derivative_equation_residual(linear_problem(), path, insertion, 0.1,
                                      small_reference(8, 64)) == 0.0


def test_derivative_equation_residual_shrinks():
  path = sample_indexed_path(small_model(rate=10.0), 1.0, 5, 1)
  insertion = PointInsertion(time=0.25, mark=mark(1, 2.0))
  coarse = derivative_equation_residual(nonlinear_problem(), path, insertion,
                                        1.0, small_reference(8, 64))
  fine = derivative_equation_residual(nonlinear_problem(), path, insertion,
                                      1.0, small_reference(8, 128))
  assert 0 < fine < coarse


def test_compensated_integral_of_empty_path():
  model = small_model(rate=3.0)
  block = PredictableBlock(start=0.0, end=1.0, value=1.0)
  assert compensated_integral(empty_path(1.0, 8), [block],
                              model) == pytest.approx([-3.0])
  weighted = PredictableBlock(start=0.0,
                              end=1.0,
                              value=1.0,
                              mark_weighted=True)
  # symmetric amplitudes compensate to zero
  assert compensated_integral(empty_path(1.0, 8), [weighted],
                              model) == pytest.approx([0.0])


def test_blocks_must_be_predictable():
  pair = DualityPair(name='peeking',
                     functional=ConstantFunctional(),
                     blocks=[
                         PredictableBlock(start=0.2,
                                          end=0.5,
                                          value=1.0,
                                          scale=lambda p: 1.0,
                                          observation_time=0.4)
                     ])
  with pytest.raises(ValidationError):
    duality_check(pair, small_model(), 1.0, 10, 0)


def test_linear_duality_against_closed_form():
  problem, disc, model = linear_problem(), spectral(8, 16), small_model()
  pairs = registered_duality_pairs(problem, disc, model)
  assert [p.name for p in pairs] == [
      'linear-end-value', 'quadratic-end-value', 'bilinear-predictable',
      'time-average', 'constant'
  ]
  linear = pairs[0]
  assert linear.closed_form is not None
  result = duality_check(linear, model, 1.0, 400, 11)
  assert result.rhs == pytest.approx(linear.closed_form, rel=1e-8)
  assert abs(result.lhs - linear.closed_form) <= 4 * result.lhs_standard_error


def test_constant_functional_has_zero_duality():
  pairs = registered_duality_pairs(linear_problem(), spectral(8, 16),
                                   small_model())
  result = duality_check(pairs[-1], small_model(), 1.0, 400, 3)
  assert result.rhs == 0.0
  assert abs(result.lhs) <= 4 * result.lhs_standard_error


def test_closed_form_needs_linear_spectral_setting():
  block = PredictableBlock(start=0.25, end=0.75, value=1.0, modes=(1,))
  with pytest.raises(ValidationError):
    closed_form_linear_duality(nonlinear_problem(), spectral(8, 16),
                               small_model(), block)
  with pytest.raises(ValidationError):
    closed_form_linear_duality(linear_problem(), fem(8, 16), small_model(),
                               block)
  assert closed_form_linear_duality(linear_problem(), spectral(8, 16),
                                    small_model(), block, mode=9) == 0.0


def test_seminorm_of_linear_end_state_is_deterministic():
  functional = SchemeEndState(problem=linear_problem(),
                              discretization=spectral(4, 8))
  model = small_model(n_modes=4)
  mean_square = m1pq_seminorm(functional, 2, 2.0, model, 1.0, 3, 0, n_nodes=8)
  maximum = m1pq_seminorm(functional, np.inf, 2.0, model, 1.0, 3, 0,
                          n_nodes=8)
  assert mean_square.value > 0
  assert maximum.value == pytest.approx(mean_square.value)
  assert mean_square.standard_error == pytest.approx(0.0, abs=1e-12)


def test_scheme_seminorm_stays_bounded_under_refinement():
  model = small_model(n_modes=4)
  profile = scheme_seminorm_profile(linear_problem(),
                                    [spectral(4, 8), spectral(8, 32)], model,
                                    2.0, 2, 0, n_nodes=8)
  assert len(profile) == 2
  assert profile[0].value > 0
  assert 0.5 < profile[1].value / profile[0].value < 1.5


def test_seminorm_arguments_are_checked():
  functional = ConstantFunctional()
  model = small_model()
  assert m1pq_seminorm(functional, 2, 2.0, model, 1.0, 2, 0,
                       n_nodes=4).value == 0.0
  with pytest.raises(ValidationError):
    m1pq_seminorm(functional, 3, 2.0, model, 1.0, 2, 0)
  with pytest.raises(ValidationError):
    m1pq_seminorm(functional, 2, 5.0, model, 1.0, 2, 0)
  with pytest.raises(ValidationError):
    m1pq_seminorm(functional, 2, 2.0, model, 1.0, 1, 0)


def test_regularity_profile():
  problem, model = linear_problem(), small_model(n_modes=4)
  pairs = [(0.25, 0.5), (0.25, 1.0), (0.5, 0.75)]
  a = regularity_profile(problem, small_reference(8, 64), model, pairs, 2, 0)
  b = regularity_profile(problem, small_reference(8, 64), model, pairs, 2, 9)
  assert a > 0
  assert a == pytest.approx(b)
  with pytest.raises(ValidationError):
    regularity_profile(problem, spectral(8, 16), model, [(0.5, 0.5)], 1, 0)
  with pytest.raises(ValidationError):
    regularity_profile(problem, spectral(8, 16), model, [(0.0, 0.5)], 1, 0)


def test_dyadic_pairs():
  pairs = dyadic_pairs(2.0, 2)
  assert pairs == [(0.5, 1.0), (0.5, 1.5), (0.5, 2.0), (1.0, 1.5), (1.0, 2.0),
                   (1.5, 2.0)]
  assert len(dyadic_pairs(1.0, 3)) == 6 + 4 + 2
  assert set(dyadic_pairs(1.0, 3)) < set(dyadic_pairs(1.0, 4))
  assert profile_depth(1.0, 0.5) == 7
  assert profile_depth(0.25, 0.5) == 5
  with pytest.raises(ValidationError):
    dyadic_pairs(1.0, 1)


def test_regularity_profile_under_grid_refinement():
  problem, model = linear_problem(), small_model(n_modes=16, rate=0.0)
  marks = [mark(1, n_modes=16)]

  def profile(pairs):
    return regularity_profile(problem, small_reference(16, 256), model, pairs,
                              1, 0, marks)

  def heat_profile(gap):
    u = np.pi**2 * gap
    return np.exp(-u) * u**0.25

  quarters = profile([(0.25, 0.5), (0.25, 1.0), (0.5, 0.75), (0.5, 1.0)])
  assert quarters == pytest.approx(heat_profile(0.25))
  assert profile(dyadic_pairs(1.0, 3)) == pytest.approx(heat_profile(0.125))

  depth = profile_depth(1.0, 0.5)
  coarse = profile(dyadic_pairs(1.0, depth))
  fine = profile(dyadic_pairs(1.0, depth + 1))
  assert abs(fine - coarse) / coarse < PROFILE_DRIFT
  assert fine == pytest.approx(np.exp(-0.25) * 0.25**0.25, rel=5e-3)
  assert (fine - quarters) / quarters > PROFILE_DRIFT
