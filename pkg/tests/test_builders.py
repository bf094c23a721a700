import numpy as np
import pytest

from levy_heat.builders import (ExperimentBuilder, FunctionalBuilder,
                                LadderBuilder, unit_direction)
from levy_heat.errors import ValidationError
from levy_heat.functionals import BilinearProductMap, QuadraticMap
from levy_heat.parsers import parse_config
from levy_heat.types import Backend, SineDrift, SweepMode, ZeroDrift


def ladder_for(sweep: str):
  config = parse_config('[discretization]\nsweep = {}\nlevels = 4, 8\n'
                        'pinned = 32\n'.format(sweep))
  return LadderBuilder(config.discretization, 1.0).build()


def test_space_time_and_diagonal_ladders():
  space = ladder_for('space')
  assert [(r.resolution, r.time_step) for r in space.rungs] == [(4, 1 / 32),
                                                                (8, 1 / 32)]
  assert space.scales() == [0.25, 0.125]
  time = ladder_for('time')
  assert [(r.resolution, r.time_step) for r in time.rungs] == [(32, 1 / 4),
                                                               (32, 1 / 8)]
  assert time.scale_name == 'k'
  assert time.scales() == [0.25, 0.125]
  diagonal = ladder_for('diagonal')
  assert [r.time_step for r in diagonal.rungs] == [1 / 16, 1 / 64]
  assert diagonal.sweep_mode is SweepMode.DIAGONAL


def test_experiment_builder():
  builder = ExperimentBuilder(
      parse_config('[problem]\ndrift = zero\n[noise]\nn_modes = 64\n'
                   '[malliavin]\nmodes = 8\nsteps = 16\nduality_modes = 4\n'))
  assert isinstance(builder.problem.drift, ZeroDrift)
  assert builder.model.n_modes == 64
  assert builder.ladder.reference.n_modes == 512
  disc = builder.identity_discretization()
  assert (disc.resolution, disc.n_steps) == (8, 16)
  assert builder.identity_model().n_modes == 8
  assert builder.duality_model().n_modes == 4
  assert builder.duality_discretization().backend is Backend.SPECTRAL
  psi1, psi2 = builder.covariance_directions()
  assert np.array_equal(psi1.coeffs, [1.0])


def test_default_problem_is_nonlinear():
  builder = ExperimentBuilder(parse_config(''))
  assert isinstance(builder.problem.drift, SineDrift)
  assert builder.functional.name == 'linear'


def test_functional_measures():
  config = parse_config('[functional]\nname = bilinear\nmodes = 1, 3\n'
                        'atoms = 0.5, 1.0\n')
  functional = FunctionalBuilder(config.functional).build()
  assert isinstance(functional.outer, BilinearProductMap)
  assert [m.atoms for m in functional.measures] == [[(0.5, 1.0)],
                                                    [(1.0, 1.0)]]
  shared = parse_config('[functional]\nname = smoothed-quadratic\nmodes = 2\n'
                        'atoms = 0.5, 1.0\ndensity = 0.5\n')
  functional = FunctionalBuilder(shared.functional).build()
  assert isinstance(functional.outer, QuadraticMap)
  assert functional.outer.smoothing > 0
  assert functional.measures[0].atoms == [(0.5, 1.0), (1.0, 1.0)]
  assert functional.measures[0].density == 0.5


def test_unknown_names_are_rejected():
  with pytest.raises(ValidationError):
    ExperimentBuilder(parse_config('[problem]\ndrift = cubic\n'))
  with pytest.raises(ValidationError):
    FunctionalBuilder(
        parse_config('[functional]\nname = cubic\n').functional).build()


def test_unit_direction_pads():
  assert np.array_equal(unit_direction(2, 4).coeffs, [0.0, 1.0, 0.0, 0.0])
  assert unit_direction(3).n_modes == 3
