import numpy as np

from levy_heat.types import (Backend, Discretization, JumpPath, LevyModel,
                             Problem, QuadraticInitialValue, ReferenceSettings,
                             SineDrift, ZeroDrift, ZeroInitialValue)


def assert_objects_equal(a, b):
  assert a.__dict__.keys() == b.__dict__.keys()
  for key in a.__dict__:
    x, y = a.__dict__[key], b.__dict__[key]
    if isinstance(x, np.ndarray):
      assert np.array_equal(x, y), key
    else:
      assert x == y, key


def nonlinear_problem(horizon: float = 1.0, beta: float = 0.5) -> Problem:
  return Problem(beta=beta,
                 horizon=horizon,
                 drift=SineDrift(amplitude=0.5),
                 initial=QuadraticInitialValue(amplitude=1.0))


def linear_problem(horizon: float = 1.0, beta: float = 0.5) -> Problem:
  return Problem(beta=beta,
                 horizon=horizon,
                 drift=ZeroDrift(),
                 initial=ZeroInitialValue())


def small_model(n_modes: int = 8, rate: float = 5.0,
                beta: float = 0.5) -> LevyModel:
  return LevyModel(rate=rate, mode_decay=1.1, n_modes=n_modes, beta=beta)


def spectral(resolution: int, steps: int, horizon: float = 1.0) -> Discretization:
  return Discretization(backend=Backend.SPECTRAL,
                        resolution=resolution,
                        time_step=horizon / steps,
                        horizon=horizon)


def fem(resolution: int, steps: int, horizon: float = 1.0) -> Discretization:
  return Discretization(backend=Backend.FEM,
                        resolution=resolution,
                        time_step=horizon / steps,
                        horizon=horizon)


def small_reference(n_modes: int = 16, n_substeps: int = 256
                   ) -> ReferenceSettings:
  return ReferenceSettings(n_modes=n_modes, n_substeps=n_substeps)


def single_jump(time: float, mode: int, value: float, n_modes: int = 8,
                horizon: float = 1.0) -> JumpPath:
  return JumpPath(horizon=horizon,
                  times=[time],
                  modes=[mode],
                  values=[value],
                  n_modes=n_modes)
