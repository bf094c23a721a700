from typing import List, Sequence

from .errors import ValidationError
from .functionals import (BilinearProductMap, ConstantMap, LinearMap,
                          OuterMap, QuadraticMap)
from .spectral import laplacian_basis, unit_field
from .types import (Backend, Discretization, DiscretizationConfig, Drift,
                    ExperimentConfig, FunctionalConfig, InitialValue,
                    LevyModel, NoiseConfig, PathFunctional, Problem,
                    ProblemConfig, QuadraticInitialValue, ReferenceSettings,
                    ResolutionLadder, SineDrift, SpectralField, SweepMode,
                    TimeMeasure, ZeroDrift, ZeroInitialValue)
from .validators import validate_drift

SMOOTHED_QUADRATIC_FACTOR = 1.0


def unit_direction(mode: int, n_modes: int = 0) -> SpectralField:
  """e_mode as a spectral field with at least ``mode`` coefficients."""
  return unit_field(laplacian_basis(max(mode, n_modes, 1)), mode)


class ProblemBuilder:
  def __init__(self, config: ProblemConfig):
    self.config = config

  def drift(self) -> Drift:
    name = self.config.drift
    if name == 'zero':
      drift = ZeroDrift()
    elif name == 'sine':
      drift = SineDrift(amplitude=self.config.drift_amplitude)
    else:
      raise ValidationError('Unknown drift {}'.format(name))
    validate_drift(drift)
    return drift

  def initial(self) -> InitialValue:
    name = self.config.initial
    if name == 'zero': return ZeroInitialValue()
    if name == 'quadratic':
      return QuadraticInitialValue(amplitude=self.config.initial_amplitude)
    raise ValidationError('Unknown initial value {}'.format(name))

  def build(self) -> Problem:
    return Problem(beta=self.config.beta,
                   horizon=self.config.horizon,
                   drift=self.drift(),
                   initial=self.initial(),
                   delta=self.config.delta)


class ModelBuilder:
  def __init__(self, config: NoiseConfig, beta: float):
    self.config = config
    self.beta = beta

  def build(self) -> LevyModel:
    return LevyModel(rate=self.config.rate,
                     mode_decay=self.config.mode_decay,
                     n_modes=self.config.n_modes,
                     beta=self.beta,
                     amplitudes=self.config.amplitudes,
                     amplitude_weights=self.config.amplitude_weights)


class LadderBuilder:
  """
  Space sweeps use resolution n = level with k = T/pinned, time sweeps use
  k = T/level with n = pinned, and diagonal sweeps n = level with
  k = T/level².
  """

  def __init__(self, config: DiscretizationConfig, horizon: float):
    self.config = config
    self.horizon = horizon

  def rung(self, level: int) -> Discretization:
    mode = self.config.sweep
    pinned = self.config.pinned
    if mode is SweepMode.SPACE:
      resolution, steps = level, pinned
    elif mode is SweepMode.TIME:
      resolution, steps = pinned, level
    else:
      resolution, steps = level, level**2
    return Discretization(backend=self.config.backend,
                          resolution=resolution,
                          time_step=self.horizon / steps,
                          horizon=self.horizon)

  def reference(self) -> ReferenceSettings:
    return ReferenceSettings(n_modes=self.config.reference_modes,
                             n_substeps=self.config.reference_substeps)

  def build(self) -> ResolutionLadder:
    return ResolutionLadder(rungs=[self.rung(l) for l in self.config.levels],
                            reference=self.reference(),
                            sweep_mode=self.config.sweep)


class FunctionalBuilder:
  """
  Builds the test functional of a config. With one time atom per mode,
  component i integrates against the i-th atom; otherwise every component
  uses all atoms. The density applies to every component.
  """

  def __init__(self, config: FunctionalConfig):
    self.config = config

  def directions(self) -> List[SpectralField]:
    n = max(self.config.modes)
    return [unit_direction(m, n) for m in self.config.modes]

  def measures(self) -> List[TimeMeasure]:
    atoms, modes = self.config.atoms, self.config.modes
    if len(atoms) == len(modes):
      return [
          TimeMeasure(atoms=[(t, 1.0)], density=self.config.density)
          for t in atoms
      ]
    shared = [(t, 1.0) for t in atoms]
    return [
        TimeMeasure(atoms=shared, density=self.config.density) for _ in modes
    ]

  def outer(self) -> OuterMap:
    name = self.config.name
    directions = self.directions()
    if name == 'linear': return LinearMap(directions=directions)
    if name == 'bilinear': return BilinearProductMap(directions=directions)
    if name == 'quadratic': return QuadraticMap(directions=directions)
    if name == 'smoothed-quadratic':
      return QuadraticMap(directions=directions,
                          smoothing=SMOOTHED_QUADRATIC_FACTOR)
    if name == 'constant': return ConstantMap()
    raise ValidationError('Unknown functional {}'.format(name))

  def build(self) -> PathFunctional:
    return PathFunctional(measures=self.measures(),
                          outer=self.outer(),
                          name=self.config.name)


class ExperimentBuilder:
  """Everything a subcommand needs, built once from a validated config."""

  def __init__(self, config: ExperimentConfig):
    self.config = config
    self.problem = ProblemBuilder(config.problem).build()
    self.model = ModelBuilder(config.noise, config.problem.beta).build()
    self.ladder = LadderBuilder(config.discretization,
                                config.problem.horizon).build()
    self.functional = FunctionalBuilder(config.functional).build()

  def covariance_directions(self) -> Sequence[SpectralField]:
    cov = self.config.covariance
    n = max(cov.psi1_mode, cov.psi2_mode)
    return unit_direction(cov.psi1_mode, n), unit_direction(cov.psi2_mode, n)

  def identity_discretization(self) -> Discretization:
    """The small resolution the exact identity checks run on."""
    malliavin = self.config.malliavin
    return Discretization(backend=self.config.discretization.backend,
                          resolution=malliavin.modes,
                          time_step=self.problem.horizon / malliavin.steps,
                          horizon=self.problem.horizon)

  def identity_model(self) -> LevyModel:
    noise = self.config.noise
    return LevyModel(rate=noise.rate,
                     mode_decay=noise.mode_decay,
                     n_modes=self.config.malliavin.modes,
                     beta=self.problem.beta,
                     amplitudes=noise.amplitudes,
                     amplitude_weights=noise.amplitude_weights)

  def duality_model(self) -> LevyModel:
    noise = self.config.noise
    malliavin = self.config.malliavin
    return LevyModel(rate=malliavin.duality_rate,
                     mode_decay=noise.mode_decay,
                     n_modes=malliavin.duality_modes,
                     beta=self.problem.beta,
                     amplitudes=noise.amplitudes,
                     amplitude_weights=noise.amplitude_weights)

  def duality_discretization(self) -> Discretization:
    malliavin = self.config.malliavin
    return Discretization(backend=Backend.SPECTRAL,
                          resolution=malliavin.duality_modes,
                          time_step=self.problem.horizon / malliavin.steps,
                          horizon=self.problem.horizon)
