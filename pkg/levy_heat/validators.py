import logging
from typing import Sequence

import numpy as np

from .constants import MAX_FUNCTIONAL_COMPONENTS, NOISE_MODES_PER_INVERSE_H
from .errors import ValidationError
from .types import Backend, Drift, ExperimentConfig, LevyModel, SweepMode

logger = logging.getLogger(__name__)


def validate_beta(beta: float):
  if not 0 < beta <= 1:
    raise ValidationError('β must lie in (0, 1], got {}'.format(beta))


def validate_horizon(horizon: float):
  if not horizon > 0:
    raise ValidationError('Horizon must be positive, got {}'.format(horizon))


def validate_amplitude_law(amplitudes: Sequence[float],
                           weights: Sequence[float]):
  amplitudes = np.asarray(amplitudes, dtype=float)
  weights = np.asarray(weights, dtype=float)
  if len(amplitudes) == 0 or amplitudes.shape != weights.shape:
    raise ValidationError(
        'Amplitude law needs as many weights as atoms, got {} and {}'.format(
            len(amplitudes), len(weights)))
  if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
    raise ValidationError(
        'Amplitude weights must be nonnegative and sum to 1, got {}'.format(
            weights.tolist()))

  order = np.argsort(amplitudes)
  mirrored = np.argsort(-amplitudes)
  if not (np.allclose(amplitudes[order], -amplitudes[mirrored], atol=1e-12) and
          np.allclose(weights[order], weights[mirrored], atol=1e-12)):
    raise ValidationError('Amplitude law must be symmetric, got {} with {}'.format(
        amplitudes.tolist(), weights.tolist()))


def validate_drift(drift: Drift, n_points: int = 1001):
  """
  |f'| and |f''| sampled on [-2π, 2π] must stay within the drift's Lipschitz
  bound.
  """
  u = np.linspace(-2 * np.pi, 2 * np.pi, n_points)
  bound = drift.lipschitz_bound
  for order, values in ((1, drift.df(u)), (2, drift.d2f(u))):
    worst = float(np.max(np.abs(values)))
    if worst > bound * (1 + 1e-12):
      raise ValidationError(
          'Drift {} has derivative {} of size {} above its bound {}'.format(
              drift.name, order, worst, bound))


def validate_levy_model(model: LevyModel):
  if model.rate < 0:
    raise ValidationError('Jump rate must be nonnegative, got {}'.format(
        model.rate))
  if not model.mode_decay > 1:
    raise ValidationError('Mode decay α must exceed 1, got {}'.format(
        model.mode_decay))
  if model.n_modes < 1:
    raise ValidationError('Noise needs at least one mode, got {}'.format(
        model.n_modes))
  validate_beta(model.beta)
  validate_amplitude_law(model.amplitudes, model.amplitude_weights)


def validate_q(q: float, beta: float):
  """Integrability index of the time integral in the M^(1,p,q) seminorm."""
  upper = np.inf if beta >= 1 else 2.0 / (1.0 - beta)
  if not 1 < q < upper:
    raise ValidationError(
        'q must lie in (1, {}) for β = {} (Regularity I needs q < 2/(1 - β)), '
        'got {}'.format(upper, beta, q))


def validate_noise_resolution(n_modes: int, h_min: float,
                              strict: bool = False) -> bool:
  """
  Checks that the noise spectrum reaches the finest spatial resolution.
  Returns False and logs a warning when it does not, unless ``strict``.
  """
  needed = NOISE_MODES_PER_INVERSE_H / h_min
  if n_modes >= needed - 1e-9: return True
  message = 'Noise has {} modes, below {:g} for the finest h = {:g}'.format(
      n_modes, needed, h_min)
  if strict: raise ValidationError(message)
  logger.warning(message)
  return False


def validate_levels(levels: Sequence[int]):
  if len(levels) == 0:
    raise ValidationError('Ladder needs at least one level')
  if any(l < 2 for l in levels):
    raise ValidationError('Ladder levels must be at least 2, got {}'.format(
        list(levels)))
  if any(b <= a for a, b in zip(levels, levels[1:])):
    raise ValidationError('Ladder levels must increase, got {}'.format(
        list(levels)))


def validate_time(t: float, horizon: float, name: str = 't',
                  allow_zero: bool = True):
  low_ok = t >= 0 if allow_zero else t > 0
  if not (low_ok and t <= horizon + 1e-12):
    raise ValidationError('{} = {} outside {}0, {}]'.format(
        name, t, '[' if allow_zero else '(', horizon))


def h_min_of(config: ExperimentConfig) -> float:
  disc = config.discretization
  if disc.sweep is SweepMode.TIME:
    return 1.0 / disc.pinned
  return 1.0 / max(disc.levels)


def validate_config(config: ExperimentConfig) -> bool:
  """
  Rejects configs the pipelines cannot run. Returns whether the noise
  resolution check passed.
  """
  validate_beta(config.problem.beta)
  validate_horizon(config.problem.horizon)
  if config.problem.delta <= 0.5:
    raise ValidationError('δ must exceed 1/2 in one dimension, got {}'.format(
        config.problem.delta))

  noise = config.noise
  validate_levy_model(
      LevyModel(rate=noise.rate,
                mode_decay=noise.mode_decay,
                n_modes=noise.n_modes,
                beta=config.problem.beta,
                amplitudes=noise.amplitudes,
                amplitude_weights=noise.amplitude_weights))

  disc = config.discretization
  validate_levels(disc.levels)
  if disc.pinned < max(disc.levels):
    raise ValidationError('Pinned resolution {} is coarser than level {}'.format(
        disc.pinned, max(disc.levels)))
  finest_modes = (disc.pinned if disc.sweep is SweepMode.TIME else max(
      disc.levels))
  if disc.backend is Backend.SPECTRAL and disc.reference_modes < finest_modes:
    raise ValidationError(
        'Reference modes {} below the finest resolution {}'.format(
            disc.reference_modes, finest_modes))
  if disc.reference_substeps < 1:
    raise ValidationError('Reference needs at least one substep')

  if config.mc.samples < 2:
    raise ValidationError('Monte Carlo needs at least two samples, got {}'.format(
        config.mc.samples))
  if config.mc.workers < 0:
    raise ValidationError('Worker count must be nonnegative, got {}'.format(
        config.mc.workers))
  if config.mc.seed < 0:
    raise ValidationError('Seed must be nonnegative, got {}'.format(
        config.mc.seed))

  functional = config.functional
  if not 1 <= len(functional.modes) <= MAX_FUNCTIONAL_COMPONENTS:
    raise ValidationError('Functional needs 1..{} components, got {}'.format(
        MAX_FUNCTIONAL_COMPONENTS, len(functional.modes)))
  for t in functional.atoms:
    validate_time(t, config.problem.horizon, 'functional atom')
  if functional.density < 0:
    raise ValidationError('Functional density must be nonnegative')

  cov = config.covariance
  validate_time(cov.t1, config.problem.horizon, 't1', allow_zero=False)
  validate_time(cov.t2, config.problem.horizon, 't2', allow_zero=False)

  validate_q(config.malliavin.q, config.problem.beta)
  if config.malliavin.quadrature_nodes < 1:
    raise ValidationError('Quadrature needs at least one node')

  for name, (low, high) in config.acceptance.bands.items():
    if low > high:
      raise ValidationError('Acceptance band {} is empty: [{}, {}]'.format(
          name, low, high))

  return validate_noise_resolution(noise.n_modes, h_min_of(config),
                                   disc.strict_truncation)
