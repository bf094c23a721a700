"""
Compound Poisson realization of the driving noise.

Every sample draws from its own Philox stream keyed by (master seed, sample
index), so a path can be regenerated in isolation and Monte Carlo results do
not depend on which worker produced which sample.
"""
from typing import List, Optional

import numpy as np

from .errors import ValidationError
from .spectral import laplacian_basis
from .types import JumpPath, LevyModel, MarkAtom, SpectralField
from .utils import array_digest
from .validators import validate_horizon, validate_levy_model


def sample_stream(seed: int, index: int) -> np.random.Generator:
  if seed < 0 or index < 0:
    raise ValidationError('Seed and index must be nonnegative, got {} and {}'.format(
        seed, index))
  key = np.array([seed, index], dtype=np.uint64)
  return np.random.Generator(np.random.Philox(key=key))


def sample_jump_path(model: LevyModel,
                     horizon: float,
                     stream: np.random.Generator,
                     seed: Optional[int] = None,
                     index: Optional[int] = None) -> JumpPath:
  """
  Draws the jump count, then the times, then the modes, then the amplitudes,
  always in this order and from ``stream`` only.
  """
  validate_horizon(horizon)
  validate_levy_model(model)
  n = int(stream.poisson(model.rate * horizon)) if model.rate > 0 else 0
  # uniform on [0, T) reflected to (0, T]
  times = np.sort(horizon - stream.uniform(0.0, horizon, size=n))
  modes = stream.choice(model.n_modes, size=n, p=model.mode_weights) + 1
  amplitudes = stream.choice(model.amplitudes,
                             size=n,
                             p=model.amplitude_weights)
  values = amplitudes * model.scales[modes - 1]
  return JumpPath(horizon=horizon,
                  times=times,
                  modes=modes,
                  values=values,
                  n_modes=model.n_modes,
                  seed=seed,
                  index=index)


def sample_indexed_path(model: LevyModel, horizon: float, seed: int,
                        index: int) -> JumpPath:
  return sample_jump_path(model, horizon, sample_stream(seed, index), seed,
                          index)


def empty_path(horizon: float, n_modes: int) -> JumpPath:
  return JumpPath(horizon=horizon,
                  times=[],
                  modes=[],
                  values=[],
                  n_modes=n_modes)


def accumulate_marks(modes: np.ndarray, values: np.ndarray,
                     n_modes: int) -> np.ndarray:
  """Sum of jump coefficients per mode; modes above ``n_modes`` are dropped."""
  coeffs = np.zeros(n_modes)
  keep = modes <= n_modes
  np.add.at(coeffs, modes[keep] - 1, values[keep])
  return coeffs


def increment(path: JumpPath, s: float, t: float,
              n_modes: Optional[int] = None) -> SpectralField:
  """L(t) - L(s): the sum of marks with jump time in (s, t]."""
  if s > t:
    raise ValidationError('Increment interval is reversed: ({}, {}]'.format(
        s, t))
  if s < 0 or t > path.horizon + 1e-12:
    raise ValidationError('Increment interval ({}, {}] leaves [0, {}]'.format(
        s, t, path.horizon))
  n_modes = n_modes or path.n_modes
  mask = (path.times > s) & (path.times <= t)
  return SpectralField(basis=laplacian_basis(n_modes),
                       coeffs=accumulate_marks(path.modes[mask],
                                               path.values[mask], n_modes))


def levy_value(path: JumpPath, t: float,
               n_modes: Optional[int] = None) -> SpectralField:
  return increment(path, 0.0, t, n_modes)


def mark_atoms(model: LevyModel) -> List[MarkAtom]:
  """The Lévy measure as a finite list of atoms with intensity λ_ν·p_j·q_ζ."""
  atoms = []
  scales = model.scales
  for j, p in enumerate(model.mode_weights, start=1):
    for zeta, q in zip(model.amplitudes, model.amplitude_weights):
      if q == 0: continue
      atoms.append(
          MarkAtom(mode=j,
                   amplitude=float(zeta),
                   coefficient=float(zeta * scales[j - 1]),
                   intensity=float(model.rate * p * q)))
  return atoms


def amplitude_second_moment(model: LevyModel) -> float:
  return float(np.sum(model.amplitude_weights * model.amplitudes**2))


def second_moment(model: LevyModel) -> float:
  """|ν|₂, the root of the second moment of ν on the noise space."""
  lam = model.basis.eigenvalues
  energy = np.sum(model.mode_weights * model.scales**2 * lam**(model.beta - 1))
  return float(np.sqrt(model.rate * amplitude_second_moment(model) * energy))


def stochastic_convolution_exact(path: JumpPath, t: float,
                                 n_modes: Optional[int] = None,
                                 s: float = 0.0) -> SpectralField:
  """
  Σ_{s < τ_i ≤ t} S(t - τ_i)·mark_i, exact per mode.
  """
  if t < s:
    raise ValidationError('Convolution window ({}, {}] is reversed'.format(
        s, t))
  n_modes = n_modes or path.n_modes
  basis = laplacian_basis(n_modes)
  mask = (path.times > s) & (path.times <= t) & (path.modes <= n_modes)
  modes = path.modes[mask]
  lam = basis.eigenvalues[modes - 1]
  damped = path.values[mask] * np.exp(-lam * (t - path.times[mask]))
  return SpectralField(basis=basis,
                       coeffs=accumulate_marks(modes, damped, n_modes))


def convolution_mode_variances(model: LevyModel, t: float) -> np.ndarray:
  """
  E⟨∫₀ᵗ S(t-s) dL(s), e_j⟩² = λ_ν·p_j·E[ζ²]·σ_j²·(1 - e^(-2λ_j t))/(2λ_j).
  """
  lam = model.basis.eigenvalues
  return (model.rate * model.mode_weights * amplitude_second_moment(model) *
          model.scales**2 * -np.expm1(-2 * lam * t) / (2 * lam))


def convolution_second_moment(model: LevyModel, t: float) -> float:
  return float(np.sum(convolution_mode_variances(model, t)))


def path_digest(path: JumpPath) -> str:
  return array_digest(np.array([path.horizon]), path.times, path.modes,
                      path.values)
