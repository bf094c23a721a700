"""
Spectral calculus of the Dirichlet Laplacian on (0, 1).

Fields are coefficient vectors in the eigenbasis e_j(ξ) = √2·sin(jπξ), so
fractional powers, the analytic semigroup and the implicit Euler resolvent all
act diagonally.
"""
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import fft, optimize

from .errors import ValidationError
from .types import SpectralBasis, SpectralField


@lru_cache(maxsize=64)
def laplacian_basis(n_modes: int) -> SpectralBasis:
  if n_modes < 1:
    raise ValidationError(
        'Basis needs at least one mode, got {}'.format(n_modes))
  return SpectralBasis(n_modes=n_modes)


def custom_basis(eigenvalues: Sequence[float]) -> SpectralBasis:
  eigenvalues = np.asarray(eigenvalues, dtype=float)
  if eigenvalues.ndim != 1 or len(eigenvalues) == 0:
    raise ValidationError('Eigenvalues must be a non-empty sequence')
  if eigenvalues[0] <= 0 or np.any(np.diff(eigenvalues) <= 0):
    raise ValidationError(
        'Eigenvalues must be positive and strictly increasing')
  return SpectralBasis(n_modes=len(eigenvalues), eigenvalues=eigenvalues)


def unit_field(basis: SpectralBasis, mode: int,
               scale: float = 1.0) -> SpectralField:
  if not 1 <= mode <= basis.n_modes:
    raise ValidationError('Mode {} outside 1..{}'.format(mode, basis.n_modes))
  coeffs = np.zeros(basis.n_modes)
  coeffs[mode - 1] = scale
  return SpectralField(basis=basis, coeffs=coeffs)


def resize(v: SpectralField, n_modes: int) -> SpectralField:
  """Truncate or zero-pad a Laplacian-basis field to ``n_modes`` modes."""
  coeffs = np.zeros(n_modes)
  n = min(n_modes, v.n_modes)
  coeffs[:n] = v.coeffs[:n]
  return SpectralField(basis=laplacian_basis(n_modes), coeffs=coeffs)


def padded_difference(a: np.ndarray, b: np.ndarray) -> np.ndarray:
  n = max(len(a), len(b))
  d = np.zeros(n)
  d[:len(a)] += a
  d[:len(b)] -= b
  return d


def hdot_norm(v: SpectralField, rho: float) -> float:
  return float(np.sqrt(np.sum(v.basis.eigenvalues**rho * v.coeffs**2)))


def l2_norm(v: SpectralField) -> float:
  return float(np.linalg.norm(v.coeffs))


def apply_semigroup(v: SpectralField, t: float) -> SpectralField:
  if t < 0:
    raise ValidationError('Semigroup time must be nonnegative, got {}'.format(t))
  return SpectralField(basis=v.basis,
                       coeffs=np.exp(-v.basis.eigenvalues * t) * v.coeffs)


def apply_fractional_power(v: SpectralField, rho: float) -> SpectralField:
  return SpectralField(basis=v.basis,
                       coeffs=v.basis.eigenvalues**(rho / 2) * v.coeffs)


def resolvent_factors(basis: SpectralBasis, k: float) -> np.ndarray:
  """Diagonal of (I + kA)^(-1)."""
  if k <= 0:
    raise ValidationError('Time step must be positive, got {}'.format(k))
  return 1.0 / (1.0 + k * basis.eigenvalues)


def apply_resolvent(v: SpectralField, k: float, power: int = 1) -> SpectralField:
  return SpectralField(basis=v.basis,
                       coeffs=resolvent_factors(v.basis, k)**power * v.coeffs)


def exponential_weights(basis: SpectralBasis, dt: float) -> np.ndarray:
  """Diagonal of ∫_0^dt S(r) dr = (1 - e^(-λ dt))/λ."""
  return -np.expm1(-basis.eigenvalues * dt) / basis.eigenvalues


def physical_values(coeffs: np.ndarray, oversample: int = 1) -> np.ndarray:
  """
  Values Σ_j c_j √2 sin(jπξ_i) on the grid ξ_i = i/(n+1), i = 1..n, where
  n = oversample·(K+1) - 1.
  """
  coeffs = np.asarray(coeffs, dtype=float)
  n = oversample * (len(coeffs) + 1) - 1
  padded = np.zeros(n)
  padded[:len(coeffs)] = coeffs
  return fft.dst(padded, type=1) / np.sqrt(2.0)


def from_physical_values(values: np.ndarray, n_modes: int) -> np.ndarray:
  """
  Discrete sine coefficients of grid values on ξ_i = i/(n+1), truncated to
  the first ``n_modes``; exact inverse of :func:`physical_values`.
  """
  values = np.asarray(values, dtype=float)
  coeffs = np.sqrt(2.0) * fft.idst(values, type=1)
  return coeffs[:n_modes]


def physical_values_direct(coeffs: np.ndarray,
                           xi: Optional[np.ndarray] = None) -> np.ndarray:
  """O(K²) evaluation of the sine series, used to check the fast transform."""
  coeffs = np.asarray(coeffs, dtype=float)
  if xi is None:
    xi = np.arange(1, len(coeffs) + 1) / (len(coeffs) + 1)
  j = np.arange(1, len(coeffs) + 1)
  return np.sqrt(2.0) * np.sin(np.pi * np.multiply.outer(xi, j)) @ coeffs


def basis_gram_matrix(n_modes: int, n_cells: int = 256,
                      n_points: int = 5) -> np.ndarray:
  """⟨e_i, e_j⟩ by composite Gauss-Legendre quadrature on a uniform grid."""
  nodes, weights = leggauss(n_points)
  h = 1.0 / n_cells
  left = h * np.arange(n_cells)
  xi = (left[:, None] + h * (nodes[None, :] + 1) / 2).ravel()
  w = np.tile(weights * h / 2, n_cells)
  j = np.arange(1, n_modes + 1)
  e = np.sqrt(2.0) * np.sin(np.pi * np.multiply.outer(xi, j))
  return (e * w[:, None]).T @ e


def smoothing_envelope(rho: float) -> float:
  """sup over x > 0 of x^(ρ/2)·e^(-x) = (ρ/(2e))^(ρ/2)."""
  if rho < 0:
    raise ValidationError('Smoothing order must be nonnegative')
  if rho == 0:
    return 1.0
  return (rho / (2 * np.e))**(rho / 2)


def smoothing_constant_check(rho: float,
                             t_grid: Sequence[float],
                             basis: Optional[SpectralBasis] = None) -> float:
  """
  Empirical smoothing constant max_t t^(ρ/2)·max_j λ_j^(ρ/2) e^(-λ_j t).
  """
  if rho < 0:
    raise ValidationError('Smoothing order must be nonnegative')
  t = np.asarray(t_grid, dtype=float)
  if np.any(t <= 0):
    raise ValidationError('Smoothing check needs positive times')
  basis = basis or laplacian_basis(4096)
  lam = basis.eigenvalues
  values = (t[:, None] * lam[None, :])**(rho / 2) * np.exp(
      -np.multiply.outer(t, lam))
  return float(values.max())


def continuity_envelope(rho: float) -> float:
  """sup over x > 0 of x^(-ρ/2)·(1 - e^(-x)) for ρ ∈ (0, 2]."""
  if not 0 < rho <= 2:
    raise ValidationError(
        'Continuity order must lie in (0, 2], got {}'.format(rho))
  if rho == 2:
    return 1.0

  def negative(log_x: float) -> float:
    x = np.exp(log_x)
    return -(x**(-rho / 2) * -np.expm1(-x))

  res = optimize.minimize_scalar(negative,
                                 bounds=(-20.0, 20.0),
                                 method='bounded',
                                 options={'xatol': 1e-12})
  return float(-res.fun)


def continuity_constant_check(
    rho: float,
    t_grid: Sequence[float],
    basis: Optional[SpectralBasis] = None) -> Tuple[float, float]:
  """
  Empirical constant max_{j,t} λ_j^(-ρ/2)(1 - e^(-λ_j t))/t^(ρ/2) of the
  Hölder estimate, returned with its analytic envelope.
  """
  t = np.asarray(t_grid, dtype=float)
  if np.any(t <= 0):
    raise ValidationError('Continuity check needs positive times')
  envelope = continuity_envelope(rho)
  basis = basis or laplacian_basis(4096)
  lam = basis.eigenvalues
  x = np.multiply.outer(t, lam)
  values = x**(-rho / 2) * -np.expm1(-x)
  return float(values.max()), envelope
