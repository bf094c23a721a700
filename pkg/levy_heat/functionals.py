"""
Path functionals x ↦ φ(∫x dμ₁, ..., ∫x dμ_n) and the covariance recombination.

The built-in outer maps see the integrated fields y_i only through the
projections a_i = ⟨y_i, ψ_i⟩, so their derivatives are plain gradients in a.
"""
from functools import singledispatch
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from .errors import UnimplementedError, ValidationError
from .fem import fem_inner
from .solvers import eval_interpolated, eval_reference, state_field
from .spectral import l2_norm, laplacian_basis
from .types import (FemField, Field, PathFunctional, ReferenceRecord,
                    SpectralField, TimeMeasure, TrajectoryRecord)
from .validators import validate_time


class OuterMap:
  """
  The outer map φ of a path functional.

  Attributes:
    directions (List[SpectralField]): One test direction ψ_i per component.
  """

  name = 'abstract'

  def __init__(self, *, directions: Sequence[SpectralField] = ()):
    self.directions = list(directions)

  @property
  def n_components(self) -> int:
    return len(self.directions)

  def value(self, a: np.ndarray) -> float:
    raise UnimplementedError('Must implement value')

  def derivative(self, a: np.ndarray) -> np.ndarray:
    raise UnimplementedError('Must implement derivative')

  def lipschitz_constant(self) -> Optional[float]:
    """Lipschitz constant of φ' in the product norm, None if not known."""
    raise UnimplementedError('Must implement lipschitz_constant')


class LinearMap(OuterMap):
  """φ(y) = Σ_i ⟨y_i, ψ_i⟩."""

  name = 'linear'

  def value(self, a: np.ndarray) -> float:
    return float(np.sum(a))

  def derivative(self, a: np.ndarray) -> np.ndarray:
    return np.ones_like(a)

  def lipschitz_constant(self) -> float:
    return 0.0


class BilinearProductMap(OuterMap):
  """φ(y₁, y₂) = ⟨y₁, ψ₁⟩·⟨y₂, ψ₂⟩."""

  name = 'bilinear'

  def __init__(self, *, directions: Sequence[SpectralField]):
    if len(directions) != 2:
      raise ValidationError(
          'Bilinear product needs two directions, got {}'.format(
              len(directions)))
    super().__init__(directions=directions)

  def value(self, a: np.ndarray) -> float:
    return float(a[0] * a[1])

  def derivative(self, a: np.ndarray) -> np.ndarray:
    return np.array([a[1], a[0]], dtype=float)

  def lipschitz_constant(self) -> float:
    return float(
        np.sqrt(2.0) * l2_norm(self.directions[0]) *
        l2_norm(self.directions[1]))


class QuadraticMap(OuterMap):
  """
  φ(y) = Σ_i c_i⟨y_i, ψ_i⟩² / (1 + ε|a|²)^(1/2).

  With ε = 0 this is a plain quadratic form; ε > 0 tempers the growth to
  linear while keeping φ' globally Lipschitz.

  Attributes:
    weights (np.ndarray): The factors c_i.
    smoothing (float): The factor ε ≥ 0.
  """

  name = 'quadratic'

  def __init__(self,
               *,
               directions: Sequence[SpectralField],
               weights: Optional[Sequence[float]] = None,
               smoothing: float = 0.0):
    super().__init__(directions=directions)
    self.weights = (np.ones(len(self.directions)) if weights is None else
                    np.asarray(weights, dtype=float))
    if len(self.weights) != len(self.directions):
      raise ValidationError('Got {} weights for {} directions'.format(
          len(self.weights), len(self.directions)))
    if smoothing < 0:
      raise ValidationError('Smoothing must be nonnegative, got {}'.format(
          smoothing))
    self.smoothing = float(smoothing)

  def value(self, a: np.ndarray) -> float:
    s = 1.0 + self.smoothing * np.sum(a**2)
    return float(np.sum(self.weights * a**2) / np.sqrt(s))

  def derivative(self, a: np.ndarray) -> np.ndarray:
    s = 1.0 + self.smoothing * np.sum(a**2)
    q = np.sum(self.weights * a**2)
    return (2 * self.weights * a / np.sqrt(s) -
            q * self.smoothing * a / s**1.5)

  def lipschitz_constant(self) -> Optional[float]:
    if self.smoothing > 0: return None
    norms = [l2_norm(psi)**2 for psi in self.directions]
    return float(2 * np.max(np.abs(self.weights)) * max(norms))


class ConstantMap(OuterMap):
  """A functional that ignores the path."""

  name = 'constant'

  def __init__(self, *, constant: float = 1.0):
    super().__init__(directions=())
    self.constant = float(constant)

  def value(self, a: np.ndarray) -> float:
    return self.constant

  def derivative(self, a: np.ndarray) -> np.ndarray:
    return np.zeros_like(a)

  def lipschitz_constant(self) -> float:
    return 0.0


@singledispatch
def inner_product(field: Any, psi: SpectralField) -> float:
  raise UnimplementedError('No inner product for {}'.format(type(field)))


@inner_product.register(SpectralField)
def inner_product_spectral(field: SpectralField, psi: SpectralField) -> float:
  n = min(field.n_modes, psi.n_modes)
  return float(field.coeffs[:n] @ psi.coeffs[:n])


@inner_product.register(FemField)
def inner_product_fem(field: FemField, psi: SpectralField) -> float:
  return fem_inner(field, psi)


def check_measure(measure: TimeMeasure, horizon: float):
  for t, w in measure.atoms:
    validate_time(t, horizon, 'atom')
    if w < 0:
      raise ValidationError('Atom weight must be nonnegative, got {}'.format(w))
  if measure.density < 0:
    raise ValidationError('Density must be nonnegative, got {}'.format(
        measure.density))


@singledispatch
def integrate_path(record: Any, measure: TimeMeasure) -> Field:
  raise UnimplementedError('No path integral for {}'.format(type(record)))


@integrate_path.register(TrajectoryRecord)
def integrate_trajectory(record: TrajectoryRecord,
                         measure: TimeMeasure) -> Field:
  """
  Σ w_i X̃(t_i) + c·Σ_m X^m·|[t_m, t_(m+1)) ∩ [0, T]|, the last interval
  being [t_M, T].
  """
  disc = record.discretization
  check_measure(measure, disc.horizon)
  total = np.zeros(record.values.shape[1])
  for t, w in measure.atoms:
    total = total + w * state_of(eval_interpolated(record, t))
  if measure.density:
    lengths = np.diff(np.append(disc.grid, disc.horizon))
    total = total + measure.density * (lengths @ record.values)
  return state_field(disc, total)


@integrate_path.register(ReferenceRecord)
def integrate_reference(record: ReferenceRecord,
                        measure: TimeMeasure) -> SpectralField:
  """The Lebesgue part is the left-point sum over the substep grid."""
  check_measure(measure, record.problem.horizon)
  total = np.zeros(record.settings.n_modes)
  for t, w in measure.atoms:
    total = total + w * eval_reference(record, t).coeffs
  if measure.density:
    total = total + measure.density * record.integrals[-1]
  return SpectralField(basis=laplacian_basis(record.settings.n_modes),
                       coeffs=total)


@singledispatch
def state_of(field: Any) -> np.ndarray:
  raise UnimplementedError('No state vector for {}'.format(type(field)))


@state_of.register(SpectralField)
def state_of_spectral(field: SpectralField) -> np.ndarray:
  return field.coeffs


@state_of.register(FemField)
def state_of_fem(field: FemField) -> np.ndarray:
  return field.nodal_values


def projections(functional: PathFunctional, record: Any) -> np.ndarray:
  outer = functional.outer
  if outer.n_components > len(functional.measures):
    raise ValidationError('{} needs {} measures, got {}'.format(
        functional.name, outer.n_components, len(functional.measures)))
  return np.array([
      inner_product(integrate_path(record, mu), psi)
      for mu, psi in zip(functional.measures, outer.directions)
  ])


def eval_functional(functional: PathFunctional, record: Any) -> float:
  return functional.outer.value(projections(functional, record))


def dirac(t: float, weight: float = 1.0) -> TimeMeasure:
  return TimeMeasure(atoms=[(t, weight)])


def covariance_triple(
    t1: float, t2: float, psi1: SpectralField, psi2: SpectralField,
    horizon: float) -> Tuple[PathFunctional, PathFunctional, PathFunctional]:
  """
  f₁ = ⟨x(t₁),ψ₁⟩⟨x(t₂),ψ₂⟩, f₂ = ⟨x(t₁),ψ₁⟩ and f₃ = ⟨x(t₂),ψ₂⟩, so that
  Cov = E f₁ - E f₂·E f₃.
  """
  validate_time(t1, horizon, 't1', allow_zero=False)
  validate_time(t2, horizon, 't2', allow_zero=False)
  f1 = PathFunctional(measures=[dirac(t1), dirac(t2)],
                      outer=BilinearProductMap(directions=[psi1, psi2]),
                      name='covariance-product')
  f2 = PathFunctional(measures=[dirac(t1)],
                      outer=LinearMap(directions=[psi1]),
                      name='covariance-first')
  f3 = PathFunctional(measures=[dirac(t2)],
                      outer=LinearMap(directions=[psi2]),
                      name='covariance-second')
  return f1, f2, f3


def covariance_influence(f1: np.ndarray, f2: np.ndarray,
                         f3: np.ndarray) -> Tuple[float, np.ndarray]:
  """
  The plug-in covariance and its per-sample influence values
  f₁ - m₃f₂ - m₂f₃, whose spread gives the delta-method standard error.
  """
  f1, f2, f3 = (np.asarray(f, dtype=float) for f in (f1, f2, f3))
  m2, m3 = f2.mean(), f3.mean()
  return float(f1.mean() - m2 * m3), f1 - m3 * f2 - m2 * f3


def covariance_estimate(f1: Sequence[float], f2: Sequence[float],
                        f3: Sequence[float]) -> Tuple[float, float]:
  n = len(f1)
  if n < 2:
    raise ValidationError('Covariance needs two samples, got {}'.format(n))
  cov, influence = covariance_influence(f1, f2, f3)
  return cov, float(np.std(influence, ddof=1) / np.sqrt(n))


def finite_difference_slope(
    outer: OuterMap,
    point: Sequence[float],
    direction: Sequence[float],
    steps: Sequence[float] = (1e-2, 5e-3, 2.5e-3)
) -> Tuple[Optional[float], List[float]]:
  """
  Errors of central differences of φ against φ'·direction at each step and
  their log-log slope; the slope is None when the errors sit at rounding
  level, as they do for exactly quadratic maps.
  """
  a = np.asarray(point, dtype=float)
  d = np.asarray(direction, dtype=float)
  exact = float(outer.derivative(a) @ d)
  errors = [
      abs((outer.value(a + s * d) - outer.value(a - s * d)) / (2 * s) - exact)
      for s in steps
  ]
  scale = max(1.0, abs(exact))
  if min(errors) <= 1e-10 * scale:
    return None, errors
  slope = np.polyfit(np.log(steps), np.log(errors), 1)[0]
  return float(slope), errors
