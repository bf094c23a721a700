"""
The linearly implicit Euler scheme on both backends and the exponential
reference solver.

A scheme run is X⁰ = P_h X₀ and X^m = S_{h,k}(X^(m-1) + kF(X^(m-1)) + ΔL_m)
with ΔL_m the marks of the jumps in (t_(m-1), t_m]. Jumps after t_M are not
seen by the scheme. The reference solver integrates the mild formulation on
a fine uniform substep grid, exactly for the linear part and the jumps and
by the left-point exponential rule for the drift.
"""
import logging
from functools import lru_cache, singledispatch
from typing import Any, Optional, Tuple

import numpy as np

from .errors import UnimplementedError, ValidationError
from .fem import (fem_norm, interpolate_nodal, load_matrix, load_vector,
                  make_mesh, mass_matrix, mass_solve, sine_matrix,
                  step_operator)
from .noise import accumulate_marks
from .spectral import (exponential_weights, from_physical_values,
                       laplacian_basis, padded_difference, physical_values,
                       resolvent_factors)
from .types import (Backend, Discretization, Drift, FemField, Field,
                    JumpPath, NoiseInjection, Problem, ReferenceRecord,
                    ReferenceSettings, SpectralField, SpectralInitialValue,
                    TrajectoryRecord)

logger = logging.getLogger(__name__)


def drift_coefficients(coeffs: np.ndarray, drift: Drift,
                       oversample: int = 1) -> np.ndarray:
  if drift.is_zero: return np.zeros_like(coeffs)
  values = physical_values(coeffs, oversample)
  return from_physical_values(drift.f(values), len(coeffs))


@singledispatch
def nemytskii_apply(field: Any, drift: Drift) -> Any:
  raise UnimplementedError('No Nemytskii operator for {}'.format(type(field)))


@nemytskii_apply.register(SpectralField)
def nemytskii_apply_spectral(field: SpectralField,
                             drift: Drift,
                             oversample: int = 1) -> SpectralField:
  return SpectralField(basis=field.basis,
                       coeffs=drift_coefficients(field.coeffs, drift,
                                                 oversample))


@nemytskii_apply.register(FemField)
def nemytskii_apply_fem(field: FemField, drift: Drift) -> FemField:
  return FemField(mesh=field.mesh, nodal_values=drift.f(field.nodal_values))


def jump_steps(times: np.ndarray, grid: np.ndarray) -> np.ndarray:
  """Step m with τ ∈ (t_(m-1), t_m]; jumps after the last grid point get M + 1."""
  return np.searchsorted(grid, times, side='left')


class SchemeStepper:
  """
  One backend's realization of the scheme.

  States are coefficient vectors (spectral) or interior nodal values (fem).
  Loads are what S_{h,k} acts on: coefficients for the spectral method and
  vectors of integrals against the hat functions for finite elements, so
  S_{h,k} is always ``solve`` of a load.

  Attributes:
    problem (Problem): The equation.
    discretization (Discretization): The resolution.
  """

  def __init__(self, *, problem: Problem, discretization: Discretization):
    self.problem = problem
    self.discretization = discretization

  @property
  def dimension(self) -> int:
    return self.discretization.dimension

  def initial_load(self) -> np.ndarray:
    raise UnimplementedError('Must implement initial_load')

  def load_of_state(self, state: np.ndarray) -> np.ndarray:
    raise UnimplementedError('Must implement load_of_state')

  def drift_state(self, state: np.ndarray) -> np.ndarray:
    raise UnimplementedError('Must implement drift_state')

  def mark_load(self, modes: np.ndarray, values: np.ndarray,
                n_modes: int) -> Tuple[np.ndarray, int]:
    raise UnimplementedError('Must implement mark_load')

  def solve(self, load: np.ndarray) -> np.ndarray:
    raise UnimplementedError('Must implement solve')

  def mass_solve(self, load: np.ndarray) -> np.ndarray:
    raise UnimplementedError('Must implement mass_solve')

  def to_field(self, state: np.ndarray) -> Field:
    raise UnimplementedError('Must implement to_field')

  def initial_state(self) -> np.ndarray:
    return self.mass_solve(self.initial_load())

  def drift_load(self, state: np.ndarray) -> np.ndarray:
    return self.load_of_state(self.drift_state(state))

  def step(self, state: np.ndarray, noise_load: np.ndarray) -> np.ndarray:
    k = self.discretization.time_step
    return self.solve(
        self.load_of_state(state) + k * self.drift_load(state) + noise_load)

  def power(self, load: np.ndarray, p: int) -> np.ndarray:
    """S_{h,k}^p applied to a load, p ≥ 1."""
    state = self.solve(load)
    for _ in range(p - 1):
      state = self.solve(self.load_of_state(state))
    return state

  def noise_loads(self, path: JumpPath) -> Tuple[np.ndarray, int]:
    grid = self.discretization.grid
    n_steps = len(grid) - 1
    steps = jump_steps(path.times, grid)
    loads = np.zeros((n_steps + 1, self.dimension))
    truncated = 0
    for m in np.unique(steps[steps <= n_steps]):
      mask = steps == m
      loads[m], lost = self.mark_load(path.modes[mask], path.values[mask],
                                      path.n_modes)
      truncated += lost
    return loads, truncated


class SpectralStepper(SchemeStepper):
  """Spectral Galerkin method on the first N eigenfunctions, h = 1/N."""

  def __init__(self, *, problem: Problem, discretization: Discretization):
    super().__init__(problem=problem, discretization=discretization)
    self.basis = laplacian_basis(discretization.resolution)
    self.factors = resolvent_factors(self.basis, discretization.time_step)

  def initial_load(self) -> np.ndarray:
    return self.problem.initial.coefficients(self.basis.n_modes)

  def load_of_state(self, state: np.ndarray) -> np.ndarray:
    return state

  def drift_state(self, state: np.ndarray) -> np.ndarray:
    return nemytskii_apply(self.to_field(state), self.problem.drift).coeffs

  def mark_load(self, modes: np.ndarray, values: np.ndarray,
                n_modes: int) -> Tuple[np.ndarray, int]:
    n = self.basis.n_modes
    return accumulate_marks(modes, values, n), int(np.sum(modes > n))

  def solve(self, load: np.ndarray) -> np.ndarray:
    return self.factors * load

  def mass_solve(self, load: np.ndarray) -> np.ndarray:
    return np.array(load, dtype=float)

  def to_field(self, state: np.ndarray) -> SpectralField:
    return SpectralField(basis=self.basis, coeffs=state)


class FemStepper(SchemeStepper):
  """
  P1 finite elements; every step is one banded Cholesky solve with
  M_h + kS_h.

  Attributes:
    injection (NoiseInjection): How marks are brought onto the mesh.
  """

  def __init__(self,
               *,
               problem: Problem,
               discretization: Discretization,
               injection: NoiseInjection = NoiseInjection.PROJECTION):
    super().__init__(problem=problem, discretization=discretization)
    self.injection = injection
    self.mesh = make_mesh(discretization.resolution)
    self.operator = step_operator(self.mesh.n_cells, discretization.time_step)
    self.mass = mass_matrix(self.mesh.n_cells)

  def initial_load(self) -> np.ndarray:
    initial = self.problem.initial
    if isinstance(initial, SpectralInitialValue):
      return load_vector(
          SpectralField(basis=laplacian_basis(len(initial.coeffs)),
                        coeffs=initial.coeffs), self.mesh)
    return load_vector(initial, self.mesh)

  def load_of_state(self, state: np.ndarray) -> np.ndarray:
    return self.mass.matvec(state)

  def drift_state(self, state: np.ndarray) -> np.ndarray:
    return nemytskii_apply(self.to_field(state),
                           self.problem.drift).nodal_values

  def mark_load(self, modes: np.ndarray, values: np.ndarray,
                n_modes: int) -> Tuple[np.ndarray, int]:
    if self.injection is NoiseInjection.INTERPOLATION:
      nodal = sine_matrix(self.mesh.n_cells, n_modes)[:, modes - 1] @ values
      return self.mass.matvec(nodal), 0
    return load_matrix(self.mesh.n_cells, n_modes)[:, modes - 1] @ values, 0

  def solve(self, load: np.ndarray) -> np.ndarray:
    return self.operator.solve_load(load)

  def mass_solve(self, load: np.ndarray) -> np.ndarray:
    return mass_solve(self.mesh, load)

  def to_field(self, state: np.ndarray) -> FemField:
    return FemField(mesh=self.mesh, nodal_values=state)


def make_stepper(problem: Problem,
                 discretization: Discretization,
                 injection: NoiseInjection = NoiseInjection.PROJECTION
                ) -> SchemeStepper:
  check_discretization(problem, discretization)
  if discretization.backend is Backend.FEM:
    return FemStepper(problem=problem,
                      discretization=discretization,
                      injection=injection)
  return SpectralStepper(problem=problem, discretization=discretization)


def check_discretization(problem: Problem, discretization: Discretization):
  if abs(discretization.horizon - problem.horizon) > 1e-12:
    raise ValidationError(
        'Discretization horizon {} differs from problem horizon {}'.format(
            discretization.horizon, problem.horizon))
  if not 0 < discretization.time_step <= problem.horizon:
    raise ValidationError('Time step must lie in (0, {}], got {}'.format(
        problem.horizon, discretization.time_step))
  minimum = 2 if discretization.backend is Backend.FEM else 1
  if discretization.resolution < minimum:
    raise ValidationError('Resolution {} too coarse for the {} backend'.format(
        discretization.resolution, discretization.backend.value))


def check_path(problem: Problem, path: JumpPath):
  if path.horizon + 1e-12 < problem.horizon:
    raise ValidationError('Path horizon {} is shorter than {}'.format(
        path.horizon, problem.horizon))


@lru_cache(maxsize=None)
def warn_truncation(resolution: int, n_modes: int):
  """Warns once per pair of scheme resolution and noise truncation."""
  logger.warning('Scheme with %d modes drops noise modes %d to %d',
                 resolution, resolution + 1, n_modes)


def run_scheme(problem: Problem,
               discretization: Discretization,
               path: JumpPath,
               injection: NoiseInjection = NoiseInjection.PROJECTION
              ) -> TrajectoryRecord:
  check_path(problem, path)
  stepper = make_stepper(problem, discretization, injection)
  loads, truncated = stepper.noise_loads(path)
  if truncated:
    warn_truncation(discretization.resolution, path.n_modes)
    logger.debug('Projected away %d jumps above mode %d', truncated,
                 discretization.resolution)

  values = np.empty((len(loads), stepper.dimension))
  values[0] = stepper.initial_state()
  for m in range(1, len(loads)):
    values[m] = stepper.step(values[m - 1], loads[m])
  return TrajectoryRecord(discretization=discretization,
                          values=values,
                          truncated_jumps=truncated)


def evaluate_summed_scheme(
    problem: Problem,
    discretization: Discretization,
    path: JumpPath,
    injection: NoiseInjection = NoiseInjection.PROJECTION
) -> TrajectoryRecord:
  """
  X^m = S^m X₀ + Σ_{j<m} S^(m-j)(kF(X^j) + ΔL_(j+1)), every power applied
  afresh. Quadratic in M; only meant to cross-check :func:`run_scheme`.
  """
  check_path(problem, path)
  stepper = make_stepper(problem, discretization, injection)
  loads, truncated = stepper.noise_loads(path)
  k = discretization.time_step
  initial = stepper.initial_load()

  values = np.empty((len(loads), stepper.dimension))
  values[0] = stepper.mass_solve(initial)
  for m in range(1, len(loads)):
    x = stepper.power(initial, m)
    for j in range(m):
      x = x + stepper.power(k * stepper.drift_load(values[j]) + loads[j + 1],
                            m - j)
    values[m] = x
  return TrajectoryRecord(discretization=discretization,
                          values=values,
                          truncated_jumps=truncated)


def step_index(grid: np.ndarray, t: float) -> int:
  return min(int(np.searchsorted(grid, t, side='right')) - 1, len(grid) - 1)


def state_field(discretization: Discretization, state: np.ndarray) -> Field:
  if discretization.backend is Backend.FEM:
    return FemField(mesh=make_mesh(discretization.resolution),
                    nodal_values=state)
  return SpectralField(basis=laplacian_basis(discretization.resolution),
                       coeffs=state)


def record_field(record: TrajectoryRecord, m: int) -> Field:
  return state_field(record.discretization, record.values[m])


def eval_interpolated(record: TrajectoryRecord, t: float) -> Field:
  """X^m for t ∈ [t_m, t_(m+1)), and X^M on [t_M, T]."""
  horizon = record.discretization.horizon
  if not 0 <= t <= horizon + 1e-12:
    raise ValidationError('t = {} outside [0, {}]'.format(t, horizon))
  return record_field(record, step_index(record.discretization.grid, t))


class ReferenceStepper:
  """
  Exponential substep propagator of the reference solver:
  X(r + δ) = e^(-Aδ) X(r) + A^(-1)(1 - e^(-Aδ)) F(X(r)) + Σ e^(-A(r+δ-τ)) x_τ
  over the jumps τ ∈ (r, r + δ].

  Attributes:
    problem (Problem): The equation.
    path (JumpPath): The driving noise.
    settings (ReferenceSettings): Modes and substeps.
    truncated (int): Jumps with modes above the truncation, ignored.
  """

  def __init__(self, *, problem: Problem, path: JumpPath,
               settings: ReferenceSettings):
    self.problem = problem
    self.path = path
    self.settings = settings
    self.basis = laplacian_basis(settings.n_modes)
    self.dt = problem.horizon / settings.n_substeps
    self.grid = self.dt * np.arange(settings.n_substeps + 1)
    self.decay = np.exp(-self.basis.eigenvalues * self.dt)
    self.weights = exponential_weights(self.basis, self.dt)

    keep = path.modes <= settings.n_modes
    self.truncated = int(np.sum(~keep))
    self.times = path.times[keep]
    self.modes = path.modes[keep]
    self.values = path.values[keep]
    substeps = jump_steps(self.times, self.grid)
    self.bounds = np.searchsorted(substeps,
                                  np.arange(settings.n_substeps + 2),
                                  side='left')

  def jumps(self, i: int) -> slice:
    """Jumps in (r_i, r_(i+1)]."""
    return slice(self.bounds[i + 1], self.bounds[i + 2])

  def drift(self, state: np.ndarray) -> np.ndarray:
    return drift_coefficients(state, self.problem.drift)

  def advance(self, state: np.ndarray, i: int,
              length: Optional[float] = None) -> np.ndarray:
    """From r_i to r_i + length; a full substep when ``length`` is None."""
    window = self.jumps(i)
    lam = self.basis.eigenvalues
    if length is None:
      end = self.grid[i + 1]
      nxt = self.decay * state + self.weights * self.drift(state)
      times, modes, values = (self.times[window], self.modes[window],
                              self.values[window])
    else:
      end = self.grid[i] + length
      nxt = (np.exp(-lam * length) * state +
             exponential_weights(self.basis, length) * self.drift(state))
      inside = self.times[window] <= end
      times, modes, values = (self.times[window][inside],
                              self.modes[window][inside],
                              self.values[window][inside])
    if len(times):
      damped = values * np.exp(-lam[modes - 1] * (end - times))
      nxt = nxt + accumulate_marks(modes, damped, self.basis.n_modes)
    return nxt


def run_reference(problem: Problem, path: JumpPath,
                  settings: ReferenceSettings) -> ReferenceRecord:
  check_path(problem, path)
  if settings.n_modes < 1 or settings.n_substeps < 1:
    raise ValidationError('Reference needs modes and substeps, got {} and {}'.format(
        settings.n_modes, settings.n_substeps))
  stride = settings.stride
  if stride < 1 or settings.n_substeps % stride:
    raise ValidationError('Checkpoint stride {} does not divide {}'.format(
        stride, settings.n_substeps))

  stepper = ReferenceStepper(problem=problem, path=path, settings=settings)
  if stepper.truncated:
    logger.warning('Reference with %d modes drops %d of %d jumps',
                   settings.n_modes, stepper.truncated, len(path))

  n_checkpoints = settings.n_substeps // stride + 1
  values = np.empty((n_checkpoints, settings.n_modes))
  integrals = np.empty((n_checkpoints, settings.n_modes))
  state = problem.initial.coefficients(settings.n_modes)
  integral = np.zeros(settings.n_modes)
  values[0], integrals[0] = state, integral
  for i in range(settings.n_substeps):
    integral = integral + stepper.dt * state
    state = stepper.advance(state, i)
    if (i + 1) % stride == 0:
      values[(i + 1) // stride] = state
      integrals[(i + 1) // stride] = integral
  return ReferenceRecord(problem=problem,
                         path=path,
                         settings=settings,
                         values=values,
                         integrals=integrals,
                         truncated_jumps=stepper.truncated,
                         stepper=stepper)


def reference_stepper(record: ReferenceRecord) -> ReferenceStepper:
  if record.stepper is None:
    record.stepper = ReferenceStepper(problem=record.problem,
                                      path=record.path,
                                      settings=record.settings)
  return record.stepper


def reference_state(record: ReferenceRecord, i: int) -> np.ndarray:
  """State at substep r_i, stepped forward from the checkpoint before it."""
  stepper = reference_stepper(record)
  c = i // record.stride
  state = record.values[c]
  for j in range(c * record.stride, i):
    state = stepper.advance(state, j)
  return state


def eval_reference(record: ReferenceRecord, t: float) -> SpectralField:
  horizon = record.problem.horizon
  if not 0 <= t <= horizon + 1e-12:
    raise ValidationError('t = {} outside [0, {}]'.format(t, horizon))
  stepper = reference_stepper(record)
  i = step_index(stepper.grid, t)
  state = reference_state(record, i)
  remainder = t - stepper.grid[i]
  if remainder > 0 and i < record.settings.n_substeps:
    state = stepper.advance(state, i, remainder)
  return SpectralField(basis=stepper.basis, coeffs=state)


def reference_trajectory(record: ReferenceRecord) -> np.ndarray:
  """All substep states, shape (M_ref + 1, N_ref)."""
  states = np.empty((record.settings.n_substeps + 1, record.settings.n_modes))
  stepper = reference_stepper(record)
  states[0] = record.values[0]
  for i in range(record.settings.n_substeps):
    states[i + 1] = (record.values[(i + 1) // record.stride] if
                     (i + 1) % record.stride == 0 else stepper.advance(
                         states[i], i))
  return states


def check_self_convergence(problem: Problem, path: JumpPath,
                           settings: ReferenceSettings, t: float) -> float:
  """‖X_ref(t) - X_ref'(t)‖ with N_ref and M_ref doubled for X_ref'."""
  coarse = eval_reference(run_reference(problem, path, settings), t)
  fine = eval_reference(run_reference(problem, path, settings.doubled()), t)
  return float(np.linalg.norm(padded_difference(fine.coeffs, coarse.coeffs)))


@singledispatch
def error_against(field: Any, reference: SpectralField) -> float:
  raise UnimplementedError('No reference error for {}'.format(type(field)))


@error_against.register(SpectralField)
def error_against_spectral(field: SpectralField,
                           reference: SpectralField) -> float:
  return float(
      np.linalg.norm(padded_difference(reference.coeffs, field.coeffs)))


@error_against.register(FemField)
def error_against_fem(field: FemField, reference: SpectralField) -> float:
  """Measured against the nodal interpolant of the reference, in the M_h norm."""
  return fem_norm(interpolate_nodal(reference, field.mesh) - field)
