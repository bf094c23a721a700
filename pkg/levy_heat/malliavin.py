"""
The add-one-point difference operator D_{s,x}F = F(N + δ_(s,x)) - F(N) and
checks of the identities it satisfies.

Everything here is path surgery followed by deterministic re-execution of
the solvers; nothing is differentiated symbolically. Integrals against the
Lévy measure are exact sums over its atoms.
"""
import logging
from functools import singledispatch
from typing import Any, Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import UnimplementedError, ValidationError
from .fem import fem_norm
from .functionals import (BilinearProductMap, LinearMap, QuadraticMap, dirac,
                          eval_functional, inner_product, integrate_path)
from .noise import mark_atoms, sample_indexed_path
from .solvers import (drift_coefficients, eval_interpolated, eval_reference,
                      jump_steps, make_stepper, record_field,
                      reference_trajectory, run_reference, run_scheme,
                      step_index)
from .spectral import apply_semigroup, hdot_norm, laplacian_basis, resize
from .types import (Backend, Discretization, DualityPair, DualityResult,
                    FemField, JumpPath, LevyModel, MalliavinSample, MarkAtom,
                    PathFunctional, PointInsertion, PredictableBlock, Problem,
                    ReferenceSettings, SeminormEstimate, SpectralField,
                    TimeMeasure, TrajectoryRecord)
from .utils import ordered_map
from .validators import validate_q

logger = logging.getLogger(__name__)


def mark_entries(mark: SpectralField, n_modes: int) -> Tuple[np.ndarray,
                                                             np.ndarray]:
  nonzero = np.flatnonzero(mark.coeffs)
  if len(nonzero) and nonzero[-1] >= n_modes:
    raise ValidationError('Mark excites mode {} beyond the {} noise modes'.format(
        nonzero[-1] + 1, n_modes))
  return nonzero + 1, mark.coeffs[nonzero]


def add_point(path: JumpPath, insertion: PointInsertion) -> JumpPath:
  """
  The path with one more jump. A mark spanning several modes becomes several
  entries at the same time; all of them go after existing jumps at that time.
  """
  s = insertion.time
  if not 0 < s <= path.horizon:
    raise ValidationError('Insertion time {} outside (0, {}]'.format(
        s, path.horizon))
  modes, values = mark_entries(insertion.mark, path.n_modes)
  at = int(np.searchsorted(path.times, s, side='right'))
  return JumpPath(horizon=path.horizon,
                  times=np.insert(path.times, at, np.full(len(modes), s)),
                  modes=np.insert(path.modes, at, modes),
                  values=np.insert(path.values, at, values),
                  n_modes=path.n_modes,
                  seed=path.seed,
                  index=path.index)


def remove_point(path: JumpPath, insertion: PointInsertion) -> JumpPath:
  """Undoes :func:`add_point`."""
  modes, values = mark_entries(insertion.mark, path.n_modes)
  end = int(np.searchsorted(path.times, insertion.time, side='right'))
  start = end - len(modes)
  if (start < 0 or np.any(path.times[start:end] != insertion.time) or
      np.any(path.modes[start:end] != modes) or
      np.any(path.values[start:end] != values)):
    raise ValidationError('Path has no point ({}, {}) to remove'.format(
        insertion.time, modes.tolist()))
  keep = np.r_[0:start, end:len(path)]
  return JumpPath(horizon=path.horizon,
                  times=path.times[keep],
                  modes=path.modes[keep],
                  values=path.values[keep],
                  n_modes=path.n_modes,
                  seed=path.seed,
                  index=path.index)


def restrict_path(path: JumpPath, t: float) -> JumpPath:
  """The jumps up to and including time t."""
  keep = path.times <= t
  return JumpPath(horizon=path.horizon,
                  times=path.times[keep],
                  modes=path.modes[keep],
                  values=path.values[keep],
                  n_modes=path.n_modes,
                  seed=path.seed,
                  index=path.index)


def atom_mark(atom: MarkAtom, n_modes: int) -> SpectralField:
  coeffs = np.zeros(n_modes)
  coeffs[atom.mode - 1] = atom.coefficient
  return SpectralField(basis=laplacian_basis(n_modes), coeffs=coeffs)


def difference(functional: Callable[[JumpPath], Any], path: JumpPath,
               insertion: PointInsertion) -> MalliavinSample:
  return MalliavinSample(path=path,
                         insertion=insertion,
                         base_value=functional(path),
                         perturbed_value=functional(add_point(path, insertion)))


class SchemeFunctional:
  """
  A path functional evaluated on the scheme solution driven by a jump path.
  Picklable, so it can be shipped to pool workers.

  Attributes:
    problem (Problem): The equation.
    discretization (Discretization): The scheme resolution.
    functional (PathFunctional): The functional of the interpolated solution.
  """

  def __init__(self, *, problem: Problem, discretization: Discretization,
               functional: PathFunctional):
    self.problem = problem
    self.discretization = discretization
    self.functional = functional

  @property
  def grid(self) -> np.ndarray:
    return self.discretization.grid

  def __call__(self, path: JumpPath) -> float:
    return eval_functional(self.functional,
                           run_scheme(self.problem, self.discretization, path))


class SchemeEndState:
  """The final scheme value X^M as a functional of the path."""

  def __init__(self, *, problem: Problem, discretization: Discretization):
    self.problem = problem
    self.discretization = discretization

  @property
  def grid(self) -> np.ndarray:
    return self.discretization.grid

  def __call__(self, path: JumpPath) -> Any:
    record = run_scheme(self.problem, self.discretization, path)
    return record_field(record, len(record.values) - 1)


class ConstantFunctional:

  def __init__(self, *, constant: float = 1.0):
    self.constant = float(constant)

  def __call__(self, path: JumpPath) -> float:
    return self.constant


def derivative_trajectory(problem: Problem, discretization: Discretization,
                          base: TrajectoryRecord,
                          insertion: PointInsertion) -> TrajectoryRecord:
  """
  D_{s,x}X^m from the recursion
  D^m = S_{h,k}(D^(m-1) + k[F(X^(m-1) + D^(m-1)) - F(X^(m-1))] + 1_(t_(m-1), t_m](s)·x)
  along the stored base trajectory.
  """
  stepper = make_stepper(problem, discretization)
  grid = discretization.grid
  k = discretization.time_step
  n_steps = len(grid) - 1
  values = np.zeros_like(base.values)
  first = int(jump_steps(np.array([insertion.time]), grid)[0])
  if first > n_steps:
    return TrajectoryRecord(discretization=discretization, values=values)

  n_modes = max(insertion.mark.n_modes, 1)
  modes, marks = mark_entries(insertion.mark, n_modes)
  kick, _ = stepper.mark_load(modes, marks, n_modes)
  for m in range(first, n_steps + 1):
    x, d = base.values[m - 1], values[m - 1]
    load = stepper.load_of_state(d) + k * stepper.load_of_state(
        stepper.drift_state(x + d) - stepper.drift_state(x))
    if m == first: load = load + kick
    values[m] = stepper.solve(load)
  return TrajectoryRecord(discretization=discretization, values=values)


def derivative_of_solution(problem: Problem, discretization: Discretization,
                           path: JumpPath, insertion: PointInsertion,
                           t: float) -> Tuple[Any, Any]:
  """D_{s,x}X̃(t) by rerunning the scheme and by the derivative recursion."""
  base = run_scheme(problem, discretization, path)
  perturbed = run_scheme(problem, discretization, add_point(path, insertion))
  rerun = eval_interpolated(perturbed, t) - eval_interpolated(base, t)
  recursion = eval_interpolated(
      derivative_trajectory(problem, discretization, base, insertion), t)
  return rerun, recursion


def derivative_equation_residual(problem: Problem, path: JumpPath,
                                 insertion: PointInsertion, t: float,
                                 settings: ReferenceSettings) -> float:
  """
  ‖Z(t) - S(t-s)x - Σ_i Δ_i S(t-r_i)[F(X(r_i) + Z(r_i)) - F(X(r_i))]‖ with
  Z = D_{s,x}X from two reference runs and the sum a left-point rule on the
  substep grid, cut at t.
  """
  s = insertion.time
  if t < s: return 0.0
  base = run_reference(problem, path, settings)
  perturbed = run_reference(problem, add_point(path, insertion), settings)
  z = eval_reference(perturbed, t) - eval_reference(base, t)

  basis = laplacian_basis(settings.n_modes)
  x = resize(insertion.mark, settings.n_modes)
  residual = z.coeffs - apply_semigroup(x, t - s).coeffs
  if not problem.drift.is_zero:
    xs = reference_trajectory(base)
    zs = reference_trajectory(perturbed) - xs
    grid = base.substep * np.arange(settings.n_substeps + 1)
    lam = basis.eigenvalues
    for i in range(step_index(grid, t) + 1):
      length = min(grid[i + 1], t) - grid[i] if i < settings.n_substeps else 0.0
      if length <= 0 or not np.any(zs[i]): continue
      g = (drift_coefficients(xs[i] + zs[i], problem.drift) -
           drift_coefficients(xs[i], problem.drift))
      residual -= length * np.exp(-lam * (t - grid[i])) * g
  return float(np.linalg.norm(residual))


def chain_rule_check(functional: Callable[[JumpPath], float],
                     h: Callable[[float], float], path: JumpPath,
                     insertion: PointInsertion) -> float:
  """|D(h∘F) - (h(F + DF) - h(F))|."""
  sample = difference(functional, path, insertion)
  composed = difference(lambda p: h(functional(p)), path, insertion)
  f, df = sample.base_value, sample.derivative
  return float(abs(composed.derivative - (h(f + df) - h(f))))


def time_integral_commutation_check(problem: Problem,
                                    discretization: Discretization,
                                    path: JumpPath, insertion: PointInsertion,
                                    measure: TimeMeasure,
                                    psi: SpectralField) -> float:
  """
  |D⟨∫X̃ dμ, ψ⟩ - ⟨∫D X̃ dμ, ψ⟩|: the difference operator commutes with
  integration in time.
  """
  functional = SchemeFunctional(problem=problem,
                                discretization=discretization,
                                functional=PathFunctional(
                                    measures=[measure],
                                    outer=LinearMap(directions=[psi])))
  lhs = difference(functional, path, insertion).derivative
  base = run_scheme(problem, discretization, path)
  d = derivative_trajectory(problem, discretization, base, insertion)
  rhs = inner_product(integrate_path(d, measure), psi)
  return float(abs(lhs - rhs))


def check_block(block: PredictableBlock, horizon: float):
  if not 0 <= block.start < block.end <= horizon + 1e-12:
    raise ValidationError('Block ({}, {}] is not an interval of [0, {}]'.format(
        block.start, block.end, horizon))
  if block.observation_time > block.start:
    raise ValidationError(
        'Integrand is not predictable: observed at {} after block start {}'.
        format(block.observation_time, block.start))


def block_scale(block: PredictableBlock, path: JumpPath) -> float:
  if block.scale is None: return 1.0
  return float(block.scale(restrict_path(path, block.observation_time)))


def mark_weight(block: PredictableBlock, mode: int, amplitude: float) -> float:
  if block.modes is not None and mode not in block.modes: return 0.0
  if block.amplitudes is not None and not np.any(
      np.isclose(amplitude, block.amplitudes, rtol=1e-9, atol=1e-12)):
    return 0.0
  return amplitude if block.mark_weighted else 1.0


def block_nodes(block: PredictableBlock,
                grid: Optional[np.ndarray] = None,
                n_nodes: int = 64) -> List[Tuple[float, float]]:
  """
  Midpoint nodes and weights on (start, end]. With a scheme grid the pieces
  are the grid intervals inside the block, on which D is constant in time.
  """
  if grid is None:
    width = (block.end - block.start) / n_nodes
    return [(block.start + (i + 0.5) * width, width) for i in range(n_nodes)]
  inner = grid[(grid > block.start) & (grid < block.end)]
  edges = np.concatenate(([block.start], inner, [block.end]))
  return [(0.5 * (a + b), b - a) for a, b in zip(edges[:-1], edges[1:])]


def as_vector(value: Any) -> np.ndarray:
  return np.atleast_1d(np.asarray(value, dtype=float))


def compensated_integral(path: JumpPath, blocks: Sequence[PredictableBlock],
                         model: LevyModel) -> np.ndarray:
  """
  ∫∫Φ dÑ: the sum over jumps inside the blocks minus the block masses under
  λ⊗ν.
  """
  atoms = mark_atoms(model)
  scales = model.scales
  total = 0.0
  for block in blocks:
    check_block(block, path.horizon)
    g = block_scale(block, path)
    inside = (path.times > block.start) & (path.times <= block.end)
    modes = path.modes[inside]
    amplitudes = path.values[inside] / scales[modes - 1]
    jumps = sum(mark_weight(block, m, a) for m, a in zip(modes, amplitudes))
    mass = (block.end - block.start) * sum(
        a.intensity * mark_weight(block, a.mode, a.amplitude) for a in atoms)
    total = total + g * (jumps - mass) * block.value
  return as_vector(total)


def duality_integrand(functional: Callable[[JumpPath], Any], path: JumpPath,
                      base_value: np.ndarray,
                      blocks: Sequence[PredictableBlock], model: LevyModel,
                      n_nodes: int) -> float:
  """∫₀ᵀ ∫ ⟨D_{t,x}F, Φ(t, x)⟩ ν(dx) dt for one path."""
  atoms = mark_atoms(model)
  grid = getattr(functional, 'grid', None)
  total = 0.0
  for block in blocks:
    g = block_scale(block, path)
    if g == 0: continue
    weighted = [(a, mark_weight(block, a.mode, a.amplitude)) for a in atoms]
    weighted = [(a, w) for a, w in weighted if w != 0]
    for t, width in block_nodes(block, grid, n_nodes):
      for atom, w in weighted:
        ins = PointInsertion(time=t, mark=atom_mark(atom, path.n_modes))
        d = as_vector(functional(add_point(path, ins))) - base_value
        total += width * atom.intensity * w * g * float(d @ block.value)
  return total


class DualitySample:
  """Both sides of the duality formula for one sample index."""

  def __init__(self, *, pair: DualityPair, model: LevyModel, horizon: float,
               seed: int, n_nodes: int):
    self.pair = pair
    self.model = model
    self.horizon = horizon
    self.seed = seed
    self.n_nodes = n_nodes

  def __call__(self, index: int) -> Tuple[float, float]:
    path = sample_indexed_path(self.model, self.horizon, self.seed, index)
    value = as_vector(self.pair.functional(path))
    lhs = float(value @ compensated_integral(path, self.pair.blocks,
                                             self.model))
    rhs = duality_integrand(self.pair.functional, path, value,
                            self.pair.blocks, self.model, self.n_nodes)
    return lhs, rhs


def duality_check(pair: DualityPair,
                  model: LevyModel,
                  horizon: float,
                  n_samples: int,
                  seed: int,
                  n_nodes: int = 64,
                  workers: int = 1) -> DualityResult:
  """
  Monte Carlo means of E⟨F, ∫∫Φ dÑ⟩ and E∫∫⟨D_{t,x}F, Φ(t,x)⟩ ν(dx)dt over
  the same paths, with the standard error of their paired difference.
  """
  if n_samples < 2:
    raise ValidationError('Duality check needs two samples, got {}'.format(
        n_samples))
  for block in pair.blocks:
    check_block(block, horizon)
  worker = DualitySample(pair=pair,
                         model=model,
                         horizon=horizon,
                         seed=seed,
                         n_nodes=n_nodes)
  sides = np.array(ordered_map(worker, range(n_samples), workers))
  lhs, rhs = sides[:, 0], sides[:, 1]
  root = np.sqrt(n_samples)
  result = DualityResult(name=pair.name,
                         lhs=float(lhs.mean()),
                         rhs=float(rhs.mean()),
                         standard_error=float(np.std(lhs - rhs, ddof=1) / root),
                         lhs_standard_error=float(np.std(lhs, ddof=1) / root),
                         rhs_standard_error=float(np.std(rhs, ddof=1) / root),
                         n_samples=n_samples)
  logger.info('Duality %s: lhs %.6g, rhs %.6g, se %.3g', pair.name, result.lhs,
              result.rhs, result.standard_error)
  return result


def closed_form_linear_duality(problem: Problem,
                               discretization: Discretization,
                               model: LevyModel, block: PredictableBlock,
                               mode: int = 1) -> float:
  """
  E⟨F, ∫∫Φ dÑ⟩ for F = ⟨X^M, e_mode⟩, f ≡ 0, spectral backend and a
  deterministic block: Σ_atoms λ_ν p q·w·x_mode·value·Σ_m |piece_m|·r^(M-m+1)
  with r = 1/(1 + kλ_mode).
  """
  if not problem.drift.is_zero:
    raise ValidationError('Closed form needs a zero drift')
  if discretization.backend is not Backend.SPECTRAL:
    raise ValidationError('Closed form needs the spectral backend')
  if block.scale is not None:
    raise ValidationError('Closed form needs a deterministic integrand')
  if mode > discretization.resolution:
    return 0.0
  grid = discretization.grid
  n_steps = len(grid) - 1
  lam = laplacian_basis(mode).eigenvalues[mode - 1]
  r = 1.0 / (1.0 + discretization.time_step * lam)
  kernel = 0.0
  for t, width in block_nodes(block, grid):
    m = int(jump_steps(np.array([t]), grid)[0])
    if m <= n_steps: kernel += width * r**(n_steps - m + 1)
  weight = sum(a.intensity * mark_weight(block, a.mode, a.amplitude) *
               a.coefficient
               for a in mark_atoms(model)
               if a.mode == mode)
  return float(weight * kernel * block.value[0])


def registered_duality_pairs(problem: Problem, discretization: Discretization,
                             model: LevyModel) -> List[DualityPair]:
  """The five (F, Φ) pairs the verification report runs."""
  horizon = problem.horizon
  spectral = discretization.backend is Backend.SPECTRAL
  n = discretization.resolution if spectral else model.n_modes
  e1 = SpectralField(basis=laplacian_basis(n), coeffs=np.eye(n)[0])
  e2 = SpectralField(basis=laplacian_basis(n), coeffs=np.eye(n)[min(1, n - 1)])

  def scheme(measures, outer, name):
    return SchemeFunctional(problem=problem,
                            discretization=discretization,
                            functional=PathFunctional(measures=measures,
                                                      outer=outer,
                                                      name=name))

  linear_block = PredictableBlock(start=0.25 * horizon,
                                  end=0.75 * horizon,
                                  value=1.0,
                                  modes=(1,),
                                  mark_weighted=True)
  closed = (closed_form_linear_duality(problem, discretization, model,
                                       linear_block)
            if problem.drift.is_zero and spectral else None)
  return [
      DualityPair(name='linear-end-value',
                  functional=scheme([dirac(horizon)],
                                    LinearMap(directions=[e1]), 'linear'),
                  blocks=[linear_block],
                  closed_form=closed),
      DualityPair(name='quadratic-end-value',
                  functional=scheme([dirac(horizon)],
                                    QuadraticMap(directions=[e1]),
                                    'quadratic'),
                  blocks=[
                      PredictableBlock(start=0.0,
                                       end=horizon,
                                       value=1.0,
                                       modes=(1, 2),
                                       mark_weighted=True)
                  ]),
      DualityPair(name='bilinear-predictable',
                  functional=scheme([dirac(0.5 * horizon),
                                     dirac(horizon)],
                                    BilinearProductMap(directions=[e1, e2]),
                                    'bilinear'),
                  blocks=[
                      PredictableBlock(start=0.5 * horizon,
                                       end=horizon,
                                       value=1.0,
                                       modes=(1, 2),
                                       mark_weighted=True,
                                       scale=FirstModeLevel())
                  ]),
      DualityPair(name='time-average',
                  functional=scheme([TimeMeasure(density=1.0)],
                                    LinearMap(directions=[e1]), 'average'),
                  blocks=[
                      PredictableBlock(start=0.0,
                                       end=0.5 * horizon,
                                       value=1.0,
                                       modes=(1,),
                                       amplitudes=(1.0,))
                  ]),
      DualityPair(name='constant',
                  functional=ConstantFunctional(constant=1.0),
                  blocks=[
                      PredictableBlock(start=0.0,
                                       end=horizon,
                                       value=1.0,
                                       mark_weighted=True)
                  ],
                  closed_form=0.0),
  ]


class FirstModeLevel:
  """g(path) = 1 + tanh(⟨L(s), e_1⟩), a bounded predictable factor."""

  def __call__(self, path: JumpPath) -> float:
    level = float(np.sum(path.values[path.modes == 1]))
    return 1.0 + float(np.tanh(level))


@singledispatch
def norm_of(value: Any) -> float:
  raise UnimplementedError('No norm for {}'.format(type(value)))


@norm_of.register(float)
@norm_of.register(int)
def norm_of_scalar(value: float) -> float:
  return abs(float(value))


@norm_of.register(np.ndarray)
def norm_of_array(value: np.ndarray) -> float:
  return float(np.linalg.norm(value))


@norm_of.register(SpectralField)
def norm_of_spectral(value: SpectralField) -> float:
  return float(np.linalg.norm(value.coeffs))


@norm_of.register(FemField)
def norm_of_fem(value: FemField) -> float:
  return fem_norm(value)


def midpoint_nodes(horizon: float, n_nodes: int) -> np.ndarray:
  return (np.arange(n_nodes) + 0.5) * horizon / n_nodes


class SeminormSample:
  """(∫₀ᵀ (∫‖D_{t,x}F‖² ν(dx))^(q/2) dt)^(1/q) for one sample index."""

  def __init__(self, *, functional: Callable[[JumpPath], Any],
               model: LevyModel, horizon: float, seed: int, q: float,
               n_nodes: int):
    self.functional = functional
    self.model = model
    self.horizon = horizon
    self.seed = seed
    self.q = q
    self.n_nodes = n_nodes

  def __call__(self, index: int) -> float:
    path = sample_indexed_path(self.model, self.horizon, self.seed, index)
    return seminorm_of_path(self.functional, path, self.model, self.q,
                            self.n_nodes)


def seminorm_of_path(functional: Callable[[JumpPath], Any], path: JumpPath,
                     model: LevyModel, q: float, n_nodes: int) -> float:
  atoms = mark_atoms(model)
  base = functional(path)
  width = path.horizon / n_nodes
  total = 0.0
  for t in midpoint_nodes(path.horizon, n_nodes):
    energy = 0.0
    for atom in atoms:
      ins = PointInsertion(time=float(t), mark=atom_mark(atom, path.n_modes))
      energy += atom.intensity * norm_of(functional(add_point(path, ins)) -
                                         base)**2
    total += width * energy**(q / 2)
  return float(total**(1.0 / q))


def m1pq_seminorm(functional: Callable[[JumpPath], Any],
                  p: float,
                  q: float,
                  model: LevyModel,
                  horizon: float,
                  n_samples: int,
                  seed: int,
                  n_nodes: int = 64,
                  workers: int = 1) -> SeminormEstimate:
  """
  Empirical ‖DF‖ in L^p(Ω; L^q([0, T]; L²(ν))). For p = 2 the estimate is the
  root of the mean square with a delta-method standard error; for p = ∞ it
  is the sample maximum, reported without a standard error.
  """
  validate_q(q, model.beta)
  if p not in (2, np.inf):
    raise ValidationError('p must be 2 or ∞, got {}'.format(p))
  if n_samples < 2:
    raise ValidationError('Seminorm needs two samples, got {}'.format(
        n_samples))
  worker = SeminormSample(functional=functional,
                          model=model,
                          horizon=horizon,
                          seed=seed,
                          q=q,
                          n_nodes=n_nodes)
  values = np.array(ordered_map(worker, range(n_samples), workers))
  if p == np.inf:
    return SeminormEstimate(value=float(values.max()),
                            standard_error=0.0,
                            n_samples=n_samples,
                            p=p,
                            q=q)
  squares = values**2
  mean = squares.mean()
  value = float(np.sqrt(mean))
  se = (float(np.std(squares, ddof=1) / np.sqrt(n_samples) / (2 * value))
        if value > 0 else 0.0)
  return SeminormEstimate(value=value,
                          standard_error=se,
                          n_samples=n_samples,
                          p=p,
                          q=q)


def scheme_seminorm_profile(problem: Problem,
                            discretizations: Sequence[Discretization],
                            model: LevyModel,
                            q: float,
                            n_samples: int,
                            seed: int,
                            n_nodes: int = 16,
                            workers: int = 1) -> List[SeminormEstimate]:
  """The M^(1,2,q) seminorm of X^M_{h,k} along a list of resolutions."""
  return [
      m1pq_seminorm(SchemeEndState(problem=problem, discretization=disc), 2,
                    q, model, problem.horizon, n_samples, seed, n_nodes,
                    workers) for disc in discretizations
  ]


def unit_marks(model: LevyModel) -> List[SpectralField]:
  """σ_j e_j for every noise mode, each of norm one in the noise space."""
  basis = laplacian_basis(model.n_modes)
  return [
      SpectralField(basis=basis, coeffs=np.eye(model.n_modes)[j] * sigma)
      for j, sigma in enumerate(model.scales)
  ]


def dyadic_pairs(horizon: float, depth: int) -> List[Tuple[float, float]]:
  """
  (s, t) with s at the interior quarters of [0, T] and every t > s on the
  grid of spacing T/2^depth.
  """
  if depth < 2:
    raise ValidationError('Dyadic grid needs depth >= 2, got {}'.format(depth))
  cells = 2**depth
  pairs = []
  for quarter in range(1, 4):
    start = quarter * cells // 4
    pairs.extend((start * horizon / cells, end * horizon / cells)
                 for end in range(start + 1, cells + 1))
  return pairs


def profile_depth(horizon: float, beta: float) -> int:
  """Smallest depth whose spacing is at most half the first-mode peak gap."""
  peak = (1.0 - beta) / (2 * np.pi**2)
  depth = 2
  while horizon / 2**depth > peak / 2:
    depth += 1
  return depth


def regularity_profile(problem: Problem,
                       resolution: Union[Discretization, ReferenceSettings],
                       model: LevyModel,
                       pairs: Sequence[Tuple[float, float]],
                       n_samples: int,
                       seed: int,
                       marks: Optional[Sequence[SpectralField]] = None) -> float:
  """
  sup over samples, (s, t) pairs and marks of
  ‖D_{s,x}X(t)‖·(t - s)^((1-β)/2)/‖x‖_U.
  """
  for s, t in pairs:
    if not t > s:
      raise ValidationError('Profile needs t > s, got s = {}, t = {}'.format(
          s, t))
    if not 0 < s <= problem.horizon or t > problem.horizon + 1e-12:
      raise ValidationError('Pair ({}, {}) leaves (0, {}]'.format(
          s, t, problem.horizon))
  marks = list(marks) if marks is not None else unit_marks(model)
  exponent = (1.0 - model.beta) / 2
  by_start = {}
  for s, t in pairs:
    by_start.setdefault(s, []).append(t)

  def run(path: JumpPath) -> Any:
    if isinstance(resolution, Discretization):
      return run_scheme(problem, resolution, path)
    return run_reference(problem, path, resolution)

  def evaluate(record: Any, t: float) -> Any:
    if isinstance(record, TrajectoryRecord):
      return eval_interpolated(record, t)
    return eval_reference(record, t)

  best = 0.0
  for index in range(n_samples):
    path = sample_indexed_path(model, problem.horizon, seed, index)
    base = run(path)
    base_at = {}
    for s, times in by_start.items():
      for t in times:
        if t not in base_at: base_at[t] = evaluate(base, t)
      for x in marks:
        size = hdot_norm(x, model.beta - 1)
        if size == 0: continue
        perturbed = run(add_point(path, PointInsertion(time=s, mark=x)))
        for t in times:
          d = norm_of(evaluate(perturbed, t) - base_at[t])
          best = max(best, d * (t - s)**exponent / size)
  return best
