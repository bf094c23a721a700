from enum import Enum
from typing import (Any, Callable, Dict, List, NamedTuple, Optional, Sequence,
                    Tuple, Union)

import numpy as np

from .errors import UnimplementedError


class SpectralBasis:
  """
  Eigenbasis of the negative Dirichlet Laplacian on (0, 1), truncated after a
  finite number of modes.

  The eigenfunctions are never stored, they are e_j(ξ) = √2·sin(jπξ). A basis
  built with a custom eigenvalue sequence keeps the same eigenfunctions and
  only changes the diagonal operator, which is all the spectral calculus needs.

  Attributes:
    n_modes (int): The truncation level K.
    eigenvalues (np.ndarray): The eigenvalues λ_1 < ... < λ_K, λ_j = (jπ)² by
      default.
    is_laplacian (bool): Whether the eigenvalues are the Laplacian ones, which
      the finite element transfer maps rely on.
  """

  def __init__(self,
               *,
               n_modes: int,
               eigenvalues: Optional[Sequence[float]] = None):
    self.n_modes = n_modes
    if eigenvalues is None:
      self.eigenvalues = (np.pi * np.arange(1, n_modes + 1))**2
      self.is_laplacian = True
    else:
      self.eigenvalues = np.asarray(eigenvalues, dtype=float)
      self.is_laplacian = False

  @property
  def grid(self) -> np.ndarray:
    return np.arange(1, self.n_modes + 1) / (self.n_modes + 1)


class SpectralField:
  """
  A field given by its coefficients in a :class:`SpectralBasis`.

  Attributes:
    basis (SpectralBasis): The basis the coefficients refer to.
    coeffs (np.ndarray): Coefficients c_1..c_K.
  """

  def __init__(self, *, basis: SpectralBasis, coeffs: Any):
    self.basis = basis
    self.coeffs = np.asarray(coeffs, dtype=float)

  @property
  def n_modes(self) -> int:
    return self.basis.n_modes

  def _wrap(self, coeffs: np.ndarray) -> 'SpectralField':
    return SpectralField(basis=self.basis, coeffs=coeffs)

  def __add__(self, other: 'SpectralField') -> 'SpectralField':
    return self._wrap(self.coeffs + other.coeffs)

  def __sub__(self, other: 'SpectralField') -> 'SpectralField':
    return self._wrap(self.coeffs - other.coeffs)

  def __mul__(self, scalar: float) -> 'SpectralField':
    return self._wrap(self.coeffs * scalar)

  __rmul__ = __mul__

  def __neg__(self) -> 'SpectralField':
    return self._wrap(-self.coeffs)


class FemMesh:
  """
  Uniform mesh of (0, 1) carrying continuous piecewise linear functions with
  zero boundary values.

  Attributes:
    n_cells (int): Number of cells; h = 1/n_cells.
  """

  def __init__(self, *, n_cells: int):
    self.n_cells = n_cells

  @property
  def h(self) -> float:
    return 1.0 / self.n_cells

  @property
  def n_nodes(self) -> int:
    return self.n_cells - 1

  @property
  def nodes(self) -> np.ndarray:
    return np.arange(1, self.n_cells) / self.n_cells

  def __eq__(self, other: object) -> bool:
    return isinstance(other, FemMesh) and other.n_cells == self.n_cells

  def __hash__(self) -> int:
    return hash(('FemMesh', self.n_cells))


class FemField:
  """
  A piecewise linear field stored by its values at the interior nodes.

  Attributes:
    mesh (FemMesh): The mesh the nodal values live on.
    nodal_values (np.ndarray): Values at ξ_1..ξ_{n_cells-1}; the boundary
      values are zero and are not stored.
  """

  def __init__(self, *, mesh: FemMesh, nodal_values: Any):
    self.mesh = mesh
    self.nodal_values = np.asarray(nodal_values, dtype=float)

  def _wrap(self, values: np.ndarray) -> 'FemField':
    return FemField(mesh=self.mesh, nodal_values=values)

  def __add__(self, other: 'FemField') -> 'FemField':
    return self._wrap(self.nodal_values + other.nodal_values)

  def __sub__(self, other: 'FemField') -> 'FemField':
    return self._wrap(self.nodal_values - other.nodal_values)

  def __mul__(self, scalar: float) -> 'FemField':
    return self._wrap(self.nodal_values * scalar)

  __rmul__ = __mul__

  def __neg__(self) -> 'FemField':
    return self._wrap(-self.nodal_values)


Field = Union[SpectralField, FemField]


class TridiagonalOperator:
  """
  Symmetric tridiagonal matrix stored by its diagonals.

  Attributes:
    sub (np.ndarray): The sub-diagonal (length n-1).
    diag (np.ndarray): The main diagonal (length n).
    sup (np.ndarray): The super-diagonal (length n-1).
  """

  def __init__(self, *, sub: Any, diag: Any, sup: Any):
    self.sub = np.asarray(sub, dtype=float)
    self.diag = np.asarray(diag, dtype=float)
    self.sup = np.asarray(sup, dtype=float)

  @property
  def size(self) -> int:
    return len(self.diag)

  def matvec(self, x: np.ndarray) -> np.ndarray:
    y = self.diag * x
    y[:-1] += self.sup * x[1:]
    y[1:] += self.sub * x[:-1]
    return y

  def banded_lower(self) -> np.ndarray:
    ab = np.zeros((2, self.size))
    ab[0] = self.diag
    ab[1, :-1] = self.sub
    return ab

  def dense(self) -> np.ndarray:
    return (np.diag(self.diag) + np.diag(self.sub, -1) +
            np.diag(self.sup, 1))

  def plus(self, other: 'TridiagonalOperator',
           scale: float = 1.0) -> 'TridiagonalOperator':
    return TridiagonalOperator(sub=self.sub + scale * other.sub,
                               diag=self.diag + scale * other.diag,
                               sup=self.sup + scale * other.sup)


class Backend(Enum):
  """
  The spatial discretization a scheme runs on.

  Attributes:
    SPECTRAL (str): Spectral Galerkin method on the first N eigenfunctions,
      h := 1/N.
    FEM (str): Continuous piecewise linear finite elements on a uniform mesh
      of width h.
  """

  SPECTRAL = 'spectral'
  FEM = 'fem'


class NoiseInjection(Enum):
  """
  How jump marks enter the finite element space.

  Attributes:
    PROJECTION (str): L² projection, consistent with P_h in S_{h,k}.
    INTERPOLATION (str): Nodal interpolation, for sensitivity studies.
  """

  PROJECTION = 'projection'
  INTERPOLATION = 'interpolation'


class SweepMode(Enum):
  """
  How a resolution ladder refines.

  Attributes:
    SPACE (str): Spatial resolution varies, the time step is pinned fine.
    TIME (str): The time step varies, the spatial resolution is pinned fine.
    DIAGONAL (str): Both vary with k = h².
  """

  SPACE = 'space'
  TIME = 'time'
  DIAGONAL = 'diagonal'


class LevyModel:
  """
  Compound Poisson model of the driving noise with values in the smoothness
  space of order β - 1.

  Jumps arrive at a constant rate. A jump picks mode j with probability
  proportional to j^(-α) and an amplitude ζ from a finite symmetric law; its
  mark is ζ·σ_j·e_j with σ_j = λ_j^((1-β)/2), so the mark has norm |ζ| in the
  noise space.

  Attributes:
    rate (float): Expected number of jumps per unit time, λ_ν ≥ 0.
    mode_decay (float): The exponent α > 1 of the mode law.
    n_modes (int): Number of excited modes K_noise.
    beta (float): Regularity parameter β ∈ (0, 1].
    amplitudes (np.ndarray): Atoms of the amplitude law.
    amplitude_weights (np.ndarray): Probabilities of the amplitude atoms.
  """

  def __init__(self,
               *,
               rate: float,
               mode_decay: float,
               n_modes: int,
               beta: float,
               amplitudes: Sequence[float] = (-1.0, 1.0),
               amplitude_weights: Sequence[float] = (0.5, 0.5)):
    self.rate = float(rate)
    self.mode_decay = float(mode_decay)
    self.n_modes = n_modes
    self.beta = float(beta)
    self.amplitudes = np.asarray(amplitudes, dtype=float)
    self.amplitude_weights = np.asarray(amplitude_weights, dtype=float)

  @property
  def basis(self) -> SpectralBasis:
    return SpectralBasis(n_modes=self.n_modes)

  @property
  def mode_weights(self) -> np.ndarray:
    w = np.arange(1, self.n_modes + 1, dtype=float)**(-self.mode_decay)
    return w / w.sum()

  @property
  def scales(self) -> np.ndarray:
    return self.basis.eigenvalues**((1.0 - self.beta) / 2)


class JumpPath:
  """
  One realization of the Poisson random measure of the noise: finitely many
  jumps in (0, T], each a multiple of a single eigenfunction.

  A jump whose mark spans several modes is stored as several entries with the
  same time, which is how the solvers see it anyway.

  Attributes:
    horizon (float): The horizon T.
    times (np.ndarray): Jump times, non-decreasing, in (0, T].
    modes (np.ndarray): 1-based mode index of each jump.
    values (np.ndarray): Coefficient of e_mode carried by each jump.
    n_modes (int): Size of the spectral space the marks live in.
    seed (Optional[int]): Master seed the path was drawn with.
    index (Optional[int]): Sample index the path was drawn with.
  """

  def __init__(self,
               *,
               horizon: float,
               times: Any,
               modes: Any,
               values: Any,
               n_modes: int,
               seed: Optional[int] = None,
               index: Optional[int] = None):
    self.horizon = float(horizon)
    self.times = np.asarray(times, dtype=float)
    self.modes = np.asarray(modes, dtype=np.int64)
    self.values = np.asarray(values, dtype=float)
    self.n_modes = n_modes
    self.seed = seed
    self.index = index

  def __len__(self) -> int:
    return len(self.times)


class MarkAtom(NamedTuple):
  """A point mass of the discrete Lévy measure: ζ·σ_mode·e_mode."""
  mode: int
  amplitude: float
  coefficient: float
  intensity: float


class Drift:
  """
  A scalar function f with bounded first and second derivatives, applied
  pointwise as a Nemytskii operator.
  """

  name = 'abstract'

  def f(self, u: np.ndarray) -> np.ndarray:
    raise UnimplementedError('Must implement f')

  def df(self, u: np.ndarray) -> np.ndarray:
    raise UnimplementedError('Must implement df')

  def d2f(self, u: np.ndarray) -> np.ndarray:
    raise UnimplementedError('Must implement d2f')

  @property
  def is_zero(self) -> bool:
    return False

  @property
  def lipschitz_bound(self) -> float:
    raise UnimplementedError('Must implement lipschitz_bound')


class ZeroDrift(Drift):
  name = 'zero'

  def f(self, u: np.ndarray) -> np.ndarray:
    return np.zeros_like(u)

  def df(self, u: np.ndarray) -> np.ndarray:
    return np.zeros_like(u)

  def d2f(self, u: np.ndarray) -> np.ndarray:
    return np.zeros_like(u)

  @property
  def is_zero(self) -> bool:
    return True

  @property
  def lipschitz_bound(self) -> float:
    return 0.0


class SineDrift(Drift):
  """
  f(u) = a·sin(u); |f'| ≤ |a| and |f''| ≤ |a|.

  Attributes:
    amplitude (float): The factor a.
  """

  name = 'sine'

  def __init__(self, *, amplitude: float):
    self.amplitude = float(amplitude)

  def f(self, u: np.ndarray) -> np.ndarray:
    return self.amplitude * np.sin(u)

  def df(self, u: np.ndarray) -> np.ndarray:
    return self.amplitude * np.cos(u)

  def d2f(self, u: np.ndarray) -> np.ndarray:
    return -self.amplitude * np.sin(u)

  @property
  def is_zero(self) -> bool:
    return self.amplitude == 0.0

  @property
  def lipschitz_bound(self) -> float:
    return abs(self.amplitude)


class InitialValue:
  name = 'abstract'

  def coefficients(self, n_modes: int) -> np.ndarray:
    raise UnimplementedError('Must implement coefficients')

  def __call__(self, xi: np.ndarray) -> np.ndarray:
    raise UnimplementedError('Must implement __call__')


class ZeroInitialValue(InitialValue):
  name = 'zero'

  def coefficients(self, n_modes: int) -> np.ndarray:
    return np.zeros(n_modes)

  def __call__(self, xi: np.ndarray) -> np.ndarray:
    return np.zeros_like(xi, dtype=float)


class QuadraticInitialValue(InitialValue):
  """
  X₀(ξ) = c·ξ(1-ξ), whose sine coefficients 2√2·c·(1-(-1)^j)/(jπ)³ decay
  like j^(-3).

  Attributes:
    amplitude (float): The factor c.
  """

  name = 'quadratic'

  def __init__(self, *, amplitude: float):
    self.amplitude = float(amplitude)

  def coefficients(self, n_modes: int) -> np.ndarray:
    j = np.arange(1, n_modes + 1)
    odd = 1.0 - (-1.0)**j
    return self.amplitude * np.sqrt(2.0) * 2.0 * odd / (j * np.pi)**3

  def __call__(self, xi: np.ndarray) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    return self.amplitude * xi * (1.0 - xi)


class SpectralInitialValue(InitialValue):
  """
  An initial value given directly by finitely many sine coefficients.

  Attributes:
    coeffs (np.ndarray): Coefficients c_1..c_n.
  """

  name = 'spectral'

  def __init__(self, *, coeffs: Any):
    self.coeffs = np.asarray(coeffs, dtype=float)

  def coefficients(self, n_modes: int) -> np.ndarray:
    c = np.zeros(n_modes)
    n = min(n_modes, len(self.coeffs))
    c[:n] = self.coeffs[:n]
    return c

  def __call__(self, xi: np.ndarray) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    j = np.arange(1, len(self.coeffs) + 1)
    return np.sqrt(2.0) * np.sin(np.pi * np.multiply.outer(xi, j)) @ self.coeffs


class Problem:
  """
  The semilinear heat equation with additive jump noise on (0, 1).

  Attributes:
    beta (float): Regularity parameter β ∈ (0, 1] of the noise.
    horizon (float): Final time T.
    drift (Drift): The scalar nonlinearity f.
    initial (InitialValue): The initial value X₀.
    delta (float): Smoothing exponent of the drift, kept for reporting.
  """

  def __init__(self,
               *,
               beta: float,
               horizon: float,
               drift: Drift,
               initial: InitialValue,
               delta: float = 0.75):
    self.beta = float(beta)
    self.horizon = float(horizon)
    self.drift = drift
    self.initial = initial
    self.delta = float(delta)


class Discretization:
  """
  Space-time resolution of the linearly implicit Euler scheme.

  Attributes:
    backend (Backend): Spectral Galerkin or finite elements.
    resolution (int): Number of modes N (spectral) or cells (fem); h = 1/N.
    time_step (float): The step k ∈ (0, 1).
    horizon (float): Final time T; the scheme has M = max{m : mk ≤ T} steps.
  """

  def __init__(self, *, backend: Backend, resolution: int, time_step: float,
               horizon: float):
    self.backend = backend
    self.resolution = resolution
    self.time_step = float(time_step)
    self.horizon = float(horizon)

  @property
  def h(self) -> float:
    return 1.0 / self.resolution

  @property
  def n_steps(self) -> int:
    m = int(np.floor(self.horizon / self.time_step))
    if (m + 1) * self.time_step <= self.horizon: m += 1
    if m * self.time_step > self.horizon: m -= 1
    return m

  @property
  def grid(self) -> np.ndarray:
    return self.time_step * np.arange(self.n_steps + 1)

  @property
  def dimension(self) -> int:
    if self.backend is Backend.FEM:
      return self.resolution - 1
    return self.resolution


class ReferenceSettings:
  """
  Resolution of the exponential reference solver.

  Attributes:
    n_modes (int): Spectral truncation N_ref.
    n_substeps (int): Number of uniform substeps M_ref on [0, T].
    checkpoint_stride (Optional[int]): Substeps between stored states, a
      divisor of ``n_substeps``; about 512 checkpoints are kept when None.
  """

  def __init__(self,
               *,
               n_modes: int,
               n_substeps: int,
               checkpoint_stride: Optional[int] = None):
    self.n_modes = n_modes
    self.n_substeps = n_substeps
    self.checkpoint_stride = checkpoint_stride

  @property
  def stride(self) -> int:
    if self.checkpoint_stride is not None:
      return self.checkpoint_stride
    stride = max(1, -(-self.n_substeps // 512))
    while self.n_substeps % stride: stride += 1
    return stride

  def doubled(self) -> 'ReferenceSettings':
    return ReferenceSettings(n_modes=2 * self.n_modes,
                             n_substeps=2 * self.n_substeps,
                             checkpoint_stride=None if
                             self.checkpoint_stride is None else 2 *
                             self.checkpoint_stride)


class TrajectoryRecord:
  """
  Grid values X⁰..X^M of the scheme, read as a piecewise constant path.

  Attributes:
    discretization (Discretization): The resolution that produced the values.
    values (np.ndarray): Array of shape (M + 1, dimension).
    truncated_jumps (int): Jumps whose mode the backend could not carry.
  """

  def __init__(self,
               *,
               discretization: Discretization,
               values: np.ndarray,
               truncated_jumps: int = 0):
    self.discretization = discretization
    self.values = values
    self.truncated_jumps = truncated_jumps

  @property
  def times(self) -> np.ndarray:
    return self.discretization.grid


class ReferenceRecord:
  """
  Checkpointed substep values of the reference solution, together with what
  is needed to evaluate it exactly at any substep or between substeps.

  Attributes:
    problem (Problem): The problem that was solved.
    path (JumpPath): The driving noise.
    settings (ReferenceSettings): The reference resolution.
    values (np.ndarray): States at every ``stride``-th substep, shape
      (M_ref/stride + 1, N_ref).
    integrals (np.ndarray): Left-point time integrals ∫₀^r X on the substep
      grid, at the same checkpoints.
    truncated_jumps (int): Jumps in modes above N_ref.
    stepper (Any): The substep propagator that produced the values, reused
      to step from a checkpoint to any later time.
  """

  def __init__(self,
               *,
               problem: Problem,
               path: JumpPath,
               settings: ReferenceSettings,
               values: np.ndarray,
               integrals: np.ndarray,
               truncated_jumps: int = 0,
               stepper: Any = None):
    self.problem = problem
    self.path = path
    self.settings = settings
    self.values = values
    self.integrals = integrals
    self.truncated_jumps = truncated_jumps
    self.stepper = stepper

  @property
  def substep(self) -> float:
    return self.problem.horizon / self.settings.n_substeps

  @property
  def stride(self) -> int:
    return self.settings.stride

  @property
  def times(self) -> np.ndarray:
    return self.substep * np.arange(0, self.settings.n_substeps + 1,
                                    self.stride)


Record = Union[TrajectoryRecord, ReferenceRecord]


class TimeMeasure:
  """
  Finite measure on [0, T] made of point masses and a constant density.

  Attributes:
    atoms (Sequence[Tuple[float, float]]): Pairs (t_i, w_i) with w_i ≥ 0.
    density (float): Constant Lebesgue density c ≥ 0.
  """

  def __init__(self,
               *,
               atoms: Sequence[Tuple[float, float]] = (),
               density: float = 0.0):
    self.atoms = [(float(t), float(w)) for t, w in atoms]
    self.density = float(density)


class PathFunctional:
  """
  A test functional x ↦ φ(∫x dμ₁, ..., ∫x dμ_n).

  Attributes:
    measures (Sequence[TimeMeasure]): The measures μ₁..μ_n.
    outer (Any): The outer map φ, an object with ``value`` and
      ``derivative`` methods (see :mod:`levy_heat.functionals`).
    name (str): Name used in reports.
  """

  def __init__(self, *, measures: Sequence[TimeMeasure], outer: Any,
               name: str = 'functional'):
    self.measures = list(measures)
    self.outer = outer
    self.name = name


class PointInsertion:
  """
  An extra jump added to a path.

  Attributes:
    time (float): Insertion time s ∈ (0, T].
    mark (SpectralField): The jump x.
  """

  def __init__(self, *, time: float, mark: SpectralField):
    self.time = float(time)
    self.mark = mark


class MalliavinSample:
  """
  A functional evaluated on a path and on the same path with one point added.

  Attributes:
    path (JumpPath): The base path.
    insertion (PointInsertion): The added point.
    base_value (Any): F on the base path.
    perturbed_value (Any): F on the path with the added point.
  """

  def __init__(self, *, path: JumpPath, insertion: PointInsertion,
               base_value: Any, perturbed_value: Any):
    self.path = path
    self.insertion = insertion
    self.base_value = base_value
    self.perturbed_value = perturbed_value

  @property
  def derivative(self) -> Any:
    return self.perturbed_value - self.base_value


class PredictableBlock:
  """
  One block of a simple predictable integrand:
  Φ(t, x) = 1_(start, end](t)·1_marks(x)·w(x)·g(path up to start)·value.

  Attributes:
    start (float): Left end of the time interval.
    end (float): Right end of the time interval.
    value (np.ndarray): The vector Φ takes on the block.
    modes (Optional[Sequence[int]]): Marks whose mode lies here are included;
      None includes all modes.
    amplitudes (Optional[Sequence[float]]): Marks whose amplitude lies here
      are included; None includes all amplitudes.
    mark_weighted (bool): Multiply by the amplitude ζ of the mark.
    scale (Optional[Callable[[JumpPath], float]]): The random factor g,
      evaluated on the path restricted to jumps up to ``observation_time``.
    observation_time (Optional[float]): Information time of ``scale``;
      defaults to ``start`` and must not exceed it.
  """

  def __init__(self,
               *,
               start: float,
               end: float,
               value: Any,
               modes: Optional[Sequence[int]] = None,
               amplitudes: Optional[Sequence[float]] = None,
               mark_weighted: bool = False,
               scale: Optional[Callable[[JumpPath], float]] = None,
               observation_time: Optional[float] = None):
    self.start = float(start)
    self.end = float(end)
    self.value = np.atleast_1d(np.asarray(value, dtype=float))
    self.modes = None if modes is None else tuple(int(m) for m in modes)
    self.amplitudes = None if amplitudes is None else tuple(
        float(a) for a in amplitudes)
    self.mark_weighted = mark_weighted
    self.scale = scale
    self.observation_time = (self.start if observation_time is None else
                             float(observation_time))


class ResolutionLadder:
  """
  The resolutions a sweep compares against one reference.

  Attributes:
    rungs (Sequence[Discretization]): Ladder entries, coarse to fine.
    reference (ReferenceSettings): Reference solver resolution.
    sweep_mode (SweepMode): Which parameter varies along the ladder.
  """

  def __init__(self, *, rungs: Sequence[Discretization],
               reference: ReferenceSettings, sweep_mode: SweepMode):
    self.rungs = list(rungs)
    self.reference = reference
    self.sweep_mode = sweep_mode

  @property
  def scale_name(self) -> str:
    return 'k' if self.sweep_mode is SweepMode.TIME else 'h'

  def scales(self) -> List[float]:
    if self.sweep_mode is SweepMode.TIME:
      return [r.time_step for r in self.rungs]
    return [r.h for r in self.rungs]


class ErrorRow(NamedTuple):
  h: float
  k: float
  estimator: str
  estimate: float
  standard_error: float
  n_samples: int
  status: str = 'ok'


class RateFit(NamedTuple):
  slope: float
  intercept: float
  r_squared: float
  excluded: Tuple[int, ...]
  variable: str = 'h'


class ErrorTable:
  """
  Error estimates of a sweep with their fitted log-log slopes.

  Attributes:
    rows (List[ErrorRow]): One row per (rung, estimator).
    fits (Dict[str, Optional[RateFit]]): Fitted slope per estimator; None when
      the fit is undefined (floor-level or void rungs).
    metadata (Dict[str, Any]): Seed, config hash, warning counts, sweep mode.
  """

  def __init__(self,
               *,
               rows: Sequence[ErrorRow],
               fits: Optional[Dict[str, Optional[RateFit]]] = None,
               metadata: Optional[Dict[str, Any]] = None):
    self.rows = list(rows)
    self.fits = dict(fits or {})
    self.metadata = dict(metadata or {})

  def rows_for(self, estimator: str) -> List[ErrorRow]:
    return [r for r in self.rows if r.estimator == estimator]


class RatioResult(NamedTuple):
  """Weak over strong slope; ``ratio`` is None with a ``reason`` otherwise."""
  ratio: Optional[float]
  reason: str
  strong: ErrorTable
  weak: ErrorTable


class DualityResult(NamedTuple):
  name: str
  lhs: float
  rhs: float
  standard_error: float
  lhs_standard_error: float
  rhs_standard_error: float
  n_samples: int


class SeminormEstimate(NamedTuple):
  value: float
  standard_error: float
  n_samples: int
  p: float
  q: float


class DualityPair:
  """
  A functional of the path together with a simple predictable integrand.

  Attributes:
    name (str): Name used in reports.
    functional (Callable[[JumpPath], Any]): F, scalar or vector valued.
    blocks (Sequence[PredictableBlock]): The integrand Φ.
    closed_form (Optional[float]): E⟨F, ∫∫Φ dÑ⟩ when known exactly.
  """

  def __init__(self,
               *,
               name: str,
               functional: Callable[[JumpPath], Any],
               blocks: Sequence[PredictableBlock],
               closed_form: Optional[float] = None):
    self.name = name
    self.functional = functional
    self.blocks = list(blocks)
    self.closed_form = closed_form


class IdentityCheck(NamedTuple):
  name: str
  lhs: float
  rhs: float
  tolerance: float
  relative: bool = False


class StatisticalCheck(NamedTuple):
  name: str
  lhs: float
  rhs: float
  standard_error: float
  band: float = 3.0


class RangeCheck(NamedTuple):
  """
  A measured value that must lie in [low, high]. ``statistical`` marks Monte
  Carlo quantities, whose failures are not identity failures.
  """
  name: str
  value: float
  low: float
  high: float
  statistical: bool = True


Check = Union[IdentityCheck, StatisticalCheck, RangeCheck]


class ProblemConfig:
  def __init__(self, *, beta: float, horizon: float, drift: str,
               drift_amplitude: float, initial: str, initial_amplitude: float,
               delta: float):
    self.beta = beta
    self.horizon = horizon
    self.drift = drift
    self.drift_amplitude = drift_amplitude
    self.initial = initial
    self.initial_amplitude = initial_amplitude
    self.delta = delta


class NoiseConfig:
  def __init__(self, *, rate: float, mode_decay: float, n_modes: int,
               amplitudes: Sequence[float],
               amplitude_weights: Sequence[float]):
    self.rate = rate
    self.mode_decay = mode_decay
    self.n_modes = n_modes
    self.amplitudes = list(amplitudes)
    self.amplitude_weights = list(amplitude_weights)


class DiscretizationConfig:
  def __init__(self, *, backend: Backend, sweep: SweepMode,
               levels: Sequence[int], pinned: int, reference_modes: int,
               reference_substeps: int, strict_truncation: bool = False):
    self.backend = backend
    self.sweep = sweep
    self.levels = list(levels)
    self.pinned = pinned
    self.reference_modes = reference_modes
    self.reference_substeps = reference_substeps
    self.strict_truncation = strict_truncation


class MonteCarloConfig:
  """
  Attributes:
    samples (int): Coupled samples per sweep.
    seed (int): Master seed; sample i draws from the stream keyed (seed, i).
    workers (int): Pool size; 0 uses every available core.
  """

  def __init__(self, *, samples: int, seed: int, workers: int = 0):
    self.samples = samples
    self.seed = seed
    self.workers = workers


class FunctionalConfig:
  def __init__(self, *, name: str, modes: Sequence[int],
               atoms: Sequence[float], density: float = 0.0):
    self.name = name
    self.modes = list(modes)
    self.atoms = list(atoms)
    self.density = density


class CovarianceConfig:
  def __init__(self, *, t1: float, t2: float, psi1_mode: int,
               psi2_mode: int):
    self.t1 = t1
    self.t2 = t2
    self.psi1_mode = psi1_mode
    self.psi2_mode = psi2_mode


class MalliavinConfig:
  def __init__(self, *, instances: int, quadrature_nodes: int,
               duality_samples: int, profile_samples: int, q: float,
               modes: int, steps: int, duality_modes: int,
               duality_rate: float):
    self.instances = instances
    self.quadrature_nodes = quadrature_nodes
    self.duality_samples = duality_samples
    self.profile_samples = profile_samples
    self.q = q
    self.modes = modes
    self.steps = steps
    self.duality_modes = duality_modes
    self.duality_rate = duality_rate


class AcceptanceConfig:
  def __init__(self, *, bands: Optional[Dict[str, Tuple[float, float]]] = None):
    self.bands = dict(bands or {})


class OutputConfig:
  def __init__(self, *, directory: str, plot_data: bool = True,
               archive_paths: bool = False):
    self.directory = directory
    self.plot_data = plot_data
    self.archive_paths = archive_paths


class ExperimentConfig:
  """
  A parsed experiment config file.

  Attributes:
    problem (ProblemConfig): Equation parameters.
    noise (NoiseConfig): Noise model parameters.
    discretization (DiscretizationConfig): Backend, ladder and reference.
    mc (MonteCarloConfig): Sample count, master seed and worker count.
    functional (FunctionalConfig): The test functional of weak sweeps.
    covariance (CovarianceConfig): Times and directions of covariance sweeps.
    malliavin (MalliavinConfig): Sizes of the identity checks.
    acceptance (AcceptanceConfig): Slope bands enforced by the runner.
    output (OutputConfig): Where and what to write.
    source_text (str): The config text, hashed into every artifact.
  """

  def __init__(self, *, problem: ProblemConfig, noise: NoiseConfig,
               discretization: DiscretizationConfig, mc: MonteCarloConfig,
               functional: FunctionalConfig, covariance: CovarianceConfig,
               malliavin: MalliavinConfig, acceptance: AcceptanceConfig,
               output: OutputConfig, source_text: str = ''):
    self.problem = problem
    self.noise = noise
    self.discretization = discretization
    self.mc = mc
    self.functional = functional
    self.covariance = covariance
    self.malliavin = malliavin
    self.acceptance = acceptance
    self.output = output
    self.source_text = source_text
