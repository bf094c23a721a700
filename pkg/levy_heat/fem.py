"""
Piecewise linear finite elements on uniform meshes of (0, 1).

The discrete operator A_h is never formed. Every application of the step
operator S_{h,k} = (I + kA_h)^(-1) P_h is a banded solve with M_h + kS_h
against a load vector, M_h and S_h being the mass and stiffness matrices.
"""
from collections.abc import Callable
from functools import lru_cache, singledispatch
from typing import Any, Sequence, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import cho_solve_banded, cholesky_banded, solveh_banded

from .constants import DEFAULT_GAUSS_POINTS, MAX_GAUSS_POINTS
from .errors import UnimplementedError, ValidationError
from .spectral import apply_fractional_power, apply_semigroup, l2_norm
from .types import FemField, FemMesh, SpectralField, TridiagonalOperator


def make_mesh(n_cells: int) -> FemMesh:
  if n_cells < 2:
    raise ValidationError(
        'A mesh needs at least two cells, got {}'.format(n_cells))
  return FemMesh(n_cells=n_cells)


def mesh_from_width(h: float) -> FemMesh:
  n_cells = int(round(1.0 / h))
  if abs(n_cells * h - 1.0) > 1e-9:
    raise ValidationError('Mesh width {} does not divide (0, 1)'.format(h))
  return make_mesh(n_cells)


def assemble_mass(mesh: FemMesh) -> TridiagonalOperator:
  n, h = mesh.n_nodes, mesh.h
  off = np.full(n - 1, h / 6)
  return TridiagonalOperator(sub=off, diag=np.full(n, 4 * h / 6), sup=off)


def assemble_stiffness(mesh: FemMesh) -> TridiagonalOperator:
  n, h = mesh.n_nodes, mesh.h
  off = np.full(n - 1, -1.0 / h)
  return TridiagonalOperator(sub=off, diag=np.full(n, 2.0 / h), sup=off)


@lru_cache(maxsize=32)
def mass_matrix(n_cells: int) -> TridiagonalOperator:
  return assemble_mass(make_mesh(n_cells))


def mass_solve(mesh: FemMesh, b: np.ndarray) -> np.ndarray:
  return solveh_banded(mass_matrix(mesh.n_cells).banded_lower(), b, lower=True)


class StepOperator:
  """
  The discrete step S_{h,k} = (I + kA_h)^(-1) P_h with a precomputed banded
  Cholesky factor of M_h + kS_h.

  Instances are immutable once built and can be shared between workers; each
  solve allocates its own output.

  Attributes:
    mesh (FemMesh): The mesh.
    time_step (float): The step k.
    mass (TridiagonalOperator): M_h.
    stiffness (TridiagonalOperator): S_h.
  """

  def __init__(self, *, mesh: FemMesh, time_step: float):
    if time_step <= 0:
      raise ValidationError(
          'Time step must be positive, got {}'.format(time_step))
    self.mesh = mesh
    self.time_step = float(time_step)
    self.mass = mass_matrix(mesh.n_cells)
    self.stiffness = assemble_stiffness(mesh)
    system = self.mass.plus(self.stiffness, self.time_step)
    self._factor = cholesky_banded(system.banded_lower(), lower=True)

  def solve_load(self, b: np.ndarray) -> np.ndarray:
    """Solve (M_h + kS_h) w = b, i.e. apply S_{h,k} to the field with load b."""
    return cho_solve_banded((self._factor, True), b)

  def apply_values(self, nodal_values: np.ndarray) -> np.ndarray:
    return self.solve_load(self.mass.matvec(nodal_values))

  def apply(self, v: FemField) -> FemField:
    if v.mesh != self.mesh:
      raise ValidationError('Field mesh ({} cells) differs from {} cells'.format(
          v.mesh.n_cells, self.mesh.n_cells))
    return FemField(mesh=self.mesh, nodal_values=self.apply_values(v.nodal_values))


@lru_cache(maxsize=64)
def step_operator(n_cells: int, time_step: float) -> StepOperator:
  return StepOperator(mesh=make_mesh(n_cells), time_step=time_step)


@lru_cache(maxsize=32)
def sine_matrix(n_cells: int, n_modes: int) -> np.ndarray:
  """Entries e_j(ξ_i) at the interior nodes, shape (nodes, modes)."""
  nodes = np.arange(1, n_cells) / n_cells
  j = np.arange(1, n_modes + 1)
  m = np.sqrt(2.0) * np.sin(np.pi * np.multiply.outer(nodes, j))
  m.setflags(write=False)
  return m


@lru_cache(maxsize=32)
def hat_weights(n_cells: int, n_modes: int) -> np.ndarray:
  """
  ∫ e_j φ_i = e_j(ξ_i)·2(1 - cos(jπh))/((jπ)²h) for the hat φ_i at ξ_i.
  """
  h = 1.0 / n_cells
  w = np.pi * np.arange(1, n_modes + 1)
  weights = 2.0 * (1.0 - np.cos(w * h)) / (w**2 * h)
  weights.setflags(write=False)
  return weights


@lru_cache(maxsize=32)
def load_matrix(n_cells: int, n_modes: int) -> np.ndarray:
  """Loads of the eigenfunctions, column j holds (∫ e_j φ_i)_i."""
  m = sine_matrix(n_cells, n_modes) * hat_weights(n_cells, n_modes)[None, :]
  m.setflags(write=False)
  return m


def gauss_points(n_points: int):
  if not isinstance(n_points, int) or not 1 <= n_points <= MAX_GAUSS_POINTS:
    raise ValidationError('Gauss rule must use 1..{} points, got {}'.format(
        MAX_GAUSS_POINTS, n_points))
  return leggauss(n_points)


@singledispatch
def load_vector(v: Any, mesh: FemMesh,
                n_gauss: int = DEFAULT_GAUSS_POINTS) -> np.ndarray:
  raise UnimplementedError('No load vector for {}'.format(type(v)))


@load_vector.register(SpectralField)
def load_vector_spectral(v: SpectralField,
                         mesh: FemMesh,
                         n_gauss: int = DEFAULT_GAUSS_POINTS) -> np.ndarray:
  if not v.basis.is_laplacian:
    raise ValidationError('Finite element loads need the Laplacian basis')
  return load_matrix(mesh.n_cells, v.n_modes) @ v.coeffs


@load_vector.register(FemField)
def load_vector_fem(v: FemField,
                    mesh: FemMesh,
                    n_gauss: int = DEFAULT_GAUSS_POINTS) -> np.ndarray:
  if v.mesh == mesh:
    return mass_matrix(mesh.n_cells).matvec(v.nodal_values)
  return load_vector_callable(lambda xi: evaluate_fem(v, xi), mesh, n_gauss)


@load_vector.register(Callable)
def load_vector_callable(v: Callable,
                         mesh: FemMesh,
                         n_gauss: int = DEFAULT_GAUSS_POINTS) -> np.ndarray:
  nodes, weights = gauss_points(n_gauss)
  h = mesh.h
  left = h * np.arange(mesh.n_cells)
  s = (nodes + 1) / 2
  xi = left[:, None] + h * s[None, :]
  fw = np.asarray(v(xi), dtype=float) * (weights * h / 2)[None, :]
  to_left = fw @ (1 - s)
  to_right = fw @ s
  b = np.zeros(mesh.n_nodes)
  b += to_left[1:]
  b += to_right[:-1]
  return b


def evaluate_fem(v: FemField, xi: np.ndarray) -> np.ndarray:
  xp = np.concatenate(([0.0], v.mesh.nodes, [1.0]))
  fp = np.concatenate(([0.0], v.nodal_values, [0.0]))
  return np.interp(xi, xp, fp)


def project_l2(v: Union[SpectralField, FemField, Callable],
               mesh: FemMesh,
               n_gauss: int = DEFAULT_GAUSS_POINTS) -> FemField:
  """
  L²-orthogonal projection onto the finite element space: solves M_h c = b
  with b_i = ∫ v φ_i.
  """
  if isinstance(v, FemField) and v.mesh == mesh:
    return FemField(mesh=mesh, nodal_values=v.nodal_values.copy())
  b = load_vector(v, mesh, n_gauss)
  return FemField(mesh=mesh, nodal_values=mass_solve(mesh, b))


def interpolate_nodal(v: SpectralField, mesh: FemMesh) -> FemField:
  return FemField(mesh=mesh,
                  nodal_values=sine_matrix(mesh.n_cells, v.n_modes) @ v.coeffs)


def fem_norm(v: FemField) -> float:
  mass = mass_matrix(v.mesh.n_cells)
  return float(np.sqrt(v.nodal_values @ mass.matvec(v.nodal_values)))


def fem_inner(v: FemField, psi: SpectralField) -> float:
  return float(v.nodal_values @ load_vector(psi, v.mesh))


def step_operator_apply(v: FemField, k: float) -> FemField:
  return step_operator(v.mesh.n_cells, float(k)).apply(v)


def pencil_eigenvalues(mesh: FemMesh) -> np.ndarray:
  """Generalized eigenvalues of (S_h, M_h); eigenvectors are sin(jπξ_i)."""
  c = np.cos(np.pi * np.arange(1, mesh.n_nodes + 1) * mesh.h)
  return 6.0 / mesh.h**2 * (1.0 - c) / (2.0 + c)


def pencil_eigenvector(mesh: FemMesh, mode: int) -> FemField:
  return FemField(mesh=mesh,
                  nodal_values=np.sin(np.pi * mode * mesh.nodes))


def discrete_smoothing_constant(rho: float, mesh: FemMesh, k: float,
                                m: int) -> float:
  """max_j (1 + kλ_{h,j})^(-m)·(λ_{h,j} t_m)^(ρ/2)."""
  if m < 1:
    raise ValidationError('Step index must be at least 1')
  lam = pencil_eigenvalues(mesh)
  t_m = m * k
  return float(np.max((1.0 + k * lam)**(-m) * (lam * t_m)**(rho / 2)))


def discrete_smoothing_envelope(rho: float, m: int) -> float:
  """sup over y > 0 of (my)^(ρ/2)(1 + y)^(-m), attained at y = ρ/(2m - ρ)."""
  if not 0 <= rho <= 2:
    raise ValidationError('ρ must lie in [0, 2], got {}'.format(rho))
  if m < 1:
    raise ValidationError('Step index must be at least 1')
  if rho == 0: return 1.0
  if 2 * m <= rho: return float(m**(rho / 2))
  y = rho / (2 * m - rho)
  return float((m * y)**(rho / 2) * (1.0 + y)**(-m))


def discrete_smoothing_bound(rho: float) -> float:
  """
  D_ρ = sup over y > 0 of y^(ρ/2)/(1 + y), which bounds the discrete smoothing
  constant for every mesh, step and power; the envelope decreases in m.
  """
  return discrete_smoothing_envelope(rho, 1)


def validate_error_operator_range(rho: float, sigma: float, m: int):
  if not 0 <= sigma <= 2:
    raise ValidationError('σ must lie in [0, 2], got {}'.format(sigma))
  if not -sigma <= rho <= min(1.0, 2.0 - sigma):
    raise ValidationError('ρ must lie in [{}, {}], got {}'.format(
        -sigma, min(1.0, 2.0 - sigma), rho))
  if m < 1:
    raise ValidationError('Step index must be at least 1, got {}'.format(m))


def error_operator_norm(m: int, h: float, k: float, rho: float, sigma: float,
                        directions: Sequence[SpectralField]) -> float:
  """
  max over directions v of ‖(S_{h,k}^m - S(t_m)) A^(ρ/2) v‖/‖v‖, the exact
  semigroup being transferred to the mesh by nodal interpolation.
  """
  validate_error_operator_range(rho, sigma, m)
  if k <= 0:
    raise ValidationError('Time step must be positive, got {}'.format(k))
  mesh = mesh_from_width(h)
  op = step_operator(mesh.n_cells, float(k))
  worst = 0.0
  for v in directions:
    w = apply_fractional_power(v, rho)
    x = op.solve_load(load_vector(w, mesh))
    for _ in range(m - 1):
      x = op.apply_values(x)
    exact = interpolate_nodal(apply_semigroup(w, m * k), mesh)
    err = fem_norm(FemField(mesh=mesh, nodal_values=exact.nodal_values - x))
    worst = max(worst, err / l2_norm(v))
  return worst


def error_operator_envelope(m: int, h: float, k: float, rho: float,
                            sigma: float) -> float:
  """The assumed decay t_m^(-(ρ+σ)/2)(h^σ + k^(σ/2)), without its constant."""
  validate_error_operator_range(rho, sigma, m)
  return (m * k)**(-(rho + sigma) / 2) * (h**sigma + k**(sigma / 2))
