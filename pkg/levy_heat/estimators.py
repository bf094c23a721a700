"""
Coupled Monte Carlo error estimates along a resolution ladder.

For every sample index one jump path is drawn from its own stream and drives
the reference solver and every rung of the ladder. Per-sample results come
back in index order whatever the worker count, so tables are reproducible
bit for bit.
"""
import logging
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .constants import ERROR_FLOOR, SELF_CONVERGENCE_SHARE, VOID_RELATIVE_ERROR
from .errors import (ConvergenceError, InsufficientDataError, ValidationError,
                     VerificationError)
from .functionals import covariance_influence, covariance_triple, eval_functional
from .noise import path_digest, sample_indexed_path
from .solvers import (check_self_convergence, error_against, eval_interpolated,
                      eval_reference, run_reference, run_scheme)
from .types import (ErrorRow, ErrorTable, LevyModel, PathFunctional, Problem,
                    RateFit, RatioResult, ReferenceSettings, ResolutionLadder,
                    SpectralField)
from .utils import ordered_map, sha256_hex
from .validators import validate_time

logger = logging.getLogger(__name__)


class SampleResult(NamedTuple):
  """
  What one coupled sample contributes: squared errors per rung at the
  evaluation time and functional values, reference first.
  """
  squared_errors: np.ndarray
  values: np.ndarray
  digest: str
  truncated_jumps: int


class CoupledSample:
  """
  Runs the reference and every rung on the path of one sample index.

  Attributes:
    problem (Problem): The equation.
    ladder (ResolutionLadder): Rungs and reference settings.
    model (LevyModel): The noise model the paths are drawn from.
    seed (int): The master seed.
    t_eval (float): Time of the strong error.
    functionals (List[PathFunctional]): Functionals evaluated on every run.
  """

  def __init__(self,
               *,
               problem: Problem,
               ladder: ResolutionLadder,
               model: LevyModel,
               seed: int,
               t_eval: float,
               functionals: Sequence[PathFunctional] = ()):
    self.problem = problem
    self.ladder = ladder
    self.model = model
    self.seed = seed
    self.t_eval = t_eval
    self.functionals = list(functionals)

  def __call__(self, index: int) -> SampleResult:
    path = sample_indexed_path(self.model, self.problem.horizon, self.seed,
                               index)
    digest = path_digest(path)
    reference = run_reference(self.problem, path, self.ladder.reference)
    target = eval_reference(reference, self.t_eval)

    n_rungs = len(self.ladder.rungs)
    squared = np.empty(n_rungs)
    values = np.empty((n_rungs + 1, len(self.functionals)))
    values[0] = [eval_functional(f, reference) for f in self.functionals]
    truncated = 0
    for r, disc in enumerate(self.ladder.rungs):
      record = run_scheme(self.problem, disc, path)
      truncated += record.truncated_jumps
      squared[r] = error_against(eval_interpolated(record, self.t_eval),
                                 target)**2
      values[r + 1] = [eval_functional(f, record) for f in self.functionals]

    if path_digest(path) != digest:
      raise VerificationError('Path of sample {} changed during its runs'.format(
          index))
    return SampleResult(squared_errors=squared,
                        values=values,
                        digest=digest,
                        truncated_jumps=truncated)


def run_coupled(problem: Problem,
                ladder: ResolutionLadder,
                model: LevyModel,
                n_samples: int,
                seed: int,
                t_eval: Optional[float] = None,
                functionals: Sequence[PathFunctional] = (),
                workers: int = 1) -> List[SampleResult]:
  if n_samples < 2:
    raise ValidationError('Sweeps need two samples, got {}'.format(n_samples))
  if not ladder.rungs:
    raise ValidationError('Ladder has no rungs')
  t_eval = problem.horizon if t_eval is None else t_eval
  validate_time(t_eval, problem.horizon, 't_eval', allow_zero=False)
  worker = CoupledSample(problem=problem,
                         ladder=ladder,
                         model=model,
                         seed=seed,
                         t_eval=t_eval,
                         functionals=functionals)
  return ordered_map(worker, range(n_samples), workers)


def coupling_hash(results: Sequence[SampleResult]) -> str:
  return sha256_hex(''.join(r.digest for r in results).encode('ascii'))


def rung_status(estimate: float, standard_error: float) -> str:
  if estimate <= ERROR_FLOOR: return 'floor'
  if standard_error > VOID_RELATIVE_ERROR * estimate: return 'void'
  return 'ok'


def make_row(ladder: ResolutionLadder, r: int, estimator: str, estimate: float,
             standard_error: float, n_samples: int) -> ErrorRow:
  disc = ladder.rungs[r]
  status = rung_status(estimate, standard_error)
  if status != 'ok':
    logger.warning('%s rung h = %g, k = %g is %s: %.3g ± %.3g', estimator,
                   disc.h, disc.time_step, status, estimate, standard_error)
  return ErrorRow(h=disc.h,
                  k=disc.time_step,
                  estimator=estimator,
                  estimate=float(estimate),
                  standard_error=float(standard_error),
                  n_samples=n_samples,
                  status=status)


def strong_rows(ladder: ResolutionLadder,
                results: Sequence[SampleResult]) -> List[ErrorRow]:
  """√(mean ‖X(t) - X̃(t)‖²) per rung, delta-method standard error."""
  squared = np.array([r.squared_errors for r in results])
  n = len(results)
  rows = []
  for r in range(len(ladder.rungs)):
    mean = squared[:, r].mean()
    estimate = np.sqrt(mean)
    se = (np.std(squared[:, r], ddof=1) / np.sqrt(n) /
          (2 * estimate) if estimate > 0 else 0.0)
    rows.append(make_row(ladder, r, 'strong', estimate, se, n))
  return rows


def weak_rows(ladder: ResolutionLadder, results: Sequence[SampleResult],
              column: int, estimator: str) -> List[ErrorRow]:
  """|mean(F(X̃) - F(X))| per rung over the coupled pairs."""
  values = np.array([r.values[:, column] for r in results])
  n = len(results)
  rows = []
  for r in range(len(ladder.rungs)):
    diff = values[:, r + 1] - values[:, 0]
    rows.append(
        make_row(ladder, r, estimator, abs(diff.mean()),
                 np.std(diff, ddof=1) / np.sqrt(n), n))
  return rows


def fit_rate(points: Sequence[Tuple[float, float, float]],
             variable: str = 'h') -> RateFit:
  """
  Weighted least squares of log(error) on log(scale). Floor-level and void
  points are excluded; each remaining point is weighted by error/se, the
  inverse of its standard error in log scale, or uniformly when some se is 0.
  """
  points = [tuple(map(float, p)) for p in points]
  excluded = tuple(i for i, (_, err, se) in enumerate(points)
                   if rung_status(err, se) != 'ok')
  valid = [p for i, p in enumerate(points) if i not in excluded]
  if len(valid) < 3:
    raise InsufficientDataError(
        'Rate fit needs 3 valid points, got {} of {}'.format(
            len(valid), len(points)))

  x = np.log([p[0] for p in valid])
  y = np.log([p[1] for p in valid])
  se = np.array([p[2] for p in valid])
  w = None if np.any(se == 0) else np.exp(y) / se
  slope, intercept = np.polyfit(x, y, 1, w=w)
  residual = y - (slope * x + intercept)
  total = np.sum((y - y.mean())**2)
  r_squared = 1.0 - np.sum(residual**2) / total if total > 0 else 1.0
  return RateFit(slope=float(slope),
                 intercept=float(intercept),
                 r_squared=float(r_squared),
                 excluded=excluded,
                 variable=variable)


def fit_rows(ladder: ResolutionLadder,
             rows: Sequence[ErrorRow]) -> Optional[RateFit]:
  scales = ladder.scales()
  points = [(s, r.estimate, r.standard_error) for s, r in zip(scales, rows)]
  try:
    fit = fit_rate(points, ladder.scale_name)
  except InsufficientDataError as e:
    logger.warning('No slope for %s: %s', rows[0].estimator if rows else '?',
                   e)
    return None
  logger.info('%s slope in %s: %.3f (R² %.3f)', rows[0].estimator,
              fit.variable, fit.slope, fit.r_squared)
  return fit


def gate_reference(problem: Problem,
                   model: LevyModel,
                   settings: ReferenceSettings,
                   finest_error: float,
                   seed: int,
                   t_eval: Optional[float] = None,
                   n_paths: int = 2) -> float:
  """
  Checks that doubling N_ref and M_ref moves the reference by less than
  SELF_CONVERGENCE_SHARE of the finest rung's strong error. Returns the
  largest self-convergence difference seen.
  """
  t_eval = problem.horizon if t_eval is None else t_eval
  worst = max(
      check_self_convergence(
          problem, sample_indexed_path(model, problem.horizon, seed, i),
          settings, t_eval) for i in range(n_paths))
  limit = SELF_CONVERGENCE_SHARE * finest_error
  if worst > limit:
    raise ConvergenceError(
        'Reference ({} modes, {} substeps) self-convergence {:.3g} exceeds {:.3g}'
        .format(settings.n_modes, settings.n_substeps, worst, limit))
  logger.info('Reference self-convergence %.3g within %.3g', worst, limit)
  return worst


def sweep_metadata(ladder: ResolutionLadder, results: Sequence[SampleResult],
                   seed: int, t_eval: float) -> Dict[str, Any]:
  return {
      'seed': seed,
      'n_samples': len(results),
      'sweep_mode': ladder.sweep_mode.value,
      'reference_modes': ladder.reference.n_modes,
      'reference_substeps': ladder.reference.n_substeps,
      't_eval': t_eval,
      'coupling_hash': coupling_hash(results),
      'truncated_jumps': int(sum(r.truncated_jumps for r in results)),
  }


def finish_table(problem: Problem, ladder: ResolutionLadder, model: LevyModel,
                 results: Sequence[SampleResult], seed: int, t_eval: float,
                 rows: Sequence[ErrorRow], gate: bool) -> ErrorTable:
  metadata = sweep_metadata(ladder, results, seed, t_eval)
  if gate:
    finest = strong_rows(ladder, results)[-1].estimate
    metadata['self_convergence'] = gate_reference(problem, model,
                                                  ladder.reference, finest,
                                                  seed, t_eval)
  estimators = []
  for row in rows:
    if row.estimator not in estimators: estimators.append(row.estimator)
  fits = {
      name: fit_rows(ladder, [r for r in rows if r.estimator == name])
      for name in estimators
  }
  metadata['void_rungs'] = sum(r.status == 'void' for r in rows)
  return ErrorTable(rows=rows, fits=fits, metadata=metadata)


def strong_error_sweep(problem: Problem,
                       ladder: ResolutionLadder,
                       model: LevyModel,
                       n_samples: int,
                       seed: int,
                       t_eval: Optional[float] = None,
                       workers: int = 1,
                       gate: bool = True) -> ErrorTable:
  t_eval = problem.horizon if t_eval is None else t_eval
  results = run_coupled(problem, ladder, model, n_samples, seed, t_eval,
                        workers=workers)
  return finish_table(problem, ladder, model, results, seed, t_eval,
                      strong_rows(ladder, results), gate)


def weak_error_sweep(problem: Problem,
                     ladder: ResolutionLadder,
                     model: LevyModel,
                     functional: PathFunctional,
                     n_samples: int,
                     seed: int,
                     workers: int = 1,
                     gate: bool = True) -> ErrorTable:
  results = run_coupled(problem, ladder, model, n_samples, seed,
                        functionals=[functional],
                        workers=workers)
  return finish_table(problem, ladder, model, results, seed, problem.horizon,
                      weak_rows(ladder, results, 0, functional.name), gate)


def slope_ratio(strong: ErrorTable, weak: ErrorTable, weak_name: str
               ) -> Tuple[Optional[float], str]:
  strong_rows_ = strong.rows_for('strong')
  weak_rows_ = weak.rows_for(weak_name)
  if (all(r.status == 'floor' for r in strong_rows_) or
      all(r.status == 'floor' for r in weak_rows_)):
    return None, 'undefined-by-floor'
  strong_fit, weak_fit = strong.fits.get('strong'), weak.fits.get(weak_name)
  if strong_fit is None or weak_fit is None:
    return None, 'void'
  if strong_fit.slope <= 0:
    return None, 'nonpositive-strong-slope'
  return weak_fit.slope / strong_fit.slope, 'ok'


def weak_strong_ratio(problem: Problem,
                      ladder: ResolutionLadder,
                      model: LevyModel,
                      functional: PathFunctional,
                      n_samples: int,
                      seed: int,
                      workers: int = 1,
                      gate: bool = True) -> RatioResult:
  """Both sweeps from one coupled pass, then weak slope over strong slope."""
  t_eval = problem.horizon
  results = run_coupled(problem, ladder, model, n_samples, seed, t_eval,
                        functionals=[functional],
                        workers=workers)
  strong = finish_table(problem, ladder, model, results, seed, t_eval,
                        strong_rows(ladder, results), gate)
  weak = finish_table(problem, ladder, model, results, seed, t_eval,
                      weak_rows(ladder, results, 0, functional.name), False)
  ratio, reason = slope_ratio(strong, weak, functional.name)
  if ratio is None:
    logger.warning('Weak/strong ratio undefined: %s', reason)
  else:
    logger.info('Weak/strong slope ratio %.3f', ratio)
  return RatioResult(ratio=ratio, reason=reason, strong=strong, weak=weak)


def covariance_rows(ladder: ResolutionLadder,
                    results: Sequence[SampleResult]) -> Tuple[List[ErrorRow],
                                                              float]:
  """
  |Cov_{h,k} - Cov| per rung; the standard error comes from the difference
  of the delta-method influence values of both estimates.
  """
  values = np.array([r.values for r in results])
  n = len(results)
  reference, ref_influence = covariance_influence(values[:, 0, 0],
                                                  values[:, 0, 1],
                                                  values[:, 0, 2])
  rows = []
  for r in range(len(ladder.rungs)):
    cov, influence = covariance_influence(values[:, r + 1, 0],
                                          values[:, r + 1, 1],
                                          values[:, r + 1, 2])
    se = np.std(influence - ref_influence, ddof=1) / np.sqrt(n)
    rows.append(make_row(ladder, r, 'covariance', abs(cov - reference), se, n))
  return rows, reference


def covariance_error_sweep(problem: Problem,
                           ladder: ResolutionLadder,
                           model: LevyModel,
                           t1: float,
                           t2: float,
                           psi1: SpectralField,
                           psi2: SpectralField,
                           n_samples: int,
                           seed: int,
                           workers: int = 1,
                           gate: bool = True) -> ErrorTable:
  triple = covariance_triple(t1, t2, psi1, psi2, problem.horizon)
  results = run_coupled(problem, ladder, model, n_samples, seed,
                        functionals=triple,
                        workers=workers)
  rows, reference = covariance_rows(ladder, results)
  table = finish_table(problem, ladder, model, results, seed, problem.horizon,
                       rows, gate)
  table.metadata['reference_covariance'] = reference
  return table


def plot_data(table: ErrorTable,
              variable: str = 'h') -> Dict[str, List[Tuple[float, float, float]]]:
  """(x, y, y_err) triplets per estimator, x being h or k."""
  series = {}
  for row in table.rows:
    x = row.k if variable == 'k' else row.h
    series.setdefault(row.estimator, []).append(
        (x, row.estimate, row.standard_error))
  return series
