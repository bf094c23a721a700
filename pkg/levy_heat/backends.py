import logging
import os
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np

from .builders import ExperimentBuilder, unit_direction
from .constants import (CHAIN_RULE_TOLERANCE, DEFAULT_ACCEPTANCE_BANDS,
                        IDENTITY_TOLERANCE, PROFILE_DRIFT, RESIDUAL_INSTANCES,
                        RESIDUAL_MODES, RESIDUAL_SUBSTEPS,
                        SEMINORM_GROWTH, SEMINORM_SAMPLES_DIVISOR,
                        STANDARD_ERROR_BAND)
from .converters import (dump_error_table, dump_jump_path, dump_jump_path_cbor,
                         dump_plot_data, dump_report, dump_trajectory)
from .errors import RegistrationError, StatisticalVoidError
from .estimators import (covariance_error_sweep, plot_data, strong_error_sweep,
                         weak_error_sweep, weak_strong_ratio)
from .fem import (discrete_smoothing_bound, discrete_smoothing_constant,
                  error_operator_norm, make_mesh)
from .functionals import LinearMap
from .gronwall import discrete_gronwall_constant, generalized_gronwall_constant
from .malliavin import (SchemeEndState, SchemeFunctional, chain_rule_check,
                        derivative_equation_residual, derivative_of_solution,
                        duality_check, dyadic_pairs, m1pq_seminorm, norm_of,
                        profile_depth, registered_duality_pairs,
                        regularity_profile,
                        scheme_seminorm_profile,
                        time_integral_commutation_check)
from .noise import sample_indexed_path, sample_stream
from .registrars import ArtifactHeader, ArtifactRegistrar
from .solvers import run_scheme
from .spectral import (continuity_constant_check, laplacian_basis,
                       smoothing_constant_check, smoothing_envelope,
                       unit_field)
from .types import (Check, Discretization, DualityPair, ErrorTable,
                    ExperimentConfig, IdentityCheck, LevyModel,
                    PathFunctional, PointInsertion, Problem, RangeCheck,
                    ReferenceSettings, SpectralField, StatisticalCheck,
                    TimeMeasure, ZeroDrift)
from .utils import format_float, sha256_hex
from .verifiers import raise_failures, verify, verify_all

logger = logging.getLogger(__name__)

SMOOTHING_ORDERS = (0.0, 0.5, 1.0, 2.0)
CONTINUITY_ORDERS = (0.5, 1.0, 2.0)
DISCRETE_SMOOTHING_ORDERS = (0.5, 1.0, 2.0)
DISCRETE_SMOOTHING_CELLS = (8, 16, 32, 64)
DISCRETE_SMOOTHING_STEPS = (1 / 16, 1 / 64, 1 / 256)
DISCRETE_SMOOTHING_POWERS = (1, 2, 4, 16)
# (cells, steps per unit time, power) triples of the error operator ladder,
# each at t_m = 1/4.
ERROR_OPERATOR_LADDER = ((8, 64, 16), (16, 256, 64), (32, 1024, 256))
ERROR_OPERATOR_SIGMA = 2.0
ERROR_OPERATOR_DIRECTIONS = 3
ENVELOPE_SLACK = 1e-9


def random_insertion(stream: np.random.Generator, model: LevyModel,
                     horizon: float) -> PointInsertion:
  """A time uniform on (0, T] and a Gaussian mark shaped like the noise."""
  s = horizon - stream.uniform(0.0, horizon)
  coeffs = stream.standard_normal(model.n_modes) * model.scales
  return PointInsertion(time=float(s),
                        mark=SpectralField(basis=model.basis, coeffs=coeffs))


def zero_drift_problem(problem: Problem) -> Problem:
  return Problem(beta=problem.beta,
                 horizon=problem.horizon,
                 drift=ZeroDrift(),
                 initial=problem.initial,
                 delta=problem.delta)


def relative_drift(before: float, after: float) -> float:
  return abs(after - before) / before if before > 0 else 0.0


def refined(discretization: Discretization) -> Discretization:
  return Discretization(backend=discretization.backend,
                        resolution=2 * discretization.resolution,
                        time_step=discretization.time_step / 2,
                        horizon=discretization.horizon)


class ExperimentBackend:
  """
  Runs one subcommand against a validated config and hands every artifact to
  a registrar. Each ``handle_*`` method raises on a failed acceptance check
  after its artifacts are stored.

  Attributes:
    config (ExperimentConfig): The validated experiment config.
    registrar (ArtifactRegistrar): Where artifacts go.
    builder (ExperimentBuilder): Problem, model, ladder and functional.
  """

  def __init__(self, *, config: ExperimentConfig,
               registrar: ArtifactRegistrar):
    self.config = config
    self.registrar = registrar
    self.builder = ExperimentBuilder(config)

  @property
  def seed(self) -> int:
    return self.config.mc.seed

  @property
  def workers(self) -> int:
    return self.config.mc.workers or os.cpu_count() or 1

  @property
  def config_hash(self) -> str:
    return sha256_hex(self.config.source_text.encode('utf-8'))

  def header(self, command: str) -> Dict[str, Any]:
    return ArtifactHeader(command=command,
                          config_hash=self.config_hash,
                          seed=self.seed).as_dict()

  def band(self, name: str) -> Tuple[float, float]:
    bands = self.config.acceptance.bands
    if name in bands: return bands[name]
    return DEFAULT_ACCEPTANCE_BANDS[name]

  def store_text(self, name: str, text: str):
    if not self.registrar.register_text(name, text):
      raise RegistrationError('Failed to register {}'.format(name))

  def store_bytes(self, name: str, data: bytes):
    if not self.registrar.register_bytes(name, data):
      raise RegistrationError('Failed to register {}'.format(name))

  def store_table(self, name: str, command: str, table: ErrorTable):
    header = self.header(command)
    self.store_text(name + '.csv', dump_error_table(table, header))
    if self.config.output.plot_data:
      variable = self.builder.ladder.scale_name
      self.store_text(name + '.dat',
                      dump_plot_data(plot_data(table, variable), header))

  def check_slope(self, table: ErrorTable, estimator: str, kind: str):
    fit = table.fits.get(estimator)
    sweep = self.builder.ladder.sweep_mode.value
    if fit is None:
      raise StatisticalVoidError(
          'No {} slope: too few valid rungs in the {} sweep'.format(
              estimator, sweep))
    low, high = self.band('{}_{}'.format(kind, sweep))
    verify(
        RangeCheck(name='{} slope'.format(estimator),
                   value=fit.slope,
                   low=low,
                   high=high))

  def handle_solve(self) -> Mapping[str, Any]:
    """One path on the finest rung: trajectory and noise, nothing estimated."""
    builder = self.builder
    disc = builder.ladder.rungs[-1]
    path = sample_indexed_path(builder.model, builder.problem.horizon,
                               self.seed, 0)
    record = run_scheme(builder.problem, disc, path)
    header = self.header('solve')
    self.store_text('trajectory.txt', dump_trajectory(record, header))
    self.store_text('jump_path.txt', dump_jump_path(path, header))
    if self.config.output.archive_paths:
      self.store_bytes('jump_path.cbor', dump_jump_path_cbor(path))
    return {'rows': len(record.values), 'jumps': len(path)}

  def handle_strong_rates(self) -> ErrorTable:
    builder = self.builder
    table = strong_error_sweep(builder.problem,
                               builder.ladder,
                               builder.model,
                               self.config.mc.samples,
                               self.seed,
                               workers=self.workers)
    self.store_table('strong_rates', 'strong-rates', table)
    self.check_slope(table, 'strong', 'strong')
    return table

  def handle_weak_rates(self) -> ErrorTable:
    builder = self.builder
    table = weak_error_sweep(builder.problem,
                             builder.ladder,
                             builder.model,
                             builder.functional,
                             self.config.mc.samples,
                             self.seed,
                             workers=self.workers)
    self.store_table('weak_rates', 'weak-rates', table)
    self.check_slope(table, builder.functional.name, 'weak')
    return table

  def handle_ratio(self) -> Optional[float]:
    builder = self.builder
    result = weak_strong_ratio(builder.problem,
                               builder.ladder,
                               builder.model,
                               builder.functional,
                               self.config.mc.samples,
                               self.seed,
                               workers=self.workers)
    result.weak.metadata['ratio'] = (format_float(result.ratio)
                                     if result.ratio is not None else
                                     result.reason)
    self.store_table('ratio_strong', 'ratio', result.strong)
    self.store_table('ratio_weak', 'ratio', result.weak)
    if result.reason == 'undefined-by-floor':
      logger.warning('Errors sit at the numerical floor, ratio not checked')
      return None
    if result.ratio is None:
      raise StatisticalVoidError('Weak/strong ratio is {}'.format(
          result.reason))
    low, high = self.band('ratio')
    verify(
        RangeCheck(name='weak/strong slope ratio',
                   value=result.ratio,
                   low=low,
                   high=high))
    return result.ratio

  def handle_covariance(self) -> ErrorTable:
    builder = self.builder
    cov = self.config.covariance
    psi1, psi2 = builder.covariance_directions()
    table = covariance_error_sweep(builder.problem,
                                   builder.ladder,
                                   builder.model,
                                   cov.t1,
                                   cov.t2,
                                   psi1,
                                   psi2,
                                   self.config.mc.samples,
                                   self.seed,
                                   workers=self.workers)
    self.store_table('covariance', 'covariance', table)
    self.check_slope(table, 'covariance', 'covariance')
    return table

  def identity_checks(self) -> List[Check]:
    """Derivative recursion, adaptedness, chain rule and commutation."""
    builder = self.builder
    problem = builder.problem
    disc = builder.identity_discretization()
    model = builder.identity_model()
    horizon = problem.horizon
    e1 = unit_direction(1, model.n_modes)
    checks = []
    for i in range(self.config.malliavin.instances):
      path = sample_indexed_path(model, horizon, self.seed, i)
      stream = sample_stream(self.seed + 1, i)
      insertion = random_insertion(stream, model, horizon)
      t = horizon - stream.uniform(0.0, horizon)

      rerun, recursion = derivative_of_solution(problem, disc, path,
                                                insertion, t)
      checks.append(
          IdentityCheck(name='derivative recursion #{}'.format(i),
                        lhs=norm_of(rerun - recursion),
                        rhs=0.0,
                        tolerance=IDENTITY_TOLERANCE *
                        max(norm_of(rerun), norm_of(recursion))))

      before = stream.uniform(0.0, insertion.time)
      early, _ = derivative_of_solution(problem, disc, path, insertion,
                                        before)
      checks.append(
          IdentityCheck(name='adaptedness #{}'.format(i),
                        lhs=norm_of(early),
                        rhs=0.0,
                        tolerance=0.0))

      functional = SchemeFunctional(problem=problem,
                                    discretization=disc,
                                    functional=PathFunctional(
                                        measures=[TimeMeasure(atoms=[(t, 1.0)])],
                                        outer=LinearMap(directions=[e1]),
                                        name='linear'))
      checks.append(
          IdentityCheck(name='chain rule #{}'.format(i),
                        lhs=chain_rule_check(functional, np.tanh, path,
                                             insertion),
                        rhs=0.0,
                        tolerance=CHAIN_RULE_TOLERANCE))

      measure = TimeMeasure(atoms=[(t, 1.0)], density=1.0)
      checks.append(
          IdentityCheck(name='time integral commutation #{}'.format(i),
                        lhs=time_integral_commutation_check(
                            problem, disc, path, insertion, measure, e1),
                        rhs=0.0,
                        tolerance=IDENTITY_TOLERANCE))
    return checks

  def residual_checks(self) -> List[Check]:
    """
    The derivative integral equation on the reference solver. Its residual is
    first order in the substep, so doubling the substeps halves it; with a
    zero drift the equation holds up to rounding.
    """
    builder = self.builder
    problem = builder.problem
    noise = self.config.noise
    model = LevyModel(rate=noise.rate,
                      mode_decay=noise.mode_decay,
                      n_modes=RESIDUAL_MODES,
                      beta=problem.beta,
                      amplitudes=noise.amplitudes,
                      amplitude_weights=noise.amplitude_weights)
    coarse = ReferenceSettings(n_modes=RESIDUAL_MODES,
                               n_substeps=RESIDUAL_SUBSTEPS)
    fine = ReferenceSettings(n_modes=RESIDUAL_MODES,
                             n_substeps=2 * RESIDUAL_SUBSTEPS)
    low, high = self.band('derivative_residual_ratio')
    checks = []
    for i in range(RESIDUAL_INSTANCES):
      path = sample_indexed_path(model, problem.horizon, self.seed + 2, i)
      insertion = random_insertion(sample_stream(self.seed + 3, i), model,
                                   0.5 * problem.horizon)
      t = problem.horizon
      r_coarse = derivative_equation_residual(problem, path, insertion, t,
                                              coarse)
      r_fine = derivative_equation_residual(problem, path, insertion, t, fine)
      if problem.drift.is_zero:
        checks.append(
            IdentityCheck(name='derivative equation #{}'.format(i),
                          lhs=r_fine,
                          rhs=0.0,
                          tolerance=CHAIN_RULE_TOLERANCE))
        continue
      checks.append(
          RangeCheck(name='derivative equation residual ratio #{}'.format(i),
                     value=r_coarse / r_fine if r_fine > 0 else np.inf,
                     low=low,
                     high=high,
                     statistical=False))
    return checks

  def duality_pairs(self) -> List[DualityPair]:
    builder = self.builder
    disc = builder.duality_discretization()
    model = builder.duality_model()
    pairs = registered_duality_pairs(builder.problem, disc, model)
    if not builder.problem.drift.is_zero:
      linear = registered_duality_pairs(zero_drift_problem(builder.problem),
                                        disc, model)[0]
      pairs.append(
          DualityPair(name=linear.name + '-zero-drift',
                      functional=linear.functional,
                      blocks=linear.blocks,
                      closed_form=linear.closed_form))
    return pairs

  def duality_checks(self) -> List[Check]:
    malliavin = self.config.malliavin
    model = self.builder.duality_model()
    checks = []
    for pair in self.duality_pairs():
      result = duality_check(pair,
                             model,
                             self.builder.problem.horizon,
                             malliavin.duality_samples,
                             self.seed,
                             n_nodes=malliavin.quadrature_nodes,
                             workers=self.workers)
      checks.append(
          StatisticalCheck(name='duality {}'.format(pair.name),
                           lhs=result.lhs,
                           rhs=result.rhs,
                           standard_error=result.standard_error,
                           band=STANDARD_ERROR_BAND))
      if pair.closed_form is None: continue
      checks.append(
          StatisticalCheck(name='duality {} closed form'.format(pair.name),
                           lhs=result.lhs,
                           rhs=pair.closed_form,
                           standard_error=result.lhs_standard_error,
                           band=STANDARD_ERROR_BAND))
      checks.append(
          IdentityCheck(name='duality {} exact side'.format(pair.name),
                        lhs=result.rhs,
                        rhs=pair.closed_form,
                        tolerance=1e-8,
                        relative=True))
    return checks

  def regularity_checks(self) -> List[Check]:
    builder = self.builder
    malliavin = self.config.malliavin
    problem = builder.problem
    model = builder.identity_model()
    depth = profile_depth(problem.horizon, problem.beta)
    settings = ReferenceSettings(n_modes=malliavin.modes,
                                 n_substeps=8 * malliavin.steps)
    coarse = regularity_profile(problem, settings, model,
                                dyadic_pairs(problem.horizon, depth),
                                malliavin.profile_samples, self.seed)
    fine_pairs = dyadic_pairs(problem.horizon, depth + 1)
    fine = regularity_profile(problem, settings, model, fine_pairs,
                              malliavin.profile_samples, self.seed)
    resolved = regularity_profile(problem, settings.doubled(), model,
                                  fine_pairs, malliavin.profile_samples,
                                  self.seed)
    logger.info('Regularity profile %.6g at depth %d, %.6g at depth %d, '
                '%.6g at doubled resolution', coarse, depth, fine, depth + 1,
                resolved)
    checks: List[Check] = [
        RangeCheck(name='regularity profile drift under grid refinement',
                   value=relative_drift(coarse, fine),
                   low=0.0,
                   high=PROFILE_DRIFT),
        RangeCheck(name='regularity profile drift under resolution doubling',
                   value=relative_drift(fine, resolved),
                   low=0.0,
                   high=PROFILE_DRIFT)
    ]

    n = max(2, malliavin.profile_samples // SEMINORM_SAMPLES_DIVISOR)
    disc = builder.identity_discretization()
    profile = scheme_seminorm_profile(problem, [disc, refined(disc)],
                                      model,
                                      malliavin.q,
                                      n,
                                      self.seed,
                                      workers=self.workers)
    checks.append(
        RangeCheck(name='scheme seminorm growth under refinement',
                   value=profile[1].value / profile[0].value,
                   low=0.0,
                   high=SEMINORM_GROWTH))

    end_state = SchemeEndState(problem=problem, discretization=disc)
    half = m1pq_seminorm(end_state, np.inf, malliavin.q, model,
                         problem.horizon, max(2, n // 2), self.seed, 16,
                         self.workers)
    full = m1pq_seminorm(end_state, np.inf, malliavin.q, model,
                         problem.horizon, n, self.seed, 16, self.workers)
    checks.append(
        RangeCheck(name='sup seminorm growth with sample count',
                   value=full.value / half.value,
                   low=1.0,
                   high=SEMINORM_GROWTH))
    return checks

  def handle_malliavin_verify(self) -> List[Tuple[Check, bool]]:
    checks = (self.identity_checks() + self.residual_checks() +
              self.duality_checks() + self.regularity_checks())
    results, failures = verify_all(checks)
    self.store_text('malliavin_report.txt',
                    dump_report(results, self.header('malliavin-verify')))
    logger.info('%d of %d Malliavin checks passed',
                len(results) - len(failures), len(results))
    raise_failures(failures)
    return results

  def operator_checks(self) -> List[Check]:
    checks: List[Check] = []
    times = np.geomspace(1e-4, 1.0, 50)
    for rho in SMOOTHING_ORDERS:
      checks.append(
          RangeCheck(name='smoothing constant rho={}'.format(rho),
                     value=smoothing_constant_check(rho, times),
                     low=0.0,
                     high=smoothing_envelope(rho) + ENVELOPE_SLACK,
                     statistical=False))
    for rho in CONTINUITY_ORDERS:
      value, envelope = continuity_constant_check(rho, times)
      checks.append(
          RangeCheck(name='continuity constant rho={}'.format(rho),
                     value=value,
                     low=0.0,
                     high=envelope + ENVELOPE_SLACK,
                     statistical=False))

    for rho in DISCRETE_SMOOTHING_ORDERS:
      worst = max(
          discrete_smoothing_constant(rho, make_mesh(cells), k, m)
          for cells in DISCRETE_SMOOTHING_CELLS
          for k in DISCRETE_SMOOTHING_STEPS
          for m in DISCRETE_SMOOTHING_POWERS)
      checks.append(
          RangeCheck(name='discrete smoothing rho={}'.format(rho),
                     value=worst,
                     low=0.0,
                     high=discrete_smoothing_bound(rho) + ENVELOPE_SLACK,
                     statistical=False))

    basis = laplacian_basis(ERROR_OPERATOR_DIRECTIONS)
    directions = [
        unit_field(basis, j) for j in range(1, ERROR_OPERATOR_DIRECTIONS + 1)
    ]
    norms = [
        error_operator_norm(m, 1.0 / cells, 1.0 / steps, 0.0,
                            ERROR_OPERATOR_SIGMA, directions)
        for cells, steps, m in ERROR_OPERATOR_LADDER
    ]
    low, high = self.band('error_operator_ratio')
    for (cells, _, _), coarse, fine in zip(ERROR_OPERATOR_LADDER, norms,
                                           norms[1:]):
      checks.append(
          RangeCheck(name='error operator ratio h=1/{}'.format(cells),
                     value=coarse / fine,
                     low=low,
                     high=high,
                     statistical=False))

    problem = self.builder.problem
    b = max(problem.drift.lipschitz_bound, 1.0)
    checks.append(
        RangeCheck(name='discrete Gronwall constant',
                   value=discrete_gronwall_constant(b, problem.horizon,
                                                    problem.beta, 1 / 64),
                   low=1.0,
                   high=generalized_gronwall_constant(b, problem.horizon, 1.0,
                                                      problem.beta),
                   statistical=False))
    return checks

  def handle_operator_checks(self) -> List[Tuple[Check, bool]]:
    results, failures = verify_all(self.operator_checks())
    self.store_text('operator_report.txt',
                    dump_report(results, self.header('operator-checks')))
    raise_failures(failures)
    return results

  def describe(self) -> str:
    """The plan of a run, without computing anything."""
    builder = self.builder
    config = self.config
    ladder = builder.ladder
    reference = ladder.reference
    n = config.mc.samples
    lines = [
        'config {}'.format(self.config_hash),
        'seed {} samples {} workers {}'.format(self.seed, n, self.workers),
        'backend {} sweep {}'.format(config.discretization.backend.value,
                                     ladder.sweep_mode.value),
    ]
    work = 0
    for disc in ladder.rungs:
      lines.append('rung h={} k={} M={}'.format(format_float(disc.h),
                                                format_float(disc.time_step),
                                                disc.n_steps))
      work += disc.dimension * disc.n_steps
    lines.append('reference N_ref={} M_ref={}'.format(reference.n_modes,
                                                      reference.n_substeps))
    work += reference.n_modes * reference.n_substeps
    malliavin = config.malliavin
    lines.append(
        'malliavin instances {} duality samples {} profile samples {}'.format(
            malliavin.instances, malliavin.duality_samples,
            malliavin.profile_samples))
    lines.append('work units {:.3g}'.format(float(work) * n))
    return '\n'.join(lines) + '\n'
