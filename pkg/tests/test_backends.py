import numpy as np
import pytest

from levy_heat.backends import ExperimentBackend, refined, relative_drift
from levy_heat.errors import RegistrationError, StatisticalVoidError
from levy_heat.parsers import parse_config
from levy_heat.registrars import ArtifactRegistrar, MemoryRegistrar
from levy_heat.types import (ErrorRow, ErrorTable, IdentityCheck, RangeCheck,
                             RateFit)
from levy_heat.validators import validate_config
from levy_heat.verifiers import verify

from .common import spectral

TINY_CONFIG = """
[problem]
drift = {drift}

[noise]
rate = 5
n_modes = 8

[discretization]
sweep = diagonal
levels = 2, 4, 8
pinned = 8
reference_modes = 32
reference_substeps = 4096

[mc]
samples = 4
seed = 5
workers = 1

[functional]
name = {functional}

[malliavin]
instances = 2
duality_samples = 50
profile_samples = 4
modes = 8
steps = 16
duality_modes = 4

[output]
archive_paths = yes
"""


def tiny_backend(drift: str = 'sine', functional: str = 'linear',
                 registrar: ArtifactRegistrar = None) -> ExperimentBackend:
  config = parse_config(TINY_CONFIG.format(drift=drift,
                                           functional=functional))
  validate_config(config)
  return ExperimentBackend(config=config,
                           registrar=registrar or MemoryRegistrar())


class RefusingRegistrar(ArtifactRegistrar):

  def register_text(self, name: str, text: str) -> bool:
    return False

  def register_bytes(self, name: str, data: bytes) -> bool:
    return False


def test_solve_writes_trajectory_and_path():
  backend = tiny_backend()
  summary = backend.handle_solve()
  artifacts = backend.registrar.artifacts
  assert summary['rows'] == 65
  assert set(artifacts) == {'trajectory.txt', 'jump_path.txt', 'jump_path.cbor'}
  assert '# command solve' in artifacts['trajectory.txt']
  assert '# config_hash {}'.format(
      backend.config_hash) in artifacts['jump_path.txt']
  body = [
      l for l in artifacts['jump_path.txt'].splitlines()
      if not l.startswith('#')
  ]
  assert len(body) == summary['jumps']


def test_refused_artifacts_raise():
  with pytest.raises(RegistrationError):
    tiny_backend(registrar=RefusingRegistrar()).handle_solve()


def test_ratio_at_the_floor_is_skipped():
  backend = tiny_backend(functional='constant')
  assert backend.handle_ratio() is None
  artifacts = backend.registrar.artifacts
  assert {'ratio_strong.csv', 'ratio_weak.csv', 'ratio_strong.dat',
          'ratio_weak.dat'} <= set(artifacts)
  assert '# ratio undefined-by-floor' in artifacts['ratio_weak.csv']


def test_slope_checks_use_the_sweep_band():
  backend = tiny_backend()
  rows = [
      ErrorRow(h=h, k=h * h, estimator='strong', estimate=h**0.5,
               standard_error=0.0, n_samples=4) for h in (0.5, 0.25, 0.125)
  ]
  good = ErrorTable(rows=rows,
                    fits={'strong': RateFit(0.5, 0.0, 1.0, ())})
  backend.check_slope(good, 'strong', 'strong')
  steep = ErrorTable(rows=rows,
                     fits={'strong': RateFit(1.0, 0.0, 1.0, ())})
  with pytest.raises(StatisticalVoidError):
    backend.check_slope(steep, 'strong', 'strong')
  with pytest.raises(StatisticalVoidError):
    backend.check_slope(ErrorTable(rows=rows, fits={'strong': None}),
                        'strong', 'strong')


def test_strong_rates_store_their_table():
  backend = tiny_backend()
  try:
    backend.handle_strong_rates()
  except StatisticalVoidError:
    pass
  text = backend.registrar.artifacts['strong_rates.csv']
  assert '# command strong-rates' in text
  assert text.count('strong,') == 3


def test_identity_checks_hold():
  backend = tiny_backend()
  checks = backend.identity_checks()
  assert len(checks) == 8
  assert all(isinstance(c, IdentityCheck) for c in checks)
  for check in checks:
    verify(check)


def test_residual_checks_without_drift_are_exact():
  checks = tiny_backend(drift='zero').residual_checks()
  assert all(isinstance(c, IdentityCheck) for c in checks)
  for check in checks:
    verify(check)


def test_duality_pairs_gain_a_linear_reference():
  names = [p.name for p in tiny_backend().duality_pairs()]
  assert names[-1] == 'linear-end-value-zero-drift'
  assert tiny_backend().duality_pairs()[-1].closed_form is not None
  assert len(tiny_backend(drift='zero').duality_pairs()) == 5


def test_operator_checks_pass():
  backend = tiny_backend()
  results = backend.handle_operator_checks()
  assert all(passed for _, passed in results)
  names = [check.name for check, _ in results]
  assert 'discrete Gronwall constant' in names
  assert sum(n.startswith('error operator ratio') for n in names) == 2
  report = backend.registrar.artifacts['operator_report.txt']
  assert 'FAIL' not in report
  assert all(isinstance(c, RangeCheck) for c, _ in results)


def test_describe_lists_every_rung():
  text = tiny_backend().describe()
  lines = text.splitlines()
  assert sum(l.startswith('rung ') for l in lines) == 3
  assert 'rung h=0.125 k=0.015625 M=64' in lines
  assert 'reference N_ref=32 M_ref=4096' in lines
  assert lines[1] == 'seed 5 samples 4 workers 1'


def test_helpers():
  assert relative_drift(2.0, 2.1) == pytest.approx(0.05)
  assert relative_drift(0.0, 1.0) == 0.0
  disc = refined(spectral(8, 16))
  assert (disc.resolution, disc.n_steps) == (16, 32)
  assert np.isclose(disc.time_step, 1 / 32)
