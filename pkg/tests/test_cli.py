import os

import pytest

from levy_heat.cli import exit_code, main
from levy_heat.constants import (EXIT_IDENTITY, EXIT_STATISTICAL,
                                 EXIT_VALIDATION)
from levy_heat.errors import (ConvergenceError, IdentityCheckError,
                              InsufficientDataError, ParseError,
                              RegistrationError, StatisticalVoidError,
                              ValidationError)

SOLVE_CONFIG = """
[noise]
rate = 5
n_modes = 32

[discretization]
levels = 2, 4, 8
pinned = 16
reference_modes = 32

[mc]
samples = 2
workers = 1
"""


def write_config(tmp_path, text: str) -> str:
  path = tmp_path / 'experiment.ini'
  path.write_text(text)
  return str(path)


@pytest.mark.parametrize('text', [
    '[noise]\nrates = 5\n',
    '[problem]\nbeta = 1.5\n',
    'rate = 5\n',
])
def test_rejected_configs_exit_with_validation_status(tmp_path, text):
  assert main(['solve', '--config', write_config(tmp_path, text)
              ]) == EXIT_VALIDATION


def test_missing_config_file(tmp_path):
  assert main(['solve', '--config',
               str(tmp_path / 'absent.ini')]) == EXIT_VALIDATION


def test_describe_prints_the_plan(tmp_path, capsys):
  path = write_config(tmp_path, SOLVE_CONFIG)
  assert main(['describe', '--config', path, '--seed', '11']) == 0
  out = capsys.readouterr().out
  assert 'seed 11 samples 2 workers 1' in out
  assert out.count('rung ') == 3


def test_solve_writes_to_the_output_directory(tmp_path, monkeypatch):
  monkeypatch.setenv('LEVY_HEAT_OUT_DIR', str(tmp_path / 'from-env'))
  path = write_config(tmp_path, SOLVE_CONFIG)
  out = tmp_path / 'results'
  assert main(['solve', '--config', path, '--out', str(out)]) == 0
  assert sorted(os.listdir(out)) == ['jump_path.txt', 'trajectory.txt']
  rows = [
      l for l in (out / 'trajectory.txt').read_text().splitlines()
      if not l.startswith('#')
  ]
  assert len(rows) == 17
  assert not (tmp_path / 'from-env').exists()


def test_output_directory_from_environment(tmp_path, monkeypatch):
  monkeypatch.setenv('LEVY_HEAT_OUT_DIR', str(tmp_path / 'from-env'))
  path = write_config(tmp_path, SOLVE_CONFIG)
  assert main(['solve', '--config', path]) == 0
  assert (tmp_path / 'from-env' / 'trajectory.txt').exists()


def test_exit_codes():
  assert exit_code(ValidationError('x')) == EXIT_VALIDATION
  assert exit_code(ParseError('x')) == EXIT_VALIDATION
  assert exit_code(StatisticalVoidError('x')) == EXIT_STATISTICAL
  assert exit_code(InsufficientDataError('x')) == EXIT_STATISTICAL
  assert exit_code(ConvergenceError('x')) == EXIT_STATISTICAL
  assert exit_code(IdentityCheckError('x')) == EXIT_IDENTITY
  assert exit_code(RegistrationError('x')) == 1


def test_unknown_command_is_an_argparse_error():
  with pytest.raises(SystemExit):
    main(['bogus'])
