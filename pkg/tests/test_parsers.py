import cbor
import pytest

from levy_heat.constants import DEFAULT_ACCEPTANCE_BANDS, DEFAULT_SEED
from levy_heat.errors import DecodingError, ParseError, ValidationError
from levy_heat.parsers import (parse_bool, parse_config, parse_jump_path,
                               parse_jump_path_cbor, parse_trajectory,
                               read_config)
from levy_heat.types import Backend, SweepMode

SMALL_CONFIG = """
[problem]
beta = 0.75
drift = zero

[noise]
rate = 20
amplitudes = -2, 1
amplitude_weights = 0.25 0.75

[discretization]
backend = fem
sweep = diagonal
levels = 4, 8, 16

[mc]
samples = 50
seed = 7

[acceptance]
ratio = 1.2, 2.8
"""


def test_empty_config_uses_defaults():
  config = parse_config('')
  assert config.mc.seed == DEFAULT_SEED
  assert config.mc.workers == 0
  assert config.discretization.backend is Backend.SPECTRAL
  assert config.discretization.sweep is SweepMode.SPACE
  assert config.acceptance.bands == DEFAULT_ACCEPTANCE_BANDS
  assert config.output.plot_data is True
  assert config.source_text == ''


def test_config_values():
  config = parse_config(SMALL_CONFIG)
  assert config.problem.beta == 0.75
  assert config.problem.drift == 'zero'
  assert config.noise.amplitudes == [-2.0, 1.0]
  assert config.noise.amplitude_weights == [0.25, 0.75]
  assert config.discretization.backend is Backend.FEM
  assert config.discretization.sweep is SweepMode.DIAGONAL
  assert config.discretization.levels == [4, 8, 16]
  assert config.mc.samples == 50
  assert config.acceptance.bands['ratio'] == (1.2, 2.8)
  assert config.acceptance.bands['strong_space'] == (0.25, 0.75)
  assert config.source_text == SMALL_CONFIG


def test_unknown_keys_and_sections_are_named():
  with pytest.raises(ValidationError, match='speed'):
    parse_config('[mc]\nspeed = 3\n')
  with pytest.raises(ValidationError, match='plots'):
    parse_config('[plots]\nwidth = 3\n')


def test_bad_values_are_rejected():
  with pytest.raises(ValidationError, match='samples'):
    parse_config('[mc]\nsamples = many\n')
  with pytest.raises(ValidationError, match='backend'):
    parse_config('[discretization]\nbackend = wavelet\n')
  with pytest.raises(ValidationError, match='ratio'):
    parse_config('[acceptance]\nratio = 1.5\n')


def test_malformed_config_text():
  with pytest.raises(ParseError):
    parse_config('beta = 0.5\n')


def test_missing_config_file(tmp_path):
  with pytest.raises(ValidationError):
    read_config(str(tmp_path / 'absent.ini'))
  path = tmp_path / 'small.ini'
  path.write_text(SMALL_CONFIG)
  assert read_config(str(path)).mc.seed == 7


def test_parse_bool():
  assert parse_bool(' Yes ') is True
  assert parse_bool('off') is False
  with pytest.raises(ValueError):
    parse_bool('maybe')


def test_jump_path_text_errors():
  header = '# horizon 1.0\n# n_modes 4\n'
  assert len(parse_jump_path(header)) == 0
  with pytest.raises(ParseError):
    parse_jump_path(header + '0.5 1\n')
  with pytest.raises(ParseError):
    parse_jump_path(header + '0.5 one 1.0\n')
  with pytest.raises(ParseError):
    parse_jump_path(header + '0.5 1 1.0\n0.25 2 1.0\n')
  with pytest.raises(ParseError):
    parse_jump_path('# n_modes 4\n0.5 1 1.0\n')
  with pytest.raises(ParseError):
    parse_jump_path('# horizon soon\n# n_modes 4\n')


def test_jump_path_cbor_errors():
  with pytest.raises(DecodingError):
    parse_jump_path_cbor(b'\xff\x00')
  with pytest.raises(DecodingError):
    parse_jump_path_cbor(cbor.dumps([1, 2]))
  with pytest.raises(DecodingError):
    parse_jump_path_cbor(cbor.dumps({'horizon': 1.0, 'n_modes': 4}))
  with pytest.raises(DecodingError):
    parse_jump_path_cbor(
        cbor.dumps({
            'horizon': 1.0,
            'n_modes': 4,
            'times': [0.5],
            'modes': [],
            'values': [1.0]
        }))
  with pytest.raises(ValidationError):
    parse_jump_path_cbor(
        cbor.dumps({
            'horizon': 1.0,
            'n_modes': 4,
            'times': [],
            'modes': [],
            'values': [],
            'colour': 'red'
        }))


def test_trajectory_shape_is_checked():
  header = ('# backend spectral\n# resolution 2\n# time_step 0.5\n'
            '# horizon 1.0\n')
  record = parse_trajectory(header + '0.0 1 2\n0.5 3 4\n1.0 5 6\n')
  assert record.values.shape == (3, 2)
  with pytest.raises(ParseError):
    parse_trajectory(header + '0.0 1 2\n0.5 3 4\n')
  with pytest.raises(ParseError):
    parse_trajectory(header + '0.0 1 2\n0.5 3 x\n1.0 5 6\n')
  with pytest.raises(ParseError):
    parse_trajectory('# backend spectral\n0.0 1 2\n')
