import configparser
from typing import Any, Callable, Dict, List, Mapping, Optional, Set, Tuple

import cbor
import numpy as np

from .constants import (
    DEFAULT_ACCEPTANCE_BANDS, DEFAULT_AMPLITUDE_WEIGHTS, DEFAULT_AMPLITUDES,
    DEFAULT_BETA, DEFAULT_COVARIANCE_MODES, DEFAULT_COVARIANCE_TIMES,
    DEFAULT_DELTA, DEFAULT_DRIFT, DEFAULT_DRIFT_AMPLITUDE,
    DEFAULT_DUALITY_MODES, DEFAULT_DUALITY_RATE, DEFAULT_DUALITY_SAMPLES,
    DEFAULT_FUNCTIONAL, DEFAULT_FUNCTIONAL_ATOMS, DEFAULT_FUNCTIONAL_MODES,
    DEFAULT_HORIZON, DEFAULT_IDENTITY_INSTANCES, DEFAULT_INITIAL,
    DEFAULT_INITIAL_AMPLITUDE, DEFAULT_JUMP_RATE, DEFAULT_LEVELS,
    DEFAULT_MALLIAVIN_MODES, DEFAULT_MALLIAVIN_STEPS, DEFAULT_MODE_DECAY,
    DEFAULT_NOISE_MODES, DEFAULT_OUTPUT_DIRECTORY, DEFAULT_PINNED,
    DEFAULT_PROFILE_SAMPLES, DEFAULT_QUADRATURE_NODES,
    DEFAULT_REFERENCE_MODES, DEFAULT_REFERENCE_SUBSTEPS, DEFAULT_SAMPLES,
    DEFAULT_SEED, DEFAULT_SEMINORM_Q)
from .errors import DecodingError, ParseError, ValidationError
from .types import (AcceptanceConfig, Backend, CovarianceConfig,
                    Discretization, DiscretizationConfig, ExperimentConfig,
                    FunctionalConfig, JumpPath, MalliavinConfig,
                    MonteCarloConfig, NoiseConfig, OutputConfig, ProblemConfig,
                    SweepMode, TrajectoryRecord)

SECTIONS = {
    'problem': {
        'beta', 'horizon', 'drift', 'drift_amplitude', 'initial',
        'initial_amplitude', 'delta'
    },
    'noise': {
        'rate', 'mode_decay', 'n_modes', 'amplitudes', 'amplitude_weights'
    },
    'discretization': {
        'backend', 'sweep', 'levels', 'pinned', 'reference_modes',
        'reference_substeps', 'strict_truncation'
    },
    'mc': {'samples', 'seed', 'workers'},
    'functional': {'name', 'modes', 'atoms', 'density'},
    'covariance': {'t1', 't2', 'psi1_mode', 'psi2_mode'},
    'malliavin': {
        'instances', 'quadrature_nodes', 'duality_samples', 'profile_samples',
        'q', 'modes', 'steps', 'duality_modes', 'duality_rate'
    },
    'acceptance': set(DEFAULT_ACCEPTANCE_BANDS),
    'output': {'directory', 'plot_data', 'archive_paths'},
}


def parse_bool(s: str) -> bool:
  value = s.strip().lower()
  if value in ('1', 'true', 'yes', 'on'): return True
  if value in ('0', 'false', 'no', 'off'): return False
  raise ValueError(s)


def parse_floats(s: str) -> List[float]:
  return [float(x) for x in s.replace(',', ' ').split()]


def parse_ints(s: str) -> List[int]:
  return [int(x) for x in s.replace(',', ' ').split()]


def parse_band(s: str) -> Tuple[float, float]:
  values = parse_floats(s)
  if len(values) != 2: raise ValueError(s)
  return values[0], values[1]


def parse_section_field(field_key: str,
                        kind: Callable[[str], Any],
                        section: Optional[Mapping[str, str]],
                        default: Any = None,
                        required: bool = False) -> Any:
  field = None if section is None else section.get(field_key)
  if field is None:
    if not required: return default
    raise ValidationError('{} is required'.format(field_key))

  try:
    return kind(field.strip())
  except ValueError:
    raise ValidationError('{} = {!r} is not a valid {}'.format(
        field_key, field, getattr(kind, '__name__', 'value')))


def check_unsupported_keys(supported: Set[str], data: Mapping[str, Any],
                           where: str = 'data'):
  unsupported_keys = set(data.keys()).difference(supported)
  if unsupported_keys:
    raise ValidationError('Found unsupported keys in {} {}'.format(
        where, sorted(unsupported_keys)))


def read_sections(text: str) -> Dict[str, Mapping[str, str]]:
  parser = configparser.ConfigParser(interpolation=None)
  try:
    parser.read_string(text)
  except configparser.Error as e:
    raise ParseError('Could not parse config: {}'.format(e))
  check_unsupported_keys(set(SECTIONS), {s: None for s in parser.sections()},
                         'config sections')
  sections = {}
  for name in parser.sections():
    check_unsupported_keys(SECTIONS[name], parser[name], '[{}]'.format(name))
    sections[name] = parser[name]
  return sections


def parse_config(text: str) -> ExperimentConfig:
  """
  Reads an experiment config. Every key is optional and falls back to the
  defaults of :mod:`levy_heat.constants`; unknown sections and keys are
  rejected by name.
  """
  sections = read_sections(text)

  def field(section: str, key: str, kind: Callable[[str], Any],
            default: Any) -> Any:
    return parse_section_field(key, kind, sections.get(section), default)

  problem = ProblemConfig(
      beta=field('problem', 'beta', float, DEFAULT_BETA),
      horizon=field('problem', 'horizon', float, DEFAULT_HORIZON),
      drift=field('problem', 'drift', str, DEFAULT_DRIFT),
      drift_amplitude=field('problem', 'drift_amplitude', float,
                            DEFAULT_DRIFT_AMPLITUDE),
      initial=field('problem', 'initial', str, DEFAULT_INITIAL),
      initial_amplitude=field('problem', 'initial_amplitude', float,
                              DEFAULT_INITIAL_AMPLITUDE),
      delta=field('problem', 'delta', float, DEFAULT_DELTA))

  noise = NoiseConfig(
      rate=field('noise', 'rate', float, DEFAULT_JUMP_RATE),
      mode_decay=field('noise', 'mode_decay', float, DEFAULT_MODE_DECAY),
      n_modes=field('noise', 'n_modes', int, DEFAULT_NOISE_MODES),
      amplitudes=field('noise', 'amplitudes', parse_floats,
                       list(DEFAULT_AMPLITUDES)),
      amplitude_weights=field('noise', 'amplitude_weights', parse_floats,
                              list(DEFAULT_AMPLITUDE_WEIGHTS)))

  discretization = DiscretizationConfig(
      backend=field('discretization', 'backend', Backend, Backend.SPECTRAL),
      sweep=field('discretization', 'sweep', SweepMode, SweepMode.SPACE),
      levels=field('discretization', 'levels', parse_ints,
                   list(DEFAULT_LEVELS)),
      pinned=field('discretization', 'pinned', int, DEFAULT_PINNED),
      reference_modes=field('discretization', 'reference_modes', int,
                            DEFAULT_REFERENCE_MODES),
      reference_substeps=field('discretization', 'reference_substeps', int,
                               DEFAULT_REFERENCE_SUBSTEPS),
      strict_truncation=field('discretization', 'strict_truncation',
                              parse_bool, False))

  mc = MonteCarloConfig(samples=field('mc', 'samples', int, DEFAULT_SAMPLES),
                        seed=field('mc', 'seed', int, DEFAULT_SEED),
                        workers=field('mc', 'workers', int, 0))

  functional = FunctionalConfig(
      name=field('functional', 'name', str, DEFAULT_FUNCTIONAL),
      modes=field('functional', 'modes', parse_ints,
                  list(DEFAULT_FUNCTIONAL_MODES)),
      atoms=field('functional', 'atoms', parse_floats,
                  list(DEFAULT_FUNCTIONAL_ATOMS)),
      density=field('functional', 'density', float, 0.0))

  covariance = CovarianceConfig(
      t1=field('covariance', 't1', float, DEFAULT_COVARIANCE_TIMES[0]),
      t2=field('covariance', 't2', float, DEFAULT_COVARIANCE_TIMES[1]),
      psi1_mode=field('covariance', 'psi1_mode', int,
                      DEFAULT_COVARIANCE_MODES[0]),
      psi2_mode=field('covariance', 'psi2_mode', int,
                      DEFAULT_COVARIANCE_MODES[1]))

  malliavin = MalliavinConfig(
      instances=field('malliavin', 'instances', int,
                      DEFAULT_IDENTITY_INSTANCES),
      quadrature_nodes=field('malliavin', 'quadrature_nodes', int,
                             DEFAULT_QUADRATURE_NODES),
      duality_samples=field('malliavin', 'duality_samples', int,
                            DEFAULT_DUALITY_SAMPLES),
      profile_samples=field('malliavin', 'profile_samples', int,
                            DEFAULT_PROFILE_SAMPLES),
      q=field('malliavin', 'q', float, DEFAULT_SEMINORM_Q),
      modes=field('malliavin', 'modes', int, DEFAULT_MALLIAVIN_MODES),
      steps=field('malliavin', 'steps', int, DEFAULT_MALLIAVIN_STEPS),
      duality_modes=field('malliavin', 'duality_modes', int,
                          DEFAULT_DUALITY_MODES),
      duality_rate=field('malliavin', 'duality_rate', float,
                         DEFAULT_DUALITY_RATE))

  bands = dict(DEFAULT_ACCEPTANCE_BANDS)
  for key in sections.get('acceptance', {}):
    bands[key] = field('acceptance', key, parse_band, None)

  output = OutputConfig(
      directory=field('output', 'directory', str, DEFAULT_OUTPUT_DIRECTORY),
      plot_data=field('output', 'plot_data', parse_bool, True),
      archive_paths=field('output', 'archive_paths', parse_bool, False))

  return ExperimentConfig(problem=problem,
                          noise=noise,
                          discretization=discretization,
                          mc=mc,
                          functional=functional,
                          covariance=covariance,
                          malliavin=malliavin,
                          acceptance=AcceptanceConfig(bands=bands),
                          output=output,
                          source_text=text)


def read_config(path: str) -> ExperimentConfig:
  try:
    with open(path, encoding='utf-8') as f:
      text = f.read()
  except OSError as e:
    raise ValidationError('Cannot read config {}: {}'.format(path, e))
  return parse_config(text)


def parse_header(lines: List[str]) -> Tuple[Dict[str, str], List[str]]:
  """Splits '# key value' header lines from the data lines."""
  header, body = {}, []
  for line in lines:
    stripped = line.strip()
    if not stripped: continue
    if stripped.startswith('#'):
      parts = stripped[1:].split(None, 1)
      if len(parts) == 2: header[parts[0]] = parts[1]
    else:
      body.append(stripped)
  return header, body


def header_field(header: Dict[str, str], key: str, kind: Callable[[str], Any],
                 required: bool = True) -> Any:
  if key not in header:
    if not required: return None
    raise ParseError('Missing header field {}'.format(key))
  try:
    return kind(header[key])
  except ValueError:
    raise ParseError('Header field {} = {!r} is not a valid {}'.format(
        key, header[key], kind.__name__))


def parse_jump_path(text: str) -> JumpPath:
  """Reads the 'time mode coefficient' text format."""
  header, body = parse_header(text.splitlines())
  rows = []
  for number, line in enumerate(body, start=1):
    parts = line.split()
    if len(parts) != 3:
      raise ParseError('Jump line {} needs 3 fields, got {}'.format(
          number, len(parts)))
    try:
      rows.append((float(parts[0]), int(parts[1]), float(parts[2])))
    except ValueError:
      raise ParseError('Jump line {} is malformed: {!r}'.format(number, line))
  times = [r[0] for r in rows]
  if any(b < a for a, b in zip(times, times[1:])):
    raise ParseError('Jump times must be non-decreasing')
  return JumpPath(horizon=header_field(header, 'horizon', float),
                  times=times,
                  modes=[r[1] for r in rows],
                  values=[r[2] for r in rows],
                  n_modes=header_field(header, 'n_modes', int),
                  seed=header_field(header, 'seed', int, False),
                  index=header_field(header, 'index', int, False))


def parse_jump_path_cbor(data: bytes) -> JumpPath:
  try:
    archive = cbor.loads(data)
  except Exception:
    raise DecodingError('Could not decode the jump path CBOR')
  if type(archive) is not dict:
    raise DecodingError('Jump path CBOR must hold a map')
  check_unsupported_keys(
      {'horizon', 'n_modes', 'seed', 'index', 'times', 'modes', 'values'},
      archive, 'jump path archive')
  for key in ('horizon', 'n_modes', 'times', 'modes', 'values'):
    if key not in archive:
      raise DecodingError('Jump path archive lacks {}'.format(key))
  if not len(archive['times']) == len(archive['modes']) == len(
      archive['values']):
    raise DecodingError('Jump path archive columns differ in length')
  return JumpPath(horizon=archive['horizon'],
                  times=archive['times'],
                  modes=archive['modes'],
                  values=archive['values'],
                  n_modes=archive['n_modes'],
                  seed=archive.get('seed'),
                  index=archive.get('index'))


def parse_trajectory(text: str) -> TrajectoryRecord:
  """Reads the columnar 't v_1 .. v_d' trajectory format."""
  header, body = parse_header(text.splitlines())
  discretization = Discretization(
      backend=header_field(header, 'backend', Backend),
      resolution=header_field(header, 'resolution', int),
      time_step=header_field(header, 'time_step', float),
      horizon=header_field(header, 'horizon', float))
  try:
    table = np.array([[float(x) for x in line.split()] for line in body])
  except ValueError:
    raise ParseError('Trajectory rows must be numeric')
  expected = (discretization.n_steps + 1, discretization.dimension + 1)
  if table.shape != expected:
    raise ParseError('Trajectory has shape {}, expected {}'.format(
        table.shape, expected))
  return TrajectoryRecord(discretization=discretization, values=table[:, 1:])
