import csv
import io
from functools import singledispatch
from typing import Any, List, Mapping, Optional, Sequence, Tuple

import cbor

from .errors import UnimplementedError
from .types import (Check, ErrorTable, IdentityCheck, JumpPath, RangeCheck,
                    StatisticalCheck, TrajectoryRecord)
from .utils import format_float, format_floats

ERROR_TABLE_COLUMNS = ('h', 'k', 'estimator', 'estimate', 'standard_error',
                       'n_samples', 'status')


def header_lines(header: Mapping[str, Any]) -> List[str]:
  """'# key value' lines in key order."""
  lines = []
  for key in sorted(header):
    value = header[key]
    if value is None: continue
    if isinstance(value, float): value = format_float(value)
    lines.append('# {} {}'.format(key, value))
  return lines


def dump_jump_path(path: JumpPath,
                   header: Optional[Mapping[str, Any]] = None) -> str:
  """One 'time mode coefficient' line per jump, exact float text."""
  full = dict(header or {})
  full.update({
      'horizon': float(path.horizon),
      'n_modes': path.n_modes,
      'seed': path.seed,
      'index': path.index,
  })
  lines = header_lines(full)
  for t, m, v in zip(path.times, path.modes, path.values):
    lines.append('{} {} {}'.format(format_float(t), int(m), format_float(v)))
  return '\n'.join(lines) + '\n'


def dump_jump_path_cbor(path: JumpPath) -> bytes:
  archive = {
      'horizon': float(path.horizon),
      'n_modes': int(path.n_modes),
      'times': [float(t) for t in path.times],
      'modes': [int(m) for m in path.modes],
      'values': [float(v) for v in path.values],
  }
  if path.seed is not None: archive['seed'] = int(path.seed)
  if path.index is not None: archive['index'] = int(path.index)
  return cbor.dumps(archive)


def dump_trajectory(record: TrajectoryRecord,
                    header: Optional[Mapping[str, Any]] = None) -> str:
  """M + 1 rows 't v_1 .. v_d' under a header naming the resolution."""
  disc = record.discretization
  full = dict(header or {})
  full.update({
      'backend': disc.backend.value,
      'resolution': disc.resolution,
      'time_step': disc.time_step,
      'horizon': disc.horizon,
  })
  lines = header_lines(full)
  for t, row in zip(disc.grid, record.values):
    lines.append(format_floats([t] + list(row)))
  return '\n'.join(lines) + '\n'


def slope_lines(table: ErrorTable) -> List[str]:
  lines = []
  for name in sorted(table.fits):
    fit = table.fits[name]
    if fit is None:
      lines.append('# slope {} undefined'.format(name))
      continue
    lines.append('# slope {} {} {} intercept {} r2 {} excluded {}'.format(
        name, fit.variable, format_float(fit.slope),
        format_float(fit.intercept), format_float(fit.r_squared),
        ','.join(str(i) for i in fit.excluded) or '-'))
  return lines


def dump_error_table(table: ErrorTable,
                     header: Optional[Mapping[str, Any]] = None) -> str:
  """
  CSV with the columns of ERROR_TABLE_COLUMNS, preceded by '#' comment lines
  carrying the header, the table metadata and the fitted slopes.
  """
  full = dict(table.metadata)
  full.update(header or {})
  out = io.StringIO()
  for line in header_lines(full) + slope_lines(table):
    out.write(line + '\n')
  writer = csv.writer(out, lineterminator='\n')
  writer.writerow(ERROR_TABLE_COLUMNS)
  for row in table.rows:
    writer.writerow([
        format_float(row.h),
        format_float(row.k), row.estimator,
        format_float(row.estimate),
        format_float(row.standard_error), row.n_samples, row.status
    ])
  return out.getvalue()


def dump_plot_data(series: Mapping[str, Sequence[Tuple[float, float, float]]],
                   header: Optional[Mapping[str, Any]] = None) -> str:
  """Blocks of 'x y y_err' lines, one block per estimator."""
  lines = header_lines(header or {})
  for name in sorted(series):
    lines.append('# estimator {}'.format(name))
    lines.extend(format_floats(point) for point in series[name])
    lines.append('')
  return '\n'.join(lines) + '\n'


@singledispatch
def check_line(check: Any, passed: bool) -> str:
  raise UnimplementedError('No report line for {}'.format(type(check)))


@check_line.register(IdentityCheck)
def identity_check_line(check: IdentityCheck, passed: bool) -> str:
  return '{} identity lhs={} rhs={} tolerance={}{} {}'.format(
      check.name, format_float(check.lhs), format_float(check.rhs),
      format_float(check.tolerance), ' relative' if check.relative else '',
      'pass' if passed else 'FAIL')


@check_line.register(StatisticalCheck)
def statistical_check_line(check: StatisticalCheck, passed: bool) -> str:
  return '{} statistical lhs={} rhs={} se={} band={} {}'.format(
      check.name, format_float(check.lhs), format_float(check.rhs),
      format_float(check.standard_error), format_float(check.band),
      'pass' if passed else 'FAIL')


@check_line.register(RangeCheck)
def range_check_line(check: RangeCheck, passed: bool) -> str:
  return '{} range value={} low={} high={} {}'.format(
      check.name, format_float(check.value), format_float(check.low),
      format_float(check.high), 'pass' if passed else 'FAIL')


def dump_report(results: Sequence[Tuple[Check, bool]],
                header: Optional[Mapping[str, Any]] = None) -> str:
  lines = header_lines(header or {})
  lines.extend(check_line(check, passed) for check, passed in results)
  return '\n'.join(lines) + '\n'
