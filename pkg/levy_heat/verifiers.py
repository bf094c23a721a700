from functools import singledispatch
from typing import Any, List, Sequence, Tuple

import numpy as np

from .errors import (IdentityCheckError, LevyHeatError, StatisticalVoidError,
                     UnimplementedError, VerificationError)
from .types import Check, IdentityCheck, RangeCheck, StatisticalCheck


@singledispatch
def verify(check: Any):
  raise UnimplementedError('Must implement verification for {}'.format(
      str(type(check))))


@verify.register(IdentityCheck)
def verify_identity_check(check: IdentityCheck):
  gap = abs(check.lhs - check.rhs)
  scale = max(abs(check.lhs), abs(check.rhs)) if check.relative else 1.0
  if not np.isfinite(gap) or gap > check.tolerance * max(scale, 1e-300):
    raise IdentityCheckError('{} failed: |{} - {}| = {:.3g} exceeds {:.3g}{}'.format(
        check.name, check.lhs, check.rhs, gap, check.tolerance,
        ' relative' if check.relative else ''))


@verify.register(StatisticalCheck)
def verify_statistical_check(check: StatisticalCheck):
  gap = abs(check.lhs - check.rhs)
  if not np.isfinite(gap) or gap > check.band * check.standard_error:
    raise StatisticalVoidError(
        '{} failed: |{} - {}| = {:.3g} exceeds {} standard errors of {:.3g}'.
        format(check.name, check.lhs, check.rhs, gap, check.band,
               check.standard_error))


@verify.register(RangeCheck)
def verify_range_check(check: RangeCheck):
  if not check.low <= check.value <= check.high:
    message = '{} = {:.4g} outside [{}, {}]'.format(check.name, check.value,
                                                     check.low, check.high)
    if check.statistical: raise StatisticalVoidError(message)
    raise IdentityCheckError(message)


def verify_all(checks: Sequence[Check]
              ) -> Tuple[List[Tuple[Check, bool]], List[LevyHeatError]]:
  """Runs every check, collecting verdicts and failures instead of stopping."""
  results, failures = [], []
  for check in checks:
    try:
      verify(check)
      results.append((check, True))
    except (VerificationError, StatisticalVoidError) as e:
      results.append((check, False))
      failures.append(e)
  return results, failures


def raise_failures(failures: Sequence[LevyHeatError]):
  """Raises the first identity failure, else the first statistical one."""
  for e in failures:
    if isinstance(e, VerificationError): raise e
  if failures: raise failures[0]
