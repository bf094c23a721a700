import numpy as np
import pytest

from levy_heat.errors import ValidationError
from levy_heat.gronwall import (discrete_gronwall_constant,
                                generalized_gronwall_constant)


def test_zero_coupling_gives_one():
  assert discrete_gronwall_constant(0.0, 1.0, 0.5, 0.01) == 1.0
  assert generalized_gronwall_constant(0.0, 1.0, 0.5, 0.5) == 1.0


def test_integrable_kernel_reduces_to_exponentials():
  b, k = 1.5, 1 / 64
  assert discrete_gronwall_constant(b, 1.0, 1.0, k) == pytest.approx(
      (1 + b * k)**64)
  assert generalized_gronwall_constant(b, 1.0, 1.0, 1.0) == pytest.approx(
      np.exp(b))


def test_discrete_constant_below_continuous_one():
  for beta in (0.25, 0.5, 1.0):
    for k in (1 / 16, 1 / 64, 1 / 256):
      discrete = discrete_gronwall_constant(2.0, 1.0, beta, k)
      assert 1.0 <= discrete <= generalized_gronwall_constant(
          2.0, 1.0, 1.0, beta)


def test_constants_grow_with_the_coupling():
  values = [discrete_gronwall_constant(b, 1.0, 0.5, 1 / 32) for b in (1, 2, 4)]
  assert values[0] < values[1] < values[2]


def test_invalid_arguments():
  with pytest.raises(ValidationError):
    discrete_gronwall_constant(-1.0, 1.0, 0.5, 0.1)
  with pytest.raises(ValidationError):
    discrete_gronwall_constant(1.0, 1.0, 1.5, 0.1)
  with pytest.raises(ValidationError):
    discrete_gronwall_constant(1.0, 1.0, 0.5, 1.0)
  with pytest.raises(ValidationError):
    generalized_gronwall_constant(1.0, 1.0, 0.0, 0.5)
  with pytest.raises(ValidationError):
    generalized_gronwall_constant(1.0, 1.0, 0.5, 0.5, n_terms=0)
