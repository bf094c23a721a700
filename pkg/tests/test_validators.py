import logging

import numpy as np
import pytest

from levy_heat.errors import ValidationError
from levy_heat.parsers import parse_config
from levy_heat.types import SineDrift, ZeroDrift
from levy_heat.validators import (validate_amplitude_law, validate_config,
                                  validate_drift, validate_levels, validate_levy_model,
                                  validate_noise_resolution, validate_q,
                                  validate_time)

from .common import small_model


def test_default_config_is_valid():
  assert validate_config(parse_config('')) is True


@pytest.mark.parametrize('text', [
    '[problem]\nbeta = 1.5\n',
    '[problem]\nbeta = 0\n',
    '[problem]\nhorizon = 0\n',
    '[problem]\ndelta = 0.5\n',
    '[noise]\nrate = -1\n',
    '[noise]\nmode_decay = 1.0\n',
    '[noise]\namplitudes = 1, 2\namplitude_weights = 0.5, 0.5\n',
    '[discretization]\nlevels = 8, 4\n',
    '[discretization]\npinned = 16\n',
    '[discretization]\nreference_modes = 32\n',
    '[mc]\nsamples = 1\n',
    '[mc]\nworkers = -2\n',
    '[mc]\nseed = -1\n',
    '[functional]\nmodes = 1, 2, 3, 4, 5\n',
    '[functional]\natoms = 1.5\n',
    '[covariance]\nt1 = 0\n',
    '[malliavin]\nq = 4\n',
    '[acceptance]\nratio = 3, 2\n',
])
def test_invalid_configs_are_rejected(text):
  with pytest.raises(ValidationError):
    validate_config(parse_config(text))


def test_noise_resolution_warns_unless_strict(caplog):
  with caplog.at_level(logging.WARNING):
    assert validate_noise_resolution(16, 1 / 8) is False
  assert 'below' in caplog.text
  assert validate_noise_resolution(32, 1 / 8) is True
  with pytest.raises(ValidationError):
    validate_noise_resolution(16, 1 / 8, strict=True)
  config = parse_config('[noise]\nn_modes = 64\n')
  assert validate_config(config) is False


def test_amplitude_law_must_be_symmetric_distribution():
  validate_amplitude_law([-1.0, 0.0, 1.0], [0.25, 0.5, 0.25])
  with pytest.raises(ValidationError):
    validate_amplitude_law([-1.0, 1.0], [0.3, 0.7])
  with pytest.raises(ValidationError):
    validate_amplitude_law([-1.0, 1.0], [0.5, 0.6])
  with pytest.raises(ValidationError):
    validate_amplitude_law([], [])


def test_levy_model_checks():
  validate_levy_model(small_model(rate=0.0))
  with pytest.raises(ValidationError):
    validate_levy_model(small_model(beta=0.0))
  with pytest.raises(ValidationError):
    validate_levy_model(small_model(n_modes=0))


def test_levels_and_times():
  validate_levels([2, 4, 8])
  with pytest.raises(ValidationError):
    validate_levels([])
  with pytest.raises(ValidationError):
    validate_levels([1, 2])
  validate_time(0.0, 1.0)
  with pytest.raises(ValidationError):
    validate_time(0.0, 1.0, allow_zero=False)
  with pytest.raises(ValidationError):
    validate_time(1.1, 1.0)


def test_seminorm_index_range():
  validate_q(3.9, 0.5)
  validate_q(100.0, 1.0)
  with pytest.raises(ValidationError):
    validate_q(1.0, 0.5)
  with pytest.raises(ValidationError):
    validate_q(4.0, 0.5)


class UnderstatedSine(SineDrift):

  @property
  def lipschitz_bound(self) -> float:
    return 0.5 * abs(self.amplitude)


@pytest.mark.parametrize('amplitude', [0.5, -2.0, 0.0])
def test_sine_derivatives_stay_within_the_bound(amplitude):
  drift = SineDrift(amplitude=amplitude)
  u = np.random.default_rng(3).uniform(-50.0, 50.0, size=2000)
  bound = drift.lipschitz_bound
  assert bound == abs(amplitude)
  assert np.max(np.abs(drift.df(u))) <= bound
  assert np.max(np.abs(drift.d2f(u))) <= bound
  assert np.max(np.abs(drift.df(u))) == pytest.approx(bound, abs=1e-3)
  validate_drift(drift)


def test_drift_bounds_are_checked():
  validate_drift(ZeroDrift())
  with pytest.raises(ValidationError):
    validate_drift(UnderstatedSine(amplitude=1.0))
