import numpy as np
import pytest

from levy_heat.errors import ValidationError
from levy_heat.spectral import (apply_fractional_power, apply_resolvent,
                                apply_semigroup, basis_gram_matrix,
                                continuity_constant_check,
                                continuity_envelope, custom_basis,
                                from_physical_values, hdot_norm,
                                laplacian_basis, physical_values,
                                physical_values_direct, resize,
                                smoothing_constant_check, smoothing_envelope,
                                unit_field)
from levy_heat.types import SpectralField


def random_field(n_modes: int, seed: int = 3) -> SpectralField:
  rng = np.random.default_rng(seed)
  return SpectralField(basis=laplacian_basis(n_modes),
                       coeffs=rng.standard_normal(n_modes))


def test_laplacian_eigenvalues():
  basis = laplacian_basis(4)
  assert np.allclose(basis.eigenvalues, (np.pi * np.arange(1, 5))**2)
  assert basis.is_laplacian


def test_custom_basis_rejects_unordered_eigenvalues():
  with pytest.raises(ValidationError):
    custom_basis([1.0, 1.0, 2.0])
  with pytest.raises(ValidationError):
    custom_basis([-1.0, 2.0])
  assert not custom_basis([1.0, 4.0]).is_laplacian


def test_unit_field_checks_mode():
  basis = laplacian_basis(3)
  assert np.array_equal(unit_field(basis, 2).coeffs, [0.0, 1.0, 0.0])
  with pytest.raises(ValidationError):
    unit_field(basis, 4)
  with pytest.raises(ValidationError):
    unit_field(basis, 0)


def test_fast_sine_transform_matches_direct_sum():
  v = random_field(15)
  assert np.allclose(physical_values(v.coeffs),
                     physical_values_direct(v.coeffs),
                     atol=1e-12)


def test_sine_transform_round_trip_with_oversampling():
  v = random_field(12)
  for oversample in (1, 2, 3):
    values = physical_values(v.coeffs, oversample)
    assert len(values) == oversample * 13 - 1
    assert np.allclose(from_physical_values(values, 12), v.coeffs,
                       atol=1e-12)


def test_basis_is_orthonormal():
  gram = basis_gram_matrix(8)
  assert np.allclose(gram, np.eye(8), atol=1e-8)


def test_semigroup_property():
  v = random_field(10)
  twice = apply_semigroup(apply_semigroup(v, 0.01), 0.02)
  once = apply_semigroup(v, 0.03)
  assert np.allclose(twice.coeffs, once.coeffs, rtol=1e-12)
  with pytest.raises(ValidationError):
    apply_semigroup(v, -1.0)


def test_resolvent_powers():
  v = random_field(6)
  twice = apply_resolvent(apply_resolvent(v, 0.1), 0.1)
  assert np.allclose(apply_resolvent(v, 0.1, 2).coeffs, twice.coeffs)


def test_fractional_norms():
  e3 = unit_field(laplacian_basis(5), 3)
  lam = (3 * np.pi)**2
  assert hdot_norm(e3, 1.0) == pytest.approx(np.sqrt(lam))
  assert hdot_norm(e3, -1.0) == pytest.approx(1 / np.sqrt(lam))
  assert apply_fractional_power(e3, 2.0).coeffs[2] == pytest.approx(lam)


def test_resize_pads_and_truncates():
  v = random_field(4)
  padded = resize(v, 6)
  assert np.array_equal(padded.coeffs[:4], v.coeffs)
  assert np.array_equal(padded.coeffs[4:], [0.0, 0.0])
  assert np.array_equal(resize(v, 2).coeffs, v.coeffs[:2])


def test_smoothing_constant_below_envelope():
  times = np.geomspace(1e-4, 1.0, 50)
  for rho in (0.0, 0.5, 1.0, 2.0):
    value = smoothing_constant_check(rho, times)
    assert value <= smoothing_envelope(rho) + 1e-9
  # dense grids come close to the supremum
  assert smoothing_constant_check(1.0, times) >= 0.9 * smoothing_envelope(1.0)


def test_smoothing_checks_reject_bad_input():
  with pytest.raises(ValidationError):
    smoothing_envelope(-0.5)
  with pytest.raises(ValidationError):
    smoothing_constant_check(1.0, [0.0, 1.0])


def test_continuity_constant_below_envelope():
  times = np.geomspace(1e-4, 1.0, 50)
  for rho in (0.5, 1.0, 2.0):
    value, envelope = continuity_constant_check(rho, times)
    assert value <= envelope + 1e-9
  assert continuity_envelope(2.0) == 1.0
  with pytest.raises(ValidationError):
    continuity_envelope(0.0)
