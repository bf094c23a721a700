"""
Worst-case constants of the Gronwall inequalities behind the stability and
regularity bounds, computed from the extremal (equality) cases.
"""
import numpy as np
from scipy.special import gammaln

from .errors import ValidationError
from .validators import validate_horizon


def discrete_gronwall_constant(b: float, horizon: float, beta: float,
                               time_step: float) -> float:
  """
  The smallest C with φ_m ≤ C·A for every nonnegative sequence satisfying
  φ_m ≤ A + B·k·Σ_{i<m} t_(m-i)^(β-1)·φ_i on the grid t_m = mk ≤ T.

  The extremal sequence turns the inequality into an equality; it is
  nondecreasing, so C is its last entry for A = 1.
  """
  validate_horizon(horizon)
  if b < 0:
    raise ValidationError('B must be nonnegative, got {}'.format(b))
  if not 0 < beta <= 1:
    raise ValidationError('β must lie in (0, 1], got {}'.format(beta))
  if not 0 < time_step < 1:
    raise ValidationError('k must lie in (0, 1), got {}'.format(time_step))
  n_steps = int(np.floor(horizon / time_step + 1e-12))
  kernel = time_step * (time_step * np.arange(1, n_steps + 1))**(beta - 1)
  phi = np.empty(n_steps + 1)
  phi[0] = 1.0
  for m in range(1, n_steps + 1):
    # kernel[m - 1 - i] = k·t_(m-i)^(β-1)
    phi[m] = 1.0 + b * (kernel[m - 1::-1] @ phi[:m])
  return float(phi.max())


def generalized_gronwall_constant(b: float,
                                  horizon: float,
                                  alpha: float,
                                  beta: float,
                                  n_terms: int = 200) -> float:
  """
  The smallest C with φ(t, s) ≤ C·A·(t-s)^(α-1) whenever
  φ(t, s) ≤ A(t-s)^(α-1) + B∫_s^t (t-r)^(β-1)φ(r, s)dr on [0, T].

  The equality case is solved by the series
  Σ_n (BΓ(β))^n Γ(α)/Γ(α+nβ)·(t-s)^(α-1+nβ), so C is the series at t - s = T
  divided by T^(α-1), a Mittag-Leffler value truncated after ``n_terms``.
  """
  validate_horizon(horizon)
  if b < 0:
    raise ValidationError('B must be nonnegative, got {}'.format(b))
  if alpha <= 0 or beta <= 0:
    raise ValidationError('α and β must be positive, got {} and {}'.format(
        alpha, beta))
  if n_terms < 1:
    raise ValidationError('Series needs a term, got {}'.format(n_terms))
  if b == 0: return 1.0
  n = np.arange(n_terms)
  x = np.log(b) + gammaln(beta) + beta * np.log(horizon)
  log_terms = n * x + gammaln(alpha) - gammaln(alpha + n * beta)
  return float(np.sum(np.exp(log_terms)))
