DEFAULT_BETA = 0.5
DEFAULT_HORIZON = 1.0
DEFAULT_DRIFT = 'sine'
DEFAULT_DRIFT_AMPLITUDE = 0.5
DEFAULT_INITIAL = 'quadratic'
DEFAULT_INITIAL_AMPLITUDE = 1.0
DEFAULT_DELTA = 0.75

DEFAULT_JUMP_RATE = 50.0
DEFAULT_MODE_DECAY = 1.1
DEFAULT_NOISE_MODES = 512
DEFAULT_AMPLITUDES = (-1.0, 1.0)
DEFAULT_AMPLITUDE_WEIGHTS = (0.5, 0.5)

DEFAULT_LEVELS = (4, 8, 16, 32, 64)
DEFAULT_PINNED = 256
DEFAULT_REFERENCE_MODES = 512
DEFAULT_REFERENCE_SUBSTEPS = 16384

DEFAULT_SAMPLES = 10000
DEFAULT_SEED = 20190425

DEFAULT_FUNCTIONAL = 'linear'
DEFAULT_FUNCTIONAL_MODES = (1,)
DEFAULT_FUNCTIONAL_ATOMS = (1.0,)

DEFAULT_COVARIANCE_TIMES = (0.5, 1.0)
DEFAULT_COVARIANCE_MODES = (1, 1)

DEFAULT_IDENTITY_INSTANCES = 20
DEFAULT_DUALITY_SAMPLES = 100000
DEFAULT_PROFILE_SAMPLES = 1000
DEFAULT_SEMINORM_Q = 2.0
DEFAULT_MALLIAVIN_MODES = 16
DEFAULT_MALLIAVIN_STEPS = 32
DEFAULT_DUALITY_MODES = 8
DEFAULT_DUALITY_RATE = 5.0

DEFAULT_OUTPUT_DIRECTORY = 'out'

DEFAULT_QUADRATURE_NODES = 64
DEFAULT_GAUSS_POINTS = 3
MAX_GAUSS_POINTS = 5
MAX_FUNCTIONAL_COMPONENTS = 4

# A rung whose standard error exceeds this share of its estimate is void.
VOID_RELATIVE_ERROR = 0.3
# Estimates at or below this level are treated as numerical floor.
ERROR_FLOOR = 1e-13
# Reference error must stay below this share of the finest scheme error.
SELF_CONVERGENCE_SHARE = 0.1
# Noise spectrum must reach this many modes per unit of 1/h.
NOISE_MODES_PER_INVERSE_H = 4

IDENTITY_TOLERANCE = 1e-10
CHAIN_RULE_TOLERANCE = 1e-12
STANDARD_ERROR_BAND = 3.0

DEFAULT_ACCEPTANCE_BANDS = {
    'strong_space': (0.25, 0.75),
    'strong_time': (0.10, 0.40),
    'strong_diagonal': (0.25, 0.75),
    'weak_space': (0.6, 1.4),
    'weak_time': (0.25, 0.75),
    'weak_diagonal': (0.6, 1.4),
    'ratio': (1.5, 2.5),
    'covariance_space': (0.6, 1.4),
    'covariance_time': (0.25, 0.75),
    'covariance_diagonal': (0.6, 1.4),
    'derivative_residual_ratio': (1.7, 2.3),
    'error_operator_ratio': (3.0, 5.3),
}

OUTPUT_DIRECTORY_VARIABLE = 'LEVY_HEAT_OUT_DIR'

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_STATISTICAL = 3
EXIT_IDENTITY = 4

# Instances and reference sizes of the derivative integral equation check.
RESIDUAL_INSTANCES = 5
RESIDUAL_MODES = 4
RESIDUAL_SUBSTEPS = 2048
# The seminorm profile runs on this fraction of the profile samples.
SEMINORM_SAMPLES_DIVISOR = 10
# Largest drift of the regularity profile under grid doubling.
PROFILE_DRIFT = 0.05
# Largest growth of the scheme seminorm under refinement.
SEMINORM_GROWTH = 1.25
