from . import (backends, builders, converters, errors, estimators, fem,
               functionals, gronwall, malliavin, noise, parsers, registrars,
               solvers, spectral, types, validators, verifiers)
