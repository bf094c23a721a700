class LevyHeatError(Exception):
  pass


class ValidationError(LevyHeatError):
  pass


class ParseError(LevyHeatError):
  pass


class DecodingError(LevyHeatError):
  pass


class UnimplementedError(LevyHeatError):
  pass


class ConvergenceError(LevyHeatError):
  pass


class InsufficientDataError(LevyHeatError):
  pass


class StatisticalVoidError(LevyHeatError):
  pass


class VerificationError(LevyHeatError):
  pass


class IdentityCheckError(VerificationError):
  pass


class RegistrationError(LevyHeatError):
  pass
