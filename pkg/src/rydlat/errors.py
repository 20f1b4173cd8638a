"""Exception types shared across the package.

Every error carries an ``exit_code`` so the command line layer can map module
failures onto distinct process exit codes without a lookup table.
"""

from __future__ import annotations


class RydlatError(Exception):
    exit_code = 1


class ConfigError(RydlatError):
    exit_code = 3


class SchemaError(ConfigError):
    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


class UnitError(ConfigError):
    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


class ParameterError(ConfigError, ValueError):
    """A physical parameter violates its invariant."""


class MissingC6(ConfigError):
    def __init__(self, msg: str = "c6 is required but was not configured"):
        super().__init__(msg)


class NumericalError(RydlatError):
    exit_code = 4


class DegenerateSteadyState(NumericalError):
    def __init__(self, sigma_small: float, sigma_next: float, scale: float):
        self.sigma_small = sigma_small
        self.sigma_next = sigma_next
        self.scale = scale
        super().__init__(
            "steady state is not unique: two smallest singular values "
            f"{sigma_small:.3e}, {sigma_next:.3e} (reference scale {scale:.3e})"
        )


class FitDiverged(NumericalError):
    pass


class NotConverged(NumericalError):
    def __init__(self, max_iters: int, last_delta: float):
        self.max_iters = max_iters
        self.last_delta = last_delta
        super().__init__(f"no convergence after {max_iters} iterations (last energy change {last_delta:.3e} rad/s)")


class UnstableStep(NumericalError):
    pass


class BoxedSpectrumUnsupported(NumericalError):
    pass


class NotAnExtremum(NumericalError):
    pass


class FitWindowTooSmall(NumericalError):
    pass


class BracketFailure(NumericalError):
    def __init__(self, msg: str, samples=None):
        self.samples = samples
        super().__init__(msg)


class StepTooLarge(NumericalError):
    pass


class DimensionMismatch(RydlatError, ValueError):
    pass


class UnknownTemperature(ConfigError, KeyError):
    def __init__(self, temperature: float, known):
        self.temperature = temperature
        super().__init__(f"no tabulated BBR rate at {temperature} K (known: {sorted(known)})")

    def __str__(self):
        return self.args[0]


class ManifoldError(RydlatError):
    exit_code = 5


class ParseError(ManifoldError):
    def __init__(self, line: int, reason: str):
        self.line = line
        super().__init__(f"line {line}: {reason}")


class DuplicateLabel(ManifoldError):
    pass


class AsymmetricCoupling(ManifoldError):
    pass
