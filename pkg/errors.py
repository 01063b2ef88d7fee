from __future__ import annotations


class ToolkitError(Exception):
    """Root of every error raised by the toolkit."""


class InputError(ToolkitError, ValueError):
    """Invalid input or configuration (CLI exit code 2)."""


class CheckFailed(ToolkitError, RuntimeError):
    """A mathematical check failed (CLI exit code 1)."""


# ---------------------- input errors ----------------------

class ConfigError(InputError):
    pass


class NotADifferential(InputError):
    """A map handed over as a differential does not square to zero."""


class OrderViolation(InputError):
    """An OrderMap has an entry whose grade shift lies outside its declared order."""


class ZeroSection(InputError):
    pass


class OnSigma(InputError):
    pass


class InvalidParameter(InputError):
    pass


class NoSolution(InputError):
    pass


class NonTransverse(InputError):
    pass


class WidthTooLarge(InputError):
    pass


class TriplePoint(InputError):
    pass


class NonGeneric(InputError):
    """A PL vertex lies exactly on the curve it is counted against."""


# ---------------------- check failures ----------------------

class ExactnessViolation(CheckFailed):
    pass


class SpectralCollapseViolation(CheckFailed):
    pass


class ConditionsUnsatisfiable(CheckFailed):
    def __init__(self, condition: str, detail: str):
        super().__init__(f"condition {condition} cannot be met: {detail}")
        self.condition = condition
        self.detail = detail
