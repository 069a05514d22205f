"""Exception hierarchy shared by every module."""


class NacifsError(Exception):
    """Base class for all package errors."""


class ConfigError(NacifsError, ValueError):
    """Malformed system document or invalid constructor arguments."""


class ValidationFailure(NacifsError):
    """A materialized generation violates BC, OSC or AC."""

    def __init__(self, generation, report):
        self.generation = generation
        self.report = report
        super().__init__(f"generation {generation} failed validation: {report.summary()}")


class InvalidWord(NacifsError, IndexError):
    pass


class InsufficientDepth(NacifsError):
    pass


class OutOfRange(NacifsError, KeyError):
    pass


class IncompatibleSystems(NacifsError):
    pass


class NonMeasure(NacifsError):
    pass


class DomainError(NacifsError, ValueError):
    pass


class EstimationError(NacifsError):
    """Base for Monte Carlo failures (CLI exit code 4)."""


class WalkerStalled(EstimationError):
    pass


class DegenerateFactor(EstimationError):
    pass


class PerturbationInfeasible(NacifsError):
    pass
