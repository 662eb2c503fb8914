"""
Exceptions raised by equiloc.

Everything derives from `EquilocError` so callers (the CLI in particular) can separate
problems with the mathematics of a scenario from genuine programming errors.
"""


class EquilocError(Exception):
    """Base class of every error raised by equiloc."""


class ChartMismatchError(EquilocError):
    """Two objects living on different coordinate charts were combined."""


class JetOrderError(EquilocError):
    """A derivative was requested beyond the order a jet still carries."""


class SingularMetricError(EquilocError):
    """The metric is singular (or not positive-definite) at an evaluation point."""


class OddDimensionError(EquilocError):
    """A Pfaffian-type construction was requested in odd dimension."""


class AsymmetryError(EquilocError, ValueError):
    """A matrix handed in as skew-symmetric is too far from being so."""


class OddRankError(EquilocError, ValueError):
    """A Pfaffian was requested of a matrix with odd size."""


class DegeneratePfaffianError(EquilocError):
    """The 0-form part of a localization denominator vanishes."""


class ZeroSetError(EquilocError):
    """A declared zero-set component failed numerical confirmation."""


class OddNormalRankError(ZeroSetError):
    """A zero-set component has a normal bundle of odd rank."""


class NormalDataError(ZeroSetError):
    """Normal-bundle data of a component violates skewness or tangency."""


class PreconditionError(EquilocError):
    """A verification was asked for on input that does not meet its hypotheses."""


class InapplicableCheckError(PreconditionError):
    """The check does not cover the scenario at all (Corollary 1 with a nonzero Y)."""


class ScenarioSchemaError(EquilocError):
    """A scenario file does not match the documented schema."""


class ScenarioValidationError(EquilocError):
    """A scenario failed a load-time check.

    Parameters
    ----------
    residual_name : `str`
        Name of the failing check (e.g. ``"killing_x"``).
    residual : `float`
        The offending residual value.
    message : `str`
        Human readable explanation.
    """

    def __init__(self, residual_name, residual, message):
        super().__init__(f"{message} ({residual_name} residual = {residual:.3e})")
        self.residual_name = residual_name
        self.residual = residual


class UnknownScenarioError(EquilocError):
    """Neither a shipped scenario id nor an existing file."""
