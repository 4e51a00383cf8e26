"""Exception hierarchy for tensor eigenpair computations."""
from typing import Tuple


class TensorEigError(Exception):
    """Base class for every error raised by tze_dynsys."""

    pass


class InvalidArgumentError(TensorEigError, ValueError):
    """Malformed input: wrong dimensions, zero vectors, bad selector strings."""

    pass


class TensorFormatError(InvalidArgumentError):
    """A tenz v1 or vector file could not be parsed."""

    pass


class InvalidInputError(InvalidArgumentError):
    """Input data violates the premise of a construction."""

    pass


class EigensolverError(TensorEigError):
    """The dense eigensolver failed to converge."""

    def __init__(self, shape: Tuple[int, ...], detail: str = ""):
        self.shape = tuple(shape)
        message = f"eigensolver failed on {self.shape[0]}x{self.shape[1]} matrix"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class DegeneracyError(TensorEigError):
    """The requested eigenvector is not well defined (e.g. mixed-sign Perron)."""

    pass


class NormalizationError(TensorEigError):
    """An iterate cannot be renormalized as requested."""

    pass


class DivergenceError(TensorEigError):
    """An iterate became non-finite, exploded, or collapsed to zero."""

    pass


class DegenerateIterateError(TensorEigError):
    """A power-method update vanished."""

    pass


class CorruptTensorError(TensorEigError):
    """A transition tensor column is not stochastic."""

    pass
