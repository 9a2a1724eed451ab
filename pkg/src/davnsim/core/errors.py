"""
Exception hierarchy for the simulator.

Model-domain errors (bad parameters, unstable queues, degenerate geometry,
unusable links) map to exit code 2 in the CLI; input errors (configuration,
trace files) map to exit code 1.
"""

from typing import Optional


class DavnError(Exception):
    """Base class for every error raised by davnsim."""


class ModelDomainError(DavnError, ValueError):
    """The model was asked to evaluate outside its domain."""


class InvalidParameterError(ModelDomainError):
    pass


class UnstableQueueError(ModelDomainError):
    """Occupation rates do not leave the server stable (rho >= 1)."""

    def __init__(self, rho_high: float, rho_low: float):
        self.rho_high = rho_high
        self.rho_low = rho_low
        super().__init__(
            f"unstable queue: rho_1={rho_high:.6g}, rho_2={rho_low:.6g}, "
            f"rho={rho_high + rho_low:.6g} >= 1"
        )


class DegenerateGeometryError(ModelDomainError):
    pass


class ZeroCapacityError(ModelDomainError):
    """Link capacity is zero, the link cannot carry the message."""


class InputError(DavnError):
    """Invalid user-supplied input (configuration or data files)."""


class ConfigError(InputError):
    pass


class TraceIngestionError(InputError):
    """A vehicle trace file failed validation."""

    def __init__(self, offense: str, line: Optional[int] = None, path: Optional[str] = None):
        self.offense = offense
        self.line = line
        self.path = path
        where = path or "<trace>"
        if line is not None:
            where = f"{where}:{line}"
        super().__init__(f"{where}: {offense}")
