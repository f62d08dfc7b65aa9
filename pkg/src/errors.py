"""
Exceptions raised by the wave-packet simulator
"""
from typing import Optional


class WellPacketError(Exception):
    """Base class for every simulator error"""


class ConfigurationError(WellPacketError, ValueError):
    """Invalid or contradictory run configuration"""

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        self.key = key
        self.line = line
        location = ""
        if key is not None:
            location = f"[{key}"
            if line is not None:
                location += f", line {line}"
            location += "] "
        super().__init__(f"{location}{message}")


class UnsupportedShapeError(ConfigurationError):
    """Shape not supported by the requested operation"""


class WindowError(ConfigurationError):
    """Fit window holds unusable samples"""


class DomainError(WellPacketError, ValueError):
    """Argument outside the mathematical domain of an operation"""


class NumericStateError(WellPacketError):
    """Wave function holds non-finite amplitudes"""

    def __init__(self, message: str, l: Optional[int] = None):
        self.l = l
        if l is not None:
            message = f"{message} (partial wave l={l})"
        super().__init__(message)


class LmaxInsufficientError(WellPacketError):
    """Partial-wave truncation loses more than the accepted norm fraction"""

    def __init__(self, residual: float, l_max: int):
        self.residual = residual
        self.l_max = l_max
        super().__init__(
            f"l_max={l_max} leaves a truncation residual of {residual:.3%} (limit 1%)"
        )


class NotConvergedError(WellPacketError):
    """Quadrature self-estimate did not settle"""


class RunFailedError(WellPacketError):
    """A pipeline run ended in the failed state"""

    def __init__(self, message: str, kind: str = "numeric"):
        self.kind = kind
        super().__init__(message)
