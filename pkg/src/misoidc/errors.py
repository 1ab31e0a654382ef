from __future__ import annotations
from typing import Optional


class MisoError(Exception):
    """Base class for all library errors."""


class DegenerateDirection(MisoError):
    """A vector (or projection) is numerically zero."""


class ParallelChannels(MisoError):
    """Two channel vectors are parallel, so a rank-two construction collapses."""


class DegenerateBalance(MisoError):
    """A balancing beamformer has no well-defined solution."""


class UnsupportedDimension(MisoError):
    pass


class RangeError(MisoError, ValueError):
    pass


class ParseError(MisoError):
    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
