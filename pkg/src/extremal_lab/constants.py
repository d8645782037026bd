"""Golden-ratio constants attached to extremal numbers, as floats and enclosures."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .precision import RealInterval

SQRT5 = math.sqrt(5.0)
NU = (1 + SQRT5) / 2
GAMMA = (SQRT5 - 1) / 2
TAU = (3 + SQRT5) / 2
RHO = 2 + SQRT5


def sqrt5_interval(bits: int = 256) -> RealInterval:
    """Enclosure of sqrt(5) of width 2**-bits."""
    scale = 1 << (2 * bits)
    r = math.isqrt(5 * scale)
    return RealInterval(r, r + 1, -bits)


@dataclass(frozen=True)
class Constants:
    rho: RealInterval
    tau: RealInterval
    nu: RealInterval
    gamma: RealInterval

    @classmethod
    def build(cls, bits: int = 256) -> "Constants":
        s = sqrt5_interval(bits)
        half = Fraction(1, 2)
        return cls(
            rho=s + 2,
            tau=(s + 3) * half,
            nu=(s + 1) * half,
            gamma=(s - 1) * half,
        )
