"""
Kernel Models

Scalar-layer data types: the fractional order, nonlinearities and the
minimum of their potential.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

ScalarMap = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FractionalOrder:
    """Order s of the fractional Laplacian with its derived constants"""

    s: float
    a: float
    ds: float

    def __post_init__(self):
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"s must lie in (0, 1), got {self.s}")
        if self.a != 1.0 - 2.0 * self.s:
            raise ValueError("weight exponent must equal 1 - 2s")

    @property
    def b(self) -> float:
        """Exponent 2s - 1 (the negated weight exponent)"""
        return -self.a


@dataclass(frozen=True)
class Nonlinearity:
    """
    Nonlinearity f with derivative and potential G(u) = int_u^1 f

    G is continued outside ``range_`` by its tangent line at the nearest
    endpoint; ``clipped`` evaluations are reported through ``clip_count``.
    """

    name: str
    f: ScalarMap
    fprime: ScalarMap
    G: ScalarMap
    range_: Tuple[float, float]
    regularity_tag: str = "C^{1,gamma}, gamma > max(0, 1-2s)"
    odd: bool = False
    parent: Optional[str] = field(default=None, compare=False)

    @property
    def u_min(self) -> float:
        return self.range_[0]

    @property
    def u_max(self) -> float:
        return self.range_[1]

    def clip(self, u: np.ndarray) -> Tuple[np.ndarray, int]:
        """Clip values to the range, returning the number of clipped entries"""
        u = np.asarray(u, dtype=float)
        clipped = np.clip(u, self.u_min, self.u_max)
        return clipped, int(np.count_nonzero(clipped != u))

    def potential(self, u: np.ndarray) -> Tuple[np.ndarray, int]:
        """G with the C^1 tangent continuation outside the range"""
        u = np.asarray(u, dtype=float)
        c, count = self.clip(u)
        values = np.asarray(self.G(c), dtype=float)
        if count:
            values = values - np.asarray(self.f(c), dtype=float) * (u - c)
        return values, count

    def force(self, u: np.ndarray) -> np.ndarray:
        """f evaluated at clipped values (the derivative of -potential)"""
        c, _ = self.clip(u)
        return np.asarray(self.f(c), dtype=float)

    def stiffness(self, u: np.ndarray) -> np.ndarray:
        """f' inside the range, zero where the tangent continuation is active"""
        u = np.asarray(u, dtype=float)
        c, _ = self.clip(u)
        values = np.asarray(self.fprime(c), dtype=float)
        return np.where(c == u, values, 0.0)

    def restrict(self, lo: float, hi: float) -> "Nonlinearity":
        """Same nonlinearity on the narrower range [lo, hi]"""
        if not lo <= hi:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return Nonlinearity(
            name=self.name,
            f=self.f,
            fprime=self.fprime,
            G=self.G,
            range_=(float(lo), float(hi)),
            regularity_tag=self.regularity_tag,
            odd=self.odd,
            parent=self.parent or self.name
        )


@dataclass(frozen=True)
class PotentialMin:
    """Minimum c_u of G over the range and its smallest minimizer tau"""

    c_u: float
    tau: float
