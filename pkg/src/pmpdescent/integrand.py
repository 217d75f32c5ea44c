"""Control cost integrands and their pointwise Hamiltonian minimizers.

The running cost g may take the value +inf; its effective domain encodes
hard constraints such as integrality.  The pointwise Hamiltonian for an
averaged adjoint value pbar is ``v -> v * pbar + g(v)``; its minimizer
over dom g is the candidate control value.

Whenever two domain values attain the same Hamiltonian, the one with the
smaller absolute value wins, then the smaller value.  Closed forms and
the brute-force oracle share this rule and the exact same floating-point
expression for the Hamiltonian, so they agree bitwise.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CostIntegrand",
    "IntegerQuadratic",
    "PureQuadratic",
    "InfeasibleControlError",
    "argmin_bruteforce",
    "feasible_values",
]


class InfeasibleControlError(ValueError):
    """A control value lies outside the effective domain of the integrand."""


class CostIntegrand(ABC):
    """Extended-real running cost on control values.

    Implementations are proper, bounded below, and have a compact
    effective domain; enumerable domains expose ``domain_values``.
    """

    domain_description: str = "unspecified"

    @abstractmethod
    def eval(self, v: float) -> float:
        """g(v); +inf outside the effective domain."""

    def eval_many(self, values: np.ndarray) -> np.ndarray:
        """Vectorized ``eval``; overridden where a closed form exists."""
        return np.array([self.eval(float(v)) for v in np.asarray(values)])

    def hamiltonian(self, v: float, pbar: float) -> float:
        return v * pbar + self.eval(v)

    @abstractmethod
    def hamiltonian_argmin(self, pbar: float) -> tuple[float, float]:
        """Minimize the pointwise Hamiltonian over dom g.

        Returns ``(v, m)``: the minimizer and the attained minimum.
        """

    def hamiltonian_argmin_many(self, pbar: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized ``hamiltonian_argmin`` with identical arithmetic."""
        pairs = [self.hamiltonian_argmin(float(p)) for p in np.asarray(pbar)]
        v = np.array([pair[0] for pair in pairs])
        m = np.array([pair[1] for pair in pairs])
        return v, m

    def domain_values(self) -> np.ndarray | None:
        """Full enumeration of dom g, ascending, or None when not enumerable."""
        return None


@dataclass(frozen=True)
class IntegerQuadratic(CostIntegrand):
    """g(v) = (alpha/2) v^2 on the integers in [-b, b], +inf elsewhere."""

    alpha: float
    b: int

    def __post_init__(self):
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")
        if self.b < 1 or int(self.b) != self.b:
            raise ValueError("b must be a positive integer")

    @property
    def domain_description(self) -> str:
        return f"integers in [-{self.b}, {self.b}]"

    def eval(self, v: float) -> float:
        v = float(v)
        if abs(v) <= self.b and v.is_integer():
            return 0.5 * self.alpha * v * v
        return math.inf

    def eval_many(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        feasible = (np.abs(values) <= self.b) & (values == np.floor(values))
        return np.where(feasible, 0.5 * self.alpha * values * values, np.inf)

    def hamiltonian_argmin(self, pbar: float) -> tuple[float, float]:
        # The real minimizer rounds -pbar/alpha; comparing the Hamiltonian
        # at both rounding candidates keeps ties exact in floating point.
        pbar = float(pbar)
        lo = math.floor(-pbar / self.alpha)
        c0 = float(min(max(lo, -self.b), self.b))
        c1 = float(min(max(lo + 1, -self.b), self.b))
        m0 = c0 * pbar + 0.5 * self.alpha * c0 * c0
        m1 = c1 * pbar + 0.5 * self.alpha * c1 * c1
        if (m1, abs(c1), c1) < (m0, abs(c0), c0):
            return c1, m1
        return c0, m0

    def hamiltonian_argmin_many(self, pbar: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        pbar = np.asarray(pbar, dtype=np.float64)
        lo = np.floor(-pbar / self.alpha)
        c0 = np.clip(lo, -self.b, self.b)
        c1 = np.clip(lo + 1.0, -self.b, self.b)
        m0 = c0 * pbar + 0.5 * self.alpha * c0 * c0
        m1 = c1 * pbar + 0.5 * self.alpha * c1 * c1
        take1 = (m1 < m0) | ((m1 == m0) & ((np.abs(c1) < np.abs(c0))
                 | ((np.abs(c1) == np.abs(c0)) & (c1 < c0))))
        return np.where(take1, c1, c0), np.where(take1, m1, m0)

    def domain_values(self) -> np.ndarray:
        return np.arange(-self.b, self.b + 1, dtype=np.float64)


@dataclass(frozen=True)
class PureQuadratic(CostIntegrand):
    """g(v) = (alpha/2) v^2 on the box [-b, b]; convex smoke-test instance."""

    alpha: float
    b: float

    def __post_init__(self):
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")
        if self.b <= 0.0:
            raise ValueError("b must be positive")

    @property
    def domain_description(self) -> str:
        return f"reals in [-{self.b}, {self.b}]"

    def eval(self, v: float) -> float:
        v = float(v)
        if abs(v) <= self.b:
            return 0.5 * self.alpha * v * v
        return math.inf

    def eval_many(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=np.float64)
        return np.where(np.abs(values) <= self.b,
                        0.5 * self.alpha * values * values, np.inf)

    def hamiltonian_argmin(self, pbar: float) -> tuple[float, float]:
        pbar = float(pbar)
        v = min(max(-pbar / self.alpha, -self.b), self.b)
        return v, v * pbar + 0.5 * self.alpha * v * v

    def hamiltonian_argmin_many(self, pbar: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        pbar = np.asarray(pbar, dtype=np.float64)
        v = np.clip(-pbar / self.alpha, -self.b, self.b)
        return v, v * pbar + 0.5 * self.alpha * v * v


def argmin_bruteforce(g: CostIntegrand, pbar: float,
                      grid: np.ndarray | None = None) -> tuple[float, float]:
    """Exhaustive Hamiltonian minimization; the reference oracle.

    Enumerates ``g.domain_values()`` (or the supplied grid) and applies
    the same tie rule as ``hamiltonian_argmin``: smallest Hamiltonian,
    then smallest absolute value, then smallest value.
    """
    values = np.asarray(grid, dtype=np.float64) if grid is not None else g.domain_values()
    if values is None:
        raise ValueError("integrand domain is not enumerable; supply a grid")
    m = values * pbar + g.eval_many(values)
    best = np.lexsort((values, np.abs(values), m))[0]
    return float(values[best]), float(m[best])


def feasible_values(g: CostIntegrand, values: np.ndarray) -> np.ndarray:
    """g evaluated per entry; raises InfeasibleControlError on any +inf."""
    out = g.eval_many(values)
    if not np.isfinite(out).all():
        bad = int(np.flatnonzero(~np.isfinite(out))[0])
        raise InfeasibleControlError(
            f"control value {np.asarray(values)[bad]!r} in cell {bad} "
            f"is outside dom g ({g.domain_description})")
    return out
