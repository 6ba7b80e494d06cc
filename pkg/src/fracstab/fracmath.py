"""Special-function kernels: gamma-ratio weights, binomial family, complex powers.

Everything here is built from multiplicative recurrences so that very long
sequences never touch ``math.gamma`` at large arguments.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterError, RangeError


@dataclass(frozen=True)
class WeightSequence:
    """Memory weights ``w_k = Gamma(k - mu) / (Gamma(1 - mu) k!)`` for ``k = 2..n_max``."""

    mu: float
    weights: np.ndarray = field(repr=False)

    @property
    def n_max(self) -> int:
        return len(self.weights) + 1

    def __getitem__(self, k: int) -> float:
        if not 2 <= k <= self.n_max:
            raise RangeError(f"weight index {k} outside 2..{self.n_max}")
        return float(self.weights[k - 2])

    def padded(self) -> np.ndarray:
        """Array indexed directly by ``k`` (entries 0 and 1 are zero)."""
        out = np.zeros(self.n_max + 1)
        out[2:] = self.weights
        return out


def gamma_ratio_weights(mu: float, n_max: int) -> WeightSequence:
    """Return the memory weights of order ``mu`` up to index ``n_max``.

    Seeded at ``w_2 = (1 - mu) / 2`` and advanced with
    ``w_{k+1} = w_k (k - mu) / (k + 1)``.
    """
    if not 0.0 < mu <= 1.0:
        raise ParameterError(f"mu must lie in (0, 1], got {mu!r}")
    if int(n_max) != n_max or n_max < 2:
        raise ParameterError(f"n_max must be an integer >= 2, got {n_max!r}")
    n_max = int(n_max)
    w = np.zeros(n_max - 1)
    if mu < 1.0:
        k = np.arange(2, n_max, dtype=float)
        factors = np.empty(n_max - 1)
        factors[0] = (1.0 - mu) / 2.0
        factors[1:] = (k - mu) / (k + 1.0)
        # cumprod applies the same multiplications in the same order as the loop
        w = np.cumprod(factors)
    w.setflags(write=False)
    return WeightSequence(mu=float(mu), weights=w)


def binomial_phi(alpha: float, n: int) -> float:
    """``Gamma(n + alpha) / (Gamma(alpha) Gamma(n + 1))`` via the product recurrence."""
    if not alpha > 0:
        raise ParameterError(f"alpha must be positive, got {alpha!r}")
    if int(n) != n or n < 0:
        raise ParameterError(f"n must be a nonnegative integer, got {n!r}")
    value = 1.0
    for j in range(1, int(n) + 1):
        value *= (j - 1 + alpha) / j
    return value


def binomial_phi_sequence(alpha: float, n_max: int) -> np.ndarray:
    """Values ``phi_alpha(0..n_max)``. ``alpha = 0`` gives the unit impulse."""
    if alpha < 0:
        raise ParameterError(f"alpha must be nonnegative, got {alpha!r}")
    if n_max < 0:
        raise ParameterError(f"n_max must be nonnegative, got {n_max!r}")
    j = np.arange(1, n_max + 1, dtype=float)
    return np.concatenate(([1.0], np.cumprod((j - 1.0 + alpha) / j)))


def principal_power(w: complex, mu: float) -> complex:
    """``w**mu`` on the principal branch, argument in (-pi, pi]."""
    w = complex(w)
    if w == 0:
        if mu > 0:
            return 0j
        raise DomainError(f"0 ** {mu} is undefined")
    re, im = w.real, w.imag
    if im == 0.0 and re < 0.0:
        # atan2(-0.0, -x) is -pi; the convention here is +pi
        arg = math.pi
    else:
        # cmath.phase overflows on subnormal imaginary parts, atan2 does not
        arg = math.atan2(im, re)
    return cmath.exp(mu * complex(math.log(abs(w)), arg))


def gamma_direct(x: float) -> float:
    """Real gamma restricted to (0, 30); larger arguments must use recurrences."""
    if not 0.0 < x < 30.0:
        raise ParameterError(f"direct gamma evaluation only allowed on (0, 30), got {x!r}")
    return math.gamma(x)
