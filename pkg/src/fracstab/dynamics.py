"""Simulation of the initial value problem and an independent operator oracle.

The equation is

    D^alpha x(t) + a D^beta x(t + alpha - beta) = (b - 1) x(t + alpha - 1),   x(0) = x0,

with Caputo-like differences D^mu. Everything lives on the integer grid
``n`` obtained by the substitution ``t = n - alpha``.

Two independent routes exist. :func:`simulate` runs the explicit memory
recurrence built from :func:`fracstab.fracmath.gamma_ratio_weights`.
:func:`residual` plugs a trajectory back into the operator equation, with the
operators assembled from fractional sums (binomial kernels), so the two share
no code beyond the order parameters.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, RangeError
from .fracmath import binomial_phi_sequence, gamma_ratio_weights
from .params import OrderPair, SystemParams

__all__ = [
    "OrderPair", "SystemParams", "Trajectory", "Verdict", "simulate", "fractional_sum",
    "caputo_difference", "residual", "classify_trajectory",
]

# beyond this magnitude the run is treated as blown up and the remainder is inf
_OVERFLOW = 1e250


class Verdict(str, enum.Enum):
    CONVERGING = "converging"
    DIVERGING = "diverging"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Trajectory:
    params: SystemParams
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 1 or len(v) < 1:
            raise ParameterError("a trajectory needs at least one value")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def N(self) -> int:
        return len(self.values) - 1

    def __len__(self):
        return len(self.values)


def simulate(params: SystemParams, N: int) -> Trajectory:
    """Run the sequence representation for ``n = 1..N``.

    x(n) = [(alpha + a beta + b - 1) x(n-1)
            + sum_{s=0}^{n-2} (alpha w^alpha_{n-s} + a beta w^beta_{n-s}) x(s)] / (a + 1)

    O(N^2) time and O(N) memory. If ``|x(n)|`` passes 1e250 the remaining
    entries are set to ``inf`` instead of overflowing into NaN.
    """
    if not isinstance(params, SystemParams):
        raise ParameterError("simulate needs SystemParams")
    if int(N) != N or N < 1:
        raise ParameterError(f"N must be a positive integer, got {N!r}")
    N = int(N)
    alpha, beta, a, b = params.alpha, params.beta, params.a, params.b

    n_max = max(N, 2)
    memory = alpha * gamma_ratio_weights(alpha, n_max).padded()
    memory += a * beta * gamma_ratio_weights(beta, n_max).padded()
    # reversed so that a contiguous slice lines up with x[0..n-2]
    rev = memory[::-1].copy()
    lead = alpha + a * beta + b - 1.0
    inv = 1.0 / (a + 1.0)

    x = np.empty(N + 1, dtype=complex)
    x[0] = params.x0
    for n in range(1, N + 1):
        acc = lead * x[n - 1]
        if n >= 2:
            # rev[n_max - n : n_max - 1] == memory[n], ..., memory[2]
            acc += np.dot(rev[n_max - n:n_max - 1], x[:n - 1])
        x[n] = acc * inv
        if not abs(x[n]) < _OVERFLOW:
            x[n:] = complex(np.inf, np.inf)
            break
    return Trajectory(params, x)


def _kernel_sum(x: np.ndarray, nu: float, n: int) -> complex:
    # sum_{s=0}^{n-1} phi_nu(n-1-s) x(s); nu = 0 is the identity kernel
    if n == 0:
        return 0j
    phi = binomial_phi_sequence(nu, n - 1)
    return complex(np.dot(phi[::-1], x[:n]))


def fractional_sum(x, beta: float, n: int) -> complex:
    """Fractional sum of order ``beta`` on the integer grid.

    Returns ``(D^-beta x)(t)`` at ``t = n + beta - 1``, which is
    ``sum_{s=0}^{n-1} Gamma(n-1-s+beta) / (Gamma(beta) (n-1-s)!) x(s)``.
    For ``beta = 1`` this is the cumulative sum ``x(0) + ... + x(n-1)``.
    """
    x = np.asarray(x, dtype=complex)
    if not beta > 0:
        raise ParameterError(f"fractional sum order must be positive, got {beta!r}")
    if int(n) != n or not 0 <= n <= len(x):
        raise RangeError(f"index {n} outside 0..{len(x)}")
    return _kernel_sum(x, float(beta), int(n))


def caputo_difference(x, mu: float, n: int) -> complex:
    """Caputo-like difference ``D^mu x = D^-(1-mu) (Delta x)`` on the integer grid.

    Index ``n`` refers to ``t = n + 1 - mu`` so the value is
    ``sum_{s=0}^{n} phi_{1-mu}(n-s) (x(s+1) - x(s))``; ``mu = 1`` gives
    ``x(n+1) - x(n)``. Needs ``x(0..n+1)``.
    """
    x = np.asarray(x, dtype=complex)
    if not 0.0 < mu <= 1.0:
        raise ParameterError(f"mu must lie in (0, 1], got {mu!r}")
    if int(n) != n or not 0 <= n <= len(x) - 2:
        raise RangeError(f"index {n} outside 0..{len(x) - 2}")
    return _kernel_sum(np.diff(x), 1.0 - mu, int(n) + 1)


def _caputo_all(x: np.ndarray, mu: float) -> np.ndarray:
    # caputo_difference(x, mu, m) for every m = 0..len(x)-2 at once
    dx = np.diff(x)
    phi = binomial_phi_sequence(1.0 - mu, len(dx) - 1)
    return np.convolve(phi, dx)[:len(dx)]


def residual(traj: Trajectory) -> float:
    """Largest violation of the operator equation along ``traj``.

    At grid index ``m`` (``t = m + 1 - alpha``) the equation reads

        C_alpha(m) + a C_beta(m) + [phi_{1-alpha}(m+1) + a phi_{1-beta}(m+1)] x(0) = (b-1) x(m)

    where ``C_mu`` is :func:`caputo_difference`. The bracketed start term is
    what separates the difference of the fractional sum, the operator the
    sequence representation is derived from, from the Caputo ordering; it is
    exactly ``Delta (D^-(1-mu) x) - D^-(1-mu) (Delta x)``.
    """
    p = traj.params
    x = np.asarray(traj.values, dtype=complex)
    if len(x) < 3:
        raise ParameterError("residual needs a trajectory of length >= 3")
    if not np.all(np.isfinite(x)):
        return float("inf")
    m = len(x) - 1
    lhs = _caputo_all(x, p.alpha) + p.a * _caputo_all(x, p.beta)
    start = binomial_phi_sequence(1.0 - p.alpha, m)[1:] + p.a * binomial_phi_sequence(1.0 - p.beta, m)[1:]
    lhs = lhs + start * x[0]
    rhs = (p.b - 1.0) * x[:m]
    return float(np.max(np.abs(lhs - rhs)))


def classify_trajectory(traj: Trajectory, div_factor: float = 1e6,
                        conv_ratio: float = 1.0) -> Verdict:
    """Numerical proxy for asymptotic stability of the zero solution.

    diverging if ``max |x| > div_factor |x0|``; converging if the maximum over
    the last 10% of indices is below ``conv_ratio`` times the maximum over
    indices ``1..N/10`` and also below ``|x0|``; otherwise inconclusive.
    """
    x = np.abs(np.asarray(traj.values))
    N = len(x) - 1
    if N < 100:
        raise ParameterError(f"classification needs N >= 100, got {N}")
    if not np.all(np.isfinite(x)):
        return Verdict.DIVERGING
    peak = x.max()
    if peak == 0.0:
        return Verdict.CONVERGING
    x0 = x[0]
    if peak > div_factor * x0:
        return Verdict.DIVERGING
    k = max(1, N // 10)
    head = x[1:k + 1].max()
    tail = x[-k:].max()
    if tail < conv_ratio * head and tail < x0:
        return Verdict.CONVERGING
    return Verdict.INCONCLUSIVE
