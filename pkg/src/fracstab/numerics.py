"""Bracketing, bisection and damped Newton iteration."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NoConvergenceError, ParameterError


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ParameterError(f"bracket needs lo < hi, got ({self.lo}, {self.hi})")
        if not (self.f_lo < 0 < self.f_hi or self.f_hi < 0 < self.f_lo):
            raise ParameterError("bracket endpoints must have function values of opposite sign")

    @classmethod
    def from_function(cls, f: Callable[[float], float], lo: float, hi: float) -> "Bracket":
        return cls(lo, hi, f(lo), f(hi))


def bisect(f: Callable[[float], float], bracket: Bracket, tol: float = 1e-12,
           max_iter: int = 200) -> float:
    """Shrink ``bracket`` until its width is below ``tol``; return the midpoint.

    An exact zero at a probe point is returned immediately.
    """
    if not isinstance(bracket, Bracket):
        raise ParameterError("bisect needs a Bracket")
    lo, hi, f_lo = bracket.lo, bracket.hi, bracket.f_lo
    for _ in range(max_iter):
        if hi - lo < tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = f(mid)
        if f_mid == 0:
            return mid
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sign_change_brackets(f: Callable[[float], float], lo: float, hi: float,
                         n: int) -> list[Bracket]:
    """Scan ``[lo, hi]`` on ``n`` equal subintervals and return every strict sign change."""
    xs = np.linspace(lo, hi, n + 1)
    fs = np.array([f(x) for x in xs])
    idx = np.flatnonzero(fs[:-1] * fs[1:] < 0)
    return [Bracket(xs[i], xs[i + 1], fs[i], fs[i + 1]) for i in idx]


def _jacobian(F, x, y, h):
    fxp = np.asarray(F(x + h, y), dtype=float)
    fxm = np.asarray(F(x - h, y), dtype=float)
    fyp = np.asarray(F(x, y + h), dtype=float)
    fym = np.asarray(F(x, y - h), dtype=float)
    return np.column_stack(((fxp - fxm) / (2 * h), (fyp - fym) / (2 * h)))


def newton2d(F: Callable[[float, float], Sequence[float]], start: tuple[float, float],
             tol: float = 1e-10, max_iter: int = 100, max_halvings: int = 30,
             jac_step: float = 1e-7) -> tuple[float, float]:
    """Solve ``F(x, y) = 0`` by Newton's method with a central-difference Jacobian.

    Each step is halved (up to ``max_halvings`` times) until the residual norm
    decreases. Raises NoConvergenceError on a singular Jacobian or when
    ``max_iter`` is exhausted; on success ``|F| < tol`` at the returned point.
    """
    x, y = float(start[0]), float(start[1])
    f = np.asarray(F(x, y), dtype=float)
    norm = math.hypot(f[0], f[1])
    for _ in range(max_iter):
        if norm < tol:
            return x, y
        J = _jacobian(F, x, y, jac_step)
        det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        scale = np.abs(J).max()
        if not np.isfinite(det) or scale == 0 or abs(det) < 1e-14 * scale * scale:
            raise NoConvergenceError(f"singular Jacobian at ({x!r}, {y!r})")
        dx, dy = np.linalg.solve(J, -f)
        step = 1.0
        for _ in range(max_halvings + 1):
            xn, yn = x + step * dx, y + step * dy
            fn = np.asarray(F(xn, yn), dtype=float)
            nn = math.hypot(fn[0], fn[1])
            if np.isfinite(nn) and nn < norm:
                break
            step *= 0.5
        else:
            raise NoConvergenceError(f"no residual decrease from ({x!r}, {y!r}), |F|={norm:.3e}")
        x, y, f, norm = xn, yn, fn, nn
    if norm < tol:
        return x, y
    raise NoConvergenceError(f"iteration cap reached, |F|={norm:.3e}")


def newton1d(f: Callable[[float], float], df: Callable[[float], float], x0: float,
             tol: float = 1e-12, max_iter: int = 60,
             bounds: tuple[float, float] | None = None) -> float:
    """Plain Newton iteration on a scalar equation, clipped to ``bounds`` if given."""
    x = float(x0)
    for _ in range(max_iter):
        d = df(x)
        if d == 0 or not math.isfinite(d):
            raise NoConvergenceError(f"zero derivative at {x!r}")
        step = f(x) / d
        xn = x - step
        if bounds is not None:
            xn = min(max(xn, bounds[0]), bounds[1])
        if abs(xn - x) <= tol * max(1.0, abs(x)):
            return xn
        x = xn
    raise NoConvergenceError(f"newton1d did not converge from {x0!r}")
