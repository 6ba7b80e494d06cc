"""Characteristic function and the boundary curve of the stable region.

The characteristic function is

    H(z) = z (1 - 1/z)^alpha + a z (1 - 1/z)^beta + 1 - b

and the boundary curve is the image of the unit circle with ``b = 0``:

    gamma(theta) = 2^alpha s^alpha e^{i phi_alpha} + a 2^beta s^beta e^{i phi_beta} + 1,
    s = sin(theta / 2),  phi_mu = mu pi / 2 + theta (1 - mu / 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterError
from .fracmath import principal_power
from .params import OrderPair, as_orders

TWO_PI = 2.0 * math.pi

# endpoint clustering stops here: 2*pi - theta must still be representable
_MIN_END_NODE = 8e-15


@dataclass(frozen=True)
class BoundaryCurve:
    """Sampled boundary curve with the parameter values of every node."""

    orders: OrderPair
    a: float
    thetas: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.asarray(self.thetas, dtype=float)
        p = np.asarray(self.points, dtype=complex)
        if t.shape != p.shape or t.ndim != 1 or len(t) < 2:
            raise ParameterError("thetas and points must be matching 1-d arrays")
        if t[0] != 0.0 or t[-1] != TWO_PI or np.any(np.diff(t) <= 0):
            raise ParameterError("thetas must increase strictly from 0 to 2*pi")
        t.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "thetas", t)
        object.__setattr__(self, "points", p)

    def __len__(self):
        return len(self.thetas)

    def evaluate(self, theta):
        return gamma_curve(theta, self.orders, self.a)

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        p = self.points
        return float(p.real.min()), float(p.real.max()), float(p.imag.min()), float(p.imag.max())

    @property
    def diagonal(self) -> float:
        x0, x1, y0, y1 = self.bbox
        return math.hypot(x1 - x0, y1 - y0)


def char_value(z: complex, orders, a: float, b: complex) -> complex:
    """Evaluate ``H(z)`` with principal-branch powers; ``H(1) = 1 - b``."""
    orders = as_orders(orders)
    z = complex(z)
    if z == 0:
        raise DomainError("characteristic function is undefined at z = 0")
    w = 1.0 - 1.0 / z
    return (z * principal_power(w, orders.alpha) + a * z * principal_power(w, orders.beta)
            + 1.0 - complex(b))


def _half_sine(theta):
    # sin(theta/2) folded about pi so that theta = 2*pi gives an exact 0
    folded = np.where(theta > math.pi, TWO_PI - theta, theta)
    return np.sin(0.5 * folded)


def _spow(s, mu):
    # s**mu for s >= 0 through exp(mu log s); anything below 1e-300 maps to 0
    s = np.asarray(s, dtype=float)
    tiny = s < 1e-300
    with np.errstate(divide="ignore"):
        out = np.exp(mu * np.log(np.where(tiny, 1.0, s)))
    return np.where(tiny, 0.0, out)


def gamma_curve(theta, orders, a: float):
    """Boundary curve ``gamma(theta)`` from the trigonometric closed form.

    Accepts a scalar or an array of parameters in ``[0, 2*pi]``.
    """
    orders = as_orders(orders)
    th = np.asarray(theta, dtype=float)
    if np.any(th < 0) or np.any(th > TWO_PI):
        raise ParameterError("theta must lie in [0, 2*pi]")
    s = _half_sine(th)
    out = 1.0 + 0j
    for mu, c in ((orders.alpha, 1.0), (orders.beta, a)):
        phase = mu * math.pi / 2.0 + th * (1.0 - mu / 2.0)
        out = out + c * (2.0 ** mu) * _spow(s, mu) * np.exp(1j * phase)
    if np.ndim(out) == 0:
        return complex(out)
    return out


def gamma_prime(theta, orders, a: float):
    """Analytic derivative of the boundary curve for ``theta`` in ``(0, 2*pi)``."""
    orders = as_orders(orders)
    th = np.asarray(theta, dtype=float)
    s = _half_sine(th)
    c2 = np.cos(0.5 * th)
    out = 0j
    for mu, c in ((orders.alpha, 1.0), (orders.beta, a)):
        phase = mu * math.pi / 2.0 + th * (1.0 - mu / 2.0)
        radial = 2.0 ** (mu - 1.0) * mu * c2 * _spow(s, mu - 1.0)
        angular = 2.0 ** mu * (1.0 - mu / 2.0) * _spow(s, mu)
        out = out + c * (radial + 1j * angular) * np.exp(1j * phase)
    if np.ndim(out) == 0:
        return complex(out)
    return out


def cusp_conditions(theta: float, orders, a: float) -> tuple[float, float]:
    """Real and imaginary parts of ``gamma'(theta)``; both vanish at a cusp.

    The two components are the cusp equations written out term by term:

        re = sum c_mu [2^(mu-1) mu cos(t/2) s^(mu-1) cos(phi_mu) - 2^mu (1 - mu/2) s^mu sin(phi_mu)]
        im = sum c_mu [2^mu (1 - mu/2) s^mu cos(phi_mu) + 2^(mu-1) mu cos(t/2) s^(mu-1) sin(phi_mu)]

    with ``c_alpha = 1``, ``c_beta = a`` and ``phi_mu = mu (pi - t) / 2 + t``.
    """
    orders = as_orders(orders)
    theta = float(theta)
    if not 0.0 < theta < TWO_PI:
        raise DomainError("cusp conditions are singular at theta = 0 and 2*pi")
    s = math.sin(0.5 * (TWO_PI - theta if theta > math.pi else theta))
    c2 = math.cos(0.5 * theta)
    re = im = 0.0
    for mu, c in ((orders.alpha, 1.0), (orders.beta, a)):
        phi = 0.5 * mu * (math.pi - theta) + theta
        radial = 2.0 ** (mu - 1.0) * mu * c2 * s ** (mu - 1.0)
        angular = 2.0 ** mu * (1.0 - mu / 2.0) * s ** mu
        re += c * (radial * math.cos(phi) - angular * math.sin(phi))
        im += c * (angular * math.cos(phi) + radial * math.sin(phi))
    return re, im


def _end_nodes(h: float) -> np.ndarray:
    # geometric nodes h/2, h/4, ... down to _MIN_END_NODE
    k = int(math.floor(math.log2(h / _MIN_END_NODE)))
    return h * 0.5 ** np.arange(1, k + 1)


def _turning(d: np.ndarray) -> np.ndarray:
    # turning angle at each interior vertex; zero-length chords count as no turn
    prev, nxt = d[:-1], d[1:]
    ok = (prev != 0) & (nxt != 0)
    ang = np.zeros(len(prev))
    ang[ok] = np.abs(np.angle(nxt[ok] / prev[ok]))
    return ang


def sample_boundary(orders, a: float, M: int = 4096, refine_near_cusps: bool = True,
                    max_depth: int = 20, max_turn: float = math.pi / 8,
                    chord_fraction: float = 1.0 / 64.0,
                    deviation_fraction: float = 1e-5) -> BoundaryCurve:
    """Sample the boundary curve on ``M + 1`` uniform nodes, optionally refined.

    With refinement on, geometric nodes are added towards ``theta = 0`` and
    ``2*pi`` (where ``gamma - 1`` behaves like ``theta**beta``), then every
    segment is bisected while any of these holds, for at most ``max_depth``
    rounds:

    * the turning angle at either end exceeds ``max_turn``;
    * the chord is longer than ``chord_fraction`` of the bounding-box diagonal;
    * the curve midpoint is further than ``deviation_fraction`` of the diagonal
      from the chord midpoint.
    """
    orders = as_orders(orders)
    if int(M) != M or M < 64:
        raise ParameterError(f"M must be an integer >= 64, got {M!r}")
    M = int(M)
    thetas = np.linspace(0.0, TWO_PI, M + 1)
    thetas[-1] = TWO_PI
    if refine_near_cusps:
        ends = _end_nodes(TWO_PI / M)
        thetas = np.unique(np.concatenate((thetas, ends, TWO_PI - ends)))
    points = gamma_curve(thetas, orders, a)
    if refine_near_cusps:
        thetas, points = _refine(thetas, points, orders, a, max_depth, max_turn,
                                 chord_fraction, deviation_fraction)
    return BoundaryCurve(orders, float(a), thetas, points)


def _refine(thetas, points, orders, a, max_depth, max_turn, chord_fraction, deviation_fraction):
    p = points
    diag = math.hypot(np.ptp(p.real), np.ptp(p.imag))
    # midpoints are cached per segment; only the children of split segments are new
    mids = 0.5 * (thetas[:-1] + thetas[1:])
    mid_pts = gamma_curve(mids, orders, a)
    for _ in range(max_depth):
        d = np.diff(points)
        chord = np.abs(d)
        splittable = (mids > thetas[:-1]) & (mids < thetas[1:])
        flag = chord > chord_fraction * diag
        flag |= np.abs(mid_pts - 0.5 * (points[:-1] + points[1:])) > deviation_fraction * diag
        sharp = _turning(d) > max_turn
        flag[:-1] |= sharp
        flag[1:] |= sharp
        flag &= splittable
        if not flag.any():
            break
        idx = np.flatnonzero(flag)
        left = 0.5 * (thetas[idx] + mids[idx])
        right = 0.5 * (mids[idx] + thetas[idx + 1])
        children = gamma_curve(np.concatenate((left, right)), orders, a)
        thetas = np.insert(thetas, idx + 1, mids[idx])
        points = np.insert(points, idx + 1, mid_pts[idx])
        # segment idx becomes (left child, right child)
        pos = idx + np.arange(len(idx))
        mids = np.insert(mids, idx + 1, right)
        mids[pos] = left
        mid_pts = np.insert(mid_pts, idx + 1, children[len(idx):])
        mid_pts[pos] = children[:len(idx)]
        diag = max(diag, math.hypot(np.ptp(points.real), np.ptp(points.imag)))
    return thetas, points
