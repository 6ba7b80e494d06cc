"""Bifurcation values of the coefficient ``a`` and the topology sweep.

Closed forms exist for three of the values: ``a1 = 0``, ``a2`` where a cusp
sits at ``theta = pi`` and ``a4`` where ``gamma(0) = gamma(pi)``. The value
``a3``, where a conjugate pair of cusps appears, needs the root ``theta*`` of a
transcendental equation. Everything else is found numerically by sweeping
``a`` and watching the :class:`TopologySignature`.
"""

from __future__ import annotations

import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from .charfun import TWO_PI, BoundaryCurve, cusp_conditions, gamma_curve, gamma_prime
from .errors import NoConvergenceError, NoRootError, ParameterError
from .numerics import bisect, newton2d, sign_change_brackets
from .params import OrderPair, as_orders
from .stability import boundary_for, count_enclosed_unstable, scan_region

log = logging.getLogger(__name__)

# the cusp at theta = 0 (b = 1) exists for every a
PERMANENT_CUSP = 0.0
CUSP_SCAN_NODES = 4096
CUSP_SCAN_LIMIT = 1e-3
# a polished minimum of |gamma'| below this counts as a cusp
CUSP_TOL = 1e-7
THETA_SUBINTERVALS = 2000


def closed_form_bifurcations(orders) -> tuple[float, float, float]:
    """``(a1, a2, a4)``: ``0``, ``-2^(alpha-beta) (alpha-2)/(beta-2)`` and ``-2^(alpha-beta)``."""
    alpha, beta = as_orders(orders)
    scale = 2.0 ** (alpha - beta)
    return 0.0, -scale * (alpha - 2.0) / (beta - 2.0), -scale


def theta_equation(theta: float, orders) -> float:
    """Left-hand side of the equation whose root in ``(0, pi)`` is ``theta*``."""
    al, be = as_orders(orders)
    d = al - be
    return ((-2.0 + al + be - al * be) * math.sin((math.pi - theta) * d / 2.0)
            + (be - 1.0) * math.sin((theta * (-2.0 + d) - math.pi * d) / 2.0)
            + (al - 1.0) * math.sin((theta * (2.0 + d) - math.pi * d) / 2.0))


def a3_formula(theta: float, orders) -> float:
    """Coefficient ``a`` at which ``gamma`` has a cusp at ``theta`` (given the root condition)."""
    al, be = as_orders(orders)
    num = (math.sin((-theta * (al - 3.0) + math.pi * al) / 2.0)
           + (al - 1.0) * math.sin((theta + math.pi * al - theta * al) / 2.0))
    den = (math.sin((-theta * (be - 3.0) + math.pi * be) / 2.0)
           + (be - 1.0) * math.sin((theta + math.pi * be - theta * be) / 2.0))
    return -(2.0 ** (al - be)) * math.sin(theta / 2.0) ** (al - be) * num / den


def _cusp_residual(theta: float, orders, a: float) -> float:
    re, im = cusp_conditions(theta, orders, a)
    return max(abs(re), abs(im))


class ThetaCandidate(NamedTuple):
    theta: float
    a3: float
    cusp_residual: float
    accepted: bool


def theta_star_candidates(orders) -> list[ThetaCandidate]:
    """Every root of :func:`theta_equation` on ``(1e-6, pi - 1e-6)`` with its ``a3``.

    Roots come from sign changes on 2000 equal subintervals, bisected to
    width 1e-12. A root is accepted when its ``a3`` lies in ``(a4, a2)`` and
    the cusp system vanishes there to 1e-8.
    """
    orders = as_orders(orders)
    _, a2, a4 = closed_form_bifurcations(orders)
    f = lambda t: theta_equation(t, orders)  # noqa: E731
    out = []
    for br in sign_change_brackets(f, 1e-6, math.pi - 1e-6, THETA_SUBINTERVALS):
        theta = bisect(f, br, tol=1e-12)
        a3 = a3_formula(theta, orders)
        res = _cusp_residual(theta, orders, a3)
        out.append(ThetaCandidate(theta, a3, res, a4 < a3 < a2 and res < 1e-8))
    return out


def _check_upper_orders(orders: OrderPair):
    if not 0.5 < orders.beta < orders.alpha < 1.0:
        raise ParameterError("theta* is defined for 0.5 < beta < alpha < 1")


def solve_theta_star(orders) -> float:
    """Root ``theta*`` in ``(0, pi)`` locating the conjugate cusp pair at ``a3``.

    Rejected extra roots are reported through :mod:`warnings`.
    """
    orders = as_orders(orders)
    _check_upper_orders(orders)
    cands = theta_star_candidates(orders)
    good = [c for c in cands if c.accepted]
    if not good:
        raise NoRootError(f"no admissible root of the theta equation for {orders}")
    rejected = [c for c in cands if c is not good[0]]
    if rejected:
        warnings.warn(f"theta equation has extra roots {[c.theta for c in rejected]}; "
                      f"kept {good[0].theta!r}", stacklevel=2)
    return good[0].theta


def a3_value(orders) -> float:
    """Third bifurcation value: the closed form evaluated at ``theta*``."""
    orders = as_orders(orders)
    theta = solve_theta_star(orders)
    a3 = a3_formula(theta, orders)
    res = _cusp_residual(theta, orders, a3)
    if not res < 1e-8:
        raise NoRootError(f"cusp system residual {res:.3e} at theta*={theta!r}")
    return a3


def find_cusps(orders, a: float, nodes: int = CUSP_SCAN_NODES, tol: float = CUSP_TOL) -> list[float]:
    """Interior cusps of ``gamma`` as sorted ``theta`` values in ``(0, 2*pi)``.

    ``|gamma'|`` is scanned on ``nodes`` uniform parameters; each local minimum
    below 1e-3 is polished by a bounded scalar minimization of ``|gamma'|^2``
    and kept if ``|gamma'|`` drops below ``tol`` there. The permanent cusp at
    ``theta = 0`` (``PERMANENT_CUSP``) is never part of the list.
    """
    orders = as_orders(orders)
    th = np.linspace(0.0, TWO_PI, nodes + 1)[1:-1]
    speed = np.abs(gamma_prime(th, orders, a))
    mid = speed[1:-1]
    idx = np.flatnonzero((mid <= speed[:-2]) & (mid <= speed[2:]) & (mid < CUSP_SCAN_LIMIT)) + 1
    found = []
    for k in idx:
        lo = th[k - 1]
        hi = th[k + 1]
        g = lambda t: abs(gamma_prime(t, orders, a)) ** 2  # noqa: E731
        res = minimize_scalar(g, bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
        cand = [float(res.x), float(th[k])]
        best = min(cand, key=lambda t: abs(gamma_prime(t, orders, a)))
        if abs(gamma_prime(best, orders, a)) < tol:
            found.append(best)
    found.sort()
    # plateaus can report the same cusp twice
    out = []
    for t in found:
        if not out or t - out[-1] > 1e-9:
            out.append(t)
    return out


class SelfIntersection(NamedTuple):
    theta1: float
    theta2: float
    point: complex
    refined: bool


def _orient(p, q, r):
    return np.sign((q - p).real * (r - p).imag - (q - p).imag * (r - p).real)


def _candidate_pairs(p0: np.ndarray, p1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # segment pairs (i < j) whose bounding boxes overlap, via a sort on x
    n = len(p0)
    xlo = np.minimum(p0.real, p1.real)
    xhi = np.maximum(p0.real, p1.real)
    ylo = np.minimum(p0.imag, p1.imag)
    yhi = np.maximum(p0.imag, p1.imag)
    order = np.argsort(xlo, kind="stable")
    sx = xlo[order]
    stop = np.searchsorted(sx, xhi[order], side="right")
    start = np.arange(n) + 1
    counts = np.maximum(stop - start, 0)
    ii = np.repeat(np.arange(n), counts)
    offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    jj = np.repeat(start, counts) + offs
    a, b = order[ii], order[jj]
    keep = (ylo[a] <= yhi[b]) & (ylo[b] <= yhi[a])
    a, b = a[keep], b[keep]
    return np.minimum(a, b), np.maximum(a, b)


def _polish_crossing(curve: BoundaryCurve, t1: float, t2: float, tol: float):
    def F(u, v):
        d = gamma_curve(min(max(u, 0.0), TWO_PI), curve.orders, curve.a) \
            - gamma_curve(min(max(v, 0.0), TWO_PI), curve.orders, curve.a)
        return d.real, d.imag

    return newton2d(F, (t1, t2), tol=tol)


def find_self_intersections(curve: BoundaryCurve, refine: bool = True,
                            tol: float = 1e-10) -> list[SelfIntersection]:
    """Transverse crossings of the sampled curve with itself.

    Non-adjacent polyline segments are tested pairwise (after a bounding-box
    sweep); the closing identification ``gamma(0) = gamma(2*pi)`` is not a
    crossing. With ``refine`` each crossing is polished by Newton's method on
    ``gamma(theta1) = gamma(theta2)`` to ``tol``; a crossing whose polish
    fails keeps its polyline estimate with ``refined=False``. Crossings whose
    parameters agree to 1e-7 after polishing are reported once.
    """
    if len(curve) < 256:
        raise ParameterError("self-intersection search needs at least 256 samples")
    p, t = curve.points, curve.thetas
    p0, p1 = p[:-1], p[1:]
    nseg = len(p0)
    i, j = _candidate_pairs(p0, p1)
    keep = (j - i > 1) & ~((i == 0) & (j == nseg - 1))
    i, j = i[keep], j[keep]
    hit = ((_orient(p0[i], p1[i], p0[j]) * _orient(p0[i], p1[i], p1[j]) < 0)
           & (_orient(p0[j], p1[j], p0[i]) * _orient(p0[j], p1[j], p1[i]) < 0))
    i, j = i[hit], j[hit]
    out = []
    for si, sj in zip(i, j):
        d1, d2 = p1[si] - p0[si], p1[sj] - p0[sj]
        den = d1.real * d2.imag - d1.imag * d2.real
        r = p0[sj] - p0[si]
        u = (r.real * d2.imag - r.imag * d2.real) / den
        v = (r.real * d1.imag - r.imag * d1.real) / den
        t1 = t[si] + u * (t[si + 1] - t[si])
        t2 = t[sj] + v * (t[sj + 1] - t[sj])
        point = complex(p0[si] + u * d1)
        refined = False
        if refine:
            try:
                u1, u2 = _polish_crossing(curve, t1, t2, tol)
                if 0.0 <= u1 <= TWO_PI and 0.0 <= u2 <= TWO_PI:
                    t1, t2 = u1, u2
                    point = complex(gamma_curve(t1, curve.orders, curve.a))
                    refined = True
            except NoConvergenceError:
                pass
            if not refined:
                log.debug("crossing near theta=(%r, %r) kept unrefined", t1, t2)
        out.append(SelfIntersection(float(t1), float(t2), point, refined))
    return _dedupe(out)


def _dedupe(crossings: list[SelfIntersection], tol: float = 1e-7) -> list[SelfIntersection]:
    # near-tangent branches cut the polyline several times around one true crossing
    crossings = sorted(crossings, key=lambda s: (not s.refined, s.theta1, s.theta2))
    kept: list[SelfIntersection] = []
    for c in crossings:
        if not any(abs(c.theta1 - k.theta1) + abs(c.theta2 - k.theta2) < tol for k in kept):
            kept.append(c)
    kept.sort(key=lambda s: (s.theta1, s.theta2))
    return kept


@dataclass(frozen=True)
class TopologySignature:
    n_self_intersections: int
    n_cusps: int
    n_stable_components: int
    n_unstable_subregions: int

    def __post_init__(self):
        for k, v in asdict(self).items():
            if int(v) != v or v < 0:
                raise ParameterError(f"{k} must be a non-negative integer, got {v!r}")

    def as_dict(self) -> dict:
        return asdict(self)


def topology_signature(orders, a: float, grid: tuple[int, int] = (400, 400),
                       M: int = 4096) -> TopologySignature:
    """Crossing, cusp, stable-component and enclosed-unstable counts at ``a``."""
    orders = as_orders(orders)
    a = float(a)
    if a == -1.0:
        raise ParameterError("topology signature is not defined at a = -1")
    curve = boundary_for(orders, a, M)
    report = scan_region(orders, a, grid=grid, curve=curve)
    return TopologySignature(
        n_self_intersections=len(find_self_intersections(curve)),
        n_cusps=len(find_cusps(orders, a)),
        n_stable_components=report.components,
        n_unstable_subregions=count_enclosed_unstable(report),
    )


class Event(NamedTuple):
    a: float
    before: TopologySignature
    after: TopologySignature

    def as_dict(self) -> dict:
        return {"a": self.a, "before": self.before.as_dict(), "after": self.after.as_dict()}


@dataclass(frozen=True)
class BifurcationSet:
    orders: OrderPair
    a1: float
    a2: float
    a4: float
    a3: float | None = None
    theta_star: float | None = None
    events: tuple[Event, ...] = field(default=(), repr=False)
    sweep_range: tuple[float, float] | None = None


def bifurcation_set(orders, events=(), sweep_range=None) -> BifurcationSet:
    """Closed forms plus ``a3`` and ``theta*`` where they are defined."""
    orders = as_orders(orders)
    a1, a2, a4 = closed_form_bifurcations(orders)
    a3 = theta = None
    if 0.5 < orders.beta < orders.alpha < 1.0:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                theta = solve_theta_star(orders)
            a3 = a3_formula(theta, orders)
        except NoRootError:
            log.info("no admissible theta* for %s", orders)
    return BifurcationSet(orders, a1, a2, a4, a3, theta, tuple(events), sweep_range)


def worker_count() -> int:
    """Worker processes for signature evaluation; ``FRACSTAB_THREADS=0`` means all cores."""
    raw = os.environ.get("FRACSTAB_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ParameterError(f"FRACSTAB_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ParameterError("FRACSTAB_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def _signature_job(args):
    orders, a, grid, M = args
    return topology_signature(orders, a, grid=grid, M=M)


def _sweep_grid(a_from: float, a_to: float, step: float) -> np.ndarray:
    n = int(math.floor((a_from - a_to) / step + 1e-9))
    values = a_from - step * np.arange(n + 1)
    if values[-1] > a_to:
        values = np.append(values, a_to)
    return values[values != -1.0]


def sweep_bifurcations(orders, a_from: float, a_to: float, step: float = 1e-3,
                       refine_tol: float = 1e-6, grid: tuple[int, int] = (200, 200),
                       M: int = 4096, workers: int | None = None) -> BifurcationSet:
    """Sweep ``a`` downwards from ``a_from`` to ``a_to`` and locate signature changes.

    Signatures are evaluated on the grid ``a_from, a_from - step, ...`` (the
    singular value ``a = -1`` is skipped). Every adjacent pair with different
    signatures is bisected until the bracket is narrower than ``refine_tol``;
    a bracket whose midpoint matches neither side holds several events and is
    split. Events are ordered by decreasing ``a``. Events closer together than
    ``step`` are only separated if refinement happens to land between them,
    so use a step of 1e-4 where values crowd.
    """
    orders = as_orders(orders)
    a_from, a_to, step = float(a_from), float(a_to), float(step)
    if not a_from > a_to:
        raise ParameterError("sweep runs downwards: need a_from > a_to")
    if not step > 0 or not refine_tol > 0:
        raise ParameterError("step and refine_tol must be positive")
    values = _sweep_grid(a_from, a_to, step)
    jobs = [(orders, float(a), grid, M) for a in values]
    workers = worker_count() if workers is None else int(workers)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            sigs = list(pool.map(_signature_job, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    else:
        sigs = [_signature_job(j) for j in jobs]

    def sig(a):
        return topology_signature(orders, a, grid=grid, M=M)

    events = []
    for k in range(len(values) - 1):
        if sigs[k] != sigs[k + 1]:
            events.extend(_refine_event(sig, values[k], sigs[k], values[k + 1], sigs[k + 1],
                                        refine_tol))
    return bifurcation_set(orders, events, (a_from, a_to))


def _refine_event(sig, hi, s_hi, lo, s_lo, tol, depth=0):
    # bisection on a in [lo, hi]; sig(hi) = s_hi != s_lo = sig(lo)
    while hi - lo >= tol:
        mid = 0.5 * (hi + lo)
        if mid == -1.0:
            mid = math.nextafter(mid, hi)
        s_mid = sig(mid)
        if s_mid == s_hi:
            hi = mid
        elif s_mid == s_lo:
            lo = mid
        else:
            if depth > 40:
                break
            return (_refine_event(sig, hi, s_hi, mid, s_mid, tol, depth + 1)
                    + _refine_event(sig, mid, s_mid, lo, s_lo, tol, depth + 1))
    return [Event(0.5 * (hi + lo), s_hi, s_lo)]
