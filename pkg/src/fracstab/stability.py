"""Stability of the zero solution as a function of the multiplier ``b``.

The characteristic function ``H`` is analytic outside the closed unit disk
and behaves like ``(1 + a) z`` at infinity, i.e. it has one simple pole
there. By the argument principle the number of characteristic roots with
``|z| > 1`` equals ``1 - W`` where ``W`` is the winding number of the
boundary curve around ``b``. So ``b`` is stable exactly when ``W = 1``.
A positively oriented loop around ``b`` gives stability, a negatively
oriented one or none at all gives instability.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.spatial import cKDTree
from scipy.sparse.csgraph import connected_components

from .charfun import BoundaryCurve, gamma_curve, sample_boundary
from .errors import MarginalProximity, NumericFailure, ParameterError
from .params import OrderPair, as_orders, check_coefficient

MARGINAL_FRACTION = 1e-6
FOUR_CONNECTED = ndimage.generate_binary_structure(2, 1)


class Stability(str, enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"

    @property
    def code(self) -> str:
        return {"stable": "S", "unstable": "U", "marginal": "M"}[self.value]


def marginal_band(curve: BoundaryCurve) -> float:
    return MARGINAL_FRACTION * curve.diagonal


def _segment_distance(p0, p1, b):
    d = p1 - p0
    L2 = d.real ** 2 + d.imag ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        t = ((b - p0) * np.conj(d)).real / L2
    t = np.where(L2 > 0, np.clip(t, 0.0, 1.0), 0.0)
    return np.abs(p0 + t * d - b)


def polyline_distance(curve: BoundaryCurve, b: complex) -> float:
    """Distance from ``b`` to the sampled polyline."""
    p = curve.points
    return float(_segment_distance(p[:-1], p[1:], complex(b)).min())


def accumulated_argument(curve: BoundaryCurve, b: complex, band: float | None = None,
                         max_depth: int = 48) -> float:
    """Total change of ``arg(gamma(theta) - b)`` over ``theta`` in ``[0, 2*pi]``.

    Segments are bisected on the true curve whenever the argument increment
    exceeds pi/2 or the chord is longer than the distance from ``b`` to the
    segment. Raises MarginalProximity if ``b`` comes within ``band`` of the
    curve (default: 1e-6 times the bounding-box diagonal).
    """
    b = complex(b)
    if band is None:
        band = marginal_band(curve)
    t0, t1 = curve.thetas[:-1], curve.thetas[1:]
    p0, p1 = curve.points[:-1], curve.points[1:]
    total = 0.0
    for _ in range(max_depth + 1):
        dist = _segment_distance(p0, p1, b)
        near = dist.min() if len(dist) else np.inf
        if near <= band:
            raise MarginalProximity(float(near), band)
        inc = np.angle((p1 - b) / (p0 - b))
        tm = 0.5 * (t0 + t1)
        splittable = (tm > t0) & (tm < t1)
        bad = ((np.abs(inc) > math.pi / 2) | (np.abs(p1 - p0) > dist)) & splittable
        total += float(inc[~bad].sum())
        if not bad.any():
            return total
        t0, t1, p0, p1, tm = t0[bad], t1[bad], p0[bad], p1[bad], tm[bad]
        pm = gamma_curve(tm, curve.orders, curve.a)
        t0, t1 = np.concatenate((t0, tm)), np.concatenate((tm, t1))
        p0, p1 = np.concatenate((p0, pm)), np.concatenate((pm, p1))
    # depth exhausted: the remaining segments are accepted as they are
    inc = np.angle((p1 - b) / (p0 - b))
    if np.any(np.abs(inc) >= math.pi):
        raise NumericFailure("winding increment ambiguous after maximal refinement")
    return total + float(inc.sum())


def winding_number(curve: BoundaryCurve, b: complex, band: float | None = None) -> int:
    """Integer winding number of the boundary curve around ``b``."""
    total = accumulated_argument(curve, b, band)
    w = total / (2.0 * math.pi)
    r = round(w)
    if abs(w - r) > 1e-6:
        raise NumericFailure(f"winding sum {w!r} is not close to an integer")
    return int(r)


@functools.lru_cache(maxsize=64)
def _cached_curve(alpha: float, beta: float, a: float, M: int, refine: bool) -> BoundaryCurve:
    return sample_boundary(OrderPair(alpha, beta), a, M, refine)


def boundary_for(orders, a: float, M: int = 4096, refine: bool = True) -> BoundaryCurve:
    """Sampled curve, memoized on its parameters (curves are immutable)."""
    orders = as_orders(orders)
    return _cached_curve(orders.alpha, orders.beta, float(a), int(M), bool(refine))


def classify_on_curve(curve: BoundaryCurve, b: complex) -> tuple[Stability, int | None]:
    try:
        w = winding_number(curve, b)
    except MarginalProximity:
        return Stability.MARGINAL, None
    return (Stability.STABLE if w == 1 else Stability.UNSTABLE), w


def classify_point(orders, a: float, b: complex, M: int = 4096) -> Stability:
    """Stable iff the boundary curve winds exactly once around ``b``."""
    a = check_coefficient(a)
    return classify_on_curve(boundary_for(orders, a, M), b)[0]


class RealInterval(NamedTuple):
    b_lo: float
    b_hi: float
    degenerate: bool


def real_interval(orders, a: float) -> RealInterval:
    """Real stability interval ``(1 - 2^alpha - a 2^beta, 1)`` for real ``a`` and ``b``.

    Written as ``1 - 2^beta (2^(alpha-beta) + a)`` so that ``a = -2^(alpha-beta)``
    lands on exactly 1.
    """
    orders = as_orders(orders)
    alpha, beta = orders
    lo = 1.0 - 2.0 ** beta * (2.0 ** (alpha - beta) + float(a))
    return RealInterval(lo, 1.0, lo >= 1.0)


@dataclass(frozen=True)
class RegionReport:
    """Stability verdicts on a rectangular grid of the complex ``b``-plane.

    Row ``i`` holds ``Im b = im_min + i * dy`` and column ``j`` holds
    ``Re b = re_min + j * dx``; both edges of the window are grid nodes.
    """

    orders: OrderPair
    a: float
    window: tuple[float, float, float, float]
    grid: tuple[int, int]
    verdicts: np.ndarray = field(repr=False)
    winding: np.ndarray = field(repr=False)
    components: int = 0
    representatives: tuple[complex, ...] = ()
    curve: BoundaryCurve | None = field(default=None, repr=False, compare=False)

    @property
    def re_axis(self) -> np.ndarray:
        return np.linspace(self.window[0], self.window[1], self.grid[1])

    @property
    def im_axis(self) -> np.ndarray:
        return np.linspace(self.window[2], self.window[3], self.grid[0])

    def point(self, i: int, j: int) -> complex:
        return complex(self.re_axis[j], self.im_axis[i])


def auto_window(curve: BoundaryCurve, inflate: float = 0.10) -> tuple[float, float, float, float]:
    x0, x1, y0, y1 = curve.bbox
    w = max(x1 - x0, 1e-12)
    h = max(y1 - y0, 1e-12)
    return (x0 - 0.5 * inflate * w, x1 + 0.5 * inflate * w,
            y0 - 0.5 * inflate * h, y1 + 0.5 * inflate * h)


def raster_winding(curve: BoundaryCurve, re_axis: np.ndarray, im_axis: np.ndarray) -> np.ndarray:
    """Winding numbers of the polyline around every grid node.

    Counts signed crossings of the rightward horizontal ray from each node,
    with the half-open rule ``y0 <= y < y1`` for upward edges and
    ``y1 <= y < y0`` for downward ones.
    """
    p = curve.points
    x0, y0, x1, y1 = p.real[:-1], p.imag[:-1], p.real[1:], p.imag[1:]
    up = y1 > y0
    ylo = np.where(up, y0, y1)
    yhi = np.where(up, y1, y0)
    r0 = np.searchsorted(im_axis, ylo, side="left")
    r1 = np.searchsorted(im_axis, yhi, side="left")
    counts = np.maximum(r1 - r0, 0)
    seg = np.repeat(np.arange(len(x0)), counts)
    offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    rows = r0[seg] + offs
    y = im_axis[rows]
    t = (y - y0[seg]) / (y1[seg] - y0[seg])
    xc = x0[seg] + t * (x1[seg] - x0[seg])
    sign = np.where(up[seg], 1, -1)
    cols = np.searchsorted(re_axis, xc, side="left")
    nrow, ncol = len(im_axis), len(re_axis)
    acc = np.zeros((nrow, ncol + 1), dtype=np.int64)
    np.add.at(acc, (rows, np.zeros_like(rows)), sign)
    np.add.at(acc, (rows, cols), -sign)
    return np.cumsum(acc, axis=1)[:, :ncol]


def raster_marginal(curve: BoundaryCurve, re_axis: np.ndarray, im_axis: np.ndarray,
                    band: float) -> np.ndarray:
    """Mask of grid nodes within ``band`` of the polyline."""
    p = curve.points
    p0, p1 = p[:-1], p[1:]
    xlo = np.minimum(p0.real, p1.real) - band
    xhi = np.maximum(p0.real, p1.real) + band
    ylo = np.minimum(p0.imag, p1.imag) - band
    yhi = np.maximum(p0.imag, p1.imag) + band
    c0 = np.searchsorted(re_axis, xlo, side="left")
    c1 = np.searchsorted(re_axis, xhi, side="right")
    r0 = np.searchsorted(im_axis, ylo, side="left")
    r1 = np.searchsorted(im_axis, yhi, side="right")
    mask = np.zeros((len(im_axis), len(re_axis)), dtype=bool)
    for s in np.flatnonzero((c1 > c0) & (r1 > r0)):
        xs = re_axis[c0[s]:c1[s]]
        ys = im_axis[r0[s]:r1[s]]
        pts = xs[None, :] + 1j * ys[:, None]
        close = _segment_distance(p0[s], p1[s], pts) <= band
        mask[r0[s]:r1[s], c0[s]:c1[s]] |= close
    return mask


def _crosses(p0: np.ndarray, p1: np.ndarray, curve: BoundaryCurve) -> np.ndarray:
    """For each segment ``p0[k] -> p1[k]``, whether it meets the polyline (touching counts)."""
    c = curve.points
    c0, c1 = c[:-1], c[1:]
    out = np.zeros(len(p0), dtype=bool)

    def orient(u, v, w):
        return np.sign((v - u).real * (w - u).imag - (v - u).imag * (w - u).real)

    for k in range(len(p0)):
        a, b = p0[k], p1[k]
        near = ((np.maximum(c0.real, c1.real) >= min(a.real, b.real))
                & (np.minimum(c0.real, c1.real) <= max(a.real, b.real))
                & (np.maximum(c0.imag, c1.imag) >= min(a.imag, b.imag))
                & (np.minimum(c0.imag, c1.imag) <= max(a.imag, b.imag)))
        u, v = c0[near], c1[near]
        hit = ((orient(a, b, u) * orient(a, b, v) <= 0)
               & (orient(u, v, a) * orient(u, v, b) <= 0))
        out[k] = bool(hit.any())
    return out


def _diagonal_links(labels: np.ndarray, re_axis, im_axis, curve) -> list[tuple[int, int]]:
    # label pairs joined by a diagonal step whose segment misses the polyline
    pairs = []
    ncol = labels.shape[1]
    for dj in (1, -1):
        j0, j1 = (0, ncol - 1) if dj == 1 else (1, ncol)
        la = labels[:-1, j0:j1]
        lb = labels[1:, j0 + dj:j1 + dj]
        ii, jj = np.nonzero((la > 0) & (lb > 0) & (la != lb))
        pairs.extend((i, j, i + 1, j + dj) for i, j in zip(ii, jj + j0))
    if not pairs:
        return []
    pr = np.array(pairs)
    p0 = re_axis[pr[:, 1]] + 1j * im_axis[pr[:, 0]]
    p1 = re_axis[pr[:, 3]] + 1j * im_axis[pr[:, 2]]
    keep = ~_crosses(p0, p1, curve)
    return list(zip(labels[pr[keep, 0], pr[keep, 1]], labels[pr[keep, 2], pr[keep, 3]]))


def _near_links(mask_fn, labels: np.ndarray, n: int, re_axis, im_axis, curve,
                reach: int, factor: int, depth: int) -> list[tuple[int, int]]:
    # component pairs within `reach` cells that connect on a local grid `factor` times finer
    links = []
    rows, cols = labels.shape
    boxes = np.array([(sl[0].start, sl[0].stop - 1, sl[1].start, sl[1].stop - 1)
                      for sl in ndimage.find_objects(labels)])
    for k in range(1, n + 1):
        bk = boxes[k - 1]
        for m in range(k + 1, n + 1):
            bm = boxes[m - 1]
            gap = max(bk[0] - bm[1], bm[0] - bk[1], bk[2] - bm[3], bm[2] - bk[3])
            if gap > reach:
                continue
            ca = _cells_near(labels, k, bm, reach)
            cb = _cells_near(labels, m, bk, reach)
            if len(ca) == 0 or len(cb) == 0:
                continue
            dist, near = cKDTree(cb).query(ca, p=np.inf)
            best = int(np.argmin(dist))
            if dist[best] > reach:
                continue
            pa, pb = ca[best], cb[near[best]]
            r0 = max(0, min(pa[0], pb[0]) - reach)
            r1 = min(rows - 1, max(pa[0], pb[0]) + reach)
            c0 = max(0, min(pa[1], pb[1]) - reach)
            c1 = min(cols - 1, max(pa[1], pb[1]) + reach)
            fre = np.linspace(re_axis[c0], re_axis[c1], (c1 - c0) * factor + 1)
            fim = np.linspace(im_axis[r0], im_axis[r1], (r1 - r0) * factor + 1)
            flab, _ = face_labels(mask_fn(fre, fim), fre, fim, curve, mask_fn=mask_fn,
                                  depth=depth - 1, reach=reach, factor=factor)
            la = flab[(pa[0] - r0) * factor, (pa[1] - c0) * factor]
            lb = flab[(pb[0] - r0) * factor, (pb[1] - c0) * factor]
            if la > 0 and la == lb:
                links.append((k, m))
    return links


def _cells_near(labels: np.ndarray, k: int, box, reach: int) -> np.ndarray:
    # cells of component k inside `box` grown by `reach`
    r0, r1 = max(0, box[0] - reach), box[1] + reach + 1
    c0, c1 = max(0, box[2] - reach), box[3] + reach + 1
    cells = np.argwhere(labels[r0:r1, c0:c1] == k)
    return cells + (r0, c0)


def winding_class(curve: BoundaryCurve, w: int):
    """Mask builder for non-marginal grid nodes with winding number ``w``."""
    band = marginal_band(curve)

    def build(re_axis, im_axis):
        wind = raster_winding(curve, re_axis, im_axis)
        return (wind == w) & ~raster_marginal(curve, re_axis, im_axis, band)

    return build


def face_labels(mask: np.ndarray, re_axis: np.ndarray, im_axis: np.ndarray,
                curve: BoundaryCurve | None = None, mask_fn=None, depth: int = 1,
                reach: int = 4, factor: int = 8) -> tuple[np.ndarray, int]:
    """Connected components of ``mask`` that follow the faces of the curve.

    Cells are joined through 4-neighbours. When ``curve`` is given, two
    diagonal neighbours in different components are also joined if the
    straight segment between them does not meet the polyline, so one-cell
    wide diagonal necks stay attached to their region while sectors that only
    touch at a self-intersection stay apart.

    ``mask_fn(re_axis, im_axis)`` recomputes the mask on another grid. With it,
    components closer than ``reach`` cells are re-examined on a local grid
    ``factor`` times finer (``depth`` levels deep) and joined if they connect
    there; this catches necks thinner than one cell.
    """
    labels, n = ndimage.label(mask, structure=FOUR_CONNECTED)
    if curve is None or n < 2:
        return labels, n
    links = _diagonal_links(labels, re_axis, im_axis, curve)
    if mask_fn is not None and depth > 0:
        links += _near_links(mask_fn, labels, n, re_axis, im_axis, curve, reach, factor, depth)
    if not links:
        return labels, n
    src, dst = np.array(links).T - 1
    graph = coo_matrix((np.ones(len(src)), (src, dst)), shape=(n, n))
    n_merged, merged = connected_components(graph, directed=False)
    relabel = np.concatenate(([0], merged + 1))
    return relabel[labels], int(n_merged)


def _representatives(stable: np.ndarray, labels: np.ndarray, n: int, report_point) -> list[complex]:
    if n == 0:
        return []
    depth = ndimage.distance_transform_cdt(np.pad(stable, 1), metric="taxicab")[1:-1, 1:-1]
    flat = labels.ravel()
    order = np.lexsort((-depth.ravel(), flat))
    firsts = order[np.searchsorted(flat[order], np.arange(1, n + 1))]
    return [report_point(*np.unravel_index(c, stable.shape)) for c in firsts]


def scan_region(orders, a: float, window=None, grid: tuple[int, int] = (400, 400),
                M: int = 4096, curve: BoundaryCurve | None = None) -> RegionReport:
    """Classify every node of a ``rows x cols`` grid against one shared curve.

    ``window`` is ``(re_min, re_max, im_min, im_max)`` or None for the curve's
    bounding box inflated by 10%. The curve itself is well defined at
    ``a = -1``, so unlike :func:`classify_point` this accepts it and reports
    the winding geometry.
    """
    orders = as_orders(orders)
    a = float(a)
    if not math.isfinite(a):
        raise ParameterError(f"coefficient a must be finite, got {a!r}")
    rows, cols = int(grid[0]), int(grid[1])
    if rows < 16 or cols < 16:
        raise ParameterError("each grid dimension must be >= 16")
    if curve is None:
        curve = boundary_for(orders, a, M)
    if window is None:
        window = auto_window(curve)
    window = tuple(float(v) for v in window)
    if not (window[0] < window[1] and window[2] < window[3]):
        raise ParameterError(f"degenerate window {window!r}")
    re_axis = np.linspace(window[0], window[1], cols)
    im_axis = np.linspace(window[2], window[3], rows)
    wind = raster_winding(curve, re_axis, im_axis)
    marginal = raster_marginal(curve, re_axis, im_axis, marginal_band(curve))
    verdicts = np.where(marginal, "M", np.where(wind == 1, "S", "U"))
    stable = verdicts == "S"
    labels, n = face_labels(stable, re_axis, im_axis, curve, mask_fn=winding_class(curve, 1))

    def point(i, j):
        return complex(re_axis[j], im_axis[i])

    reps = _representatives(stable, labels, n, point)
    return RegionReport(orders, a, window, (rows, cols), verdicts, wind, n, tuple(reps), curve)


def count_stable_components(report: RegionReport) -> int:
    """Components of stable cells; marginal cells do not connect.

    Uses :func:`face_labels`, so diagonal links are checked against the
    report's curve when it carries one.
    """
    stable = np.asarray(report.verdicts) == "S"
    curve = report.curve
    fn = None if curve is None else winding_class(curve, 1)
    _, n = face_labels(stable, report.re_axis, report.im_axis, curve, mask_fn=fn)
    return int(n)


def count_enclosed_unstable(report: RegionReport) -> int:
    """Unstable components, split by winding number, that avoid the grid border.

    Components touching the border belong to the exterior and are excluded.
    """
    verdicts = np.asarray(report.verdicts)
    unstable = verdicts == "U"
    total = 0
    for w in np.unique(report.winding[unstable]):
        fn = None if report.curve is None else winding_class(report.curve, int(w))
        labels, n = face_labels(unstable & (report.winding == w), report.re_axis,
                                report.im_axis, report.curve, mask_fn=fn)
        if n == 0:
            continue
        border = np.unique(np.concatenate((labels[0], labels[-1], labels[:, 0], labels[:, -1])))
        total += n - int(np.count_nonzero(border))
    return total
