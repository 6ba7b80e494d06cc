"""Stability analysis of the linear two-term fractional difference system

    D^alpha x(t) + a D^beta x(t + alpha - beta) = (b - 1) x(t + alpha - 1).

Submodules: :mod:`fracmath` (kernels), :mod:`dynamics` (simulation and
operator residuals), :mod:`charfun` (characteristic function and boundary
curve), :mod:`stability` (winding-number verdicts and region scans),
:mod:`bifurcation` (bifurcation values and topology sweeps), :mod:`numerics`
(root finding) and :mod:`cli`.
"""

from .bifurcation import (
    BifurcationSet,
    TopologySignature,
    a3_value,
    closed_form_bifurcations,
    find_cusps,
    find_self_intersections,
    solve_theta_star,
    sweep_bifurcations,
    topology_signature,
)
from .charfun import BoundaryCurve, char_value, cusp_conditions, gamma_curve, sample_boundary
from .dynamics import Trajectory, Verdict, classify_trajectory, residual, simulate
from .errors import (
    DomainError,
    FracstabError,
    MarginalProximity,
    NoConvergenceError,
    NoRootError,
    NumericFailure,
    ParameterError,
    RangeError,
    SingularParameterError,
)
from .params import OrderPair, SystemParams
from .stability import (
    RegionReport,
    Stability,
    classify_point,
    count_enclosed_unstable,
    count_stable_components,
    real_interval,
    scan_region,
    winding_number,
)

__version__ = "0.1.0"

__all__ = [
    "BifurcationSet", "BoundaryCurve", "DomainError", "FracstabError", "MarginalProximity",
    "NoConvergenceError", "NoRootError", "NumericFailure", "OrderPair", "ParameterError",
    "RangeError", "RegionReport", "SingularParameterError", "Stability", "SystemParams",
    "TopologySignature", "Trajectory", "Verdict", "a3_value", "char_value", "classify_point",
    "classify_trajectory", "closed_form_bifurcations", "count_enclosed_unstable",
    "count_stable_components", "cusp_conditions", "find_cusps", "find_self_intersections",
    "gamma_curve", "real_interval", "residual", "sample_boundary", "scan_region", "simulate",
    "solve_theta_star", "sweep_bifurcations", "topology_signature", "winding_number",
]
