"""
Resolvent R(lambda) g as the Laplace transform in time of T(t) g, its residual
and weighted estimates, and the Green's function time integral.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.integrate

from app.models.report_models import VerificationRecord
from app.numerics.bounds import DEFAULT_EPSILON, admissible_eta_squared, bound_C78, omega_bound
from app.numerics.errors import HypothesisViolated, NonDecayingB, QuadratureNotConverged, SpectralMarginTooSmall
from app.numerics.fields import ensure_field
from app.numerics.grid import GridFunction, GridSpec
from app.numerics.kernel import KernelQuery, MultiIndex, heat_kernel
from app.numerics.linalg import OUSystem, spectral_quantities
from app.numerics.quadrature import QuadratureSettings, gauss_legendre
from app.numerics.semigroup import (
    SEMIGROUP_SETTINGS,
    evaluate_semigroup,
    generator_from_stencil,
    split_stencil,
    stencil_points,
)
from app.numerics.weights import WeightFunction, eval_weight, lp_norm_values, make_weight, sup_norm_values

logger = logging.getLogger(__name__)

MIN_MARGIN = 1e-3
RESOLVENT_ANCHOR = "||R(lambda)g|| <= C7 ||g|| / (Re lambda - omega)"


@dataclass(frozen=True)
class TimeQuadratureSettings:
    """
    Laplace integral over [0, T0] in s = sqrt(t).

    Attributes:
        order: Gauss-Legendre points per panel
        refined_order: Order of the comparison rule in the convergence check
        panels: Number of panels, geometric in s towards 0
        ratio: Ratio of consecutive panel lengths
        tail_tol: Target of the analytic tail bound M e^{-(Re lambda - omega) T0} / (Re lambda - omega)
        max_phase: Largest phase of e^{-i Im(lambda) t} swept by one panel
        max_panels: Upper bound on panels after splitting for oscillation
        tol: Relative tolerance of the convergence check
        refine_check: Compare against the refined rule and raise on disagreement
    """
    order: int = 24
    refined_order: int = 32
    panels: int = 3
    ratio: float = 4.0
    tail_tol: float = 1e-10
    max_phase: float = 2.0 * math.pi
    max_panels: int = 4096
    tol: float = 1e-7
    refine_check: bool = True


DEFAULT_TIME_SETTINGS = TimeQuadratureSettings()


@dataclass(frozen=True)
class ResolventQuery:
    """
    Attributes:
        sys: Validated system
        lam: Spectral parameter
        g: Right-hand side (GridFunction or Field)
        theta1: Weight governing omega (growth)
        theta2: Weight of the estimates (may decay)
        vartheta: Share of the spectral margin given to theta2, in (0, 1)
        p: Norm exponent; None selects the weighted sup norm
        epsilon: Margin in omega = -b0 + (1 + epsilon) nu / p
        grid: Output grid; defaults to the grid of g
    """
    sys: OUSystem
    lam: complex
    g: object
    theta1: WeightFunction = field(default_factory=lambda: make_weight("unit"))
    theta2: WeightFunction = field(default_factory=lambda: make_weight("unit"))
    vartheta: float = 0.5
    p: Optional[float] = 2.0
    epsilon: float = DEFAULT_EPSILON
    grid: Optional[GridSpec] = None
    settings: QuadratureSettings = SEMIGROUP_SETTINGS
    time_settings: TimeQuadratureSettings = DEFAULT_TIME_SETTINGS

    @property
    def exponent(self) -> float:
        return 1.0 if self.p is None or math.isinf(self.p) else float(self.p)

    @property
    def sup_mode(self) -> bool:
        return self.p is None or math.isinf(self.p)


@dataclass(frozen=True)
class GrowthBound:
    omega: float
    M: float
    margin: float


def growth_rate(
    sys: OUSystem, theta1: WeightFunction, p: Optional[float] = 2.0, epsilon: float = DEFAULT_EPSILON
) -> Dict[str, float]:
    """
    omega and M of the semigroup in the norm selected by p.

    p=None selects the (weighted) sup norm, where omega = -b0 for every weight:
    the weight only enters through the decay cap on theta2.
    """
    sup_mode = p is None or math.isinf(p)
    exponent = 1.0 if sup_mode else float(p)
    sq = spectral_quantities(sys, eta=theta1.eta, p=exponent)
    if sup_mode:
        return omega_bound(sq, "cb_unweighted")
    return omega_bound(sq, "lp_weighted", exponent, theta1.C_theta, epsilon)


def growth_bound(q: ResolventQuery) -> GrowthBound:
    """
    (omega, M) governing the Laplace integral, with hypothesis checks.

    Raises:
        SpectralMarginTooSmall: Re lambda - omega < 1e-3
        HypothesisViolated: eta of theta2 exceeds the vartheta cap
    """
    sq = spectral_quantities(q.sys, eta=q.theta1.eta, p=q.exponent)
    bound = growth_rate(q.sys, q.theta1, q.p, q.epsilon)
    margin = q.lam.real - bound["omega"]
    if margin < MIN_MARGIN:
        raise SpectralMarginTooSmall(
            f"Re lambda - omega = {margin:.3e} is below {MIN_MARGIN} (lambda={q.lam}, omega={bound['omega']:.4g})"
        )
    cap = admissible_eta_squared(sq, q.lam.real, bound["omega"], q.vartheta)
    if q.theta2.eta**2 > cap:
        raise HypothesisViolated(f"eta_2^2 = {q.theta2.eta**2:.4g} exceeds the admissible {cap:.4g}")
    return GrowthBound(omega=bound["omega"], M=bound["M"], margin=margin)


def _split_for_phase(left: float, right: float, frequency: float, max_phase: float) -> List[float]:
    # phase swept over [left, right] in s is |Im lambda| (right^2 - left^2)
    if frequency == 0.0:
        return [left, right]
    count = max(1, math.ceil(frequency * (right * right - left * left) / max_phase))
    # equal phase per sub-panel: uniform in t = s^2
    return [math.sqrt(left * left + k * (right * right - left * left) / count) for k in range(count + 1)]


def time_nodes(
    margin: float,
    M: float,
    settings: TimeQuadratureSettings = DEFAULT_TIME_SETTINGS,
    frequency: float = 0.0,
    order: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Nodes t = s^2 and weights for the integral over [0, T0], plus the tail bound.

    Panels in s are geometric towards s = 0 with the given ratio. With a
    nonzero frequency |Im lambda| each panel is split further so that no panel
    sweeps more than max_phase of the oscillation e^{-i Im(lambda) t}.

    Raises:
        QuadratureNotConverged: the oscillation needs more than max_panels panels
    """
    horizon = max(math.log(max(M, 1.0) / (margin * settings.tail_tol)) / margin, 1e-6)
    s_max = math.sqrt(horizon)
    edges = [0.0] + [s_max * settings.ratio ** (k - settings.panels + 1) for k in range(settings.panels)]
    frequency = abs(frequency)
    panels: List[Tuple[float, float]] = []
    for left, right in zip(edges[:-1], edges[1:]):
        pieces = _split_for_phase(left, right, frequency, settings.max_phase)
        panels.extend(zip(pieces[:-1], pieces[1:]))
    if len(panels) > settings.max_panels:
        raise QuadratureNotConverged(
            f"Laplace integral needs {len(panels)} panels for |Im lambda| = {frequency:.4g} over "
            f"t <= {horizon:.4g} (max_panels = {settings.max_panels})"
        )
    base_nodes, base_weights = gauss_legendre(order or settings.order)
    nodes = []
    weights = []
    for left, right in panels:
        half = 0.5 * (right - left)
        s = left + half * (base_nodes + 1.0)
        nodes.append(s * s)
        weights.append(half * base_weights * 2.0 * s)
    tail = max(M, 1.0) * math.exp(-margin * horizon) / margin
    return np.concatenate(nodes), np.concatenate(weights), tail


def _laplace_sum(
    q: ResolventQuery,
    g,
    points: np.ndarray,
    betas: Sequence[MultiIndex],
    ts: np.ndarray,
    ws: np.ndarray,
) -> Tuple[Dict[MultiIndex, np.ndarray], float, float]:
    totals = {beta: np.zeros((points.shape[0], q.sys.N), dtype=complex) for beta in betas}
    magnitude = 0.0
    spatial = 0.0
    for t, w in zip(ts, ws):
        factor = w * np.exp(-q.lam * t)
        result = evaluate_semigroup(q.sys, g, float(t), points, betas, q.settings)
        for beta in betas:
            totals[beta] += factor * result.values[beta]
            magnitude += abs(factor) * float(np.max(np.abs(result.values[beta]), initial=0.0))
        spatial += abs(factor) * result.est_error
    return totals, magnitude, spatial


def evaluate_resolvent(
    q: ResolventQuery,
    points,
    betas: Sequence[MultiIndex] = ((),),
) -> Tuple[Dict[MultiIndex, np.ndarray], float]:
    """
    D^beta v* at stacked points, v* = integral of e^{-lambda t} T(t) g dt.

    Returns the values per beta and an error estimate (time tail, spatial
    quadrature estimates and the gap between the two time rules).

    Raises:
        QuadratureNotConverged: the time rules of both orders disagree beyond tolerance
    """
    bound = growth_bound(q)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    settings = q.time_settings
    ts, ws, tail = time_nodes(bound.margin, bound.M, settings, q.lam.imag)
    g = ensure_field(q.g)
    sample_scale = float(np.max(np.linalg.norm(g.evaluate(points), axis=-1), initial=0.0))
    started = time.perf_counter()
    totals, magnitude, spatial = _laplace_sum(q, g, points, betas, ts, ws)
    error = tail * max(sample_scale, 1.0) + spatial
    if settings.refine_check:
        ts_ref, ws_ref, _ = time_nodes(bound.margin, bound.M, settings, q.lam.imag, settings.refined_order)
        refined, _, spatial_ref = _laplace_sum(q, g, points, betas, ts_ref, ws_ref)
        gap = max(float(np.max(np.abs(refined[beta] - totals[beta]), initial=0.0)) for beta in betas)
        scale = max(magnitude, np.finfo(float).tiny)
        if gap > 10.0 * settings.tol * scale:
            raise QuadratureNotConverged(
                f"Resolvent lambda={q.lam} for {q.sys.name}: time rules differ by {gap:.3e} "
                f"(scale {scale:.3e}, tol {settings.tol:.1e})"
            )
        totals = refined
        error = tail * max(sample_scale, 1.0) + spatial_ref + gap
    logger.info(
        f"Resolvent lambda={q.lam} for {q.sys.name}: {ts.size} time nodes, {points.shape[0]} points, "
        f"{1000 * (time.perf_counter() - started):.0f} ms"
    )
    return totals, error


def apply_resolvent(q: ResolventQuery, points=None):
    """
    v* = R(lambda) g on the output grid, or at explicit points when given.
    """
    if points is not None:
        values, _ = evaluate_resolvent(q, points)
        return values[()]
    spec = q.grid if q.grid is not None else getattr(q.g, "spec", None)
    if spec is None:
        raise ValueError("An output grid is required when g is not a grid function")
    values, error = evaluate_resolvent(q, spec.points())
    return GridFunction(spec, values[()].reshape(spec.shape + (q.sys.N,)), error, q.settings.interpolation_order)


def resolvent_residual(q: ResolventQuery, points, h: float = 0.04) -> float:
    """
    max |lambda v*(x) - L v*(x) - g(x)| over the points, relative to max |g(x)|,
    with L applied by central differences of step h.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    d = q.sys.d
    stencils = np.vstack([stencil_points(x, h) for x in points])
    values, _ = evaluate_resolvent(q, stencils)
    samples = values[()].reshape(points.shape[0], 2 * d + 1, q.sys.N)
    g_values = ensure_field(q.g).evaluate(points)
    worst = 0.0
    for x, stencil, g_x in zip(points, samples, g_values):
        center, plus, minus = split_stencil(stencil, d)
        generator = generator_from_stencil(q.sys, center, plus, minus, x, h)
        worst = max(worst, float(np.linalg.norm(q.lam * center - generator - g_x)))
    scale = float(np.max(np.linalg.norm(g_values, axis=-1)))
    return worst / scale if scale > 0.0 else worst


def _norm(spec: GridSpec, values: np.ndarray, w: WeightFunction, p: Optional[float]) -> float:
    if p is None or math.isinf(p):
        return sup_norm_values(spec, values, w)
    return lp_norm_values(spec, values, w, p)


def resolvent_estimate_check(q: ResolventQuery, tolerance: float = 1e-3) -> VerificationRecord:
    """
    Measure ||v*||, ||D_i v*|| in the theta2 norm against C7 ||g|| / (Re lambda - omega)
    and C8 ||g|| / (Re lambda - omega)^(1/2). In sup mode the pointwise bound
    |v*(x)| theta2(x) <= C7 ||g|| / (Re lambda - omega) is checked at interior nodes.

    measured is the largest measured/bound ratio, bound is 1.
    """
    started = time.perf_counter()
    spec = q.grid if q.grid is not None else getattr(q.g, "spec", None)
    if spec is None:
        raise ValueError("An output grid is required when g is not a grid function")
    bound = growth_bound(q)
    sq = spectral_quantities(q.sys, eta=q.theta2.eta, p=q.exponent)
    constants = bound_C78(sq, q.exponent, q.theta2.C_theta, q.vartheta)

    d = q.sys.d
    betas: List[MultiIndex] = [()] + [(i,) for i in range(d)]
    values, error = evaluate_resolvent(q, spec.points(), betas)
    shape = spec.shape + (q.sys.N,)
    g_norm = _norm(spec, ensure_field(q.g).evaluate(spec.points()).reshape(shape), q.theta2, q.p)

    v_norm = _norm(spec, values[()].reshape(shape), q.theta2, q.p)
    dv_norm = max(_norm(spec, values[(i,)].reshape(shape), q.theta2, q.p) for i in range(d))
    bound_v = constants["C7"] * g_norm / bound.margin
    bound_dv = constants["C8"] * g_norm / math.sqrt(bound.margin)
    ratios = {"v": v_norm / bound_v if bound_v > 0 else 0.0, "Dv": dv_norm / bound_dv if bound_dv > 0 else 0.0}

    detail = {
        "lambda": [q.lam.real, q.lam.imag],
        "omega": bound.omega,
        "M": bound.M,
        "C7": constants["C7"],
        "C8": constants["C8"],
        "norm_g": g_norm,
        "norm_v": v_norm,
        "norm_Dv": dv_norm,
        "bound_v": bound_v,
        "bound_Dv": bound_dv,
        "p": "sup" if q.sup_mode else q.exponent,
        "theta1": q.theta1.label,
        "theta2": q.theta2.label,
    }
    if q.sup_mode:
        mask = spec.interior_mask().ravel()
        pointwise = np.linalg.norm(values[()], axis=-1) * eval_weight(q.theta2, spec.points())
        ratios["pointwise"] = float(np.max(pointwise[mask], initial=0.0)) / bound_v if bound_v > 0 else 0.0
        detail["pointwise_max"] = float(np.max(pointwise[mask], initial=0.0))

    measured = max(ratios.values())
    detail["ratios"] = ratios
    return VerificationRecord(
        property="resolvent weighted estimate",
        anchor=RESOLVENT_ANCHOR,
        system=q.sys.name,
        measured=measured,
        bound=1.0,
        tolerance=tolerance,
        passed=measured <= 1.0 + tolerance,
        est_error=error,
        runtime_ms=1000.0 * (time.perf_counter() - started),
        detail=detail,
    )


@dataclass(frozen=True)
class GreensValue:
    value: np.ndarray
    est_error: float


def greens_function_probe(sys: OUSystem, x, xi, T_max: float, tol: float = 1e-10) -> GreensValue:
    """
    -integral over (0, T_max) of H(x, xi, t) dt, with the remainder beyond T_max
    bounded by kappa (4 pi a_min T)^(-d/2) e^(-b0 T) / b0.

    Raises:
        NonDecayingB: b0 <= 0
    """
    sq = spectral_quantities(sys)
    if sq.b0 <= 0.0:
        raise NonDecayingB(f"b0 = {sq.b0} must be positive for the time integral to converge")
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if np.allclose(x, xi, rtol=0.0, atol=1e-14):
        raise ValueError("The Green's function probe needs x != xi")
    n = sys.N

    def integrand(t: float) -> np.ndarray:
        matrix = heat_kernel(KernelQuery(sys=sys, t=t, x=x, xi=xi))
        return np.concatenate([matrix.real.ravel(), matrix.imag.ravel()])

    gap = np.linalg.norm(x - xi)
    peak = min(gap**2 / (2.0 * sys.d * sq.a_max), 0.5 * T_max)
    value, error = scipy.integrate.quad_vec(
        integrand, 0.0, T_max, epsabs=0.0, epsrel=tol, points=[peak], limit=2000
    )
    matrix = -(value[: n * n] + 1j * value[n * n :]).reshape(n, n)
    tail = sq.kappa * (4.0 * math.pi * sq.a_min * T_max) ** (-sys.d / 2.0) * math.exp(-sq.b0 * T_max) / sq.b0
    return GreensValue(value=matrix, est_error=float(error) + tail)
