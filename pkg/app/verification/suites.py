"""
Property suites.

Each suite maps a validated system and a SuiteConfig to VerificationRecords.
An exception raised inside a single check becomes a failing record carrying
the error, so one broken property never aborts the rest of a run.
"""
import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import scipy.integrate
import scipy.special

from app.models.report_models import VerificationRecord
from app.models.suite_models import SuiteConfig, resolve_system
from app.models.system_models import SystemDocument
from app.numerics.bounds import (
    admissible_eta_squared,
    bound_C,
    bound_C78,
    improper_integral_check,
    omega_bound,
)
from app.numerics.errors import describe_error
from app.numerics.fields import constant_field, gaussian_bump
from app.numerics.grid import AxisSpec, GridSpec
from app.numerics.kernel import (
    chapman_kolmogorov_residual,
    dirac_limit_probe,
    heat_kernel_batch,
    kernel_K,
    kernel_Ki,
    kernel_Kji,
    kernel_moments,
    observed_orders,
    riccati_residual,
    riccati_solution,
    weighted_kernel_l1,
)
from app.numerics.linalg import OUSystem, matrix_function, rotation, scalar_system, spectral_norm, spectral_quantities
from app.numerics.quadrature import QuadratureSettings
from app.numerics.resolvent import (
    RESOLVENT_ANCHOR,
    ResolventQuery,
    apply_resolvent,
    greens_function_probe,
    growth_rate,
    resolvent_estimate_check,
    resolvent_residual,
)
from app.numerics.semigroup import (
    SemigroupQuery,
    apply_semigroup,
    boundedness_sweep,
    evaluate_semigroup,
    factorization_residual,
    interior_spec,
    semigroup_composition_residual,
    strong_continuity_probe,
)
from app.numerics.special import gauss_2f1, kummer_1f1, laplace_1f1_identity, radial_gaussian_integral
from app.numerics.weights import (
    WeightFunction,
    WeightKind,
    check_growth_envelope,
    check_lower_envelope,
    check_rotation_invariance,
    check_translation_regularity,
    eval_weight,
    make_weight,
    weight_ratio_bound,
    weighted_norm,
)

logger = logging.getLogger(__name__)

# Largest node count per axis used by the grid-based suites
GRID_CAPS = {1: 201, 2: 41, 3: 13}
RESOLVENT_GRID_CAPS = {1: 101, 2: 17, 3: 7}

RICCATI_TIMES = (0.1, 0.5, 1.0, 3.0, 10.0)
MOMENT_TIMES = (0.1, 1.0, 5.0)
DIRAC_TIMES = (0.1, 0.05, 0.01)
CONTINUITY_TIMES = (0.2, 0.1, 0.05, 0.01, 0.002)
L1_TIMES = tuple(float(t) for t in np.geomspace(0.05, 20.0, 10))
L1_ETA_P = (0.0, 0.1, 0.2, 0.4, 0.8)
PLANAR_S = np.array([[0.0, 1.0], [-1.0, 0.0]])
WEIGHT_FAMILIES = (
    ("exp_abs", 0.5),
    ("exp_abs", -0.5),
    ("cosh_abs", 0.5),
    ("exp_smooth", 0.5),
    ("exp_smooth", -0.5),
    ("cosh_smooth", 0.5),
)


@dataclass
class Measurement:
    """
    Outcome of one check. passed overrides measured <= bound (1 + tolerance)
    for properties that are not a plain upper bound.
    """
    measured: float
    bound: float
    est_error: Optional[float] = None
    detail: Dict[str, Any] = field(default_factory=dict)
    passed: Optional[bool] = None


class RecordBook:
    """Runs checks for one (suite, system) pair and collects their records."""

    def __init__(self, system: str, tolerance: float):
        self.system = system
        self.tolerance = tolerance
        self.records: List[VerificationRecord] = []

    def check(
        self,
        property: str,
        anchor: str,
        measure: Callable[[], Measurement],
        tolerance: Optional[float] = None,
    ) -> None:
        tolerance = self.tolerance if tolerance is None else tolerance
        started = time.perf_counter()
        try:
            outcome = measure()
        except Exception as exc:
            record = self._failed(property, anchor, exc, tolerance)
        else:
            passed = outcome.passed
            if passed is None:
                passed = bool(outcome.measured <= outcome.bound * (1.0 + tolerance))
            record = VerificationRecord(
                property=property,
                anchor=anchor,
                system=self.system,
                measured=float(outcome.measured),
                bound=float(outcome.bound),
                tolerance=tolerance,
                passed=passed,
                est_error=None if outcome.est_error is None else float(outcome.est_error),
                detail=outcome.detail,
            )
        record.runtime_ms = 1000.0 * (time.perf_counter() - started)
        self.records.append(record)

    def fail(self, property: str, anchor: str, exc: BaseException) -> None:
        self.records.append(self._failed(property, anchor, exc, self.tolerance))

    def _failed(self, property: str, anchor: str, exc: BaseException, tolerance: float) -> VerificationRecord:
        logger.warning(f"Check '{property}' on {self.system or 'no system'} failed: {describe_error(exc)}")
        return VerificationRecord(
            property=property,
            anchor=anchor,
            system=self.system,
            tolerance=tolerance,
            passed=False,
            error=describe_error(exc),
        )


SuiteFunction = Callable[[Optional[OUSystem], SuiteConfig, RecordBook], None]


@dataclass(frozen=True)
class Suite:
    name: str
    func: SuiteFunction
    per_system: bool = True


SUITES: Dict[str, Suite] = {}


def suite(name: str, per_system: bool = True):
    def register(func: SuiteFunction) -> SuiteFunction:
        SUITES[name] = Suite(name=name, func=func, per_system=per_system)
        return func

    return register


def capped_grid(config: SuiteConfig, d: int, caps: Dict[int, int] = GRID_CAPS) -> GridSpec:
    spec = config.grid_spec(d)
    cap = caps.get(d, min(caps.values()))
    return GridSpec(tuple(AxisSpec(axis.min, axis.max, min(axis.count, cap)) for axis in spec.axes))


def suite_weights(config: SuiteConfig) -> List[WeightFunction]:
    return [make_weight(spec.kind, spec.mu) for spec in config.weights]


def quadrature_settings(config: SuiteConfig) -> QuadratureSettings:
    return QuadratureSettings(tol=config.quad_tol, max_panels=64)


def _rel(value: complex, reference: complex) -> float:
    return abs(value - reference) / max(abs(reference), 1e-300)


def _decreasing(values: List[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


# Special functions


@suite("special", per_system=False)
def special_suite(sys: Optional[OUSystem], config: SuiteConfig, book: RecordBook) -> None:
    def connection() -> Measurement:
        worst = 0.0
        for a, b, z in ((0.5, 1.5, 2.0), (1.0, 0.5, 8.0), (1.5, 0.5, 12.0), (2.5, 1.5, 5.0)):
            lhs = math.exp(-z) * kummer_1f1(a, b, z).value
            worst = max(worst, _rel(lhs, float(scipy.special.hyp1f1(b - a, b, -z))))
        return Measurement(worst, 1e-9)

    def laplace() -> Measurement:
        worst = 0.0
        for a, b, alpha, c in ((1.0, 0.5, 1.0, 2.0), (1.5, 0.5, 0.5, 1.0), (1.5, 1.5, 1.5, 3.0)):
            f = lambda t: kummer_1f1(a, b, -t).value * math.exp(-c * t)  # noqa: E731
            head, _ = scipy.integrate.quad(f, 0.0, 1.0, weight="alg", wvar=(alpha - 1.0, 0.0), epsabs=0.0, epsrel=1e-12)
            rest, _ = scipy.integrate.quad(
                lambda t: t ** (alpha - 1.0) * f(t), 1.0, np.inf, epsabs=0.0, epsrel=1e-12, limit=200
            )
            worst = max(worst, _rel(laplace_1f1_identity(a, b, alpha, c), head + rest))
        return Measurement(worst, 1e-8)

    def radial() -> Measurement:
        worst = 0.0
        for n in (1.0, 2.0, 3.0, 4.0):
            for z in (1.0, 2.0 + 1.0j):
                parts = [
                    scipy.integrate.quad(lambda r: r ** (n - 1.0) * part(np.exp(-z * r * r)), 0.0, np.inf, epsabs=0.0, epsrel=1e-13)[0]
                    for part in (np.real, np.imag)
                ]
                worst = max(worst, _rel(radial_gaussian_integral(n, z), complex(parts[0], parts[1])))
        return Measurement(worst, 1e-9)

    def gauss() -> Measurement:
        worst = 0.0
        for d in (2, 3):
            for x in (0.25, 1.0, 3.0, 9.0):
                for a1, a2, b1 in ((-(d - 1) / 2, 1.0, 0.5), (-(d - 2) / 2, 1.5, 1.5), (-d / 2, 0.5, 0.5), (-(d - 1) / 2, 1.0, 1.5)):
                    reference = float(scipy.special.hyp2f1(a1, a2, b1, -x))
                    worst = max(worst, _rel(gauss_2f1(a1, a2, b1, -x).value, reference))
        return Measurement(worst, 1e-9)

    book.check("Kummer connection formula", "Kummer transformation of 1F1", connection)
    book.check("Laplace transform of 1F1", "Laplace integral of t^(alpha-1) 1F1 in closed form", laplace)
    book.check("radial Gaussian integral", "Radial integration formula", radial)
    book.check("Gauss 2F1 reference values", "2F1 factors of C7 and C8", gauss)


# Weights


@suite("weights", per_system=False)
def weights_suite(sys: Optional[OUSystem], config: SuiteConfig, book: RecordBook) -> None:
    seed = config.seed
    families = [make_weight(kind, mu) for kind, mu in WEIGHT_FAMILIES]
    for w in [make_weight("unit")] + families:

        def positivity(w=w) -> Measurement:
            x = np.random.default_rng(seed).normal(scale=10.0, size=(10_000, 2))
            values = eval_weight(w, x)
            return Measurement(float(np.sum(~(values > 0.0))), 0.0, detail={"min": float(np.min(values))})

        def envelope(w=w) -> Measurement:
            result = check_growth_envelope(w, 10_000, seed)
            return Measurement(result.max_violation, 1.0 + 1e-9, detail={"C_observed": result.C_observed})

        def rotation_invariance(w=w) -> Measurement:
            return Measurement(check_rotation_invariance(w, PLANAR_S, (0.3, 1.0, 2.5), seed=seed), 1e-12)

        def lower(w=w) -> Measurement:
            ratio = check_lower_envelope(w, 10_000, seed)
            return Measurement(ratio, 1.0, passed=ratio >= 1.0 - 1e-12)

        def regularity(w=w) -> Measurement:
            result = check_translation_regularity(w, (0.1, 0.01, 0.001), seed=seed)
            ratios = result["ratios"]
            holds = _decreasing(ratios) or max(ratios) == 0.0
            return Measurement(ratios[-1], ratios[0], detail={"ratios": ratios}, passed=holds)

        book.check(f"weight positivity {w.label}", "Weight axiom: positivity", positivity, tolerance=0.0)
        book.check(f"growth envelope {w.label}", "Weight axiom: growth envelope", envelope, tolerance=0.0)
        book.check(f"rotation invariance {w.label}", "Weight axiom: rotation invariance", rotation_invariance, tolerance=0.0)
        book.check(f"lower envelope {w.label}", "Weight axiom: exponential lower envelope", lower, tolerance=0.0)
        book.check(f"translation regularity {w.label}", "Weight axiom: translation continuity", regularity)

        if w.kind in (WeightKind.EXP_SMOOTH, WeightKind.COSH_SMOOTH):

            def gradient(w=w) -> Measurement:
                ratio = check_translation_regularity(w, (0.1,), seed=seed)["gradient_ratio"]
                return Measurement(ratio, abs(w.mu))

            book.check(f"gradient bound {w.label}", "Weight axiom: gradient bound", gradient, tolerance=1e-6)

    def monotonicity() -> Measurement:
        spec = GridSpec.uniform(2, -6.0, 6.0, 49)
        v = gaussian_bump(2, width=1.5).on_grid(spec)
        worst = 0.0
        detail = {}
        for wa, wb in ((make_weight("exp_smooth", 0.3), make_weight("unit")), (make_weight("unit"), make_weight("cosh_abs", 0.3))):
            constant = weight_ratio_bound(wa, wb, seed=seed)
            for p in (1.0, 2.0, None):
                ratio = weighted_norm(v, wa, p) / (constant * weighted_norm(v, wb, p))
                worst = max(worst, ratio)
            detail[f"{wa.label}/{wb.label}"] = constant
        return Measurement(worst, 1.0, detail=detail)

    book.check("weighted norm monotonicity", "Norm comparison under theta_a <= C theta_b", monotonicity)


# Kernel construction


@suite("kernel")
def kernel_suite(sys: OUSystem, config: SuiteConfig, book: RecordBook) -> None:
    rng = np.random.default_rng(config.seed)
    d = sys.d
    ts = rng.uniform(0.05, 3.0, size=20)
    xs = rng.normal(scale=1.5, size=(20, d))
    psis = rng.normal(size=(20, d)) * np.sqrt(ts)[:, None]

    def gauge() -> Measurement:
        worst = 0.0
        for t, x, psi in zip(ts, xs, psis):
            xi = rotation(sys.S, t) @ x - psi
            reference = heat_kernel_batch(sys, x, xi, t)
            worst = max(worst, float(spectral_norm(kernel_K(sys, psi, t) - reference) / spectral_norm(reference)))
        return Measurement(worst, 1e-12)

    def invariance() -> Measurement:
        worst = 0.0
        for t, psi, tau in zip(ts, psis, rng.uniform(-3.0, 3.0, size=20)):
            base = kernel_K(sys, psi, t)
            moved = kernel_K(sys, rotation(sys.S, tau) @ psi, t)
            worst = max(worst, float(spectral_norm(moved - base) / spectral_norm(base)))
        return Measurement(worst, 1e-12)

    def first_derivative(h: float = 1e-4) -> Measurement:
        worst = 0.0
        for t, x, psi in zip(ts, xs, psis):
            xi = rotation(sys.S, t) @ x - psi
            scale = float(spectral_norm(kernel_K(sys, psi, t))) / math.sqrt(t)
            for i in range(d):
                step = h * np.eye(d)[i]
                difference = (heat_kernel_batch(sys, x + step, xi, t) - heat_kernel_batch(sys, x - step, xi, t)) / (2.0 * h)
                worst = max(worst, float(spectral_norm(kernel_Ki(sys, psi, t, i) - difference)) / scale)
        return Measurement(worst, 1e-6)

    def second_derivative(h: float = 2e-4) -> Measurement:
        worst = 0.0
        for t, x, psi in zip(ts[:8], xs[:8], psis[:8]):
            xi = rotation(sys.S, t) @ x - psi
            H = lambda y: heat_kernel_batch(sys, y, xi, t)  # noqa: E731
            scale = float(spectral_norm(kernel_K(sys, psi, t))) / t
            for i in range(d):
                for j in range(i, d):
                    ei = h * np.eye(d)[i]
                    ej = h * np.eye(d)[j]
                    difference = (H(x + ei + ej) - H(x + ei - ej) - H(x - ei + ej) + H(x - ei - ej)) / (4.0 * h * h)
                    worst = max(worst, float(spectral_norm(kernel_Kji(sys, psi, t, i, j) - difference)) / scale)
        return Measurement(worst, 1e-5)

    book.check("kernel gauge consistency", "Shifted kernel K(psi, t) = H(x, e^{tS}x - psi, t)", gauge, tolerance=0.0)
    book.check("kernel rotation invariance", "K(e^{tau S} psi, t) = K(psi, t)", invariance, tolerance=0.0)
    book.check("first derivative kernel", "K^i as x_i-derivative of H", first_derivative)
    book.check("second derivative kernel", "K^{ji} as x_j x_i-derivative of H", second_derivative)

    if sys.is_scalar:

        def gaussian() -> Measurement:
            alpha, delta = complex(sys.lambdaA[0]), complex(sys.lambdaB[0])
            worst = 0.0
            for t, x, psi in zip(ts, xs, psis):
                xi = x + psi
                gap = rotation(sys.S, t) @ x - xi
                reference = (4.0 * math.pi * alpha * t) ** (-d / 2) * np.exp(-delta * t - gap @ gap / (4.0 * alpha * t))
                worst = max(worst, _rel(complex(heat_kernel_batch(sys, x, xi, t)[0, 0]), reference))
            return Measurement(worst, 1e-12)

        book.check("scalar Gaussian kernel", "Heat kernel of the scalar operator", gaussian, tolerance=0.0)


# Riccati construction


@suite("riccati")
def riccati_suite(sys: OUSystem, config: SuiteConfig, book: RecordBook) -> None:
    # The construction is scalar; vector systems are checked per diagonal component
    for k in range(sys.N):
        component = scalar_system(sys.lambdaA[k], sys.lambdaB[k], sys.S, name=f"{sys.name}[{k}]")
        label = "" if sys.is_scalar else f" component {k}"

        def residuals(component=component) -> Dict[str, List[float]]:
            rows = [riccati_residual(component, t) for t in RICCATI_TIMES]
            return {"res_N": [r.res_N for r in rows], "res_phi": [r.res_phi for r in rows]}

        def matrix_residual(residuals=residuals) -> Measurement:
            values = residuals()["res_N"]
            return Measurement(max(values), 1e-7, detail={"t": list(RICCATI_TIMES), "res_N": values})

        def phi_residual(residuals=residuals) -> Measurement:
            values = residuals()["res_phi"]
            return Measurement(max(values), 1e-7, detail={"t": list(RICCATI_TIMES), "res_phi": values})

        def normalization(component=component) -> Measurement:
            alpha, delta = complex(component.lambdaA[0]), complex(component.lambdaB[0])
            constant = (4.0 * math.pi * alpha) ** (-component.d / 2)
            worst = 0.0
            for t in RICCATI_TIMES:
                phi = riccati_solution(component, t).phi
                worst = max(worst, _rel(phi * t ** (component.d / 2) * np.exp(delta * t), constant))
            return Measurement(worst, 1e-12)

        book.check(f"Riccati matrix residual{label}", "Matrix Riccati equation for N(t)", matrix_residual)
        book.check(f"Riccati phi residual{label}", "Linear equation for phi(t)", phi_residual)
        book.check(f"Riccati normalization{label}", "Normalization constant (4 pi alpha)^(-d/2)", normalization)


# Moments


@suite("moments")
def moments_suite(sys: OUSystem, config: SuiteConfig, book: RecordBook) -> None:
    d = sys.d
    settings = quadrature_settings(config)
    second_pairs = [(i, i) for i in range(d)] + ([(0, 1)] if d > 1 else [])

    def decay(t: float) -> np.ndarray:
        return matrix_function(sys, lambda lam: np.exp(-lam * t), "B")

    def zeroth() -> Measurement:
        errors = [float(spectral_norm(kernel_moments(sys, t, 0, settings=settings) - decay(t))) for t in MOMENT_TIMES]
        return Measurement(max(errors), 1e-6, detail={"t": list(MOMENT_TIMES), "errors": errors})

    def first() -> Measurement:
        errors = [
            max(float(spectral_norm(kernel_moments(sys, t, 1, i, settings=settings))) for i in range(d))
            for t in MOMENT_TIMES
        ]
        return Measurement(max(errors), 1e-6, detail={"t": list(MOMENT_TIMES), "errors": errors})

    def second() -> Measurement:
        errors = []
        for t in MOMENT_TIMES:
            expected = 2.0 * t * decay(t) @ sys.A
            worst = 0.0
            for i, j in second_pairs:
                target = expected if i == j else np.zeros_like(expected)
                worst = max(worst, float(spectral_norm(kernel_moments(sys, t, 2, i, j, settings) - target)))
            errors.append(worst)
        return Measurement(max(errors), 1e-6, detail={"t": list(MOMENT_TIMES), "errors": errors})

    book.check("moment order 0", "Integral of K equals e^{-Bt}", zeroth, tolerance=0.0)
    book.check("moment order 1", "First moments of K vanish", first, tolerance=0.0)
    book.check("moment order 2", "Second moments of K equal 2t e^{-Bt} A delta_ij", second, tolerance=0.0)


# Chapman-Kolmogorov


@suite("chapman")
def chapman_suite(sys: OUSystem, config: SuiteConfig, book: RecordBook) -> None:
    rng = np.random.default_rng(config.seed)
    d = sys.d
    settings = quadrature_settings(config)
    cases = [
        (np.zeros(d), np.zeros(d), 0.5, 0.5),
        (rng.normal(size=d), rng.normal(size=d), 0.5, 0.5),
        (rng.normal(size=d), rng.normal(size=d), 0.3, 0.7),
    ]
    for x, xi, t1, t2 in cases:

        def residual(x=x, xi=xi, t1=t1, t2=t2) -> Measurement:
            value = chapman_kolmogorov_residual(sys, x, xi, t1, t2, settings)
            return Measurement(value, 1e-5, detail={"x": x.tolist(), "xi": xi.tolist(), "t1": t1, "t2": t2})

        book.check(f"Chapman-Kolmogorov t1={t1}, t2={t2}", "Chapman-Kolmogorov identity of H", residual)


# Dirac limit


@suite("dirac")
def dirac_suite(sys: OUSystem, config: SuiteConfig, book: RecordBook) -> None:
    d = sys.d
    bump = gaussian_bump(d, width=0.5, center=0.2 * np.ones(d))
    phi = lambda points: bump.evaluate(points)[:, 0]  # noqa: E731
    x = 0.3 * np.ones(d)
    errors: List[float] = []

    def decrease() -> Measurement:
        errors.extend(dirac_limit_probe(sys, phi, x, DIRAC_TIMES, quadrature_settings(config)))
        return Measurement(errors[-1], errors[0], detail={"t": list(DIRAC_TIMES), "errors": list(errors)}, passed=_decreasing(errors))

    def order() -> Measurement:
        orders = observed_orders(DIRAC_TIMES, errors)
        smallest = min(orders)
        return Measurement(smallest, 0.9, detail={"orders": orders}, passed=smallest >= 0.9)

    book.check("Dirac limit decrease", "Initial condition: H tends to the Dirac delta", decrease)
    if errors:
        book.check("Dirac limit order", "Initial condition: H tends to the Dirac delta", order)


# Green's function


@suite("greens")
def greens_suite(sys: OUSystem, config: SuiteConfig, book: RecordBook) -> None:
    sq = spectral_quantities(sys)
    if sq.b0 <= 0.0:
        logger.info(f"Green's function probe skipped for {sys.name}: b0 = {sq.b0} is not positive")
        return
    d = sys.d
    T_max = 30.0 / sq.b0
    x = np.linspace(0.5, -0.2, d)
    xi = np.linspace(-0.3, 0.4, d)

    def symmetry() -> Measurement:
        base = greens_function_probe(sys, x, xi, T_max)
        turn = rotation(sys.S, 0.7)
        moved = greens_function_probe(sys, turn @ x, turn @ xi, T_max)
        gap = float(spectral_norm(moved.value - base.value) / spectral_norm(base.value))
        return Measurement(gap, 1e-8, est_error=base.est_error + moved.est_error)

    book.check("Green's function rotation symmetry", "Green's function as time integral of H", symmetry)

    if sys.is_scalar and d == 3:

        def closed_form() -> Measurement:
            # e^{tS} fixes the origin, so G(0, xi) is the rotation-free kernel
            alpha, delta = complex(sys.lambdaA[0]), complex(sys.lambdaB[0])
            r = float(np.linalg.norm(xi))
            expected = -np.exp(-np.sqrt(delta / alpha) * r) / (4.0 * math.pi * alpha * r)
            value = greens_function_probe(sys, np.zeros(3), xi, T_max)
            return Measurement(_rel(complex(value.value[0, 0]), expected), 1e-8, est_error=value.est_error)

        book.check("Green's function closed form", "Green's function as time integral of H", closed_form)


# Bound constants


@suite("bounds")
def bounds_suite(sys: OUSystem, config: SuiteConfig, book: RecordBook) -> None:
    d = sys.d
    levels = [(0, 0, 0)] + [(1, 0, 0)] + [(2, 0, 0)] + ([(2, 0, 1)] if d > 1 else [])
    for level, i, j in levels:

        def l1_bound(level=level, i=i, j=j) -> Measurement:
            worst = 0.0
            rows = []
            for eta_p in L1_ETA_P:
                sq = spectral_quantities(sys, eta=eta_p, p=1.0)
                for t in L1_TIMES:
                    measured = weighted_kernel_l1(sys, level, eta_p, t, i, j)
                    bound = bound_C(level + 1, sq, t, delta_ij=int(i == j))
                    worst = max(worst, measured / bound)
                    rows.append([eta_p, t, measured, bound])
            return Measurement(worst, 1.0, detail={"rows": rows})

        name = f"C{level + 1}" + (f" i={i}, j={j}" if level == 2 else "")
        book.check(f"weighted kernel L1 bound {name}", "Weighted L1 bounds of K, K^i and K^{ji}", l1_bound)

    def large_time() -> Measurement:
        sq = spectral_quantities(sys, eta=1.0, p=1.0)
        scaled = [bound_C(1, sq, t) * t ** (-(d - 1) / 2) * math.exp((sq.b0 - sq.nu) * t) for t in (50.0, 100.0)]
        change = abs(scaled[1] / scaled[0] - 1.0)
        return Measurement(change, 0.1, detail={"scaled": scaled})

    def small_time() -> Measurement:
        sq = spectral_quantities(sys, eta=0.3, p=1.0)
        scaled = [bound_C(3, sq, t, delta_ij=1) * t for t in (1e-3, 1e-4)]
        change = abs(scaled[1] / scaled[0] - 1.0)
        return Measurement(change, 0.1, detail={"scaled": scaled})

    book.check("C1 large-time order", "C1(t) ~ t^((d-1)/2) e^{-(b0-nu)t}", large_time, tolerance=0.0)
    book.check("C3 small-time order", "C3(t) ~ 1/t as t -> 0", small_time, tolerance=0.0)

    for p in config.p_values:

        def envelope(p=p) -> Measurement:
            worst = 0.0
            detail = {}
            ts = np.geomspace(1e-3, 200.0, 400)
            for eta, mode in ((0.0, "cb_unweighted"), (0.3, "lp_weighted")):
                sq = spectral_quantities(sys, eta=eta, p=p)
                growth = omega_bound(sq, mode, p, 1.0, config.epsilon)
                ratios = [bound_C(4, sq, float(t), 1.0 if mode == "cb_unweighted" else p) / (growth["M"] * math.exp(growth["omega"] * t)) for t in ts]
                worst = max(worst, max(ratios))
                detail[mode] = growth
            return Measurement(worst, 1.0, detail=detail)

        book.check(f"growth envelope of C4, p={p:g}", "||T(t)|| <= M e^{omega t}", envelope)

        for offset in config.lambda_offsets:

            def laplace(p=p, offset=offset) -> Measurement:
                base = spectral_quantities(sys, eta=0.0, p=p)
                cap = admissible_eta_squared(base, offset[0], 0.0, config.vartheta)
                sq = spectral_quantities(sys, eta=0.8 * math.sqrt(cap), p=p)
                omega = omega_bound(sq, "lp_weighted", p, 1.0, config.epsilon)["omega"]
                result = improper_integral_check(sq, 1.0, config.vartheta, omega + offset[0], omega)
                ratio = max(result["integral_C4"] / result["bound_C7"], result["integral_C5"] / result["bound_C8"])
                return Measurement(ratio, 1.0, detail=result)

            book.check(
                f"Laplace bounds C7/C8, p={p:g}, offset={offset[0]:g}",
                "Laplace integrals of C4 and C5 bounded by C7 and C8",
                laplace,
            )

    def monotone() -> Measurement:
        sq = spectral_quantities(sys, eta=0.2, p=1.0)
        low = bound_C78(sq, 1.0, 1.0, 0.3)["C7"]
        high = bound_C78(sq, 1.0, 1.0, 0.6)["C7"]
        return Measurement(low, high, detail={"C7(0.3)": low, "C7(0.6)": high})

    book.check("C7 monotone in vartheta", "C7 increases with vartheta", monotone, tolerance=0.0)


# Semigroup


@suite("semigroup")
def semigroup_suite(sys: OUSystem, config: SuiteConfig, book: RecordBook) -> None:
    d = sys.d
    spec = capped_grid(config, d)
    settings = quadrature_settings(config)
    v = gaussian_bump(d, width=1.0, components=sys.N)
    samples = interior_spec(spec, max_count=5).points()

    def identity() -> Measurement:
        data = v.on_grid(spec)
        same = apply_semigroup(SemigroupQuery(sys, 0.0, data))
        return Measurement(float(np.max(np.abs(same.values - data.values))), 0.0)

    def constants() -> Measurement:
        c = np.linspace(1.0, 0.5, sys.N) * (1.0 + 0.5j)
        field_ = constant_field(d, c, 40.0)
        worst = 0.0
        for t in config.t_grid:
            expected = matrix_function(sys, lambda lam: np.exp(-lam * t), "B") @ c
            values = evaluate_semigroup(sys, field_, t, samples, ((),), settings).values[()]
            worst = max(worst, float(np.max(np.linalg.norm(values - expected, axis=-1))) / float(np.linalg.norm(expected)))
        return Measurement(worst, 1e-6)

    def composition() -> Measurement:
        return Measurement(semigroup_composition_residual(sys, v, 0.25, 0.25, spec, 2.0, settings), 1e-4)

    def factorization() -> Measurement:
        return Measurement(factorization_residual(sys, v, 0.5, samples, settings), 1e-8)

    book.check("semigroup identity at t=0", "T(0) = I", identity, tolerance=0.0)
    book.check("semigroup on constants", "T(t)c = e^{-Bt}c", constants)
    if d <= 2:
        # T(s)v is interpolated from the grid, too coarse for this check in 3-D
        book.check("semigroup composition", "T(t)T(s) = T(t+s)", composition)
    book.check("diffusion factorization", "[T(t)v](x) = [G(t,0)v](e^{tS}x)", factorization)

    norms = [(w, p) for w in suite_weights(config) for p in config.p_values]
    try:
        rows = boundedness_sweep(sys, v, norms, config.t_grid, spec, settings)
    except Exception as exc:
        book.fail("boundedness", "Weighted L^p boundedness of T(t)", exc)
        return
    for w, p in norms:
        selected = [row for row in rows if row["weight"] == w.label and row["p"] == p]
        for level, column in ((4, "ratio_C4"), (5, "ratio_C5"), (6, "ratio_C6")):

            def ratio(selected=selected, column=column) -> Measurement:
                worst = max(row[column] for row in selected)
                return Measurement(
                    worst,
                    1.0,
                    est_error=max(row["est_error"] for row in selected),
                    detail={"t": [row["t"] for row in selected], column: [row[column] for row in selected]},
                )

            book.check(f"boundedness C{level}, {w.label}, p={p:g}", "Weighted L^p boundedness of T(t)", ratio)


# Strong continuity


@suite("continuity")
def continuity_suite(sys: OUSystem, config: SuiteConfig, book: RecordBook) -> None:
    d = sys.d
    spec = capped_grid(config, d)
    settings = quadrature_settings(config)
    v = gaussian_bump(d, width=1.0, components=sys.N)
    data = v.on_grid(spec)
    cases = [(w, 2.0) for w in suite_weights(config)] + [(make_weight("unit"), None)]
    for w, p in cases:

        def probe(w=w, p=p) -> Measurement:
            distances = strong_continuity_probe(sys, v, w, p, CONTINUITY_TIMES, spec, settings)
            scale = weighted_norm(data, w, p)
            holds = _decreasing(distances) and distances[-1] < 0.05 * scale
            return Measurement(
                distances[-1] / scale,
                0.05,
                detail={"t": list(CONTINUITY_TIMES), "distances": distances, "norm_v": scale},
                passed=holds,
            )

        norm_label = "sup" if p is None else f"p={p:g}"
        book.check(f"strong continuity {w.label}, {norm_label}", "||T(t)v - v|| -> 0 as t -> 0", probe)


# Resolvent


def _growth_weight(w: WeightFunction) -> WeightFunction:
    # theta1 <= C theta2 must hold; a decaying theta2 serves as its own theta1
    decaying = w.kind in (WeightKind.EXP_ABS, WeightKind.EXP_SMOOTH) and w.mu > 0.0
    return w if decaying else make_weight("unit")


def _resolvent_query(sys: OUSystem, config: SuiteConfig, offset, theta2: WeightFunction, g, spec, p=2.0) -> ResolventQuery:
    theta1 = _growth_weight(theta2)
    exponent = 1.0 if p is None else p
    sq = spectral_quantities(sys, eta=theta1.eta, p=exponent)
    omega = growth_rate(sys, theta1, p, config.epsilon)["omega"]
    # Raise the real offset until theta2 meets the admissible decay rate
    needed = theta2.eta**2 * sq.a_max**2 * exponent**2 / (config.vartheta * sq.a0)
    margin = max(offset[0], 1.25 * needed)
    lam = complex(omega + margin, offset[1])
    return ResolventQuery(
        sys=sys,
        lam=lam,
        g=g,
        theta1=theta1,
        theta2=theta2,
        vartheta=config.vartheta,
        p=p,
        epsilon=config.epsilon,
        grid=spec,
        settings=quadrature_settings(config),
    )


@suite("resolvent")
def resolvent_suite(sys: OUSystem, config: SuiteConfig, book: RecordBook) -> None:
    d = sys.d
    spec = capped_grid(config, d, RESOLVENT_GRID_CAPS)
    g = gaussian_bump(d, width=1.0, components=sys.N)
    unit = make_weight("unit")

    for offset in config.lambda_offsets:
        for w in suite_weights(config):

            def estimate(offset=offset, w=w) -> Measurement:
                record = resolvent_estimate_check(_resolvent_query(sys, config, offset, w, g, spec), config.tolerance)
                return Measurement(record.measured, record.bound, record.est_error, record.detail, record.passed)

            book.check(f"resolvent estimate {w.label}, offset={offset}", RESOLVENT_ANCHOR, estimate)

        def residual(offset=offset) -> Measurement:
            q = _resolvent_query(sys, config, offset, unit, g, spec)
            points = interior_spec(spec, fraction=0.3, max_count=3).points()
            value = resolvent_residual(q, points)
            return Measurement(value, 1e-3, detail={"lambda": [q.lam.real, q.lam.imag]})

        book.check(f"resolvent residual, offset={offset}", "(lambda - L) R(lambda) g = g", residual)

    def pointwise() -> Measurement:
        offset = config.lambda_offsets[0]
        record = resolvent_estimate_check(_resolvent_query(sys, config, offset, unit, g, spec, p=None), config.tolerance)
        return Measurement(record.measured, record.bound, record.est_error, record.detail, record.passed)

    book.check("resolvent sup-norm and pointwise estimate", RESOLVENT_ANCHOR, pointwise)

    def constant() -> Measurement:
        c = np.linspace(1.0, 0.5, sys.N) * (1.0 - 0.25j)
        q = _resolvent_query(sys, config, [0.5, 0.0], unit, constant_field(d, c, 40.0), spec)
        q = replace(q, settings=QuadratureSettings(tol=1e-10, max_panels=64))
        points = np.vstack([np.zeros(d), 0.5 * np.ones(d)])
        values = apply_resolvent(q, points)
        expected = np.linalg.solve(q.lam * np.eye(sys.N) + sys.B, c)
        gap = float(np.max(np.linalg.norm(values - expected, axis=-1))) / float(np.linalg.norm(expected))
        return Measurement(gap, 1e-8, detail={"lambda": [q.lam.real, q.lam.imag]})

    book.check("resolvent on constants", "R(lambda)c = (lambda + B)^-1 c", constant)


# Entry points


def _failure(suite_name: str, system: str, exc: BaseException) -> VerificationRecord:
    return VerificationRecord(
        property=f"{suite_name} suite",
        anchor="suite execution",
        system=system,
        passed=False,
        error=describe_error(exc),
    )


def load_system(reference: str) -> OUSystem:
    return SystemDocument.load(resolve_system(reference)).to_system()


def run_suite(name: str, system_ref: Optional[str], config: SuiteConfig) -> List[VerificationRecord]:
    """
    Run one suite on one system (or once, for system-independent suites).

    System validation errors and unexpected suite failures come back as
    failing records.
    """
    entry = SUITES[name]
    label = system_ref or ""
    sys = None
    if entry.per_system:
        try:
            sys = load_system(system_ref)
        except Exception as exc:
            logger.error(f"System {system_ref} rejected: {describe_error(exc)}")
            record = _failure(name, label, exc)
            record.property = "system validation"
            return [record]
        label = sys.name
    book = RecordBook(label, config.tolerance)
    started = time.perf_counter()
    try:
        entry.func(sys, config, book)
    except Exception as exc:
        logger.exception(f"Suite {name} crashed on {label or 'no system'}")
        book.records.append(_failure(name, label, exc))
    logger.info(
        f"Suite {name} on {label or 'no system'}: {sum(r.passed for r in book.records)}/{len(book.records)} passed "
        f"in {time.perf_counter() - started:.1f} s"
    )
    return book.records
