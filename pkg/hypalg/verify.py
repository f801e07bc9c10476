"""Named invariant suites.

Each suite compares two independent routes to the same quantity (closed form
against quadrature, composition against a direct formula, a transform against
its inverse) and reports the largest disagreement. ``run_suite`` is what
``hypalg verify`` calls.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .algebra import (
    AlgebraElement,
    CentralCharges,
    FiniteLieAlgebra,
    StructureTable,
    bracket,
    cocycle,
    cocycle_by_quadrature,
    commuting_family,
    element_grades,
    get_algebra,
    graded_generator,
)
from .disk import (
    DiskIndex,
    DiskPoint,
    apply_bargmann,
    apply_disk_casimir,
    bargmann_action,
    bargmann_inner_product,
    bargmann_polynomial,
    disk_basis_function,
    disk_inner_product,
    disk_matrix_element_function,
    eval_disk_basis,
    eval_disk_matrix_element,
    flat_metric_det,
    measure_change,
    on_disk,
)
from .exceptions import ParameterError, VerificationFailure, WindowOverflow
from .losert_basis import (
    LosertIndex,
    Sector,
    basis_function,
    classify,
    indices_in_window,
    modes_in_window,
    radial_in_u,
    reduced_degree,
)
from .matrix_elements import MatrixElementIndex, matrix_element_function
from .numerics import DEFAULT_SPEC, ModeSum, SeparableFunction, gauss_legendre, halfline_rule
from .plancherel import SigmaGrid, forward, inverse
from .sl2_action import (
    LADDERS,
    DiffOperator,
    apply_numeric,
    casimir_by_composition,
    casimir_tridiagonal,
    ladder_coefficients,
    project,
    project_ladder,
)
from .sl2_reps import SeriesLabel, casimir_eigenvalue
from .tables import load_or_build

logger = logging.getLogger(__name__)

ADJOINT = {
    DiffOperator.L_PLUS: DiffOperator.L_MINUS,
    DiffOperator.L_MINUS: DiffOperator.L_PLUS,
    DiffOperator.R_PLUS: DiffOperator.R_MINUS,
    DiffOperator.R_MINUS: DiffOperator.R_PLUS,
}


@dataclass
class SuiteReport:
    suite: str
    cases: int
    max_residual: float
    tolerance: float
    details: Dict[str, Dict] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.cases > 0 and self.max_residual <= self.tolerance

    def to_dict(self) -> Dict:
        return {
            "suite": self.suite,
            "cases": self.cases,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "details": self.details,
        }


class _Tally:
    """Running (cases, max residual) per named check."""

    def __init__(self):
        self.checks: Dict[str, List[float]] = {}

    def add(self, check: str, residual: float) -> None:
        self.checks.setdefault(check, []).append(float(residual))

    def report(self, suite: str, tolerance: float, tolerances: Optional[Dict[str, float]] = None) -> SuiteReport:
        tolerances = tolerances or {}
        details = {}
        cases = 0
        worst = 0.0
        for check, residuals in self.checks.items():
            limit = tolerances.get(check, tolerance)
            largest = max(residuals)
            details[check] = {"cases": len(residuals), "max_residual": largest, "tolerance": limit}
            cases += len(residuals)
            # rescale so one threshold decides pass/fail across checks
            worst = max(worst, largest * tolerance / limit)
        return SuiteReport(suite, cases, worst, tolerance, details)


def _rng(options: Dict) -> np.random.Generator:
    return np.random.default_rng(options.get("seed", 0))


def _sample(rng: np.random.Generator, items: List, count: int) -> List:
    if count >= len(items):
        return list(items)
    picks = rng.choice(len(items), size=count, replace=False)
    return [items[i] for i in sorted(picks)]


def _d_perp_indices(window) -> List[LosertIndex]:
    return [idx for idx in indices_in_window(*window) if classify(idx) == Sector.D_PERP]


# --- orthonormality ---------------------------------------------------------

def _gram_entry(idx1: LosertIndex, idx2: LosertIndex) -> float:
    """int e1 e2 dx by Gauss-Legendre in u, exact for the polynomial integrand."""
    degree = reduced_degree(idx1) + reduced_degree(idx2) + int(round(abs(idx1.m - idx1.n))) + 2
    u, w = gauss_legendre(degree // 2 + 4, 0.0, 1.0)
    return float(np.sum(2.0 * w * radial_in_u(idx1, u) * radial_in_u(idx2, u) / (u * u)))


def orthonormality_suite(**options) -> SuiteReport:
    window = options.get("window") or (3, 3, 6)
    tolerance = options.get("tol", 1e-8)
    tally = _Tally()
    for m, n in modes_in_window(window[0], window[1]):
        indices = [LosertIndex.of(m, n, k) for k in range(int(window[2]) + 1)]
        for i, idx1 in enumerate(indices):
            for idx2 in indices[i:]:
                expected = 1.0 if idx1 == idx2 else 0.0
                check = "norm" if idx1 == idx2 else (
                    "cross_sector" if classify(idx1) != classify(idx2) else "orthogonality"
                )
                tally.add(check, abs(_gram_entry(idx1, idx2) - expected))
    # one adaptive-quadrature spot check per parity
    spec = options.get("spec", DEFAULT_SPEC)
    for idx in (LosertIndex.of(1, 2, 1), LosertIndex.of(0.5, 1.5, 2)):
        tally.add("quadrature", abs(project(idx, basis_function(idx), spec) - 1.0))
    return tally.report("orthonormality", tolerance)


# --- ladder -----------------------------------------------------------------

def ladder_suite(**options) -> SuiteReport:
    window = options.get("window") or (3, 3, 6)
    tolerance = options.get("tol", 1e-8)
    spec = options.get("spec", DEFAULT_SPEC)
    rng = _rng(options)
    tally = _Tally()
    for idx in _sample(rng, _d_perp_indices(window), int(options.get("samples", 50))):
        op = LADDERS[int(rng.integers(len(LADDERS)))]
        coefficients = ladder_coefficients(op, idx)
        for dk, value in (coefficients.primary_shift, coefficients.secondary_shift):
            k = idx.k + dk
            if k < 0:
                continue
            target = LosertIndex.of(coefficients.target_m, coefficients.target_n, k)
            tally.add("closed_vs_quadrature", abs(project_ladder(op, idx, target, spec) - value))
            if value == 0.0 or classify(target) != Sector.D_PERP:
                continue
            back = dict(ladder_coefficients(ADJOINT[op], target).targets()).get(idx, 0.0)
            tally.add("hermiticity", abs(back - value))
    # beta of L+ vanishes at the sector boundary k = n - eps
    for idx in _d_perp_indices(window):
        if idx.m > idx.n > 0.5 and idx.k == idx.n - idx.epsilon:
            tally.add("boundary", abs(ladder_coefficients(DiffOperator.L_PLUS, idx).secondary_shift[1]))
    return tally.report("ladder", tolerance, {"boundary": 1e-12, "hermiticity": 1e-10})


# --- casimir ----------------------------------------------------------------

def _eigen_cases() -> List[MatrixElementIndex]:
    cases = []
    for lam in (1.0, 1.5, 2.0, 2.5):
        for label in (SeriesLabel.discrete_plus(lam), SeriesLabel.discrete_minus(lam)):
            sign = 1 if label.eta > 0 else -1
            cases.append(MatrixElementIndex.of(label, sign * lam, sign * (lam + 1)))
    for sigma in (0.5, 1.0, 2.0):
        cases.append(MatrixElementIndex.of(SeriesLabel.principal(sigma, 0.0), 1, -1))
        cases.append(MatrixElementIndex.of(SeriesLabel.principal(sigma, 0.5), 0.5, 1.5))
    return cases


def casimir_suite(**options) -> SuiteReport:
    window = options.get("window") or (3, 3, 6)
    tolerance = options.get("tol", 1e-8)
    spec = options.get("spec", DEFAULT_SPEC)
    rng = _rng(options)
    tally = _Tally()
    for idx in _sample(rng, _d_perp_indices(window), int(options.get("samples", 20))):
        closed = casimir_tridiagonal(idx)
        composed = casimir_by_composition(idx)
        applied = apply_numeric(DiffOperator.Q, basis_function(idx))
        analytic = tuple(
            project(idx.with_k(k), applied, spec) if k >= 0 else 0.0
            for k in (idx.k + 1, idx.k, idx.k - 1)
        )
        tally.add("closed_vs_composition", max(abs(a - b) for a, b in zip(closed, composed)))
        tally.add("closed_vs_differential", max(abs(a - b) for a, b in zip(closed, analytic)))
    x = np.linspace(1.5, 20.0, 12)
    for me in _eigen_cases():
        f = matrix_element_function(me)
        lhs = apply_numeric(DiffOperator.Q, f).radial(x)
        rhs = casimir_eigenvalue(me.label) * f.radial(x)
        scale = max(float(np.max(np.abs(rhs))), 1.0)
        tally.add("eigenvalue", float(np.max(np.abs(lhs - rhs))) / scale)
    return tally.report("casimir", tolerance)


# --- plancherel round trip --------------------------------------------------

def schwartz_corpus() -> ModeSum:
    """Smooth test functions decaying like exp(-x/2), one per mode type."""

    def bump(a: float, scale: float) -> Callable[[np.ndarray], np.ndarray]:
        return lambda x: scale * ((x - 1) / (x + 1)) ** (a / 2) * np.exp(-(np.asarray(x, dtype=float) - 1) / 2)

    return ModeSum(
        (
            SeparableFunction(0, 0, bump(0, 1.0), max_order=0),
            SeparableFunction(1, 1, bump(0, 0.5), max_order=0),
            SeparableFunction(1, 0, bump(1, 0.8), max_order=0),
            SeparableFunction(0.5, 0.5, bump(0, 0.7), max_order=0),
        )
    )


def roundtrip_error(f: ModeSum, g: ModeSum, far_panels: int = 8) -> float:
    """Relative L2 error over the modes of f on a fixed x-rule.

    Two zero functions agree exactly; a zero reference against a non-zero
    candidate has no relative error and raises ParameterError.
    """
    x, w = halfline_rule(far_panels=far_panels, level=0)
    num = den = 0.0
    for m, n in f.modes():
        fr, gr = f.radial_of(m, n)(x), g.radial_of(m, n)(x)
        num += float(np.sum(w * np.abs(fr - gr) ** 2))
        den += float(np.sum(w * np.abs(fr) ** 2))
    if den == 0.0:
        if num == 0.0:
            return 0.0
        raise ParameterError("Relative round-trip error is undefined for a zero reference function.")
    return math.sqrt(num / den)


def plancherel_suite(**options) -> SuiteReport:
    window = options.get("window") or (2, 2, 0)
    tolerance = options.get("tol", 1e-3)
    grid = options.get("sigma_grid") or SigmaGrid()
    corpus = options.get("corpus") or schwartz_corpus()
    tally = _Tally()
    components = forward(corpus, window, grid, options.get("threads"))
    tally.add("roundtrip", roundtrip_error(corpus, inverse(components)))
    report = tally.report("plancherel-roundtrip", tolerance)
    report.details["roundtrip"]["tail_estimate"] = components.meta["tail_estimate"]
    report.details["roundtrip"]["sigma_grid"] = grid.to_dict()
    return report


# --- algebra ----------------------------------------------------------------

def _algebra_and_table(options: Dict, default_window) -> Tuple[FiniteLieAlgebra, StructureTable]:
    algebra = options.get("algebra") or "su2"
    if isinstance(algebra, str):
        algebra = get_algebra(algebra)
    table = options.get("table")
    if table is None:
        window = options.get("window") or default_window
        table = load_or_build(window, options.get("table_tol", 1e-8), options.get("cache_dir"), options.get("threads"))
    return algebra, table


def _random_generator(rng: np.random.Generator, algebra: FiniteLieAlgebra, indices: List[LosertIndex]) -> AlgebraElement:
    return AlgebraElement.generator(int(rng.integers(algebra.dim)), indices[int(rng.integers(len(indices)))])


def jacobi_suite(**options) -> SuiteReport:
    algebra, table = _algebra_and_table(options, (2, 2, 10))
    tolerance = options.get("tol", 1e-6)
    samples = int(options.get("samples", 100))
    rng = _rng(options)
    # low degrees keep nested products inside the table window
    indices = [idx for idx in indices_in_window(*table.window) if idx.k <= max(1, table.window[2] // 4)]
    tally = _Tally()
    skipped = 0
    tally.add("finite_algebra", algebra.jacobi_residual())
    for _ in range(20 * samples):
        if len(tally.checks.get("jacobi", [])) >= samples:
            break
        x, y, z = (_random_generator(rng, algebra, indices) for _ in range(3))
        try:
            total = (
                bracket(x, bracket(y, z, algebra, table), algebra, table)
                + bracket(y, bracket(z, x, algebra, table), algebra, table)
                + bracket(z, bracket(x, y, algebra, table), algebra, table)
            )
            swapped = bracket(x, y, algebra, table) + bracket(y, x, algebra, table)
        except WindowOverflow:
            skipped += 1
            continue
        tally.add("jacobi", total.norm())
        tally.add("antisymmetry", swapped.norm())
    report = tally.report("jacobi-identity", tolerance, {"finite_algebra": 1e-12, "antisymmetry": 1e-14})
    report.details["skipped_overflow"] = {"cases": skipped}
    report.details["algebra"] = {"name": algebra.name}
    return report


def _expected_root(alpha, beta, roots) -> Optional[Tuple[float, ...]]:
    total = tuple(a + b for a, b in zip(alpha, beta))
    if all(t == 0 for t in total) or total in roots:
        return total
    return None


def grading_suite(**options) -> SuiteReport:
    algebra, table = _algebra_and_table(options, (2, 2, 10))
    tolerance = options.get("tol", 1e-10)
    spec = options.get("spec", DEFAULT_SPEC)
    rng = _rng(options)
    samples = int(options.get("samples", 50))
    zero = tuple(0.0 for _ in range(algebra.cartan.rank))
    labels = [zero] + [tuple(r) for r in algebra.cartan.roots]
    indices = [idx for idx in indices_in_window(*table.window) if idx.k <= max(1, table.window[2] // 4)]
    tally = _Tally()
    for _ in range(samples):
        alpha, beta = (labels[int(rng.integers(len(labels)))] for _ in range(2))
        i1, i2 = (indices[int(rng.integers(len(indices)))] for _ in range(2))
        x, y = graded_generator(algebra, alpha, i1), graded_generator(algebra, beta, i2)
        try:
            result = bracket(x, y, algebra, table)
        except WindowOverflow:
            continue
        target = _expected_root(alpha, beta, algebra.cartan.roots)
        stray = [
            abs(v) for (root, m, n), v in element_grades(result, algebra).items()
            if target is None or (root, m, n) != (target, i1.m + i2.m, i1.n + i2.n)
        ]
        tally.add("grading", max(stray, default=0.0))
        for charges, value in ((CentralCharges(1.0, 0.0), result.kl), (CentralCharges(0.0, 1.0), result.kr)):
            tally.add("central_term", abs(cocycle(x, y, charges, algebra) - value))
    family = commuting_family(algebra, table.window)
    for i, a in enumerate(family):
        for b in family[i + 1:]:
            tally.add("commuting_family", bracket(a, b, algebra, table).norm())
    charges = CentralCharges(1.0, 0.5)
    for idx in (LosertIndex.of(1, 1, 0), LosertIndex.of(0.5, -1.5, 1)):
        a, b = algebra.cartan.cartan_indices[0], algebra.cartan.cartan_indices[0]
        x = AlgebraElement.generator(a, idx)
        y = AlgebraElement.generator(b, idx.conjugate())
        closed = cocycle(x, y, charges, algebra)
        tally.add("cocycle_quadrature", abs(cocycle_by_quadrature(x, y, charges, algebra, spec) - closed))
    return tally.report("grading", tolerance, {"cocycle_quadrature": 1e-8})


# --- disk -------------------------------------------------------------------

def disk_suite(**options) -> SuiteReport:
    tolerance = options.get("tol", 1e-8)
    spec = options.get("spec", DEFAULT_SPEC)
    n_max, k_max = int(options.get("n_max", 4)), int(options.get("k_max", 6))
    tally = _Tally()
    for n in range(-n_max, n_max + 1):
        basis = [disk_basis_function(DiskIndex(n, k)) for k in range(k_max + 1)]
        for i, f in enumerate(basis):
            for j in range(i, len(basis)):
                expected = 1.0 if i == j else 0.0
                tally.add("orthonormality", abs(disk_inner_product(f, basis[j], spec) - expected))

    points = DiskPoint(np.array([0.1, 0.35, 0.6, 0.85]), np.array([0.3, 1.1, 2.0, -0.7]))
    for n in (-2, 0, 1, 3):
        for k in (0, 2):
            idx = DiskIndex(n, k)
            direct = eval_disk_basis(idx, points)
            via_group = on_disk(disk_basis_function(idx))(points)
            tally.add("group_reduction", float(np.max(np.abs(direct - via_group))))
        for sigma in (0.5, 1.0, 2.0):
            psi = on_disk(disk_matrix_element_function(n, sigma))
            tally.add("group_reduction", float(np.max(np.abs(eval_disk_matrix_element(n, sigma, points) - psi(points)))))
            applied = apply_disk_casimir(psi)(points)
            expected = -(0.25 + sigma ** 2) * psi(points)
            tally.add("laplace_beltrami", float(np.max(np.abs(applied - expected))))

    lam = float(options.get("bargmann_lambda", 1.0))
    for n in range(5):
        fn = bargmann_polynomial(n, lam)
        for n2 in range(n, 5):
            expected = 1.0 if n == n2 else 0.0
            tally.add("bargmann_orthonormality", abs(bargmann_inner_product(fn, bargmann_polynomial(n2, lam), lam) - expected))
        for generator in ("K0", "K+", "K-"):
            coefficient, target = bargmann_action(generator, n, lam)
            expected = bargmann_polynomial(target, lam) * coefficient if target is not None else np.zeros(1)
            applied = apply_bargmann(generator, fn, lam)
            size = max(applied.size, expected.size)
            tally.add(
                "bargmann_action",
                float(np.max(np.abs(np.pad(applied, (0, size - applied.size)) - np.pad(expected, (0, size - expected.size))))),
            )

    transfer = measure_change(flat_metric_det, spec=spec)
    flat = [DiskIndex(0, 0), DiskIndex(1, 0), DiskIndex(0, 1)]
    for i, i1 in enumerate(flat):
        for i2 in flat[i:]:
            expected = 1.0 if i1 == i2 else 0.0
            value = transfer.inner_product(transfer.basis(i1), transfer.basis(i2), spec)
            tally.add("measure_change", abs(value - expected))
    return tally.report("disk", tolerance, {"laplace_beltrami": 1e-6})


SUITES: Dict[str, Callable[..., SuiteReport]] = {
    "orthonormality": orthonormality_suite,
    "ladder": ladder_suite,
    "casimir": casimir_suite,
    "plancherel-roundtrip": plancherel_suite,
    "jacobi-identity": jacobi_suite,
    "grading": grading_suite,
    "disk": disk_suite,
}
ALIASES = {"jacobi": "jacobi-identity", "plancherel": "plancherel-roundtrip"}
SUITE_NAMES = tuple(SUITES) + tuple(ALIASES)


def run_suite(name: str, raise_on_failure: bool = False, **options) -> SuiteReport:
    """Run one named suite.

    Options are suite-specific keywords (window, samples, tol, seed, spec,
    sigma_grid, algebra, table, cache_dir, threads); missing ones take the
    suite's defaults.

    Raises:
        ValueError: for an unknown suite name.
        VerificationFailure: if ``raise_on_failure`` and a residual exceeds its tolerance.
    """
    key = ALIASES.get(name, name)
    if key not in SUITES:
        raise ValueError(f"Unknown suite '{name}'. Known suites: {', '.join(SUITE_NAMES)}.")
    logger.info(f"Running verification suite '{key}'")
    report = SUITES[key](**{k: v for k, v in options.items() if v is not None})
    logger.info(f"Suite '{key}': {report.cases} cases, max residual {report.max_residual:.3e}")
    if raise_on_failure and not report.passed:
        raise VerificationFailure(
            f"Suite '{key}' failed: max residual {report.max_residual:.3e} exceeds {report.tolerance:.1e}."
        )
    return report
