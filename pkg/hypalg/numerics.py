"""Special functions and quadrature shared by the rest of hypalg.

Gamma and Jacobi evaluations lean on scipy.special; the Gauss hypergeometric
function is summed here because its parameters are complex and only the
negative real axis is needed. Integrals over the group manifold are reduced to
radial integrals over x = cosh 2rho in [1, inf).
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special

from .exceptions import (
    DifferentiationError,
    DomainError,
    NonConvergence,
    NumericOverflow,
    ParameterError,
    PoleError,
)

logger = logging.getLogger(__name__)

POLE_TOLERANCE = 1e-14
SERIES_TOLERANCE = 1e-17
MAX_SERIES_TERMS = 20000
# Beyond these the Pfaff (resp. connection) series converges too slowly.
PFAFF_MAX_W = 0.9
CONNECTION_MAX_T = 0.9

NODE_RULES = ("gauss-legendre-composite", "tanh-sinh")
PANEL_NODES = 32
NEAR_PANELS = 40
FAR_PANEL_CAP = 200
FAR_PANEL_BLOCK = 8
ANGULAR_NODES = 32
FD_STEP = 1e-3

Number = Union[float, complex]


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_refinements: int = 6
    node_rule: str = "gauss-legendre-composite"

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive.")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive.")
        if self.max_refinements < 1:
            raise ValueError("max_refinements must be at least 1.")
        if self.node_rule not in NODE_RULES:
            raise ValueError(f"Unknown node rule '{self.node_rule}'. Expected one of {NODE_RULES}.")

    def to_dict(self) -> Dict:
        return {
            "abs_tol": self.abs_tol,
            "rel_tol": self.rel_tol,
            "max_refinements": self.max_refinements,
            "node_rule": self.node_rule,
        }


DEFAULT_SPEC = QuadratureSpec()


# --- Gamma -----------------------------------------------------------------

def _is_pole(z: complex) -> bool:
    z = complex(z)
    if abs(z.imag) > POLE_TOLERANCE or z.real > POLE_TOLERANCE:
        return False
    return abs(z.real - round(z.real)) <= POLE_TOLERANCE


def _nonpositive_integer(z: complex, tol: float = 1e-12) -> Optional[int]:
    """Return N when z == -N for an integer N >= 0, else None."""
    z = complex(z)
    if abs(z.imag) > tol or z.real > tol:
        return None
    nearest = round(z.real)
    if abs(z.real - nearest) > tol:
        return None
    return -int(nearest)


def _is_integer(z: complex, tol: float = 1e-12) -> bool:
    z = complex(z)
    return abs(z.imag) <= tol and abs(z.real - round(z.real)) <= tol


def gamma_complex(z: Number) -> complex:
    """Gamma function for complex arguments.

    Raises:
        PoleError: if z is within 1e-14 of a non-positive integer.
    """
    if _is_pole(z):
        raise PoleError(f"Gamma has a pole at z = {complex(z).real:.0f}.")
    value = complex(special.gamma(complex(z)))
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise NumericOverflow(f"Gamma({z}) overflows double precision.")
    return value


def log_gamma_complex(z: Number) -> complex:
    """Principal branch of log Gamma(z)."""
    if _is_pole(z):
        raise PoleError(f"log Gamma has a pole at z = {complex(z).real:.0f}.")
    return complex(special.loggamma(complex(z)))


def gamma_ratio(numerator: Sequence[Number], denominator: Sequence[Number]) -> complex:
    """prod Gamma(numerator) / prod Gamma(denominator), evaluated in log space.

    A pole in the denominator makes the ratio vanish.
    """
    log_total = 0j
    for z in denominator:
        if _is_pole(z):
            return 0j
        log_total -= special.loggamma(complex(z))
    for z in numerator:
        log_total += log_gamma_complex(z)
    if log_total.real > 700:
        raise NumericOverflow("Gamma ratio overflows double precision.")
    return complex(np.exp(log_total))


def pochhammer(a: Number, j: int) -> complex:
    value = 1 + 0j
    for i in range(j):
        value *= a + i
    return value


# --- Gauss hypergeometric function ------------------------------------------

def _series(a: complex, b: complex, c: complex, w: np.ndarray) -> np.ndarray:
    """Sum the hypergeometric series at every w, stopping once the tail is negligible."""
    total = np.ones(w.shape, dtype=complex)
    term = np.ones(w.shape, dtype=complex)
    quiet = np.zeros(w.shape, dtype=int)
    for j in range(MAX_SERIES_TERMS):
        term = term * ((a + j) * (b + j) / ((c + j) * (j + 1))) * w
        total = total + term
        small = np.abs(term) <= SERIES_TOLERANCE * np.abs(total)
        quiet = np.where(small, quiet + 1, 0)
        if np.all(quiet >= 2):
            return total
    raise NonConvergence(
        f"2F1({a}, {b}; {c}) series did not converge in {MAX_SERIES_TERMS} terms."
    )


def _polynomial(a: complex, b: complex, c: complex, z: np.ndarray, degree: int) -> np.ndarray:
    total = np.ones(z.shape, dtype=complex)
    term = np.ones(z.shape, dtype=complex)
    for j in range(degree):
        term = term * ((a + j) * (b + j) / ((c + j) * (j + 1))) * z
        total = total + term
    return total


def _hyp2f1_array(a: complex, b: complex, c: complex, z: np.ndarray) -> np.ndarray:
    degree = None
    for p in (a, b):
        n = _nonpositive_integer(p)
        if n is not None and (degree is None or n < degree):
            degree = n
    c_pole = _nonpositive_integer(c)
    if c_pole is not None and (degree is None or degree > c_pole):
        raise ParameterError(f"2F1 lower parameter c = {c} blocks the series.")
    if degree is not None:
        return _polynomial(a, b, c, z, degree)

    result = np.ones(z.shape, dtype=complex)
    active = z < 0
    if not np.any(active):
        return result
    zs = z[active]
    w = zs / (zs - 1.0)
    t = 1.0 / (1.0 - zs)

    # log of the largest series term, roughly, for each route
    pfaff_growth = 2.0 * np.sqrt(abs(a) * abs(c - b) * w)
    connection_ok = not _is_integer(b - a)
    if connection_ok:
        spread = max(
            abs(a) * abs(c - b) / abs(a - b + 1),
            abs(b) * abs(c - a) / abs(b - a + 1),
        )
        connection_growth = spread * t
        use_connection = (t <= CONNECTION_MAX_T) & (
            (connection_growth < pfaff_growth) | (w > PFAFF_MAX_W)
        )
    else:
        use_connection = np.zeros(zs.shape, dtype=bool)

    values = np.empty(zs.shape, dtype=complex)
    pfaff = ~use_connection
    if np.any(pfaff):
        wp = w[pfaff]
        values[pfaff] = np.exp(-a * np.log1p(-zs[pfaff])) * _series(a, c - b, c, wp)
    if np.any(use_connection):
        tc = t[use_connection]
        log_one_minus_z = np.log1p(-zs[use_connection])
        first = gamma_ratio([c, b - a], [b, c - a])
        second = gamma_ratio([c, a - b], [a, c - b])
        part = np.zeros(tc.shape, dtype=complex)
        if first != 0:
            part += first * np.exp(-a * log_one_minus_z) * _series(a, c - b, a - b + 1, tc)
        if second != 0:
            part += second * np.exp(-b * log_one_minus_z) * _series(b, c - a, b - a + 1, tc)
        values[use_connection] = part
    result[active] = values
    return result


def hyp2f1(a: Number, b: Number, c: Number, z) -> Union[complex, np.ndarray]:
    """Gauss hypergeometric function 2F1(a, b; c; z) for real z <= 0.

    Terminating series are summed exactly as polynomials. Otherwise the Pfaff
    transformation or the connection formula in 1/(1-z) is used, whichever
    series has the smaller terms at that point.

    Args:
        a, b, c: complex parameters.
        z: real scalar or array with z <= 0.

    Raises:
        DomainError: if any z > 0.
        ParameterError: if c is a non-positive integer not preceded by termination.
    """
    a, b, c = complex(a), complex(b), complex(c)
    z_arr = np.asarray(z, dtype=float)
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr)
    if np.any(z_arr > 0):
        raise DomainError("2F1 is only evaluated for z <= 0.")
    values = _hyp2f1_array(a, b, c, z_arr)
    if not np.all(np.isfinite(values)):
        raise NumericOverflow(f"2F1({a}, {b}; {c}; z) overflows double precision.")
    return complex(values[0]) if scalar else values


def hyp2f1_derivative(a: Number, b: Number, c: Number, z, order: int = 1):
    """d^order/dz^order of 2F1 via the contiguous shift (a+j, b+j; c+j)."""
    coefficient = pochhammer(a, order) * pochhammer(b, order) / pochhammer(c, order)
    if coefficient == 0:
        z_arr = np.asarray(z, dtype=float)
        return 0j if z_arr.ndim == 0 else np.zeros(z_arr.shape, dtype=complex)
    return coefficient * hyp2f1(a + order, b + order, c + order, z)


# --- Jacobi polynomials -----------------------------------------------------

def jacobi_p(k: int, alpha: float, beta: float, x):
    """Jacobi polynomial P_k^{(alpha, beta)}(x) for any real x.

    scipy's evaluation is used inside the classical range; elsewhere, and for
    negative parameters, the terminating hypergeometric series in (1-x)/2 is
    summed directly. When alpha+1 is a non-positive integer that series is
    singular and the two-sided binomial sum is used instead.
    """
    if k < 0:
        raise ParameterError(f"Jacobi degree must be non-negative, got {k}.")
    x_arr = np.asarray(x, dtype=float)
    if k == 0:
        return np.ones_like(x_arr) if x_arr.ndim else 1.0
    if alpha > -1 and beta > -1 and np.all(np.abs(x_arr) <= 1.0):
        values = special.eval_jacobi(k, alpha, beta, x_arr)
    elif _nonpositive_integer(alpha + 1) is not None:
        # (alpha+1)_j vanishes; the binomial form has no such denominator.
        lower, upper = (x_arr - 1.0) / 2.0, (x_arr + 1.0) / 2.0
        values = np.zeros_like(x_arr)
        for j in range(k + 1):
            values = values + special.binom(k + alpha, k - j) * special.binom(k + beta, j) * lower ** j * upper ** (k - j)
    else:
        y = (1.0 - x_arr) / 2.0
        term = np.ones_like(y)
        total = np.ones_like(y)
        for j in range(k):
            term = term * ((-k + j) * (k + alpha + beta + 1 + j) / ((alpha + 1 + j) * (j + 1))) * y
            total = total + term
        lead = special.binom(k + alpha, k)
        values = lead * total
    if not np.all(np.isfinite(values)):
        raise NumericOverflow(f"P_{k}^({alpha},{beta}) overflows double precision.")
    return values if x_arr.ndim else float(values)


def jacobi_p_derivative(k: int, alpha: float, beta: float, x, order: int = 1):
    """d^order/dx^order P_k^{(alpha,beta)}(x)."""
    if order > k:
        x_arr = np.asarray(x, dtype=float)
        return np.zeros_like(x_arr) if x_arr.ndim else 0.0
    factor = float(pochhammer(k + alpha + beta + 1, order).real) / 2.0 ** order
    return factor * jacobi_p(k - order, alpha + order, beta + order, x)


# --- Quadrature -------------------------------------------------------------

@lru_cache(maxsize=None)
def _leggauss(n: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(n: int, a: float, b: float) -> Tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre nodes and weights on [a, b]."""
    nodes, weights = _leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (nodes + 1.0), half * weights


def _panel_rule(a: float, b: float, level: int) -> Tuple[np.ndarray, np.ndarray]:
    pieces = 2 ** level
    edges = np.linspace(a, b, pieces + 1)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        nodes, weights = gauss_legendre(PANEL_NODES, lo, hi)
        xs.append(nodes)
        ws.append(weights)
    return np.concatenate(xs), np.concatenate(ws)


def _near_panels() -> List[Tuple[float, float]]:
    # t = x - 1 on [0, 1], graded toward t = 0
    panels = [(0.0, 2.0 ** -NEAR_PANELS)]
    for j in range(NEAR_PANELS - 1, -1, -1):
        panels.append((2.0 ** -(j + 1), 2.0 ** -j))
    return panels


def _far_panel(j: int) -> Tuple[float, float]:
    # u = 1/x on (0, 1/2]
    return 2.0 ** -(j + 2), 2.0 ** -(j + 1)


def _near_rule(level: int) -> Tuple[np.ndarray, np.ndarray]:
    xs, ws = [], []
    for lo, hi in _near_panels():
        t, w = _panel_rule(lo, hi, level)
        xs.append(1.0 + t)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def _far_rule(panels: Iterable[int], level: int) -> Tuple[np.ndarray, np.ndarray]:
    xs, ws = [], []
    for j in panels:
        lo, hi = _far_panel(j)
        u, w = _panel_rule(lo, hi, level)
        xs.append(1.0 / u)
        ws.append(w / u ** 2)
    if not xs:
        return np.empty(0), np.empty(0)
    return np.concatenate(xs), np.concatenate(ws)


def halfline_rule(far_panels: int = 60, level: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """Fixed composite Gauss-Legendre rule for integrals over x in [1, inf).

    Used where the same integrand family is integrated many times (transforms),
    so that node values can be shared.
    """
    xn, wn = _near_rule(level)
    xf, wf = _far_rule(range(far_panels), level)
    return np.concatenate([xn, xf]), np.concatenate([wn, wf])


def _tolerance(spec: QuadratureSpec, value) -> float:
    return spec.abs_tol + spec.rel_tol * abs(value)


def _far_extent(g: Callable, spec: QuadratureSpec, near_value) -> int:
    """Number of far panels needed before the integrand contribution dies out."""
    total = near_value
    quiet = 0
    j = 0
    while j < FAR_PANEL_CAP:
        block = range(j, min(j + FAR_PANEL_BLOCK, FAR_PANEL_CAP))
        for jj in block:
            x, w = _far_rule([jj], 0)
            contribution = np.sum(w * g(x))
            total = total + contribution
            if abs(contribution) <= 0.1 * _tolerance(spec, total):
                quiet += 1
            else:
                quiet = 0
            if quiet >= 3:
                return jj + 1
        j = block.stop
    raise NonConvergence(
        f"Integrand has not decayed after {FAR_PANEL_CAP} far panels (x ~ 2^{FAR_PANEL_CAP})."
    )


def _integrate_x_gauss(g: Callable, spec: QuadratureSpec):
    xn, wn = _near_rule(0)
    near = np.sum(wn * g(xn))
    far_count = _far_extent(g, spec, near)
    previous = None
    for level in range(spec.max_refinements + 1):
        xn, wn = _near_rule(level)
        xf, wf = _far_rule(range(far_count), level)
        value = np.sum(wn * g(xn)) + np.sum(wf * g(xf))
        if previous is not None and abs(value - previous) <= _tolerance(spec, value):
            logger.debug(f"integrate_x converged at level {level} with {far_count} far panels")
            return value
        previous = value
    raise NonConvergence(
        f"Quadrature did not reach abs_tol={spec.abs_tol}, rel_tol={spec.rel_tol} "
        f"after {spec.max_refinements} refinements."
    )


def _integrate_x_tanh_sinh(g: Callable, spec: QuadratureSpec):
    # x = 1 + exp(pi/2 sinh s)
    previous = None
    span = 4.5
    for level in range(spec.max_refinements + 1):
        h = 0.5 / 2 ** level
        s = np.arange(-span, span + h / 2, h)
        e = np.exp(0.5 * np.pi * np.sinh(s))
        x = 1.0 + e
        weights = h * e * 0.5 * np.pi * np.cosh(s)
        finite = np.isfinite(x) & (weights > 0)
        value = np.sum(weights[finite] * g(x[finite]))
        if previous is not None and abs(value - previous) <= _tolerance(spec, value):
            return value
        previous = value
    raise NonConvergence("tanh-sinh quadrature did not converge.")


def _as_result(value):
    value = complex(value)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise NonConvergence("Quadrature produced a non-finite value.")
    return value.real if value.imag == 0 else value


def integrate_x(g: Callable[[np.ndarray], np.ndarray], spec: QuadratureSpec = DEFAULT_SPEC):
    """Integral of g(x) over x in [1, inf).

    The composite rule splits [1, 2] into panels graded toward x = 1 and maps
    [2, inf) to u = 1/x with dyadic panels, added until three consecutive
    panels are negligible. All panels are then refined together until two
    successive levels agree.

    Raises:
        NonConvergence: if the refinement budget is exhausted or g does not decay.
    """
    if spec.node_rule == "tanh-sinh":
        return _as_result(_integrate_x_tanh_sinh(g, spec))
    return _as_result(_integrate_x_gauss(g, spec))


def rho_of_x(x):
    return 0.5 * np.arccosh(x)


def integrate_halfline(f: Callable[[np.ndarray], np.ndarray], spec: QuadratureSpec = DEFAULT_SPEC):
    """Integral of f(rho) cosh(rho) sinh(rho) over rho in [0, inf)."""
    return integrate_x(lambda x: 0.25 * f(rho_of_x(x)), spec)


# --- Functions on the group -------------------------------------------------

@dataclass(frozen=True)
class GroupPoint:
    """Point (rho, phi1, phi2) of the hyperboloid; fields may be numpy arrays."""

    rho: Union[float, np.ndarray]
    phi1: Union[float, np.ndarray] = 0.0
    phi2: Union[float, np.ndarray] = 0.0

    @classmethod
    def from_x(cls, x, phi1=0.0, phi2=0.0) -> "GroupPoint":
        return cls(rho_of_x(np.asarray(x, dtype=float)), phi1, phi2)

    @property
    def x(self):
        return np.cosh(2.0 * np.asarray(self.rho, dtype=float))


def phase_factor(m: float, n: float, phi1, phi2):
    return np.exp(1j * ((m + n) * np.asarray(phi1) + (m - n) * np.asarray(phi2)))


def _finite_difference_jet(fun: Callable, rho, order: int) -> Tuple[np.ndarray, ...]:
    rho = np.asarray(rho, dtype=float)
    h = FD_STEP
    if order > 0 and np.any(rho - 2 * h < 0):
        raise DifferentiationError(
            f"Finite-difference stencil of width {2 * h} leaves rho >= 0 at rho = {np.min(rho)}."
        )
    f0 = fun(rho)
    if order == 0:
        return (f0,)
    fm2, fm1, fp1, fp2 = (fun(rho + s * h) for s in (-2, -1, 1, 2))
    d1 = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h)
    if order == 1:
        return f0, d1
    d2 = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h)
    return f0, d1, d2


@dataclass(frozen=True)
class SeparableFunction:
    """Pure phase e^{i(m+n)phi1 + i(m-n)phi2} times a radial function of x.

    ``jet(rho, order)`` returns (f, f', f'') up to ``order`` in rho when an
    analytic derivative is available; otherwise derivatives fall back to
    five-point finite differences.
    """

    m: float
    n: float
    radial: Callable[[np.ndarray], np.ndarray]
    jet: Optional[Callable[[np.ndarray, int], Tuple[np.ndarray, ...]]] = None
    max_order: int = 2

    def __call__(self, p: GroupPoint):
        return phase_factor(self.m, self.n, p.phi1, p.phi2) * self.radial(p.x)

    def radial_rho(self, rho):
        return self.radial(np.cosh(2.0 * np.asarray(rho, dtype=float)))

    def derivatives(self, rho, order: int) -> Tuple[np.ndarray, ...]:
        if self.jet is not None and order <= self.max_order:
            return self.jet(np.asarray(rho, dtype=float), order)
        return _finite_difference_jet(self.radial_rho, rho, order)

    def scaled(self, factor: Number) -> "SeparableFunction":
        radial, jet = self.radial, self.jet
        scaled_jet = None
        if jet is not None:
            scaled_jet = lambda rho, order: tuple(factor * d for d in jet(rho, order))
        return SeparableFunction(self.m, self.n, lambda x: factor * radial(x), scaled_jet, self.max_order)


@dataclass(frozen=True)
class ModeSum:
    """Finite sum of separable functions."""

    terms: Tuple[SeparableFunction, ...] = ()

    def __call__(self, p: GroupPoint):
        total = 0j
        for term in self.terms:
            total = total + term(p)
        return total

    def modes(self) -> Dict[Tuple[float, float], List[SeparableFunction]]:
        grouped: Dict[Tuple[float, float], List[SeparableFunction]] = {}
        for term in self.terms:
            grouped.setdefault((term.m, term.n), []).append(term)
        return grouped

    def radial_of(self, m: float, n: float) -> Callable[[np.ndarray], np.ndarray]:
        parts = self.modes().get((m, n), [])

        def radial(x):
            total = np.zeros(np.shape(x), dtype=complex)
            for part in parts:
                total = total + part.radial(x)
            return total

        return radial

    def __add__(self, other: "ModeSum") -> "ModeSum":
        return ModeSum(self.terms + as_mode_sum(other).terms)


def as_mode_sum(f) -> Optional[ModeSum]:
    if isinstance(f, ModeSum):
        return f
    if isinstance(f, SeparableFunction):
        return ModeSum((f,))
    return None


def _angular_mean(f: Callable, g: Callable, x: np.ndarray) -> np.ndarray:
    angles = 2.0 * np.pi * np.arange(ANGULAR_NODES) / ANGULAR_NODES
    phi1 = angles[None, :, None]
    phi2 = angles[None, None, :]
    rho = rho_of_x(x)[:, None, None]
    point = GroupPoint(rho, phi1, phi2)
    values = np.conj(f(point)) * g(point)
    values = np.broadcast_to(values, (x.size, ANGULAR_NODES, ANGULAR_NODES))
    return values.mean(axis=(1, 2))


def inner_product_sl2(f, g, spec: QuadratureSpec = DEFAULT_SPEC):
    """(f, g) = (1/4pi^2) int conj(f) g cosh(rho) sinh(rho) drho dphi1 dphi2.

    Separable arguments reduce to one radial quadrature per shared phase;
    anything else is averaged on a uniform angular grid.
    """
    fs, gs = as_mode_sum(f), as_mode_sum(g)
    if fs is not None and gs is not None:
        total = 0j
        g_modes = gs.modes()
        for mode in fs.modes():
            if mode not in g_modes:
                continue
            fr, gr = fs.radial_of(*mode), gs.radial_of(*mode)
            total += integrate_x(lambda x: 0.25 * np.conj(fr(x)) * gr(x), spec)
        return total
    return complex(integrate_x(lambda x: 0.25 * _angular_mean(f, g, np.atleast_1d(x)), spec))


# --- Miscellany -------------------------------------------------------------

def divided_difference(f: Callable[[np.ndarray], np.ndarray], nodes: Sequence[float]) -> complex:
    """Highest-order divided difference of f on the given nodes."""
    xs = np.asarray(nodes, dtype=float)
    table = np.asarray(f(xs), dtype=complex)
    for order in range(1, xs.size):
        table = (table[1:] - table[:-1]) / (xs[order:] - xs[:-order])
    return complex(table[0])


def power_jet(alpha: float, beta: float, rho: np.ndarray, order: int) -> Tuple[np.ndarray, ...]:
    """cosh^alpha(rho) sinh^beta(rho) and its first two rho-derivatives."""
    c, s = np.cosh(rho), np.sinh(rho)

    def term(coefficient, pc, ps):
        if coefficient == 0:
            return np.zeros_like(rho)
        return coefficient * c ** pc * s ** ps

    g = term(1.0, alpha, beta)
    if order == 0:
        return (g,)
    g1 = term(alpha, alpha - 1, beta + 1) + term(beta, alpha + 1, beta - 1)
    if order == 1:
        return g, g1
    g2 = (
        term(alpha * (alpha - 1), alpha - 2, beta + 2)
        + term(alpha * (beta + 1) + beta * (alpha + 1), alpha, beta)
        + term(beta * (beta - 1), alpha + 2, beta - 2)
    )
    return g, g1, g2


def product_jet(first: Tuple[np.ndarray, ...], second: Tuple[np.ndarray, ...]) -> Tuple[np.ndarray, ...]:
    """Leibniz rule for jets of equal length."""
    order = min(len(first), len(second)) - 1
    out = [first[0] * second[0]]
    if order >= 1:
        out.append(first[1] * second[0] + first[0] * second[1])
    if order >= 2:
        out.append(first[2] * second[0] + 2 * first[1] * second[1] + first[0] * second[2])
    return tuple(out)
