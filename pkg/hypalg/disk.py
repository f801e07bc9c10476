"""Harmonic analysis on the Poincare disk SL(2,R)/U(1).

A point z = r e^{i phi} of the disk sits on the group at rho = artanh(r),
phi1 = phi, phi2 = 0, so x = (1 + r^2)/(1 - r^2) and every U(1)-invariant
(m = 0) object of the group machinery restricts to the disk. The disk product

    (f, g) = (1/pi) int conj(f) g r dr dphi / (1 - r^2)^2

equals half the x-measure integral of the angular mean of conj(f) g.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import special

from .algebra import FiniteLieAlgebra, StructureTable, build_structure_table, structure_constants
from .exceptions import (
    DifferentiationError,
    DomainError,
    IndexRangeError,
    IntegrabilityError,
    NonConvergence,
    ParameterError,
    WindowOverflow,
)
from .losert_basis import LosertIndex, eval_radial
from .matrix_elements import MatrixElementIndex, matrix_element_function
from .numerics import (
    DEFAULT_SPEC,
    FD_STEP,
    GroupPoint,
    ModeSum,
    QuadratureSpec,
    SeparableFunction,
    as_mode_sum,
    gamma_ratio,
    halfline_rule,
    hyp2f1,
    integrate_x,
    jacobi_p,
)
from .plancherel import SampledRadial, SigmaGrid, continuous_radial
from .sl2_reps import SeriesLabel, to_twice

logger = logging.getLogger(__name__)

DISK_ANGULAR_NODES = 64
BARGMANN_RADIAL_NODES = 64
SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class DiskPoint:
    r: float
    phi: float = 0.0

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        if np.any(r < 0) or np.any(r >= 1):
            raise DomainError(f"Disk points need 0 <= r < 1, got r = {self.r}.")

    @classmethod
    def from_x(cls, x, phi=0.0) -> "DiskPoint":
        x = np.asarray(x, dtype=float)
        # far quadrature nodes round to r = 1; keep them inside the disk
        r = np.minimum(np.sqrt((x - 1.0) / (x + 1.0)), np.nextafter(1.0, 0.0))
        return cls(r, phi)

    @property
    def x(self):
        r2 = np.asarray(self.r, dtype=float) ** 2
        return (1.0 + r2) / (1.0 - r2)

    def to_group(self) -> GroupPoint:
        return GroupPoint(np.arctanh(np.asarray(self.r, dtype=float)), self.phi, 0.0)


@dataclass(frozen=True, order=True)
class DiskIndex:
    n: int
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise IndexRangeError(f"k must be non-negative, got {self.k}.")

    def to_losert(self) -> LosertIndex:
        return LosertIndex(0, 2 * self.n, self.k)


def on_disk(f) -> Callable[[DiskPoint], np.ndarray]:
    """View a function on the group (a ModeSum or SeparableFunction with m = 0) as a disk function."""
    if as_mode_sum(f) is None:
        return f
    return lambda p: f(p.to_group())


# --- Basis and matrix elements ----------------------------------------------

def eval_disk_basis(idx: DiskIndex, p: DiskPoint):
    """sqrt(2k+|n|+1) e^{i n phi} r^|n| (1-r^2)^{k+1} P_k^{(|n|, -|n|-2k-1)}((1+r^2)/(1-r^2))."""
    n, k = abs(idx.n), idx.k
    r = np.asarray(p.r, dtype=float)
    radial = (
        math.sqrt(2 * k + n + 1)
        * r ** n
        * (1 - r * r) ** (k + 1)
        * jacobi_p(k, n, -n - 2 * k - 1, p.x)
    )
    return np.exp(1j * idx.n * np.asarray(p.phi)) * radial


def disk_basis_function(idx: DiskIndex) -> SeparableFunction:
    """Phi_{n,k} as sqrt(2) times the group function Phi_{0,n,k}."""
    losert = idx.to_losert()
    return SeparableFunction(0, idx.n, lambda x: SQRT2 * eval_radial(losert, x))


def eval_disk_matrix_element(n: int, sigma: float, p: DiskPoint):
    """Psi_{n i sigma}(r, phi) in the printed disk variables."""
    if not sigma > 0:
        raise ParameterError(f"sigma must be positive, got {sigma}.")
    a = abs(n)
    sign = -1.0 if ((n + a) // 2) % 2 else 1.0
    ratio = math.sqrt(gamma_ratio([a + 0.5 + 1j * sigma, a + 0.5 - 1j * sigma], [0.5 + 1j * sigma, 0.5 - 1j * sigma]).real)
    r = np.asarray(p.r, dtype=float)
    s = r * r / (1 - r * r)
    hyp = hyp2f1(a + 0.5 + 1j * sigma, a + 0.5 - 1j * sigma, a + 1, -s)
    radial = sign / math.factorial(a) * ratio * (r / (1 - r * r)) ** a * np.real(hyp)
    return np.exp(1j * n * np.asarray(p.phi)) * radial


def disk_matrix_element_function(n: int, sigma: float) -> SeparableFunction:
    """psi^0_{n i sigma 0} from the group, which restricts to Psi_{n i sigma}."""
    return matrix_element_function(MatrixElementIndex.of(SeriesLabel.principal(sigma, 0.0), n, 0))


# --- Inner products and operators -------------------------------------------

def _disk_mode_radial(f, n: int) -> Callable[[np.ndarray], np.ndarray]:
    fs = as_mode_sum(f)
    if fs is not None:
        return fs.radial_of(0, n)
    angles = 2.0 * np.pi * np.arange(DISK_ANGULAR_NODES) / DISK_ANGULAR_NODES

    def radial(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        point = DiskPoint.from_x(x[:, None], angles[None, :])
        values = np.broadcast_to(f(point) * np.exp(-1j * n * angles)[None, :], (x.size, angles.size))
        return values.mean(axis=1)

    return radial


def _angular_mean(f: Callable, g: Callable, x: np.ndarray, weight=None) -> np.ndarray:
    angles = 2.0 * np.pi * np.arange(DISK_ANGULAR_NODES) / DISK_ANGULAR_NODES
    point = DiskPoint.from_x(x[:, None], angles[None, :])
    values = np.conj(f(point)) * g(point)
    if weight is not None:
        values = values * weight(point)
    return np.broadcast_to(values, (x.size, angles.size)).mean(axis=1)


def disk_inner_product(f, g, spec: QuadratureSpec = DEFAULT_SPEC) -> complex:
    """(f, g) in the disk product. Arguments are disk callables or m = 0 group functions."""
    fs, gs = as_mode_sum(f), as_mode_sum(g)
    if fs is not None and gs is not None:
        total = 0j
        g_modes = gs.modes()
        for mode in fs.modes():
            if mode not in g_modes:
                continue
            fr, gr = fs.radial_of(*mode), gs.radial_of(*mode)
            total += integrate_x(lambda x: 0.5 * np.conj(fr(x)) * gr(x), spec)
        return complex(total)
    f, g = on_disk(f), on_disk(g)
    return complex(integrate_x(lambda x: 0.5 * _angular_mean(f, g, np.atleast_1d(x)), spec))


def apply_disk_casimir(f: Callable[[DiskPoint], np.ndarray], h: float = FD_STEP) -> Callable[[DiskPoint], np.ndarray]:
    """Q = (1/4) (1-r^2)^2 / r^2 (r d_r r d_r + d_phi^2), by five-point differences.

    Raises (on evaluation):
        DifferentiationError: if the stencil leaves 0 < r < 1.
    """
    f = on_disk(f)

    def applied(p: DiskPoint):
        r = np.asarray(p.r, dtype=float)
        phi = np.asarray(p.phi, dtype=float)
        if np.any(r - 2 * h <= 0) or np.any(r + 2 * h >= 1):
            raise DifferentiationError(f"Stencil of width {2 * h} leaves the open disk at r = {p.r}.")
        f0 = f(p)
        fr = [f(DiskPoint(r + s * h, phi)) for s in (-2, -1, 1, 2)]
        fp = [f(DiskPoint(r, phi + s * h)) for s in (-2, -1, 1, 2)]
        d_r = (fr[0] - 8 * fr[1] + 8 * fr[2] - fr[3]) / (12 * h)
        d_rr = (-fr[0] + 16 * fr[1] - 30 * f0 + 16 * fr[2] - fr[3]) / (12 * h * h)
        d_pp = (-fp[0] + 16 * fp[1] - 30 * f0 + 16 * fp[2] - fp[3]) / (12 * h * h)
        return 0.25 * (1 - r * r) ** 2 / (r * r) * (r * d_r + r * r * d_rr + d_pp)

    return applied


# --- Disk Plancherel --------------------------------------------------------

def disk_plancherel_weight(sigma):
    sigma = np.asarray(sigma, dtype=float)
    return 2.0 * sigma * np.tanh(np.pi * sigma)


@dataclass
class DiskComponents:
    sigma_grid: SigmaGrid
    values: Dict[int, np.ndarray] = field(default_factory=dict)
    meta: Dict = field(default_factory=dict)


def disk_plancherel_forward(
    f, n_max: int, sigma_grid: Optional[SigmaGrid] = None, far_panels: int = 60
) -> DiskComponents:
    """(Psi_{n i sigma}, f) in the disk product for |n| <= n_max on the sigma grid."""
    grid = sigma_grid or SigmaGrid()
    rule = halfline_rule(far_panels=far_panels, level=0)
    sigmas, _ = grid.nodes_and_weights()
    result = DiskComponents(grid, meta={"n_max": n_max, "far_panels": far_panels})
    for n in range(-n_max, n_max + 1):
        sampled = SampledRadial.of(_disk_mode_radial(f, n), rule)
        if sampled.x.size == 0:
            continue
        result.values[n] = np.array([0.5 * sampled.against(continuous_radial(s, 0, n)) for s in sigmas])
    return result


def disk_plancherel_inverse(c: DiskComponents) -> ModeSum:
    sigmas, weights = c.sigma_grid.nodes_and_weights()
    factors = weights * disk_plancherel_weight(sigmas)
    terms = []
    for n, values in sorted(c.values.items()):
        kernels = [(factor * v, continuous_radial(s, 0, n)) for s, factor, v in zip(sigmas, factors, values) if v != 0]

        def radial(x, kernels=kernels):
            x = np.asarray(x, dtype=float)
            total = np.zeros(x.shape, dtype=complex)
            for factor, chi in kernels:
                total = total + factor * chi(x)
            return total

        terms.append(SeparableFunction(0, n, radial, max_order=0))
    return ModeSum(tuple(terms))


# --- Structure constants and the disk algebra -------------------------------

def disk_structure_constants(idx1: DiskIndex, idx2: DiskIndex, k_window: int, tol: float = 1e-10) -> List[Tuple[int, float]]:
    """Phi_{n,k} Phi_{n',k'} = sum C Phi_{n+n', k''}; sqrt(2) times the group constants at m = 0."""
    return [(k, SQRT2 * c) for k, c in structure_constants(idx1.to_losert(), idx2.to_losert(), k_window, tol)]


def build_disk_table(n_max: int, k_max: int, tol: float = 1e-8, threads: Optional[int] = None) -> StructureTable:
    """Group structure table restricted to m = 0; disk brackets rescale by sqrt(2)."""
    return build_structure_table((0, n_max, k_max), tol, threads)


DiskKey = Tuple[int, DiskIndex]


@dataclass
class DiskAlgebraElement:
    """theta_a^{nk} T^a Phi_{n,k} + l0 L0 + central K."""

    terms: Dict[DiskKey, complex] = field(default_factory=dict)
    l0: complex = 0j
    central: complex = 0j

    @classmethod
    def generator(cls, a: int, idx: DiskIndex, coefficient: complex = 1.0) -> "DiskAlgebraElement":
        return cls({(a, idx): complex(coefficient)})

    def combine(self, other: "DiskAlgebraElement", factor: complex) -> "DiskAlgebraElement":
        terms = dict(self.terms)
        for key, value in other.terms.items():
            terms[key] = terms.get(key, 0j) + factor * value
        return DiskAlgebraElement(terms, self.l0 + factor * other.l0, self.central + factor * other.central)

    def __add__(self, other: "DiskAlgebraElement") -> "DiskAlgebraElement":
        return self.combine(other, 1.0)

    def norm(self) -> float:
        values = list(self.terms.values()) + [self.l0, self.central]
        return max((abs(v) for v in values), default=0.0)


def disk_bracket(
    x: DiskAlgebraElement,
    y: DiskAlgebraElement,
    algebra: FiniteLieAlgebra,
    k: float,
    table: StructureTable,
) -> DiskAlgebraElement:
    """[T^a_{nk}, T^b_{n'k'}] = i f^{ab}_c C T^c_{n+n', k''} + k n g^{ab} delta_{kk'} delta_{n+n'} K.

    The coefficient of K is the disk cocycle with charge k.

    Raises:
        WindowOverflow: with the in-window part attached as ``partial``.
    """
    f, g = algebra.structure, algebra.killing_form
    n_max, k_max = table.window[1], table.window[2]
    terms: Dict[DiskKey, complex] = {}
    central = 0j
    overflow = []
    for (a, i1), xv in x.terms.items():
        for (b, i2), yv in y.terms.items():
            coefficient = xv * yv
            if i1.k == i2.k and i1.n == -i2.n:
                central += k * g[a, b] * i1.n * coefficient
            couplings = [(c, f[a, b, c]) for c in range(algebra.dim) if f[a, b, c] != 0]
            if not couplings:
                continue
            n = i1.n + i2.n
            if max(abs(i1.n), abs(i2.n), abs(n)) > n_max or max(i1.k, i2.k) > k_max:
                overflow.append((i1, i2))
                continue
            for k_out, value in table.lookup(i1.to_losert(), i2.to_losert()):
                if k_out > k_max:
                    overflow.append((i1, i2))
                    continue
                for c, fc in couplings:
                    key = (c, DiskIndex(n, k_out))
                    terms[key] = terms.get(key, 0j) + 1j * fc * SQRT2 * value * coefficient
    for (b, i2), yv in y.terms.items():
        terms[(b, i2)] = terms.get((b, i2), 0j) + x.l0 * i2.n * yv
    for (a, i1), xv in x.terms.items():
        terms[(a, i1)] = terms.get((a, i1), 0j) - y.l0 * i1.n * xv
    result = DiskAlgebraElement({key: v for key, v in terms.items() if v != 0}, central=central)
    if overflow:
        raise WindowOverflow(f"{len(overflow)} product(s) leave the disk window.", partial=result)
    return result


def disk_cocycle(x: DiskAlgebraElement, y: DiskAlgebraElement, k: float, algebra: FiniteLieAlgebra) -> complex:
    """k times n g^{ab} delta_{kk'} delta_{n+n'}, extended bilinearly."""
    g = algebra.killing_form
    total = 0j
    for (a, i1), xv in x.terms.items():
        for (b, i2), yv in y.terms.items():
            if i1.k == i2.k and i1.n == -i2.n:
                total += g[a, b] * i1.n * xv * yv
    return k * total


def disk_cocycle_by_quadrature(
    x: DiskAlgebraElement, y: DiskAlgebraElement, k: float, algebra: FiniteLieAlgebra, spec: QuadratureSpec = DEFAULT_SPEC
) -> complex:
    """k (1/pi) int <X, -i d_phi Y> r dr dphi / (1-r^2)^2 with the derivative by differences."""
    g = algebra.killing_form
    total = 0j
    h = FD_STEP
    for (a, i1), xv in x.terms.items():
        f1 = on_disk(disk_basis_function(i1))

        def rotated(p, f1=f1):
            # -i d/dphi, pairing without conjugation
            values = [f1(DiskPoint(p.r, p.phi + s * h)) for s in (-2, -1, 1, 2)]
            return -1j * (values[0] - 8 * values[1] + 8 * values[2] - values[3]) / (12 * h)

        for (b, i2), yv in y.terms.items():
            if g[a, b] == 0:
                continue
            f2 = on_disk(disk_basis_function(i2))
            value = integrate_x(
                lambda xs: 0.5 * _angular_mean(lambda p: np.conj(rotated(p)), f2, np.atleast_1d(xs)), spec
            )
            total += g[a, b] * xv * yv * value
    return k * total


# --- Change of measure ------------------------------------------------------

@dataclass(frozen=True)
class MeasureTransfer:
    """Basis transferred to the h-product (1/pi) int conj(f) g sqrt(det h) dr dphi.

    With T = sqrt(det h) (1 - r^2)^2 / r the h-product is half the x-measure
    integral of the angular mean of conj(f) g T, so Phi^h = Phi / sqrt(T)
    reproduces the disk product.
    """

    sqrt_det_h: Callable[[np.ndarray], np.ndarray]

    def transfer(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return self.sqrt_det_h(r) * (1 - r * r) ** 2 / r

    def basis(self, idx: DiskIndex) -> Callable[[DiskPoint], np.ndarray]:
        phi = on_disk(disk_basis_function(idx))
        return lambda p: phi(p) / np.sqrt(self.transfer(p.r))

    def inner_product(self, f, g, spec: QuadratureSpec = DEFAULT_SPEC) -> complex:
        f, g = on_disk(f), on_disk(g)
        weight = lambda p: self.transfer(p.r)
        return complex(integrate_x(lambda x: 0.5 * _angular_mean(f, g, np.atleast_1d(x), weight), spec))


def measure_change(
    h_det: Callable[[np.ndarray], np.ndarray],
    check: Tuple[DiskIndex, DiskIndex] = (DiskIndex(0, 0), DiskIndex(0, 0)),
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> MeasureTransfer:
    """Transfer the disk basis to the measure sqrt(det h) dr dphi.

    Raises:
        IntegrabilityError: if det h is not positive and finite on (0, 1), or
            the product of the two ``check`` basis elements is not
            square-integrable under the new measure.
    """
    samples = np.linspace(1e-3, 1 - 1e-3, 257)
    det = np.asarray(h_det(samples), dtype=float)
    if not np.all(np.isfinite(det)) or np.any(det <= 0):
        raise IntegrabilityError("det h must be positive and finite on 0 < r < 1.")
    transfer = MeasureTransfer(lambda r: np.sqrt(np.asarray(h_det(r), dtype=float)))
    b1, b2 = transfer.basis(check[0]), transfer.basis(check[1])
    try:
        # int |Phi^h Phi^h|^2 sqrt(det h) dr dphi / pi
        norm = transfer.inner_product(lambda p: b1(p) * b2(p), lambda p: b1(p) * b2(p), spec)
    except NonConvergence as e:
        raise IntegrabilityError(f"Transferred products are not square-integrable: {e}")
    if not math.isfinite(abs(norm)):
        raise IntegrabilityError("Transferred products are not square-integrable.")
    logger.debug(f"measure_change: transferred product norm {abs(norm):.3e}")
    return transfer


def disk_metric_det(r):
    r = np.asarray(r, dtype=float)
    return r * r / (1 - r * r) ** 4


def flat_metric_det(r):
    r = np.asarray(r, dtype=float)
    return r * r


# --- Bargmann realization ---------------------------------------------------

def _check_bargmann_lambda(lam: float) -> None:
    to_twice(lam, "lambda")
    if not lam > 0.5:
        raise ParameterError(f"The Bargmann realization needs lambda > 1/2, got {lam}.")


def bargmann_norm(n: int, lam: float) -> float:
    """c_n with f_n = c_n z^n: sqrt(Gamma(2 lambda + n) / (n! Gamma(2 lambda - 1)))."""
    _check_bargmann_lambda(lam)
    return math.exp(0.5 * (special.gammaln(2 * lam + n) - special.gammaln(n + 1) - special.gammaln(2 * lam - 1)))


def bargmann_basis(n: int, lam: float, z):
    if n < 0:
        raise IndexRangeError(f"Bargmann basis needs n >= 0, got {n}.")
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1):
        raise DomainError("Bargmann functions are evaluated on |z| < 1.")
    return bargmann_norm(n, lam) * z ** n


def bargmann_polynomial(n: int, lam: float) -> np.ndarray:
    """Ascending coefficients of f_{n, lambda}."""
    coefficients = np.zeros(n + 1, dtype=complex)
    coefficients[n] = bargmann_norm(n, lam)
    return coefficients


def eval_polynomial(coefficients: np.ndarray, z):
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1):
        raise DomainError("Bargmann functions are evaluated on |z| < 1.")
    return np.polynomial.polynomial.polyval(z, coefficients)


def bargmann_inner_product(
    f: np.ndarray, g: np.ndarray, lam: float, radial_nodes: int = BARGMANN_RADIAL_NODES
) -> complex:
    """(1/pi) int conj(f) g (1 - |z|^2)^{2 lambda - 2} d^2z for polynomials f, g.

    Gauss-Jacobi in t = |z|^2 and the trapezoid rule in the angle.
    """
    _check_bargmann_lambda(lam)
    alpha = 2 * lam - 2
    y, w = special.roots_jacobi(radial_nodes, alpha, 0.0)
    t = (y + 1) / 2
    angles = 2.0 * np.pi * np.arange(DISK_ANGULAR_NODES) / DISK_ANGULAR_NODES
    z = np.sqrt(t)[:, None] * np.exp(1j * angles)[None, :]
    values = np.conj(np.polynomial.polynomial.polyval(z, f)) * np.polynomial.polynomial.polyval(z, g)
    return complex(2.0 ** (-alpha - 1) * np.sum(w * values.mean(axis=1)))


def apply_bargmann(generator: str, coefficients: np.ndarray, lam: float) -> np.ndarray:
    """K0 = z p' + lambda p, K+ = z^2 p' + 2 lambda z p, K- = p' on ascending coefficients."""
    p = np.asarray(coefficients, dtype=complex)
    derivative = np.polynomial.polynomial.polyder(p) if p.size > 1 else np.zeros(1, dtype=complex)
    if generator == "K0":
        return np.polynomial.polynomial.polyadd(np.polynomial.polynomial.polymulx(derivative), lam * p)
    if generator == "K+":
        shifted = np.polynomial.polynomial.polymulx(np.polynomial.polynomial.polymulx(derivative))
        return np.polynomial.polynomial.polyadd(shifted, 2 * lam * np.polynomial.polynomial.polymulx(p))
    if generator == "K-":
        return derivative
    raise ValueError(f"Unknown generator '{generator}'. Expected K0, K+ or K-.")


def bargmann_action(generator: str, n: int, lam: float) -> Tuple[float, Optional[int]]:
    """Closed-form action on f_{n, lambda}: (coefficient, target n) or (0, None)."""
    _check_bargmann_lambda(lam)
    if generator == "K0":
        return n + lam, n
    if generator == "K+":
        return math.sqrt((n + 1) * (n + 2 * lam)), n + 1
    if generator == "K-":
        if n == 0:
            return 0.0, None
        return math.sqrt(n * (n + 2 * lam - 1)), n - 1
    raise ValueError(f"Unknown generator '{generator}'. Expected K0, K+ or K-.")
