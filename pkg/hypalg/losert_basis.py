"""The Losert Hilbert basis of L^2(SL(2,R)).

For fixed weights (m, n) the radial functions e_{m,n,k}, k = 0, 1, ..., are an
orthonormal basis of L^2([1, inf), dx). With u = 2/(x+1) = sech^2(rho) each of
them has the shape

    e_{m,n,k}(x) = u^{1+eps} (1-u)^{a/2} q_{m,n,k}(u),    a = |m - n|,

with q a polynomial: N P_k^{(a, 2 eps)}(2u - 1) in sector d_perp and
s N u^{mu-k-1-eps} P_k^{(a, 2 mu - 2k - 1)}(2u - 1) in sector d, mu = min(|m|, |n|).
These are the printed Jacobi forms in x rewritten in u.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Iterator, List, Tuple

import numpy as np
from scipy import special

from .exceptions import IndexRangeError, NormalizationError, ParityError
from .numerics import (
    GroupPoint,
    SeparableFunction,
    jacobi_p,
    jacobi_p_derivative,
    phase_factor,
    power_jet,
    product_jet,
)
from .sl2_reps import to_twice

logger = logging.getLogger(__name__)


class Sector(str, Enum):
    D = "d"
    D_PERP = "d_perp"


@dataclass(frozen=True, order=True)
class LosertIndex:
    twice_m: int
    twice_n: int
    k: int

    def __post_init__(self):
        if self.twice_m % 2 != self.twice_n % 2:
            raise ParityError(f"m = {self.twice_m / 2} and n = {self.twice_n / 2} have different parities.")
        if self.k < 0:
            raise IndexRangeError(f"k must be non-negative, got {self.k}.")

    @classmethod
    def of(cls, m: float, n: float, k: int) -> "LosertIndex":
        return cls(to_twice(m, "m"), to_twice(n, "n"), int(k))

    @property
    def m(self) -> float:
        return self.twice_m / 2

    @property
    def n(self) -> float:
        return self.twice_n / 2

    @property
    def epsilon(self) -> float:
        return (self.twice_m % 2) / 2

    def conjugate(self) -> "LosertIndex":
        return LosertIndex(-self.twice_m, -self.twice_n, self.k)

    def with_k(self, k: int) -> "LosertIndex":
        return LosertIndex(self.twice_m, self.twice_n, k)

    def __str__(self) -> str:
        return f"({self.m:g},{self.n:g},{self.k})"


@dataclass(frozen=True)
class RadialFunction:
    """Closed-form descriptor of e_{m,n,k} in the printed variable x.

    e(x) = sign * normalization * (x-1)^{x_minus_power} (x+1)^{x_plus_power}
    P_k^{(jacobi_alpha, jacobi_beta)}(x).
    """

    index: LosertIndex
    sector: Sector
    x_minus_power: float
    x_plus_power: float
    jacobi_alpha: float
    jacobi_beta: float
    normalization: float
    sign: float


def k_min(m: float, n: float, epsilon: float = None) -> int:
    twice_m, twice_n = to_twice(m, "m"), to_twice(n, "n")
    if twice_m % 2 != twice_n % 2:
        raise ParityError(f"m = {m} and n = {n} have different parities.")
    if epsilon is not None and to_twice(epsilon, "epsilon") != twice_m % 2:
        raise ParityError(f"epsilon = {epsilon} does not match the parity of m = {m}.")
    eps = (twice_m % 2) / 2
    if abs(m) > 0.5 and abs(n) > 0.5 and m * n > 0:
        return int(round(min(abs(n), abs(m)) - eps))
    return 0


def classify(idx: LosertIndex) -> Sector:
    return Sector.D if idx.k < k_min(idx.m, idx.n) else Sector.D_PERP


def _sign(power: float) -> float:
    return -1.0 if round(power) % 2 else 1.0


@lru_cache(maxsize=None)
def _d_perp_normalization(a: int, twice_eps: int, k: int) -> float:
    eps = twice_eps / 2
    log_sq = (
        math.log(2 * k + a + 2 * eps + 1)
        + special.gammaln(k + a + 2 * eps + 1)
        + special.gammaln(k + 1)
        - math.log(2)
        - special.gammaln(k + a + 1)
        - special.gammaln(k + 2 * eps + 1)
    )
    return math.exp(0.5 * log_sq)


@lru_cache(maxsize=None)
def _d_normalization(mu2: int, a: int, k: int) -> float:
    mu = mu2 / 2
    if not 2 * mu - 2 * k - 1 > 0:
        raise NormalizationError(f"Sector d needs k < mu - eps; got k = {k}, mu = {mu}.")
    log_sq = (
        special.gammaln(k + 1)
        + math.log(2 * mu - 2 * k - 1)
        + special.gammaln(2 * mu + a - k)
        - math.log(2)
        - special.gammaln(a + k + 1)
        - special.gammaln(2 * mu - k)
    )
    return math.exp(0.5 * log_sq)


@dataclass(frozen=True)
class _Shape:
    """e = sign * norm * u^{power} (1-u)^{a/2} P_k^{(a, beta)}(2u - 1)."""

    a: int
    power: float
    beta: float
    k: int
    norm: float
    sign: float
    eps: float

    @property
    def scale(self) -> float:
        return self.sign * self.norm


@lru_cache(maxsize=None)
def _shape(idx: LosertIndex) -> _Shape:
    m, n, k, eps = idx.m, idx.n, idx.k, idx.epsilon
    a = int(round(abs(m - n)))
    if classify(idx) == Sector.D_PERP:
        return _Shape(a, 1 + eps, 2 * eps, k, _d_perp_normalization(a, idx.twice_m % 2, k), 1.0, eps)
    # sector d: reflect to m, n > 0, then order n >= m; the swap costs (-1)^{m-n}
    if m < 0:
        m, n = -m, -n
    sign = 1.0
    if m > n:
        sign = _sign(m - n)
        m, n = n, m
    if k >= m - eps:
        raise NormalizationError(f"Sector d index {idx} has k >= m - eps.")
    norm = _d_normalization(int(round(2 * m)), a, k)
    return _Shape(a, m - k, 2 * m - 2 * k - 1, k, norm, sign, eps)


def radial_descriptor(idx: LosertIndex) -> RadialFunction:
    """Printed x-form of e_{m,n,k}; evaluation uses the equivalent u-form."""
    shape = _shape(idx)
    a, k = shape.a, shape.k
    if classify(idx) == Sector.D_PERP:
        beta = -a - 2 * k - 2 * shape.eps - 1
        # 2^{k+eps+1} converts u^{1+eps+k} back to powers of (x+1)
        norm = shape.norm * 2 ** (k + shape.eps + 1)
        return RadialFunction(idx, Sector.D_PERP, a / 2, -a / 2 - k - shape.eps - 1, a, beta, norm, shape.sign)
    mu = shape.power + k
    norm = shape.norm * 2 ** mu
    return RadialFunction(idx, Sector.D, a / 2, -(2 * mu + a) / 2, a, -(2 * mu + a), norm, shape.sign)


def reduced_polynomial(idx: LosertIndex, u) -> np.ndarray:
    """q_{m,n,k}(u) such that e = u^{1+eps} (1-u)^{a/2} q(u)."""
    shape = _shape(idx)
    u = np.asarray(u, dtype=float)
    values = shape.scale * jacobi_p(shape.k, shape.a, shape.beta, 2 * u - 1)
    extra = shape.power - 1 - shape.eps
    if extra:
        values = values * u ** extra
    return values


def reduced_degree(idx: LosertIndex) -> int:
    shape = _shape(idx)
    return int(round(shape.k + shape.power - 1 - shape.eps))


def radial_in_u(idx: LosertIndex, u) -> np.ndarray:
    shape = _shape(idx)
    u = np.asarray(u, dtype=float)
    return (
        shape.scale
        * u ** shape.power
        * (1 - u) ** (shape.a / 2)
        * jacobi_p(shape.k, shape.a, shape.beta, 2 * u - 1)
    )


def eval_radial(idx: LosertIndex, x):
    """e_{m,n,k}(x) for x >= 1."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 1):
        raise IndexRangeError("Losert radial functions are defined for x >= 1.")
    values = radial_in_u(idx, 2.0 / (x_arr + 1.0))
    return values if x_arr.ndim else float(values)


def radial_jet(idx: LosertIndex, rho: np.ndarray, order: int) -> Tuple[np.ndarray, ...]:
    """e_{m,n,k}(cosh 2 rho) and its first two rho-derivatives."""
    shape = _shape(idx)
    rho = np.asarray(rho, dtype=float)
    # u^p (1-u)^{a/2} = cosh^{-2p-a} sinh^a
    powers = power_jet(-2 * shape.power - shape.a, shape.a, rho, order)
    c = np.cosh(rho)
    u = 1.0 / (c * c)
    t = np.tanh(rho)
    v = 2 * u - 1
    p = jacobi_p(shape.k, shape.a, shape.beta, v)
    poly = [p]
    if order >= 1:
        dv = -4 * u * t
        p1 = jacobi_p_derivative(shape.k, shape.a, shape.beta, v, 1)
        poly.append(p1 * dv)
    if order >= 2:
        d2v = 2 * (4 * u * t * t - 2 * u * u)
        p2 = jacobi_p_derivative(shape.k, shape.a, shape.beta, v, 2)
        poly.append(p2 * dv * dv + p1 * d2v)
    return tuple(shape.scale * value for value in product_jet(powers, tuple(poly)))


def eval_basis_function(idx: LosertIndex, p: GroupPoint):
    return phase_factor(idx.m, idx.n, p.phi1, p.phi2) * eval_radial(idx, p.x)


def basis_function(idx: LosertIndex) -> SeparableFunction:
    """Phi_{m,n,k} as a SeparableFunction with an analytic rho-jet."""
    return SeparableFunction(
        idx.m,
        idx.n,
        lambda x: eval_radial(idx, x),
        lambda rho, order: radial_jet(idx, rho, order),
    )


def u_map(m: float, n: float, f: Callable[[np.ndarray], np.ndarray]) -> Callable[[np.ndarray], np.ndarray]:
    """U_{mn}: L^2([1,inf), dx) -> L^2([-1,1], (1-y)^{2 eps} (1+y)^{|n-m|})."""
    eps = (to_twice(m, "m") % 2) / 2
    a = abs(m - n)

    def image(y):
        y = np.asarray(y, dtype=float)
        return 2 * (1 - y) ** (-1 - eps) * (1 + y) ** (-a / 2) * f((3 + y) / (1 - y))

    return image


def u_map_image(idx: LosertIndex) -> Callable[[np.ndarray], np.ndarray]:
    """Closed form of U_{mn} e_{m,n,k}: a polynomial in y."""
    shape = _shape(idx)
    factor = shape.scale * 2.0 ** (-shape.eps - shape.a / 2)
    extra = shape.power - 1 - shape.eps

    def image(y):
        u = (1 - np.asarray(y, dtype=float)) / 2
        values = factor * jacobi_p(shape.k, shape.a, shape.beta, 2 * u - 1)
        return values * u ** extra if extra else values

    return image


def u_map_norm(m: float, n: float, f: Callable[[np.ndarray], np.ndarray], nodes: int = 80) -> float:
    """Weighted norm of U_{mn} f on [-1, 1] by Gauss-Jacobi quadrature."""
    eps = (to_twice(m, "m") % 2) / 2
    a = abs(m - n)
    y, w = special.roots_jacobi(nodes, 2 * eps, a)
    values = u_map(m, n, f)(y)
    return math.sqrt(float(np.sum(w * np.abs(values) ** 2)))


def indices_in_window(m_max: float, n_max: float, k_max: int, parities=(0, 0.5)) -> Iterator[LosertIndex]:
    """All Losert indices with |m| <= m_max, |n| <= n_max, k <= k_max, in a fixed order."""
    for eps in parities:
        twice_eps = to_twice(eps, "epsilon")
        twice_ms = [t for t in range(-to_twice(m_max), to_twice(m_max) + 1) if t % 2 == twice_eps]
        twice_ns = [t for t in range(-to_twice(n_max), to_twice(n_max) + 1) if t % 2 == twice_eps]
        for twice_m in twice_ms:
            for twice_n in twice_ns:
                for k in range(k_max + 1):
                    yield LosertIndex(twice_m, twice_n, k)


def modes_in_window(m_max: float, n_max: float, parities=(0, 0.5)) -> List[Tuple[float, float]]:
    seen = []
    for idx in indices_in_window(m_max, n_max, 0, parities):
        seen.append((idx.m, idx.n))
    return seen


def normalization_constant(idx: LosertIndex) -> float:
    """Positive constant N with e = +-N * (unnormalised u-form)."""
    return _shape(idx).norm
