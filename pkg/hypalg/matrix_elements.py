"""Matrix elements of the discrete and principal series on the hyperboloid.

A matrix element psi_{n Lambda m} carries L0 weight n and R0 weight m; its
angular dependence is exp(i(m+n)phi1 + i(m-n)phi2) and its radial part is a
power of cosh and sinh times a Gauss hypergeometric function of -sinh^2(rho).
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .exceptions import IndexRangeError
from .numerics import (
    GroupPoint,
    SeparableFunction,
    gamma_ratio,
    hyp2f1,
    hyp2f1_derivative,
    phase_factor,
    power_jet,
    product_jet,
    rho_of_x,
)
from .sl2_reps import SeriesKind, SeriesLabel, check_weight, to_twice

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MatrixElementIndex:
    label: SeriesLabel
    twice_n: int
    twice_m: int

    def __post_init__(self):
        if self.label.excluded_from_plancherel:
            raise IndexRangeError(f"No matrix elements are evaluated for the {self.label.kind.value} series.")
        check_weight(self.label, self.twice_n)
        check_weight(self.label, self.twice_m)

    @classmethod
    def of(cls, label: SeriesLabel, n: float, m: float) -> "MatrixElementIndex":
        return cls(label, to_twice(n, "n"), to_twice(m, "m"))

    @property
    def n(self) -> float:
        return self.twice_n / 2

    @property
    def m(self) -> float:
        return self.twice_m / 2


@dataclass(frozen=True)
class _RadialForm:
    """prefactor * cosh^alpha * sinh^beta * 2F1(a, b; c; -sinh^2)."""

    prefactor: float
    alpha: float
    beta: float
    a: complex
    b: complex
    c: float

    def jet(self, rho: np.ndarray, order: int) -> Tuple[np.ndarray, ...]:
        powers = power_jet(self.alpha, self.beta, rho, order)
        s = np.sinh(rho)
        z = -s * s
        f = hyp2f1(self.a, self.b, self.c, z)
        hyp = [f]
        if order >= 1:
            dz = -np.sinh(2 * rho)
            f1 = hyp2f1_derivative(self.a, self.b, self.c, z, 1)
            hyp.append(f1 * dz)
        if order >= 2:
            d2z = -2 * np.cosh(2 * rho)
            f2 = hyp2f1_derivative(self.a, self.b, self.c, z, 2)
            hyp.append(f2 * dz * dz + f1 * d2z)
        values = product_jet(powers, tuple(hyp))
        # the hypergeometric factors have real parameter pairs (a, conj a), so the value is real
        return tuple(self.prefactor * np.real(v) for v in values)

    def value(self, rho):
        return self.jet(np.asarray(rho, dtype=float), 0)[0]


def _sign(power: float) -> float:
    return -1.0 if round(power) % 2 else 1.0


def _discrete_form(idx: MatrixElementIndex) -> _RadialForm:
    lam, n, m = idx.label.lam, idx.n, idx.m
    norm = math.sqrt(2 * (2 * lam - 1))
    if idx.label.kind == SeriesKind.DISCRETE_PLUS:
        if m >= n:
            ratio = gamma_ratio([m - lam + 1, m + lam], [n - lam + 1, n + lam]).real
            pref = norm * math.sqrt(ratio) / math.gamma(m - n + 1)
            return _RadialForm(pref, -m - n, m - n, -n + lam, -n - lam + 1, 1 + m - n)
        ratio = gamma_ratio([n - lam + 1, n + lam], [m - lam + 1, m + lam]).real
        pref = norm * _sign(m - n) * math.sqrt(ratio) / math.gamma(n - m + 1)
        return _RadialForm(pref, -m - n, n - m, -m + lam, -m - lam + 1, 1 - m + n)
    if m >= n:
        ratio = gamma_ratio([-n - lam + 1, -n + lam], [-m - lam + 1, -m + lam]).real
        pref = norm * _sign(m - n) * math.sqrt(ratio) / math.gamma(m - n + 1)
        return _RadialForm(pref, m + n, m - n, m + lam, m - lam + 1, 1 + m - n)
    ratio = gamma_ratio([-m - lam + 1, -m + lam], [-n - lam + 1, -n + lam]).real
    pref = norm * math.sqrt(ratio) / math.gamma(n - m + 1)
    return _RadialForm(pref, m + n, n - m, n + lam, n - lam + 1, 1 - m + n)


def _gamma_modulus_ratio(top: float, bottom: float, sigma: float) -> float:
    """|Gamma(top + 1/2 + i sigma)| / |Gamma(bottom + 1/2 + i sigma)|."""
    value = gamma_ratio(
        [top + 0.5 + 1j * sigma, top + 0.5 - 1j * sigma],
        [bottom + 0.5 + 1j * sigma, bottom + 0.5 - 1j * sigma],
    )
    return math.sqrt(value.real)


def _principal_form(idx: MatrixElementIndex, growing: bool = False) -> _RadialForm:
    sigma, n, m = idx.label.sigma, idx.n, idx.m
    if m >= n:
        pref = _gamma_modulus_ratio(m, n, sigma) / math.gamma(m - n + 1)
        if growing:
            return _RadialForm(pref, m + n, m - n, m + 0.5 + 1j * sigma, m + 0.5 - 1j * sigma, m - n + 1)
        return _RadialForm(pref, -m - n, m - n, -n + 0.5 + 1j * sigma, -n + 0.5 - 1j * sigma, m - n + 1)
    pref = _sign(m - n) * _gamma_modulus_ratio(n, m, sigma) / math.gamma(n - m + 1)
    if growing:
        return _RadialForm(pref, m + n, n - m, n + 0.5 + 1j * sigma, n + 0.5 - 1j * sigma, n - m + 1)
    return _RadialForm(pref, -m - n, n - m, -m + 0.5 + 1j * sigma, -m + 0.5 - 1j * sigma, n - m + 1)


def radial_form(idx: MatrixElementIndex) -> _RadialForm:
    if idx.label.is_discrete:
        return _discrete_form(idx)
    return _principal_form(idx)


def eval_discrete(idx: MatrixElementIndex, p: GroupPoint):
    """psi^eta_{n lambda m}(p) including the sqrt(2(2 lambda - 1)) normalisation.

    Raises:
        IndexRangeError: if the label is not a discrete series.
    """
    if not idx.label.is_discrete:
        raise IndexRangeError("eval_discrete needs a discrete-series index.")
    radial = _discrete_form(idx).value(p.rho)
    return phase_factor(idx.m, idx.n, p.phi1, p.phi2) * radial


def eval_continuous(idx: MatrixElementIndex, p: GroupPoint):
    """psi^eps_{n i sigma m}(p) from the decaying (cosh^{-m-n}) representation."""
    if idx.label.kind != SeriesKind.PRINCIPAL:
        raise IndexRangeError("eval_continuous needs a principal-series index.")
    radial = _principal_form(idx).value(p.rho)
    return phase_factor(idx.m, idx.n, p.phi1, p.phi2) * radial


def eval_continuous_growing(idx: MatrixElementIndex, p: GroupPoint):
    """Same matrix element from the growing (cosh^{m+n}) representation; used as a cross-check."""
    if idx.label.kind != SeriesKind.PRINCIPAL:
        raise IndexRangeError("eval_continuous_growing needs a principal-series index.")
    radial = _principal_form(idx, growing=True).value(p.rho)
    return phase_factor(idx.m, idx.n, p.phi1, p.phi2) * radial


def conjugate_index(idx: MatrixElementIndex) -> MatrixElementIndex:
    """Index of the conjugate matrix element.

    Discrete (eta, lambda, n, m) goes to (-eta, lambda, -n, -m); principal
    (eps, sigma, n, m) to (eps, sigma, -n, -m). Pointwise,
    conj(psi_idx) = conjugation_sign(idx) * psi_{conjugate_index(idx)}.
    """
    label = idx.label
    if label.kind == SeriesKind.DISCRETE_PLUS:
        label = SeriesLabel(SeriesKind.DISCRETE_MINUS, twice_lambda=label.twice_lambda)
    elif label.kind == SeriesKind.DISCRETE_MINUS:
        label = SeriesLabel(SeriesKind.DISCRETE_PLUS, twice_lambda=label.twice_lambda)
    return MatrixElementIndex(label, -idx.twice_n, -idx.twice_m)


def conjugation_sign(idx: MatrixElementIndex) -> float:
    if idx.label.is_discrete:
        return 1.0
    return _sign(idx.m - idx.n)


def matrix_element_function(idx: MatrixElementIndex) -> SeparableFunction:
    """The matrix element as a SeparableFunction with an analytic rho-jet."""
    form = radial_form(idx)
    return SeparableFunction(
        idx.m,
        idx.n,
        lambda x: form.value(rho_of_x(np.asarray(x, dtype=float))),
        form.jet,
    )
