"""Left and right sl(2,R) actions on functions over SL(2,R).

Two independent routes are provided: differential operators applied to
functions (analytic rho-jets or finite differences), and the closed-form
ladder coefficients on sector d_perp of the Losert basis.
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Iterable, List, Tuple

import numpy as np

from .exceptions import DifferentiationError, IndexRangeError
from .losert_basis import (
    LosertIndex,
    Sector,
    basis_function,
    classify,
    eval_radial,
    normalization_constant,
)
from .numerics import (
    DEFAULT_SPEC,
    FD_STEP,
    GroupPoint,
    ModeSum,
    QuadratureSpec,
    SeparableFunction,
    integrate_x,
    rho_of_x,
)

logger = logging.getLogger(__name__)


class DiffOperator(str, Enum):
    L_PLUS = "L+"
    L_MINUS = "L-"
    L0 = "L0"
    R_PLUS = "R+"
    R_MINUS = "R-"
    R0 = "R0"
    Q = "Q"


LADDERS = (DiffOperator.L_PLUS, DiffOperator.L_MINUS, DiffOperator.R_PLUS, DiffOperator.R_MINUS)

# (d/drho sign, tanh sign, shift of m, shift of n) for c = [s_d g' + s_t S tanh g + D coth g] / 2
_FIRST_ORDER = {
    DiffOperator.L_PLUS: (1, -1, 0, 1),
    DiffOperator.L_MINUS: (-1, -1, 0, -1),
    DiffOperator.R_PLUS: (-1, 1, 1, 0),
    DiffOperator.R_MINUS: (1, 1, -1, 0),
}


# --- Differential operators -------------------------------------------------

def _first_order(op: DiffOperator, f: SeparableFunction) -> SeparableFunction:
    s_d, s_t, dm, dn = _FIRST_ORDER[op]
    S, D = f.m + f.n, f.m - f.n

    def jet(rho, order):
        g = f.derivatives(rho, order + 1)
        t = np.tanh(rho)
        coth = 1.0 / t
        c = s_t * S * t + D * coth
        out = [0.5 * (s_d * g[1] + c * g[0])]
        if order >= 1:
            c1 = s_t * S / np.cosh(rho) ** 2 - D / np.sinh(rho) ** 2
            out.append(0.5 * (s_d * g[2] + c1 * g[0] + c * g[1]))
        return tuple(out)

    return SeparableFunction(
        f.m + dm,
        f.n + dn,
        lambda x: jet(rho_of_x(np.asarray(x, dtype=float)), 0)[0],
        jet,
        max_order=max(f.max_order - 1, 0),
    )


def _casimir(f: SeparableFunction) -> SeparableFunction:
    S, D = f.m + f.n, f.m - f.n

    def jet(rho, order):
        g = f.derivatives(rho, 2)
        value = (
            0.25 * g[2]
            + 0.5 / np.tanh(2 * rho) * g[1]
            + 0.25 * S * S / np.cosh(rho) ** 2 * g[0]
            - 0.25 * D * D / np.sinh(rho) ** 2 * g[0]
        )
        return (value,)

    return SeparableFunction(
        f.m, f.n, lambda x: jet(rho_of_x(np.asarray(x, dtype=float)), 0)[0], jet, max_order=0
    )


def _apply_separable(op: DiffOperator, f: SeparableFunction) -> SeparableFunction:
    if op == DiffOperator.L0:
        return f.scaled(f.n)
    if op == DiffOperator.R0:
        return f.scaled(f.m)
    if op == DiffOperator.Q:
        return _casimir(f)
    return _first_order(op, f)


def _partials(f: Callable, p: GroupPoint, radial: bool = True, h: float = FD_STEP):
    """Five-point partial derivatives of f in (rho, phi1, phi2) at p.

    With radial=False the rho derivatives are skipped (returned as zero), so
    the stencil may sit at any rho.
    """
    rho = np.asarray(p.rho, dtype=float)
    if radial and np.any(rho - 2 * h < 0):
        raise DifferentiationError(f"Stencil of width {2 * h} leaves rho >= 0 at rho = {np.min(rho)}.")

    def shifted(axis, s):
        coords = [p.rho, p.phi1, p.phi2]
        coords[axis] = coords[axis] + s * h
        return f(GroupPoint(*coords))

    first, second = [], []
    f0 = f(p)
    for axis in range(3):
        if axis == 0 and not radial:
            first.append(0.0)
            second.append(0.0)
            continue
        fm2, fm1, fp1, fp2 = (shifted(axis, s) for s in (-2, -1, 1, 2))
        first.append((fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * h))
        second.append((-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * h * h))
    return f0, first, second


def _apply_callable(op: DiffOperator, f: Callable) -> Callable[[GroupPoint], np.ndarray]:
    radial = op not in (DiffOperator.L0, DiffOperator.R0)

    def applied(p: GroupPoint):
        f0, (d_rho, d1, d2), (d_rho2, d11, d22) = _partials(f, p, radial)
        rho, phi1, phi2 = np.asarray(p.rho), np.asarray(p.phi1), np.asarray(p.phi2)
        t, coth = np.tanh(rho), 1.0 / np.tanh(rho)
        if op == DiffOperator.L0:
            return 0.5j * (d2 - d1)
        if op == DiffOperator.R0:
            return -0.5j * (d2 + d1)
        if op == DiffOperator.L_PLUS:
            return 0.5 * np.exp(1j * (phi1 - phi2)) * (1j * t * d1 + d_rho - 1j * coth * d2)
        if op == DiffOperator.L_MINUS:
            return 0.5 * np.exp(1j * (phi2 - phi1)) * (1j * t * d1 - d_rho - 1j * coth * d2)
        if op == DiffOperator.R_PLUS:
            return 0.5 * np.exp(1j * (phi1 + phi2)) * (-1j * t * d1 - d_rho - 1j * coth * d2)
        if op == DiffOperator.R_MINUS:
            return 0.5 * np.exp(-1j * (phi1 + phi2)) * (-1j * t * d1 + d_rho - 1j * coth * d2)
        return (
            0.5 / np.tanh(2 * rho) * d_rho
            + 0.25 * d_rho2
            - 0.25 / np.cosh(rho) ** 2 * d11
            + 0.25 / np.sinh(rho) ** 2 * d22
        )

    return applied


def apply_numeric(op, f):
    """Apply a generator of the left or right action, or the Casimir, to f.

    Separable inputs keep their structure (exact angular derivatives, analytic
    rho-derivatives when a jet is known); arbitrary callables of GroupPoint are
    differentiated by finite differences in all three coordinates.
    """
    op = DiffOperator(op)
    if isinstance(f, ModeSum):
        return ModeSum(tuple(_apply_separable(op, term) for term in f.terms))
    if isinstance(f, SeparableFunction):
        return _apply_separable(op, f)
    return _apply_callable(op, f)


def apply_word(ops: Iterable, f):
    """Apply operators right to left: apply_word([A, B], f) = A(B(f))."""
    result = f
    for op in reversed(list(ops)):
        result = apply_numeric(op, result)
    return result


# --- Closed-form ladder coefficients ----------------------------------------

@dataclass(frozen=True)
class LadderCoefficients:
    op: DiffOperator
    source: LosertIndex
    target_m: float
    target_n: float
    primary_shift: Tuple[int, float]
    secondary_shift: Tuple[int, float]

    def targets(self) -> List[Tuple[LosertIndex, float]]:
        """(index, coefficient) pairs with nonzero coefficient."""
        out = []
        for dk, value in (self.primary_shift, self.secondary_shift):
            if value != 0.0:
                out.append((LosertIndex.of(self.target_m, self.target_n, self.source.k + dk), value))
        return out


def _radical(outer: float, numerator: float, denominator: float) -> float:
    """|outer| * sqrt(numerator / denominator), with 0/0 read as 0."""
    if outer == 0 or numerator == 0:
        return 0.0
    if denominator == 0:
        raise IndexRangeError("Ladder coefficient denominator vanishes for a nonzero numerator.")
    return abs(outer) * math.sqrt(numerator / denominator)


def _l_plus(m, n, k, e):
    if m > n:
        A = m - n
        alpha = _radical(e + k + m + 1, (k + 1) * (k + 2 * e + 1), (2 * k + A + 2 * e + 1) * (2 * k + A + 2 * e + 2))
        beta = _radical(e + k - n, (A + k) * (k + A + 2 * e), (2 * k + A + 2 * e + 1) * (A + 2 * k + 2 * e))
        return (1, alpha), (0, beta)
    B = n - m
    alpha = -_radical(e + k - m, (k + 2 * e) * k, (2 * k + B + 2 * e + 1) * (B + 2 * k + 2 * e))
    beta = -_radical(e + k + n + 1, (k + 1 + B) * (k + 2 * e + 1 + B), (2 * k + B + 2 * e + 1) * (B + 2 * k + 2 * e + 2))
    return (-1, alpha), (0, beta)


def _l_minus(m, n, k, e):
    if m >= n:
        A = m - n
        gamma = _radical(e + k + m, (k + 2 * e) * k, (2 * k + A + 2 * e + 1) * (A + 2 * k + 2 * e))
        delta = _radical(k - n + e + 1, (A + k + 1) * (k + A + 2 * e + 1), (2 * k + A + 2 * e + 1) * (2 * k + A + 2 * e + 2))
        return (-1, gamma), (0, delta)
    # printed radicals coincide here; taken as the adjoint of L+ from (m, n-1)
    B = n - m
    gamma = -_radical(e + k + 1 - m, (k + 1 + 2 * e) * (k + 1), (2 * k + B + 2 * e + 2) * (B + 2 * k + 2 * e + 1))
    delta = -_radical(e + k + n, (k + B) * (k + 2 * e + B), (2 * k + B + 2 * e) * (B + 2 * k + 2 * e + 1))
    return (1, gamma), (0, delta)


def _r_plus(m, n, k, e):
    if m >= n:
        A = m - n
        alpha = _radical(e + k - n, (k + 2 * e) * k, (2 * k + A + 2 * e + 1) * (A + 2 * k + 2 * e))
        beta = _radical(e + k + m + 1, (A + k + 1) * (k + A + 2 * e + 1), (2 * k + A + 2 * e + 1) * (2 * k + A + 2 * e + 2))
        return (-1, alpha), (0, beta)
    B = n - m
    alpha = -_radical(e + k + n + 1, (k + 1) * (k + 2 * e + 1), (2 * k + B + 2 * e + 1) * (B + 2 * k + 2 * e + 2))
    beta = -_radical(e + k - m, (B + k) * (k + 2 * e + B), (2 * k + B + 2 * e + 1) * (B + 2 * k + 2 * e))
    return (1, alpha), (0, beta)


def _r_minus(m, n, k, e):
    if m > n:
        A = m - n
        gamma = _radical(k - n + e + 1, (k + 1) * (k + 2 * e + 1), (2 * k + A + 2 * e + 1) * (2 * k + A + 2 * e + 2))
        delta = _radical(e + k + m, (A + k) * (k + A + 2 * e), (2 * k + A + 2 * e + 1) * (A + 2 * k + 2 * e))
        return (1, gamma), (0, delta)
    B = n - m
    gamma = -_radical(e + k + n, (k + 2 * e) * k, (2 * k + B + 2 * e + 1) * (B + 2 * k + 2 * e))
    delta = -_radical(-m + e + k + 1, (k + 1 + B) * (k + 2 * e + 1 + B), (2 * k + B + 2 * e + 1) * (B + 2 * k + 2 * e + 2))
    return (-1, gamma), (0, delta)


_LADDER_TABLE = {
    DiffOperator.L_PLUS: (_l_plus, 0, 1),
    DiffOperator.L_MINUS: (_l_minus, 0, -1),
    DiffOperator.R_PLUS: (_r_plus, 1, 0),
    DiffOperator.R_MINUS: (_r_minus, -1, 0),
}


def _require_d_perp(idx: LosertIndex) -> None:
    if classify(idx) != Sector.D_PERP:
        raise IndexRangeError(f"Index {idx} lies in sector d; closed forms cover sector d_perp only.")


def ladder_coefficients(op, idx: LosertIndex) -> LadderCoefficients:
    """Two-term action of L+-, R+- on Phi_{m,n,k} in sector d_perp.

    Raises:
        IndexRangeError: outside sector d_perp or for a non-ladder operator.
    """
    op = DiffOperator(op)
    if op not in _LADDER_TABLE:
        raise IndexRangeError(f"{op.value} is not a ladder operator.")
    _require_d_perp(idx)
    formula, dm, dn = _LADDER_TABLE[op]
    primary, secondary = formula(idx.m, idx.n, idx.k, idx.epsilon)
    return LadderCoefficients(op, idx, idx.m + dm, idx.n + dn, primary, secondary)


def _act_closed_form(op: DiffOperator, state: Dict[LosertIndex, float]) -> Dict[LosertIndex, float]:
    out: Dict[LosertIndex, float] = defaultdict(float)
    for idx, coefficient in state.items():
        if op == DiffOperator.L0:
            out[idx] += idx.n * coefficient
        elif op == DiffOperator.R0:
            out[idx] += idx.m * coefficient
        else:
            for target, value in ladder_coefficients(op, idx).targets():
                out[target] += value * coefficient
    return dict(out)


def act_word(ops: Iterable, idx: LosertIndex) -> Dict[LosertIndex, float]:
    """Closed-form action of an operator word (rightmost first) on Phi_idx."""
    state = {idx: 1.0}
    for op in reversed(list(ops)):
        state = _act_closed_form(DiffOperator(op), state)
    return state


def _tridiagonal_from(state: Dict[LosertIndex, float], idx: LosertIndex) -> Tuple[float, float, float]:
    get = lambda k: state.get(idx.with_k(k), 0.0) if k >= 0 else 0.0
    return get(idx.k + 1), get(idx.k), get(idx.k - 1)


def casimir_by_composition(idx: LosertIndex) -> Tuple[float, float, float]:
    """(c_plus, c_zero, c_minus) of Q = L0^2 - (L+L- + L-L+)/2 from the ladder tables."""
    _require_d_perp(idx)
    total: Dict[LosertIndex, float] = defaultdict(float)
    for word, weight in (
        ((DiffOperator.L0, DiffOperator.L0), 1.0),
        ((DiffOperator.L_PLUS, DiffOperator.L_MINUS), -0.5),
        ((DiffOperator.L_MINUS, DiffOperator.L_PLUS), -0.5),
    ):
        for target, value in act_word(word, idx).items():
            total[target] += weight * value
    return _tridiagonal_from(total, idx)


def casimir_tridiagonal(idx: LosertIndex) -> Tuple[float, float, float]:
    """Coefficients of Phi_{m,n,k+1}, Phi_{m,n,k}, Phi_{m,n,k-1} in Q Phi_{m,n,k}."""
    _require_d_perp(idx)
    m, n, k, e = idx.m, idx.n, idx.k, idx.epsilon
    if m == n:
        return casimir_by_composition(idx)
    if n > m:
        # Q only sees (m+n)^2 and (m-n)^2
        m, n = n, m
    A = m - n
    c_plus = -(k - n + e + 1) * (e + k + m + 1) / (2 * k + A + 2 * e + 2) * math.sqrt(
        (A + k + 1) * (k + A + 2 * e + 1) * (k + 1) * (k + 2 * e + 1)
        / ((2 * k + A + 2 * e + 1) * (A + 2 * k + 2 * e + 3))
    )
    minus_num = (k + 2 * e) * k * (A + k) * (k + A + 2 * e)
    if minus_num == 0:
        c_minus = 0.0
    else:
        c_minus = -(e + k + m) * (e + k - n) / (A + 2 * k + 2 * e) * math.sqrt(
            minus_num / ((2 * k + A + 2 * e + 1) * (A + 2 * k + 2 * e - 1))
        )
    (_, alpha), (_, beta) = _l_plus(m, n, k, e)
    c_zero = n * (n + 1) - alpha ** 2 - beta ** 2
    return c_plus, c_zero, c_minus


# --- Projections (quadrature oracle) ----------------------------------------

def project(target: LosertIndex, f, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Coefficient of Phi_target in f, in the x-measure (zero for a foreign phase)."""
    terms = f.terms if isinstance(f, ModeSum) else (f,)
    radials = [t.radial for t in terms if (t.m, t.n) == (target.m, target.n)]
    if not radials:
        return 0.0
    value = integrate_x(lambda x: eval_radial(target, x) * sum(r(x) for r in radials), spec)
    return complex(value).real


def project_ladder(op, idx: LosertIndex, target: LosertIndex, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """<Phi_target, op Phi_idx> in the x-measure, by quadrature of the differential operator."""
    return project(target, apply_numeric(op, basis_function(idx)), spec)


def unnormalised_projection(op, idx: LosertIndex, target: LosertIndex, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Ladder coefficient between the unnormalised functions e/N.

    Rescaling by N_idx / N_target recovers the normalised coefficient.
    """
    n_src, n_tgt = normalization_constant(idx), normalization_constant(target)
    source = basis_function(idx).scaled(1.0 / n_src)
    applied = apply_numeric(op, source)
    target_fn = lambda x: eval_radial(target, x) / n_tgt
    numerator = integrate_x(lambda x: target_fn(x) * applied.radial(x), spec)
    denominator = integrate_x(lambda x: target_fn(x) ** 2, spec)
    return complex(numerator).real / float(denominator)


def rescale_unnormalised(value: float, idx: LosertIndex, target: LosertIndex) -> float:
    return value * normalization_constant(idx) / normalization_constant(target)
