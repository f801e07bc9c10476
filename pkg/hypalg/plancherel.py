"""Plancherel and Losert expansions of functions on SL(2,R).

Every transform works mode by mode: a function is split into its (m, n)
phase components and each radial part is expanded over x = cosh 2rho.
Continuous components are kept in the x-measure, so for each mode

    f_r(x) = sum_lambda psi_lambda(x) (psi_lambda, f) + int dsigma w(sigma) chi_sigma(x) F(sigma),
    F(sigma) = int_1^inf chi_sigma(x) f_r(x) dx,

with w(sigma) = sigma tanh(pi sigma) for epsilon = 0 and sigma coth(pi sigma)
for epsilon = 1/2.
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import IndexRangeError
from .losert_basis import LosertIndex, basis_function, eval_radial, k_min
from .matrix_elements import MatrixElementIndex, radial_form
from .numerics import (
    ANGULAR_NODES,
    DEFAULT_SPEC,
    GroupPoint,
    ModeSum,
    QuadratureSpec,
    SeparableFunction,
    as_mode_sum,
    gauss_legendre,
    halfline_rule,
    integrate_x,
    phase_factor,
    rho_of_x,
)
from .sl2_reps import SeriesLabel, to_twice

logger = logging.getLogger(__name__)

SCHEMA = "hypalg-plancherel/1"
SIGMA_RULES = ("gauss", "uniform")
# relative size of a sampled integrand below which x-nodes are dropped
NODE_CUTOFF = 1e-18

DiscreteKey = Tuple[float, float, float]  # (lambda, n, m)
ContinuousKey = Tuple[float, float, float]  # (epsilon, n, m)
Mode = Tuple[float, float]


def plancherel_weight(sigma, epsilon: float = 0.0):
    """sigma tanh(pi (sigma + i epsilon)): sigma tanh(pi sigma) or sigma coth(pi sigma)."""
    sigma = np.asarray(sigma, dtype=float)
    if to_twice(epsilon, "epsilon") % 2:
        return sigma / np.tanh(np.pi * sigma)
    return sigma * np.tanh(np.pi * sigma)


@dataclass(frozen=True)
class SigmaGrid:
    sigma_max: float = 40.0
    n_sigma: int = 400
    rule: str = "gauss"

    def __post_init__(self):
        if not self.sigma_max > 0:
            raise ValueError("sigma_max must be positive.")
        if self.n_sigma < 1:
            raise ValueError("n_sigma must be at least 1.")
        if self.rule not in SIGMA_RULES:
            raise ValueError(f"Unknown sigma rule '{self.rule}'. Expected one of {SIGMA_RULES}.")

    def nodes_and_weights(self) -> Tuple[np.ndarray, np.ndarray]:
        if self.rule == "gauss":
            return gauss_legendre(self.n_sigma, 0.0, self.sigma_max)
        h = self.sigma_max / self.n_sigma
        return (np.arange(self.n_sigma) + 0.5) * h, np.full(self.n_sigma, h)

    @property
    def nodes(self) -> np.ndarray:
        return self.nodes_and_weights()[0]

    def to_dict(self) -> Dict:
        return {"sigma_max": self.sigma_max, "n_sigma": self.n_sigma, "rule": self.rule}

    @classmethod
    def from_dict(cls, data: Dict) -> "SigmaGrid":
        return cls(float(data["sigma_max"]), int(data["n_sigma"]), data.get("rule", "gauss"))


@dataclass
class PlancherelComponents:
    sigma_grid: SigmaGrid
    discrete_plus: Dict[DiscreteKey, complex] = field(default_factory=dict)
    discrete_minus: Dict[DiscreteKey, complex] = field(default_factory=dict)
    continuous: Dict[ContinuousKey, np.ndarray] = field(default_factory=dict)
    meta: Dict = field(default_factory=dict)

    def modes(self) -> List[Mode]:
        found = set()
        for _, n, m in list(self.discrete_plus) + list(self.discrete_minus) + list(self.continuous):
            found.add((m, n))
        return sorted(found)

    def discrete_norm(self) -> float:
        values = list(self.discrete_plus.values()) + list(self.discrete_minus.values())
        return max((abs(v) for v in values), default=0.0)

    def to_json(self) -> str:
        def discrete(entries):
            return [
                {"lambda": lam, "n": n, "m": m, "re": complex(v).real, "im": complex(v).imag}
                for (lam, n, m), v in sorted(entries.items())
            ]

        nodes = self.sigma_grid.nodes.tolist()
        document = {
            "schema": SCHEMA,
            "sigma_grid": self.sigma_grid.to_dict(),
            "discrete_plus": discrete(self.discrete_plus),
            "discrete_minus": discrete(self.discrete_minus),
            "continuous": [
                {
                    "epsilon": eps,
                    "n": n,
                    "m": m,
                    "sigma_grid": nodes,
                    "values": {"re": np.real(v).tolist(), "im": np.imag(v).tolist()},
                }
                for (eps, n, m), v in sorted(self.continuous.items())
            ],
            "meta": self.meta,
        }
        return json.dumps(document, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PlancherelComponents":
        document = json.loads(text)
        if document.get("schema") != SCHEMA:
            raise ValueError(f"Unsupported components schema '{document.get('schema')}'.")

        def discrete(entries):
            return {(e["lambda"], e["n"], e["m"]): complex(e["re"], e["im"]) for e in entries}

        continuous = {
            (e["epsilon"], e["n"], e["m"]): np.asarray(e["values"]["re"]) + 1j * np.asarray(e["values"]["im"])
            for e in document["continuous"]
        }
        return cls(
            SigmaGrid.from_dict(document["sigma_grid"]),
            discrete(document["discrete_plus"]),
            discrete(document["discrete_minus"]),
            continuous,
            document.get("meta", {}),
        )


@dataclass
class LosertCoefficients:
    coefficients: Dict[LosertIndex, complex]
    window: Tuple[float, float, int]

    def norm_squared(self) -> float:
        return float(sum(abs(c) ** 2 for c in self.coefficients.values()))


# --- Radial building blocks -------------------------------------------------

def _parity(m: float) -> float:
    return (to_twice(m, "m") % 2) / 2


def discrete_lambdas(m: float, n: float) -> List[Tuple[int, float]]:
    """(eta, lambda) of every discrete series with matrix elements at weights (m, n)."""
    if m * n <= 0 or abs(m) <= 0.5 or abs(n) <= 0.5:
        return []
    eta = 1 if m > 0 else -1
    top = min(abs(m), abs(n))
    out = []
    lam = top
    while lam > 0.5:
        out.append((eta, lam))
        lam -= 1
    return out


def _discrete_label(eta: int, lam: float) -> SeriesLabel:
    return SeriesLabel.discrete_plus(lam) if eta > 0 else SeriesLabel.discrete_minus(lam)


def discrete_radial(eta: int, lam: float, m: float, n: float) -> Callable[[np.ndarray], np.ndarray]:
    form = radial_form(MatrixElementIndex.of(_discrete_label(eta, lam), n, m))
    return lambda x: form.value(rho_of_x(np.asarray(x, dtype=float)))


def continuous_radial(sigma: float, m: float, n: float) -> Callable[[np.ndarray], np.ndarray]:
    label = SeriesLabel.principal(sigma, _parity(m))
    form = radial_form(MatrixElementIndex.of(label, n, m))
    return lambda x: form.value(rho_of_x(np.asarray(x, dtype=float)))


def mode_radial(f, m: float, n: float) -> Callable[[np.ndarray], np.ndarray]:
    """Radial part of the (m, n) phase component of f."""
    fs = as_mode_sum(f)
    if fs is not None:
        return fs.radial_of(m, n)
    angles = 2.0 * np.pi * np.arange(ANGULAR_NODES) / ANGULAR_NODES
    phi1 = angles[None, :, None]
    phi2 = angles[None, None, :]

    def radial(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        point = GroupPoint(rho_of_x(x)[:, None, None], phi1, phi2)
        values = np.conj(phase_factor(m, n, phi1, phi2)) * f(point)
        values = np.broadcast_to(values, (x.size, ANGULAR_NODES, ANGULAR_NODES))
        return values.mean(axis=(1, 2))

    return radial


def _window_modes(window, f=None) -> List[Mode]:
    m_max, n_max = window[0], window[1]
    modes = []
    for eps in (0.0, 0.5):
        twice_eps = to_twice(eps)
        for twice_m in range(-to_twice(m_max), to_twice(m_max) + 1):
            if twice_m % 2 != twice_eps:
                continue
            for twice_n in range(-to_twice(n_max), to_twice(n_max) + 1):
                if twice_n % 2 == twice_eps:
                    modes.append((twice_m / 2, twice_n / 2))
    fs = as_mode_sum(f) if f is not None else None
    if fs is not None:
        present = set(fs.modes())
        modes = [mode for mode in modes if mode in present]
    return modes


@dataclass(frozen=True)
class SampledRadial:
    """f_r sampled on the fixed x-rule, with negligible nodes dropped."""

    x: np.ndarray
    weighted: np.ndarray

    @classmethod
    def of(cls, radial: Callable, rule: Tuple[np.ndarray, np.ndarray]) -> "SampledRadial":
        x, w = rule
        weighted = w * np.asarray(radial(x), dtype=complex)
        scale = np.max(np.abs(weighted)) if weighted.size else 0.0
        if scale == 0:
            return cls(x[:0], weighted[:0])
        keep = np.abs(weighted) > NODE_CUTOFF * scale
        return cls(x[keep], weighted[keep])

    def against(self, kernel: Callable[[np.ndarray], np.ndarray]) -> complex:
        if self.x.size == 0:
            return 0j
        return complex(np.sum(kernel(self.x) * self.weighted))


def _forward_mode(f, mode: Mode, grid: SigmaGrid, rule) -> Dict:
    m, n = mode
    sampled = SampledRadial.of(mode_radial(f, m, n), rule)
    plus, minus = {}, {}
    for eta, lam in discrete_lambdas(m, n):
        value = 0.25 * sampled.against(discrete_radial(eta, lam, m, n))
        (plus if eta > 0 else minus)[(lam, n, m)] = value
    sigmas, _ = grid.nodes_and_weights()
    values = np.array([sampled.against(continuous_radial(s, m, n)) for s in sigmas], dtype=complex)
    return {"plus": plus, "minus": minus, "continuous": {(_parity(m), n, m): values}}


def tail_estimate(values: np.ndarray, grid: SigmaGrid, epsilon: float) -> float:
    """Rough size of the sigma integral beyond sigma_max from the last grid samples."""
    sigmas, _ = grid.nodes_and_weights()
    if sigmas.size < 2:
        return float("nan")
    density = np.abs(plancherel_weight(sigmas, epsilon) * values)
    last = density[-max(2, sigmas.size // 20):]
    return float(np.max(last) * (sigmas[-1] - sigmas[0]) / sigmas.size)


def forward(
    f,
    window: Sequence[float],
    sigma_grid: Optional[SigmaGrid] = None,
    threads: Optional[int] = None,
    far_panels: int = 60,
) -> PlancherelComponents:
    """Plancherel components of f for all modes with |m| <= window[0], |n| <= window[1].

    Discrete components are group inner products (psi, f); continuous
    components are sampled on the sigma grid in the x-measure.
    """
    grid = sigma_grid or SigmaGrid()
    rule = halfline_rule(far_panels=far_panels, level=0)
    modes = _window_modes(window, f)
    result = PlancherelComponents(grid)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda mode: _forward_mode(f, mode, grid, rule), modes))
    tails = []
    for part in parts:
        result.discrete_plus.update(part["plus"])
        result.discrete_minus.update(part["minus"])
        result.continuous.update(part["continuous"])
        for (eps, _, _), values in part["continuous"].items():
            tails.append(tail_estimate(values, grid, eps))
    result.meta = {
        "window": list(window[:2]),
        "far_panels": far_panels,
        "tail_estimate": max(tails, default=0.0),
    }
    logger.debug(f"forward transform over {len(modes)} modes, tail estimate {result.meta['tail_estimate']:.3e}")
    return result


def _inverse_radial(c: PlancherelComponents, m: float, n: float) -> Callable[[np.ndarray], np.ndarray]:
    discrete = []
    for eta, entries in ((1, c.discrete_plus), (-1, c.discrete_minus)):
        for (lam, nn, mm), value in entries.items():
            if (mm, nn) == (m, n) and value != 0:
                discrete.append((value, discrete_radial(eta, lam, m, n)))
    eps = _parity(m)
    values = c.continuous.get((eps, n, m))
    sigmas, weights = c.sigma_grid.nodes_and_weights()
    kernels = []
    if values is not None:
        factors = weights * plancherel_weight(sigmas, eps) * values
        kernels = [(factor, continuous_radial(s, m, n)) for s, factor in zip(sigmas, factors) if factor != 0]

    def radial(x):
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape, dtype=complex)
        for value, psi in discrete:
            total = total + value * psi(x)
        for factor, chi in kernels:
            total = total + factor * chi(x)
        return total

    return radial


def inverse(c: PlancherelComponents) -> ModeSum:
    """Evaluable reconstruction: discrete sums plus the sigma integral on the stored grid."""
    return ModeSum(tuple(SeparableFunction(m, n, _inverse_radial(c, m, n), max_order=0) for m, n in c.modes()))


# --- Losert expansions ------------------------------------------------------

def losert_expand(
    f,
    window: Tuple[float, float, int],
    spec: QuadratureSpec = DEFAULT_SPEC,
    threads: Optional[int] = None,
) -> LosertCoefficients:
    """Coefficients c_{mnk} = int e_{mnk} f_{mn} dx over the window (M, N, K)."""
    m_max, n_max, k_max = window
    modes = _window_modes(window, f)

    def expand_mode(mode):
        m, n = mode
        radial = mode_radial(f, m, n)
        out = {}
        for k in range(k_max + 1):
            idx = LosertIndex.of(m, n, k)
            out[idx] = complex(integrate_x(lambda x: eval_radial(idx, x) * radial(x), spec))
        return out

    coefficients: Dict[LosertIndex, complex] = {}
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for part in pool.map(expand_mode, modes):
            coefficients.update(part)
    return LosertCoefficients(coefficients, (m_max, n_max, k_max))


def losert_reconstruct(c: LosertCoefficients) -> ModeSum:
    terms = [
        basis_function(idx).scaled(value)
        for idx, value in sorted(c.coefficients.items())
        if value != 0
    ]
    return ModeSum(tuple(terms))


def losert_residual(f, c: LosertCoefficients, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """||f - reconstruct(c)||^2 in the x-measure, summed over the window modes."""
    reconstruction = losert_reconstruct(c)
    total = 0.0
    for m, n in _window_modes(c.window, f):
        fr, gr = mode_radial(f, m, n), reconstruction.radial_of(m, n)
        total += float(integrate_x(lambda x: np.abs(fr(x) - gr(x)) ** 2, spec))
    return total


# --- Basis conversion -------------------------------------------------------

def conversion_coefficient(
    m: float, n: float, k: int, sigma: float, spec: QuadratureSpec = DEFAULT_SPEC
) -> float:
    """f_{mnk}(sigma) = int chi_sigma e_{mnk} dx for a sector d_perp index.

    Raises:
        IndexRangeError: if k < k_min(m, n).
    """
    if k < k_min(m, n):
        raise IndexRangeError(f"k = {k} lies below k_min = {k_min(m, n)} for (m, n) = ({m}, {n}).")
    idx = LosertIndex.of(m, n, k)
    chi = continuous_radial(sigma, m, n)
    return float(np.real(integrate_x(lambda x: chi(x) * eval_radial(idx, x), spec)))


def basis_conversion(
    m: float, n: float, k: int, sigma_grid: Optional[SigmaGrid] = None, far_panels: int = 60
) -> np.ndarray:
    """f_{mnk}(sigma) sampled on the grid."""
    if k < k_min(m, n):
        raise IndexRangeError(f"k = {k} lies below k_min = {k_min(m, n)} for (m, n) = ({m}, {n}).")
    grid = sigma_grid or SigmaGrid()
    idx = LosertIndex.of(m, n, k)
    sampled = SampledRadial.of(lambda x: eval_radial(idx, x), halfline_rule(far_panels=far_panels, level=0))
    sigmas, _ = grid.nodes_and_weights()
    return np.array([sampled.against(continuous_radial(s, m, n)).real for s in sigmas])


def reconstruct_from_conversion(
    m: float, n: float, values: np.ndarray, sigma_grid: SigmaGrid
) -> Callable[[np.ndarray], np.ndarray]:
    """e_{mnk}(x) rebuilt from sampled f_{mnk}(sigma) by the sigma integral."""
    eps = _parity(m)
    sigmas, weights = sigma_grid.nodes_and_weights()
    factors = weights * plancherel_weight(sigmas, eps) * np.asarray(values)

    def radial(x):
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape)
        for s, factor in zip(sigmas, factors):
            total = total + factor * np.real(continuous_radial(s, m, n)(x))
        return total

    return radial


def accumulate_lp(
    m: float, n: float, sigma: float, k_max: int, spec: QuadratureSpec = DEFAULT_SPEC
) -> Callable[[np.ndarray], np.ndarray]:
    """Partial sum sum_{k_min <= k <= k_max} f_{mnk}(sigma) e_{mnk}(x) approximating chi_sigma."""
    terms = []
    for k in range(k_min(m, n), k_max + 1):
        idx = LosertIndex.of(m, n, k)
        terms.append((conversion_coefficient(m, n, k, sigma, spec), idx))

    def radial(x):
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape)
        for coefficient, idx in terms:
            total = total + coefficient * eval_radial(idx, x)
        return total

    return radial


def smeared_completeness(
    f, g, mode: Mode, sigma_grid: Optional[SigmaGrid] = None, spec: QuadratureSpec = DEFAULT_SPEC
) -> Tuple[complex, complex]:
    """Both sides of the completeness relation of the matrix elements paired with f and g.

    Returns (int conj(f_r) g_r dx, discrete sum + sigma integral of conj(F) G).
    """
    m, n = mode
    grid = sigma_grid or SigmaGrid()
    fr, gr = mode_radial(f, m, n), mode_radial(g, m, n)
    direct = complex(integrate_x(lambda x: np.conj(fr(x)) * gr(x), spec))
    rule = halfline_rule(level=0)
    fs, gs = SampledRadial.of(fr, rule), SampledRadial.of(gr, rule)
    spectral = 0j
    for eta, lam in discrete_lambdas(m, n):
        psi = discrete_radial(eta, lam, m, n)
        # psi / 2 is unit-normalised in the x-measure
        spectral += 0.25 * np.conj(fs.against(psi)) * gs.against(psi)
    sigmas, weights = grid.nodes_and_weights()
    eps = _parity(m)
    for s, w in zip(sigmas, weights):
        chi = continuous_radial(s, m, n)
        spectral += w * float(plancherel_weight(s, eps)) * np.conj(fs.against(chi)) * gs.against(chi)
    return direct, complex(spectral)


def relative_l2_error(f, g, modes: Sequence[Mode], spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    num, den = 0.0, 0.0
    for m, n in modes:
        fr, gr = mode_radial(f, m, n), mode_radial(g, m, n)
        num += float(integrate_x(lambda x: np.abs(fr(x) - gr(x)) ** 2, spec))
        den += float(integrate_x(lambda x: np.abs(fr(x)) ** 2, spec))
    return math.sqrt(num / den) if den else math.sqrt(num)
