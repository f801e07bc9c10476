"""Products of Losert functions and the centrally extended current algebra.

Structure constants of pointwise products are exact: in u = 2/(x+1) every
product of two basis functions divided by the weight of the target mode is a
polynomial, so its expansion stops at a computable degree and Gauss-Legendre
quadrature in u reproduces it to rounding.

Elements of the algebra are finite sums theta_a^{mnk} T^a Phi_{m,n,k} plus
multiples of L0, R0 and of the two central elements. LosertIndex(m, n, k)
carries R0 weight m and L0 weight n.
"""

import json
import logging
import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .exceptions import IntegrabilityError, UnsupportedSeries, WindowOverflow, WindowTooSmall
from .losert_basis import (
    LosertIndex,
    basis_function,
    eval_radial,
    indices_in_window,
    k_min,
    reduced_degree,
    reduced_polynomial,
)
from .matrix_elements import MatrixElementIndex, matrix_element_function, radial_form
from .numerics import (
    ANGULAR_NODES,
    DEFAULT_SPEC,
    GroupPoint,
    ModeSum,
    QuadratureSpec,
    SeparableFunction,
    gauss_legendre,
    integrate_x,
    rho_of_x,
)
from .plancherel import PlancherelComponents, SigmaGrid, forward, losert_expand
from .sl2_action import DiffOperator, apply_numeric

logger = logging.getLogger(__name__)

# structure constants below this are rounding noise of an exact zero
ZERO_CUTOFF = 1e-13
MIN_NODES = 64

Window = Tuple[float, float, int]
Key = Tuple[int, LosertIndex]


# --- Finite-dimensional Lie algebras ----------------------------------------

@dataclass(frozen=True)
class CartanData:
    """Cartan subalgebra and root decomposition of a finite Lie algebra.

    ``root_vectors`` maps each root to the coefficients of E_alpha in the
    T^a basis.
    """

    cartan_indices: Tuple[int, ...]
    roots: Tuple[Tuple[float, ...], ...]
    root_vectors: Dict[Tuple[float, ...], np.ndarray]

    @property
    def rank(self) -> int:
        return len(self.cartan_indices)


@dataclass(frozen=True)
class FiniteLieAlgebra:
    """[T^a, T^b] = i f^{ab}_c T^c with ``structure[a, b, c] = f^{ab}_c``."""

    name: str
    structure: np.ndarray
    cartan: Optional[CartanData] = None

    def __post_init__(self):
        f = np.asarray(self.structure, dtype=float)
        if f.ndim != 3 or len(set(f.shape)) != 1:
            raise ValueError("Structure constants must have shape (dim, dim, dim).")
        if not np.allclose(f, -np.transpose(f, (1, 0, 2)), atol=1e-14):
            raise ValueError("Structure constants must be antisymmetric in the first two indices.")
        object.__setattr__(self, "structure", f)

    @property
    def dim(self) -> int:
        return self.structure.shape[0]

    @cached_property
    def killing_form(self) -> np.ndarray:
        """g^{ab} = tr(ad T^a ad T^b) = -f^{ad}_c f^{bc}_d."""
        return -np.einsum("adc,bcd->ab", self.structure, self.structure)

    def jacobi_residual(self) -> float:
        f = self.structure
        cyclic = (
            np.einsum("abd,dce->abce", f, f)
            + np.einsum("bcd,dae->abce", f, f)
            + np.einsum("cad,dbe->abce", f, f)
        )
        return float(np.max(np.abs(cyclic))) if cyclic.size else 0.0

    @cached_property
    def h(self) -> np.ndarray:
        """Killing form restricted to the Cartan subalgebra."""
        if self.cartan is None:
            raise ValueError(f"Algebra {self.name} carries no Cartan data.")
        idx = list(self.cartan.cartan_indices)
        return self.killing_form[np.ix_(idx, idx)]

    def root_basis(self) -> Tuple[np.ndarray, List[Tuple[float, ...]]]:
        """Columns: the Cartan generators then the root vectors, with their roots (zero for H^i)."""
        if self.cartan is None:
            raise ValueError(f"Algebra {self.name} carries no Cartan data.")
        columns, labels = [], []
        zero = tuple(0.0 for _ in range(self.cartan.rank))
        for i in self.cartan.cartan_indices:
            e = np.zeros(self.dim, dtype=complex)
            e[i] = 1.0
            columns.append(e)
            labels.append(zero)
        for root in self.cartan.roots:
            columns.append(np.asarray(self.cartan.root_vectors[root], dtype=complex))
            labels.append(root)
        return np.column_stack(columns), labels

    def to_dict(self) -> Dict:
        entries = [
            [a, b, c, float(self.structure[a, b, c])]
            for a in range(self.dim)
            for b in range(a + 1, self.dim)
            for c in range(self.dim)
            if self.structure[a, b, c] != 0
        ]
        data = {"name": self.name, "dim": self.dim, "structure_constants": entries}
        if self.cartan is not None:
            data["cartan"] = {
                "cartan_indices": list(self.cartan.cartan_indices),
                "roots": [list(r) for r in self.cartan.roots],
                "root_vectors": [
                    {"root": list(r), "re": np.real(v).tolist(), "im": np.imag(v).tolist()}
                    for r, v in self.cartan.root_vectors.items()
                ],
            }
        return data

    @classmethod
    def from_dict(cls, data: Dict) -> "FiniteLieAlgebra":
        dim = int(data["dim"])
        f = np.zeros((dim, dim, dim))
        for a, b, c, value in data["structure_constants"]:
            f[a, b, c] = value
            f[b, a, c] = -value
        cartan = None
        if "cartan" in data:
            raw = data["cartan"]
            vectors = {
                tuple(float(x) for x in entry["root"]): np.asarray(entry["re"]) + 1j * np.asarray(entry["im"])
                for entry in raw["root_vectors"]
            }
            cartan = CartanData(
                tuple(raw["cartan_indices"]),
                tuple(tuple(float(x) for x in r) for r in raw["roots"]),
                vectors,
            )
        return cls(data.get("name", "custom"), f, cartan)


def load_algebra(path) -> FiniteLieAlgebra:
    with open(path, "r", encoding="utf-8") as f:
        return FiniteLieAlgebra.from_dict(json.load(f))


def _rank_one_cartan(h_index: int, x_index: int, y_index: int) -> CartanData:
    plus = np.zeros(3, dtype=complex)
    minus = np.zeros(3, dtype=complex)
    plus[x_index], plus[y_index] = 1 / math.sqrt(2), 1j / math.sqrt(2)
    minus[x_index], minus[y_index] = 1 / math.sqrt(2), -1j / math.sqrt(2)
    return CartanData((h_index,), ((1.0,), (-1.0,)), {(1.0,): plus, (-1.0,): minus})


def su2() -> FiniteLieAlgebra:
    f = np.zeros((3, 3, 3))
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        f[a, b, c], f[b, a, c] = 1.0, -1.0
    return FiniteLieAlgebra("su2", f, _rank_one_cartan(2, 0, 1))


def sl2() -> FiniteLieAlgebra:
    f = np.zeros((3, 3, 3))
    for (a, b, c), value in (((0, 1, 2), 1.0), ((2, 0, 1), 1.0), ((1, 2, 0), -1.0)):
        f[a, b, c], f[b, a, c] = value, -value
    return FiniteLieAlgebra("sl2", f, _rank_one_cartan(0, 1, 2))


BUILTIN_ALGEBRAS: Dict[str, Callable[[], FiniteLieAlgebra]] = {"su2": su2, "sl2": sl2}


def get_algebra(name_or_path: str) -> FiniteLieAlgebra:
    if name_or_path in BUILTIN_ALGEBRAS:
        return BUILTIN_ALGEBRAS[name_or_path]()
    return load_algebra(name_or_path)


# --- Structure constants ----------------------------------------------------

@dataclass(frozen=True)
class _ProductShape:
    target_m: float
    target_n: float
    u_power: int
    one_minus_u_power: int
    quotient_u_power: int
    quotient_one_minus_u_power: int
    target_u_power: int
    target_a: int
    degree: int


def _product_shape(idx1: LosertIndex, idx2: LosertIndex) -> _ProductShape:
    m, n = idx1.m + idx2.m, idx1.n + idx2.n
    eps = ((idx1.twice_m + idx2.twice_m) % 2) / 2
    a1, a2 = int(round(abs(idx1.m - idx1.n))), int(round(abs(idx2.m - idx2.n)))
    a = int(round(abs(m - n)))
    quotient_u = int(round(1 + idx1.epsilon + idx2.epsilon - eps))
    quotient_v = (a1 + a2 - a) // 2
    degree = reduced_degree(idx1) + reduced_degree(idx2) + quotient_u + quotient_v
    return _ProductShape(
        m,
        n,
        int(round(1 + idx1.epsilon + idx2.epsilon + eps)),
        (a1 + a2 + a) // 2,
        quotient_u,
        quotient_v,
        int(round(2 * eps)),
        a,
        degree,
    )


def _node_count(degree: int) -> int:
    needed = degree // 2 + 2
    return max(MIN_NODES, 16 * math.ceil(needed / 16))


@lru_cache(maxsize=4096)
def _polynomial_at_nodes(idx: LosertIndex, n_nodes: int) -> np.ndarray:
    u, _ = gauss_legendre(n_nodes, 0.0, 1.0)
    values = np.asarray(reduced_polynomial(idx, u), dtype=float)
    values.setflags(write=False)
    return values


@dataclass(frozen=True)
class ProductExpansion:
    """Phi_idx1 Phi_idx2 = sum_k C_k Phi_{m1+m2, n1+n2, k}."""

    idx1: LosertIndex
    idx2: LosertIndex
    coefficients: Tuple[Tuple[int, float], ...]
    residual: float

    @property
    def target_mode(self) -> Tuple[float, float]:
        return self.idx1.m + self.idx2.m, self.idx1.n + self.idx2.n


def expand_product(idx1: LosertIndex, idx2: LosertIndex, k_window: Optional[int] = None) -> ProductExpansion:
    """Exact expansion of the product, truncated at k_window when given."""
    shape = _product_shape(idx1, idx2)
    k_top = max(shape.degree, k_min(shape.target_m, shape.target_n) - 1)
    k_stop = k_top if k_window is None else min(k_top, k_window)
    total_degree = (
        shape.u_power + shape.one_minus_u_power + reduced_degree(idx1) + reduced_degree(idx2) + k_top
    )
    residual_degree = shape.target_u_power + shape.target_a + 2 * max(shape.degree, k_top)
    n_nodes = _node_count(max(total_degree, residual_degree))
    u, w = gauss_legendre(n_nodes, 0.0, 1.0)
    q1, q2 = _polynomial_at_nodes(idx1, n_nodes), _polynomial_at_nodes(idx2, n_nodes)
    weight = 2.0 * w * u ** shape.u_power * (1 - u) ** shape.one_minus_u_power * q1 * q2

    quotient = u ** shape.quotient_u_power * (1 - u) ** shape.quotient_one_minus_u_power * q1 * q2
    remainder = quotient.copy()
    coefficients = []
    for k in range(k_stop + 1):
        target = LosertIndex.of(shape.target_m, shape.target_n, k)
        q = _polynomial_at_nodes(target, n_nodes)
        value = float(np.sum(weight * q))
        remainder = remainder - value * q
        if abs(value) > ZERO_CUTOFF:
            coefficients.append((k, value))
    target_weight = 2.0 * w * u ** shape.target_u_power * (1 - u) ** shape.target_a
    residual = math.sqrt(max(float(np.sum(target_weight * remainder ** 2)), 0.0))
    return ProductExpansion(idx1, idx2, tuple(coefficients), residual)


def structure_constants(
    idx1: LosertIndex, idx2: LosertIndex, k_window: int, tol: float = 1e-10
) -> List[Tuple[int, float]]:
    """(k'', C) with Phi_idx1 Phi_idx2 = sum C Phi_{m+m', n+n', k''}, k'' <= k_window.

    Raises:
        WindowTooSmall: if the truncated sum leaves a residual norm above tol.
    """
    expansion = expand_product(idx1, idx2, k_window)
    if expansion.residual > tol:
        raise WindowTooSmall(
            f"Product {idx1} x {idx2} leaves residual {expansion.residual:.3e} at k_window = {k_window}."
        )
    return list(expansion.coefficients)


def structure_constants_by_quadrature(
    idx1: LosertIndex, idx2: LosertIndex, k_window: int, spec: QuadratureSpec = DEFAULT_SPEC
) -> List[Tuple[int, float]]:
    """Same projections by adaptive quadrature over x."""
    m, n = idx1.m + idx2.m, idx1.n + idx2.n
    out = []
    for k in range(k_window + 1):
        target = LosertIndex.of(m, n, k)
        value = integrate_x(lambda x: eval_radial(target, x) * eval_radial(idx1, x) * eval_radial(idx2, x), spec)
        out.append((k, float(np.real(value))))
    return out


def product_function(idx1: LosertIndex, idx2: LosertIndex) -> SeparableFunction:
    return SeparableFunction(
        idx1.m + idx2.m,
        idx2.n + idx1.n,
        lambda x: eval_radial(idx1, x) * eval_radial(idx2, x),
        max_order=0,
    )


# --- Structure tables -------------------------------------------------------

def _canonical(idx1: LosertIndex, idx2: LosertIndex) -> Tuple[LosertIndex, LosertIndex]:
    return (idx1, idx2) if idx1 <= idx2 else (idx2, idx1)


def in_window(idx: LosertIndex, window: Window) -> bool:
    return abs(idx.m) <= window[0] and abs(idx.n) <= window[1] and idx.k <= window[2]


def mode_in_window(m: float, n: float, window: Window) -> bool:
    return abs(m) <= window[0] and abs(n) <= window[1]


@dataclass
class StructureTable:
    window: Window
    tolerance: float
    entries: Dict[Tuple[LosertIndex, LosertIndex], Tuple[Tuple[int, float], ...]] = field(default_factory=dict)
    max_residual: float = 0.0

    def lookup(self, idx1: LosertIndex, idx2: LosertIndex) -> Tuple[Tuple[int, float], ...]:
        key = _canonical(idx1, idx2)
        if key not in self.entries:
            raise WindowOverflow(f"No structure constants stored for {idx1} x {idx2}.")
        return self.entries[key]

    def to_dict(self) -> Dict:
        def encode(idx: LosertIndex) -> str:
            return f"{idx.twice_m},{idx.twice_n},{idx.k}"

        return {
            "window": list(self.window),
            "tolerance": self.tolerance,
            "max_residual": self.max_residual,
            "entries": {
                f"{encode(i1)}|{encode(i2)}": [[k, c] for k, c in values]
                for (i1, i2), values in sorted(self.entries.items())
            },
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "StructureTable":
        def decode(text: str) -> LosertIndex:
            twice_m, twice_n, k = (int(v) for v in text.split(","))
            return LosertIndex(twice_m, twice_n, k)

        entries = {}
        for key, values in data["entries"].items():
            left, right = key.split("|")
            entries[(decode(left), decode(right))] = tuple((int(k), float(c)) for k, c in values)
        window = tuple(data["window"])
        return cls((window[0], window[1], int(window[2])), float(data["tolerance"]), entries, float(data["max_residual"]))


def table_pairs(window: Window) -> List[Tuple[LosertIndex, LosertIndex]]:
    indices = sorted(indices_in_window(*window))
    pairs = []
    for i, idx1 in enumerate(indices):
        for idx2 in indices[i:]:
            if mode_in_window(idx1.m + idx2.m, idx1.n + idx2.n, window):
                pairs.append((idx1, idx2))
    return pairs


def build_structure_table(window: Window, tol: float = 1e-8, threads: Optional[int] = None) -> StructureTable:
    """Exact structure constants for every in-window pair whose product mode is in the window.

    Stored lists are complete (they may run past window[2]); brackets flag such entries.
    """
    pairs = table_pairs(window)
    logger.info(f"Building structure table for window {window}: {len(pairs)} pairs")
    with ThreadPoolExecutor(max_workers=threads) as pool:
        expansions = list(pool.map(lambda pair: expand_product(*pair), pairs, chunksize=64))
    table = StructureTable(tuple(window), tol)
    for expansion in expansions:
        table.entries[(expansion.idx1, expansion.idx2)] = expansion.coefficients
        table.max_residual = max(table.max_residual, expansion.residual)
    if table.max_residual > tol:
        logger.warning(f"Structure table residual {table.max_residual:.3e} exceeds tolerance {tol:.1e}")
    return table


# --- Algebra elements -------------------------------------------------------

@dataclass(frozen=True)
class CentralCharges:
    k_l: float = 0.0
    k_r: float = 0.0


@dataclass
class AlgebraElement:
    """theta_a^{I} T^a Phi_I + l0 L0 + r0 R0 + kl K_L + kr K_R."""

    terms: Dict[Key, complex] = field(default_factory=dict)
    l0: complex = 0j
    r0: complex = 0j
    kl: complex = 0j
    kr: complex = 0j

    @classmethod
    def generator(cls, a: int, idx: LosertIndex, coefficient: complex = 1.0) -> "AlgebraElement":
        return cls({(a, idx): complex(coefficient)})

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self.combine(other, 1.0)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self.combine(other, -1.0)

    def combine(self, other: "AlgebraElement", factor: complex) -> "AlgebraElement":
        terms = defaultdict(complex, self.terms)
        for key, value in other.terms.items():
            terms[key] += factor * value
        return AlgebraElement(
            dict(terms),
            self.l0 + factor * other.l0,
            self.r0 + factor * other.r0,
            self.kl + factor * other.kl,
            self.kr + factor * other.kr,
        )

    def scaled(self, factor: complex) -> "AlgebraElement":
        return AlgebraElement().combine(self, factor)

    def norm(self) -> float:
        values = list(self.terms.values()) + [self.l0, self.r0, self.kl, self.kr]
        return max((abs(v) for v in values), default=0.0)

    def central_value(self, charges: CentralCharges) -> complex:
        return self.kl * charges.k_l + self.kr * charges.k_r

    def indices(self) -> List[LosertIndex]:
        return sorted({idx for _, idx in self.terms})

    def to_dict(self) -> Dict:
        return {
            "terms": [
                {"a": a, "m": idx.m, "n": idx.n, "k": idx.k, "re": complex(v).real, "im": complex(v).imag}
                for (a, idx), v in sorted(self.terms.items())
            ],
            "l0": [complex(self.l0).real, complex(self.l0).imag],
            "r0": [complex(self.r0).real, complex(self.r0).imag],
            "kl": [complex(self.kl).real, complex(self.kl).imag],
            "kr": [complex(self.kr).real, complex(self.kr).imag],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "AlgebraElement":
        def scalar(value) -> complex:
            if value is None:
                return 0j
            if isinstance(value, (list, tuple)):
                return complex(value[0], value[1])
            return complex(value)

        terms = defaultdict(complex)
        for entry in data.get("terms", []):
            idx = LosertIndex.of(entry["m"], entry["n"], entry["k"])
            terms[(int(entry["a"]), idx)] += complex(entry.get("re", 0.0), entry.get("im", 0.0))
        return cls(
            dict(terms),
            scalar(data.get("l0")),
            scalar(data.get("r0")),
            scalar(data.get("kl")),
            scalar(data.get("kr")),
        )


def _delta_pair(idx1: LosertIndex, idx2: LosertIndex) -> bool:
    return idx1.k == idx2.k and idx1.twice_m == -idx2.twice_m and idx1.twice_n == -idx2.twice_n


def bracket(
    x: AlgebraElement, y: AlgebraElement, algebra: FiniteLieAlgebra, table: StructureTable
) -> AlgebraElement:
    """[x, y] with

        [T^a_I, T^b_J] = i f^{ab}_c C_{IJ}^{k''} T^c_{(m+m', n+n', k'')} + g^{ab} d_{IJ} (n K_L + m K_R),
        [L0, T_I] = n T_I,  [R0, T_I] = m T_I,

    where d_{IJ} pairs I with (-m, -n, k). The central part lands on kl and kr.

    Raises:
        WindowOverflow: if some product leaves table.window; the in-window
            part of the result is attached as ``partial``.
    """
    f, g = algebra.structure, algebra.killing_form
    window = table.window
    terms: Dict[Key, complex] = defaultdict(complex)
    kl = kr = 0j
    overflow = []
    for (a, idx1), xv in x.terms.items():
        for (b, idx2), yv in y.terms.items():
            coefficient = xv * yv
            if coefficient == 0:
                continue
            if _delta_pair(idx1, idx2) and g[a, b] != 0:
                kl += g[a, b] * idx1.n * coefficient
                kr += g[a, b] * idx1.m * coefficient
            couplings = [(c, f[a, b, c]) for c in range(algebra.dim) if f[a, b, c] != 0]
            if not couplings:
                continue
            m, n = idx1.m + idx2.m, idx1.n + idx2.n
            if not (in_window(idx1, window) and in_window(idx2, window) and mode_in_window(m, n, window)):
                overflow.append((idx1, idx2))
                continue
            for k, value in table.lookup(idx1, idx2):
                if k > window[2]:
                    overflow.append((idx1, idx2))
                    continue
                target = LosertIndex.of(m, n, k)
                for c, fc in couplings:
                    terms[(c, target)] += 1j * fc * value * coefficient
    for (b, idx2), yv in y.terms.items():
        terms[(b, idx2)] += (x.l0 * idx2.n + x.r0 * idx2.m) * yv
    for (a, idx1), xv in x.terms.items():
        terms[(a, idx1)] -= (y.l0 * idx1.n + y.r0 * idx1.m) * xv
    result = AlgebraElement({key: v for key, v in terms.items() if v != 0}, kl=kl, kr=kr)
    if overflow:
        raise WindowOverflow(
            f"{len(overflow)} product(s) leave the window {window}, first {overflow[0][0]} x {overflow[0][1]}.",
            partial=result,
        )
    return result


def killing_pairing(x: AlgebraElement, y: AlgebraElement, algebra: FiniteLieAlgebra) -> complex:
    """<T^a_I, T^b_J> = g^{ab} delta_{kk'} delta_{m+m'} delta_{n+n'}, extended bilinearly."""
    g = algebra.killing_form
    total = 0j
    for (a, idx1), xv in x.terms.items():
        for (b, idx2), yv in y.terms.items():
            if _delta_pair(idx1, idx2):
                total += g[a, b] * xv * yv
    return total


def cocycle(x: AlgebraElement, y: AlgebraElement, charges: CentralCharges, algebra: FiniteLieAlgebra) -> complex:
    """k_L omega_L(x, y) + k_R omega_R(x, y) in closed form."""
    g = algebra.killing_form
    total = 0j
    for (a, idx1), xv in x.terms.items():
        for (b, idx2), yv in y.terms.items():
            if _delta_pair(idx1, idx2):
                total += g[a, b] * xv * yv * (charges.k_l * idx1.n + charges.k_r * idx1.m)
    return total


def _angular_product(f: Callable, g: Callable, x: np.ndarray) -> np.ndarray:
    """Mean over both angles of f(p) g(p), without conjugation."""
    angles = 2.0 * np.pi * np.arange(ANGULAR_NODES) / ANGULAR_NODES
    phi1 = angles[None, :, None]
    phi2 = angles[None, None, :]
    point = GroupPoint(rho_of_x(x)[:, None, None], phi1, phi2)
    values = np.broadcast_to(f(point) * g(point), (x.size, ANGULAR_NODES, ANGULAR_NODES))
    return values.mean(axis=(1, 2))


def pair_by_quadrature(f: Callable, g: Callable, spec: QuadratureSpec = DEFAULT_SPEC) -> complex:
    """int dx mean_phi f g for callables of GroupPoint."""
    return complex(integrate_x(lambda x: _angular_product(f, g, np.atleast_1d(x)), spec))


def cocycle_by_quadrature(
    x: AlgebraElement,
    y: AlgebraElement,
    charges: CentralCharges,
    algebra: FiniteLieAlgebra,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> complex:
    """k_L int <X, L0 Y> + k_R int <X, R0 Y>, with L0 and R0 applied by finite differences."""
    g = algebra.killing_form
    total = 0j
    for (a, idx1), xv in x.terms.items():
        phi1 = lambda p, idx=idx1: basis_function(idx)(p)
        left = apply_numeric(DiffOperator.L0, phi1)
        right = apply_numeric(DiffOperator.R0, phi1)
        for (b, idx2), yv in y.terms.items():
            if g[a, b] == 0:
                continue
            phi2 = basis_function(idx2)
            value = charges.k_l * pair_by_quadrature(left, phi2, spec) + charges.k_r * pair_by_quadrature(right, phi2, spec)
            total += g[a, b] * xv * yv * value
    return total


# --- Currents ---------------------------------------------------------------

Current = Dict[int, ModeSum]


def element_from_current(theta: Current, window: Window, spec: QuadratureSpec = DEFAULT_SPEC) -> AlgebraElement:
    terms = {}
    for a, function in sorted(theta.items()):
        coefficients = losert_expand(function, window, spec)
        for idx, value in coefficients.coefficients.items():
            if abs(value) > ZERO_CUTOFF:
                terms[(a, idx)] = value
    return AlgebraElement(terms)


def current_of(x: AlgebraElement) -> Current:
    grouped: Dict[int, List[SeparableFunction]] = defaultdict(list)
    for (a, idx), value in sorted(x.terms.items()):
        grouped[a].append(basis_function(idx).scaled(value))
    return {a: ModeSum(tuple(parts)) for a, parts in grouped.items()}


def current_bracket(
    theta1: Current,
    theta2: Current,
    algebra: FiniteLieAlgebra,
    charges: CentralCharges,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> Tuple[Dict[int, Callable], complex]:
    """Smeared bracket [J(theta1), J(theta2)] computed pointwise.

    Returns the current i f^{ab}_c theta1_a theta2_b (as callables of
    GroupPoint, one per c) and the Schwinger term
    g^{ab} (k_L int theta1_a L0 theta2_b ... ) evaluated by quadrature.
    """
    f, g = algebra.structure, algebra.killing_form
    pieces: Dict[int, List[Tuple[complex, Callable, Callable]]] = defaultdict(list)
    for a, t1 in theta1.items():
        for b, t2 in theta2.items():
            for c in range(algebra.dim):
                if f[a, b, c] != 0:
                    pieces[c].append((1j * f[a, b, c], t1, t2))

    def component(parts):
        return lambda p: sum(factor * t1(p) * t2(p) for factor, t1, t2 in parts)

    currents = {c: component(parts) for c, parts in pieces.items()}
    central = 0j
    for a, t1 in theta1.items():
        left, right = apply_numeric(DiffOperator.L0, t1), apply_numeric(DiffOperator.R0, t1)
        for b, t2 in theta2.items():
            if g[a, b] == 0:
                continue
            central += g[a, b] * (
                charges.k_l * pair_by_quadrature(left, t2, spec) + charges.k_r * pair_by_quadrature(right, t2, spec)
            )
    return currents, central


# --- Root grading -----------------------------------------------------------

Grade = Tuple[Tuple[float, ...], float, float]


def graded_generator(algebra: FiniteLieAlgebra, root: Tuple[float, ...], idx: LosertIndex, cartan_position: int = 0) -> AlgebraElement:
    """E_alpha Phi_idx, or H^i Phi_idx for the zero root."""
    if algebra.cartan is None:
        raise ValueError(f"Algebra {algebra.name} carries no Cartan data.")
    if all(r == 0 for r in root):
        return AlgebraElement.generator(algebra.cartan.cartan_indices[cartan_position], idx)
    vector = algebra.cartan.root_vectors[tuple(root)]
    return AlgebraElement({(a, idx): complex(v) for a, v in enumerate(vector) if v != 0})


def root_grading(algebra: FiniteLieAlgebra, window: Window) -> Dict[Grade, List[AlgebraElement]]:
    """Generators of g_(alpha, m, n) for every root (and alpha = 0) and in-window index."""
    if algebra.cartan is None:
        raise ValueError(f"Algebra {algebra.name} carries no Cartan data.")
    zero = tuple(0.0 for _ in range(algebra.cartan.rank))
    grading: Dict[Grade, List[AlgebraElement]] = defaultdict(list)
    for idx in indices_in_window(*window):
        for position in range(algebra.cartan.rank):
            grading[(zero, idx.m, idx.n)].append(graded_generator(algebra, zero, idx, position))
        for root in algebra.cartan.roots:
            grading[(tuple(root), idx.m, idx.n)].append(graded_generator(algebra, root, idx))
    return dict(grading)


def element_grades(x: AlgebraElement, algebra: FiniteLieAlgebra, tol: float = 1e-12) -> Dict[Grade, complex]:
    """Largest coefficient of x in each graded piece (central and L0/R0 parts excluded)."""
    basis, labels = algebra.root_basis()
    by_index: Dict[LosertIndex, np.ndarray] = defaultdict(lambda: np.zeros(algebra.dim, dtype=complex))
    for (a, idx), value in x.terms.items():
        by_index[idx][a] += value
    grades: Dict[Grade, complex] = {}
    for idx, vector in by_index.items():
        coordinates = np.linalg.solve(basis, vector)
        for label, value in zip(labels, coordinates):
            if abs(value) > tol:
                key = (label, idx.m, idx.n)
                grades[key] = max(grades.get(key, 0), abs(value))
    return grades


def commuting_family(algebra: FiniteLieAlgebra, window: Window) -> List[AlgebraElement]:
    """H^i Phi_{0,0,k} for k in the window, together with L0, R0, K_L and K_R."""
    if algebra.cartan is None:
        raise ValueError(f"Algebra {algebra.name} carries no Cartan data.")
    family = [
        AlgebraElement.generator(i, LosertIndex(0, 0, k))
        for i in algebra.cartan.cartan_indices
        for k in range(window[2] + 1)
    ]
    family += [AlgebraElement(l0=1), AlgebraElement(r0=1), AlgebraElement(kl=1), AlgebraElement(kr=1)]
    return family


# --- Discrete-series products -----------------------------------------------

def _growth_exponent(idx: MatrixElementIndex) -> float:
    """d such that psi ~ cosh(rho)^d at large rho."""
    form = radial_form(idx)
    degrees = []
    for p in (form.a, form.b):
        p = complex(p)
        if abs(p.imag) < 1e-12 and p.real <= 0 and abs(p.real - round(p.real)) < 1e-12:
            degrees.append(-round(p.real))
    if degrees:
        hyp = min(degrees)
    else:
        hyp = max(-complex(form.a).real, -complex(form.b).real)
    return form.alpha + form.beta + 2 * hyp


def decompose_discrete_product(
    e1: MatrixElementIndex,
    e2: MatrixElementIndex,
    sigma_grid: Optional[SigmaGrid] = None,
    threads: Optional[int] = None,
) -> PlancherelComponents:
    """Plancherel components of the pointwise product of two discrete matrix elements.

    Raises:
        UnsupportedSeries: if either index is not a discrete-series element.
        IntegrabilityError: if the product is not square-integrable on the group.
    """
    for e in (e1, e2):
        if not e.label.is_discrete:
            raise UnsupportedSeries(f"decompose_discrete_product needs discrete-series indices, got {e.label}.")
    growth = _growth_exponent(e1) + _growth_exponent(e2)
    if not growth < -1:
        raise IntegrabilityError(f"Product grows like cosh^{growth:g}; square-integrability needs < -1.")
    f1, f2 = matrix_element_function(e1), matrix_element_function(e2)
    product = SeparableFunction(f1.m + f2.m, f1.n + f2.n, lambda x: f1.radial(x) * f2.radial(x), max_order=0)
    m, n = product.m, product.n
    return forward(ModeSum((product,)), (abs(m), abs(n)), sigma_grid, threads)
