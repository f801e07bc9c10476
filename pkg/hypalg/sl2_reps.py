"""Unitary representations of sl(2,R) as abstract weight states.

Half-integers are stored doubled (``twice_lambda``, ``twice_n``) so that parity
is structural rather than numeric.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Tuple

from .exceptions import IndexRangeError, ParameterError, ParityError, UnsupportedSeries

logger = logging.getLogger(__name__)


class SeriesKind(str, Enum):
    DISCRETE_PLUS = "discrete+"
    DISCRETE_MINUS = "discrete-"
    PRINCIPAL = "principal"
    SUPPLEMENTARY = "supplementary"
    TRIVIAL = "trivial"


class Generator(str, Enum):
    K0 = "K0"
    K_PLUS = "K+"
    K_MINUS = "K-"
    Q = "Q"


def to_twice(value: float, what: str = "value") -> int:
    """Return 2*value as an int, refusing anything that is not a half-integer."""
    doubled = 2.0 * float(value)
    nearest = round(doubled)
    if abs(doubled - nearest) > 1e-9:
        raise IndexRangeError(f"{what} must be an integer or half-integer, got {value}.")
    return int(nearest)


@dataclass(frozen=True)
class SeriesLabel:
    """Label of a unitary series.

    Discrete labels carry lambda > 1/2, principal labels sigma > 0 and a parity
    epsilon in {0, 1/2}. Supplementary and trivial labels exist so that callers
    can name them, but they never enter the Plancherel decomposition.
    """

    kind: SeriesKind
    twice_lambda: int = 0
    sigma: float = 0.0
    twice_epsilon: int = 0

    def __post_init__(self):
        if self.kind in (SeriesKind.DISCRETE_PLUS, SeriesKind.DISCRETE_MINUS):
            if self.twice_lambda < 2:
                raise ParameterError(
                    f"Discrete series need lambda > 1/2, got lambda = {self.twice_lambda / 2}."
                )
            if self.twice_epsilon != self.twice_lambda % 2:
                object.__setattr__(self, "twice_epsilon", self.twice_lambda % 2)
        elif self.kind == SeriesKind.PRINCIPAL:
            if not self.sigma > 0:
                raise ParameterError(f"Principal series need sigma > 0, got {self.sigma}.")
            if self.twice_epsilon not in (0, 1):
                raise ParameterError("Principal series parity must be 0 or 1/2.")
        elif self.kind == SeriesKind.SUPPLEMENTARY:
            if not 0 < self.sigma < 0.5:
                raise ParameterError(f"Supplementary series need 0 < sigma < 1/2, got {self.sigma}.")
            if self.twice_epsilon != 0:
                raise ParameterError("The supplementary series is bosonic.")

    @classmethod
    def discrete_plus(cls, lam: float) -> "SeriesLabel":
        return cls(SeriesKind.DISCRETE_PLUS, twice_lambda=to_twice(lam, "lambda"))

    @classmethod
    def discrete_minus(cls, lam: float) -> "SeriesLabel":
        return cls(SeriesKind.DISCRETE_MINUS, twice_lambda=to_twice(lam, "lambda"))

    @classmethod
    def principal(cls, sigma: float, epsilon: float = 0.0) -> "SeriesLabel":
        return cls(SeriesKind.PRINCIPAL, sigma=float(sigma), twice_epsilon=to_twice(epsilon, "epsilon"))

    @classmethod
    def supplementary(cls, sigma: float) -> "SeriesLabel":
        return cls(SeriesKind.SUPPLEMENTARY, sigma=float(sigma))

    @classmethod
    def trivial(cls) -> "SeriesLabel":
        return cls(SeriesKind.TRIVIAL)

    @property
    def lam(self) -> float:
        return self.twice_lambda / 2

    @property
    def epsilon(self) -> float:
        return self.twice_epsilon / 2

    @property
    def is_discrete(self) -> bool:
        return self.kind in (SeriesKind.DISCRETE_PLUS, SeriesKind.DISCRETE_MINUS)

    @property
    def eta(self) -> int:
        return {SeriesKind.DISCRETE_PLUS: 1, SeriesKind.DISCRETE_MINUS: -1}.get(self.kind, 0)

    @property
    def excluded_from_plancherel(self) -> bool:
        return self.kind in (SeriesKind.SUPPLEMENTARY, SeriesKind.TRIVIAL)


def casimir_eigenvalue(label: SeriesLabel) -> float:
    if label.is_discrete:
        return label.lam * (label.lam - 1)
    if label.kind == SeriesKind.PRINCIPAL:
        return -(0.25 + label.sigma ** 2)
    if label.kind == SeriesKind.SUPPLEMENTARY:
        return -0.25 + label.sigma ** 2
    return 0.0


def check_weight(label: SeriesLabel, twice_n: int) -> None:
    """Raise unless twice_n/2 is an admissible weight of the series."""
    if label.is_discrete:
        if (twice_n - label.twice_lambda) % 2:
            raise ParityError(f"Weight {twice_n / 2} has the wrong parity for lambda = {label.lam}.")
        if label.kind == SeriesKind.DISCRETE_PLUS and twice_n < label.twice_lambda:
            raise IndexRangeError(f"Weight {twice_n / 2} lies below lambda = {label.lam}.")
        if label.kind == SeriesKind.DISCRETE_MINUS and twice_n > -label.twice_lambda:
            raise IndexRangeError(f"Weight {twice_n / 2} lies above -lambda = {-label.lam}.")
    elif twice_n % 2 != label.twice_epsilon:
        raise ParityError(f"Weight {twice_n / 2} does not have parity epsilon = {label.epsilon}.")


@dataclass(frozen=True)
class WeightState:
    label: SeriesLabel
    twice_n: int

    def __post_init__(self):
        check_weight(self.label, self.twice_n)

    @classmethod
    def of(cls, label: SeriesLabel, n: float) -> "WeightState":
        return cls(label, to_twice(n, "weight"))

    @property
    def n(self) -> float:
        return self.twice_n / 2

    def shifted(self, step: int) -> Optional["WeightState"]:
        try:
            return WeightState(self.label, self.twice_n + 2 * step)
        except IndexRangeError:
            return None


def _ladder_square(label: SeriesLabel, n: float, step: int) -> float:
    """Squared coefficient of K_{step} on weight n (before any boundary check)."""
    lam = label.lam
    if label.kind == SeriesKind.DISCRETE_PLUS:
        return (n + lam) * (n - lam + 1) if step > 0 else (n + lam - 1) * (n - lam)
    if label.kind == SeriesKind.DISCRETE_MINUS:
        return (-n - lam) * (-n + lam - 1) if step > 0 else (-n + lam) * (-n - lam + 1)
    # principal: (n +- 1/2 + i sigma)(n +- 1/2 - i sigma)
    shift = 0.5 if step > 0 else -0.5
    return (n + shift) ** 2 + label.sigma ** 2


def act(generator: Generator, state: WeightState) -> Tuple[complex, Optional[WeightState]]:
    """Action of one generator on a weight state.

    Returns the coefficient and the resulting state; a ladder step that leaves
    the weight support returns (0, None).
    """
    generator = Generator(generator)
    label = state.label
    if generator == Generator.K0:
        return complex(state.n), state
    if generator == Generator.Q:
        return complex(casimir_eigenvalue(label)), state
    if label.excluded_from_plancherel:
        raise UnsupportedSeries(f"Ladder operators are not implemented for the {label.kind.value} series.")
    step = 1 if generator == Generator.K_PLUS else -1
    target = state.shifted(step)
    if target is None:
        return 0j, None
    square = _ladder_square(label, state.n, step)
    if square <= 0:
        return 0j, None
    return complex(math.sqrt(square)), target


def _apply_word(word: Tuple[Generator, ...], state: WeightState) -> Tuple[complex, Optional[WeightState]]:
    # rightmost generator acts first
    coefficient = 1 + 0j
    current: Optional[WeightState] = state
    for generator in reversed(word):
        if current is None:
            return 0j, None
        value, current = act(generator, current)
        coefficient *= value
    return coefficient, current


def casimir_from_ladders(state: WeightState) -> complex:
    """K0^2 - (K+K- + K-K+)/2 on a weight state, assembled from single steps."""
    k0 = _apply_word((Generator.K0, Generator.K0), state)[0]
    plus_minus = _apply_word((Generator.K_PLUS, Generator.K_MINUS), state)[0]
    minus_plus = _apply_word((Generator.K_MINUS, Generator.K_PLUS), state)[0]
    return k0 - 0.5 * (plus_minus + minus_plus)


def commutator_check(state: WeightState) -> float:
    """|([K+, K-] + 2 K0) state|, which vanishes in every unitary series."""
    plus_minus = _apply_word((Generator.K_PLUS, Generator.K_MINUS), state)[0]
    minus_plus = _apply_word((Generator.K_MINUS, Generator.K_PLUS), state)[0]
    return abs(plus_minus - minus_plus + 2 * state.n)


def weight_support(label: SeriesLabel, count: int, start: Optional[float] = None) -> Iterator[WeightState]:
    """First ``count`` weights of the series, walking away from the boundary."""
    if label.kind == SeriesKind.DISCRETE_PLUS:
        twice_n, step = label.twice_lambda, 2
    elif label.kind == SeriesKind.DISCRETE_MINUS:
        twice_n, step = -label.twice_lambda, -2
    else:
        twice_n = to_twice(start, "weight") if start is not None else label.twice_epsilon
        step = 2
    for _ in range(count):
        yield WeightState(label, twice_n)
        twice_n += step
