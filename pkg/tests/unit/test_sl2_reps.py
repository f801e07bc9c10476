import math
import unittest

from hypalg.exceptions import IndexRangeError, ParameterError, ParityError, UnsupportedSeries
from hypalg.sl2_reps import (
    Generator,
    SeriesKind,
    SeriesLabel,
    WeightState,
    act,
    casimir_eigenvalue,
    casimir_from_ladders,
    commutator_check,
    to_twice,
    weight_support,
)


class TestSeriesLabel(unittest.TestCase):

    def test_discrete_parity_follows_lambda(self):
        self.assertEqual(SeriesLabel.discrete_plus(1.5).epsilon, 0.5)
        self.assertEqual(SeriesLabel.discrete_minus(2).epsilon, 0.0)
        self.assertEqual(SeriesLabel.discrete_minus(2).eta, -1)

    def test_invalid_labels(self):
        with self.assertRaises(ParameterError):
            SeriesLabel.discrete_plus(0.5)
        with self.assertRaises(ParameterError):
            SeriesLabel.principal(0.0)
        with self.assertRaises(ParameterError):
            SeriesLabel.supplementary(0.7)
        with self.assertRaises(IndexRangeError):
            SeriesLabel.discrete_plus(1.3)

    def test_to_twice(self):
        self.assertEqual(to_twice(-1.5), -3)
        with self.assertRaises(IndexRangeError):
            to_twice(0.25)

    def test_excluded_series(self):
        self.assertTrue(SeriesLabel.trivial().excluded_from_plancherel)
        self.assertTrue(SeriesLabel.supplementary(0.2).excluded_from_plancherel)
        self.assertFalse(SeriesLabel.principal(1.0).excluded_from_plancherel)


class TestCasimir(unittest.TestCase):

    def test_eigenvalues(self):
        self.assertEqual(casimir_eigenvalue(SeriesLabel.discrete_plus(1)), 0.0)
        self.assertEqual(casimir_eigenvalue(SeriesLabel.discrete_minus(2.5)), 2.5 * 1.5)
        self.assertAlmostEqual(casimir_eigenvalue(SeriesLabel.principal(1.0)), -1.25)
        self.assertAlmostEqual(casimir_eigenvalue(SeriesLabel.principal(2.0, 0.5)), -4.25)
        self.assertEqual(casimir_eigenvalue(SeriesLabel.trivial()), 0.0)

    def test_ladders_reproduce_casimir(self):
        labels = [
            SeriesLabel.discrete_plus(1),
            SeriesLabel.discrete_plus(2.5),
            SeriesLabel.discrete_minus(1.5),
            SeriesLabel.principal(0.7),
            SeriesLabel.principal(1.3, 0.5),
        ]
        for label in labels:
            for state in weight_support(label, 6, start=-2.5 if label.epsilon else -3):
                self.assertAlmostEqual(
                    casimir_from_ladders(state).real, casimir_eigenvalue(label), places=10,
                    msg=f"{label} at n={state.n}",
                )
                self.assertAlmostEqual(commutator_check(state), 0.0, places=10)


class TestAction(unittest.TestCase):

    def test_raising_in_discrete_plus(self):
        coefficient, target = act(Generator.K_PLUS, WeightState.of(SeriesLabel.discrete_plus(1), 2))
        self.assertAlmostEqual(coefficient.real, math.sqrt(6))
        self.assertEqual(target.n, 3)

    def test_lowering_annihilates_lowest_weight(self):
        coefficient, target = act(Generator.K_MINUS, WeightState.of(SeriesLabel.discrete_plus(1.5), 1.5))
        self.assertEqual(coefficient, 0j)
        self.assertIsNone(target)
        coefficient, target = act(Generator.K_PLUS, WeightState.of(SeriesLabel.discrete_minus(2), -2))
        self.assertEqual(coefficient, 0j)
        self.assertIsNone(target)

    def test_weight_and_casimir_are_diagonal(self):
        state = WeightState.of(SeriesLabel.principal(2.0), -4)
        self.assertEqual(act(Generator.K0, state), (-4 + 0j, state))
        self.assertAlmostEqual(act("Q", state)[0].real, -4.25)

    def test_principal_ladder_never_terminates(self):
        state = WeightState.of(SeriesLabel.principal(0.5, 0.5), 0.5)
        coefficient, target = act(Generator.K_MINUS, state)
        self.assertEqual(target.n, -0.5)
        self.assertAlmostEqual(coefficient.real, math.sqrt(0.25))

    def test_weights_must_fit_the_series(self):
        with self.assertRaises(IndexRangeError):
            WeightState.of(SeriesLabel.discrete_plus(2), 1)
        with self.assertRaises(ParityError):
            WeightState.of(SeriesLabel.discrete_plus(2), 2.5)
        with self.assertRaises(ParityError):
            WeightState.of(SeriesLabel.principal(1.0, 0.5), 1)

    def test_unsupported_series(self):
        state = WeightState(SeriesLabel.supplementary(0.25), 0)
        with self.assertRaises(UnsupportedSeries):
            act(Generator.K_PLUS, state)

    def test_support_walks_away_from_boundary(self):
        weights = [s.n for s in weight_support(SeriesLabel.discrete_minus(1.5), 3)]
        self.assertEqual(weights, [-1.5, -2.5, -3.5])
        self.assertEqual(SeriesLabel.discrete_minus(1.5).kind, SeriesKind.DISCRETE_MINUS)


if __name__ == '__main__':
    unittest.main()
