import math
import unittest

import numpy as np

from hypalg.exceptions import IndexRangeError
from hypalg.losert_basis import LosertIndex, basis_function, eval_radial, k_min
from hypalg.matrix_elements import MatrixElementIndex, matrix_element_function
from hypalg.numerics import ModeSum, SeparableFunction, integrate_x
from hypalg.plancherel import (
    LosertCoefficients,
    PlancherelComponents,
    SigmaGrid,
    accumulate_lp,
    basis_conversion,
    continuous_radial,
    conversion_coefficient,
    discrete_lambdas,
    forward,
    inverse,
    losert_expand,
    losert_reconstruct,
    losert_residual,
    mode_radial,
    plancherel_weight,
    reconstruct_from_conversion,
    relative_l2_error,
    smeared_completeness,
)
from hypalg.sl2_reps import SeriesLabel


def smooth_mode(m, n, scale=1.0):
    a = abs(m - n)
    return SeparableFunction(m, n, lambda x: scale * ((x - 1) / (x + 1)) ** (a / 2) * np.exp(-(x - 1) / 2))


class TestWeightsAndGrid(unittest.TestCase):

    def test_plancherel_weight(self):
        self.assertAlmostEqual(float(plancherel_weight(1.0)), math.tanh(math.pi), places=14)
        self.assertAlmostEqual(float(plancherel_weight(2.0, 0.5)), 2.0 / math.tanh(2 * math.pi), places=14)
        with self.assertRaises(IndexRangeError):
            plancherel_weight(1.0, 0.3)

    def test_grid(self):
        grid = SigmaGrid(10.0, 5, rule="uniform")
        nodes, weights = grid.nodes_and_weights()
        np.testing.assert_allclose(nodes, [1.0, 3.0, 5.0, 7.0, 9.0])
        self.assertAlmostEqual(float(np.sum(weights)), 10.0)
        self.assertEqual(SigmaGrid.from_dict(grid.to_dict()), grid)
        with self.assertRaises(ValueError):
            SigmaGrid(0.0)
        with self.assertRaises(ValueError):
            SigmaGrid(rule="simpson")

    def test_discrete_lambdas(self):
        self.assertEqual(discrete_lambdas(3, 2), [(1, 2), (1, 1)])
        self.assertEqual(discrete_lambdas(2.5, 1.5), [(1, 1.5)])
        self.assertEqual(discrete_lambdas(-2, -3), [(-1, 2), (-1, 1)])
        self.assertEqual(discrete_lambdas(0, 5), [])
        self.assertEqual(discrete_lambdas(0.5, 0.5), [])
        self.assertEqual(discrete_lambdas(2, -2), [])


class TestForwardTransform(unittest.TestCase):

    def setUp(self):
        self.grid = SigmaGrid(10.0, 20)

    def test_discrete_matrix_element_is_picked_out(self):
        psi = matrix_element_function(MatrixElementIndex.of(SeriesLabel.discrete_plus(1), 2, 2))
        components = forward(psi, (2, 2), self.grid)
        self.assertAlmostEqual(components.discrete_plus[(1, 2, 2)], 1.0, places=8)
        self.assertAlmostEqual(abs(components.discrete_plus[(2, 2, 2)]), 0.0, places=8)
        self.assertEqual(components.discrete_minus, {})
        self.assertEqual(components.modes(), [(2.0, 2.0)])
        self.assertGreaterEqual(components.meta["tail_estimate"], 0.0)

    def test_json_round_trip(self):
        components = forward(smooth_mode(1, 1), (1, 1), self.grid)
        restored = PlancherelComponents.from_json(components.to_json())
        self.assertEqual(restored.sigma_grid, self.grid)
        self.assertEqual(set(restored.discrete_plus), set(components.discrete_plus))
        for key, values in components.continuous.items():
            np.testing.assert_allclose(restored.continuous[key], values)
        self.assertEqual(restored.meta["window"], [1, 1])

    def test_rejects_foreign_schema(self):
        with self.assertRaises(ValueError):
            PlancherelComponents.from_json('{"schema": "something-else/1"}')

    def test_sampled_and_separable_inputs_agree(self):
        f = smooth_mode(1, 0)
        direct = forward(f, (1, 1), self.grid)
        sampled = forward(lambda p: f(p), (1, 1), self.grid)
        np.testing.assert_allclose(
            sampled.continuous[(0.0, 0.0, 1.0)], direct.continuous[(0.0, 0.0, 1.0)], atol=1e-10
        )
        self.assertLess(np.max(np.abs(sampled.continuous[(0.0, 1.0, 1.0)])), 1e-10)


class TestRoundTrip(unittest.TestCase):

    def setUp(self):
        self.grid = SigmaGrid(30.0, 200)
        self.x = np.array([1.2, 2.0, 4.0, 9.0])

    def test_inverse_reconstructs_smooth_function(self):
        f = ModeSum((smooth_mode(0, 0), smooth_mode(1, 1, 0.5), smooth_mode(0.5, 0.5, 0.7)))
        g = inverse(forward(f, (1, 1), self.grid))
        for m, n in [(0, 0), (1, 1), (0.5, 0.5)]:
            expected = mode_radial(f, m, n)(self.x)
            got = mode_radial(g, m, n)(self.x)
            self.assertLess(np.max(np.abs(got - expected)), 1e-3 * np.max(np.abs(expected)), msg=f"mode {(m, n)}")

    def test_smeared_completeness(self):
        for mode in [(0, 0), (1, 1)]:
            f = smooth_mode(*mode)
            g = smooth_mode(*mode, scale=2.0)
            direct, spectral = smeared_completeness(f, g, mode, self.grid)
            self.assertLess(abs(direct - spectral), 1e-3 * abs(direct), msg=f"mode {mode}")

    def test_relative_error_of_identical_functions(self):
        f = smooth_mode(0, 0)
        self.assertEqual(relative_l2_error(f, f, [(0, 0)]), 0.0)


class TestLosertExpansion(unittest.TestCase):

    def test_basis_function_has_unit_coefficient(self):
        target = LosertIndex.of(1, 2, 3)
        result = losert_expand(basis_function(target), (2, 2, 4))
        for idx, value in result.coefficients.items():
            expected = 1.0 if idx == target else 0.0
            self.assertAlmostEqual(abs(value - expected), 0.0, places=8, msg=str(idx))
        self.assertAlmostEqual(result.norm_squared(), 1.0, places=8)
        self.assertLess(losert_residual(basis_function(target), result), 1e-14)

    def test_reconstruct_skips_zero_coefficients(self):
        coefficients = {LosertIndex.of(0, 0, 0): 0.5, LosertIndex.of(0, 0, 1): 0, LosertIndex.of(0, 0, 2): -1.0}
        reconstruction = losert_reconstruct(LosertCoefficients(coefficients, (0, 0, 2)))
        self.assertEqual(len(reconstruction.terms), 2)
        x = np.array([1.5, 4.0])
        expected = 0.5 * eval_radial(LosertIndex.of(0, 0, 0), x) - eval_radial(LosertIndex.of(0, 0, 2), x)
        np.testing.assert_allclose(reconstruction.radial_of(0, 0)(x), expected)

    def test_mode_radial_of_sampled_function(self):
        f = smooth_mode(1, 0)
        x = np.array([1.5, 3.0])
        np.testing.assert_allclose(mode_radial(lambda p: f(p), 1, 0)(x), f.radial(x), rtol=1e-12)
        np.testing.assert_allclose(mode_radial(lambda p: f(p), 0, 0)(x), 0.0, atol=1e-14)


class TestBasisConversion(unittest.TestCase):

    def test_sampled_conversion_matches_adaptive(self):
        grid = SigmaGrid(8.0, 4)
        sampled = basis_conversion(0, 1, 2, grid)
        for sigma, value in zip(grid.nodes, sampled):
            self.assertAlmostEqual(value, conversion_coefficient(0, 1, 2, sigma), places=7)

    def test_sector_d_rejected(self):
        with self.assertRaises(IndexRangeError):
            conversion_coefficient(3, 2, 1, 1.0)
        with self.assertRaises(IndexRangeError):
            basis_conversion(3, 2, 0)

    def test_partial_sums_converge_weakly(self):
        sigma = 1.0
        g = lambda x: np.exp(-(x - 1) / 2)
        exact = integrate_x(lambda x: np.real(continuous_radial(sigma, 0, 0)(x)) * g(x))
        partial = accumulate_lp(0, 0, sigma, 30)
        approx = integrate_x(lambda x: partial(x) * g(x))
        self.assertLess(abs(approx - exact), 1e-3 * abs(exact))

    def test_first_partial_sum(self):
        x = np.array([1.0, 3.0])
        np.testing.assert_allclose(
            accumulate_lp(0, 0, 2.0, 0)(x),
            conversion_coefficient(0, 0, 0, 2.0) * eval_radial(LosertIndex.of(0, 0, 0), x),
        )

    def test_conversion_round_trip(self):
        grid = SigmaGrid(40.0, 400)
        x = np.linspace(1.05, 20.0, 40)
        for m, n in [(0, 0), (1, 0), (1, 1)]:
            k = k_min(m, n)
            values = basis_conversion(m, n, k, grid)
            rebuilt = reconstruct_from_conversion(m, n, values, grid)(x)
            expected = eval_radial(LosertIndex.of(m, n, k), x)
            self.assertLess(
                np.max(np.abs(rebuilt - expected)), 1e-3 * np.max(np.abs(expected)), msg=f"(m, n) = {(m, n)}"
            )


if __name__ == '__main__':
    unittest.main()
