import unittest

import numpy as np

from hypalg.exceptions import IndexRangeError, ParityError
from hypalg.losert_basis import (
    LosertIndex,
    Sector,
    basis_function,
    classify,
    eval_radial,
    indices_in_window,
    k_min,
    modes_in_window,
    radial_descriptor,
    radial_in_u,
    radial_jet,
    reduced_degree,
    reduced_polynomial,
    u_map,
    u_map_image,
    u_map_norm,
)
from hypalg.numerics import GroupPoint, gauss_legendre, inner_product_sl2, integrate_x, jacobi_p


def overlap(first, second):
    return integrate_x(lambda x: eval_radial(first, x) * eval_radial(second, x))


class TestSectors(unittest.TestCase):

    def test_k_min(self):
        self.assertEqual(k_min(3, 2), 2)
        self.assertEqual(k_min(0, 5), 0)
        self.assertEqual(k_min(-1.5, -2.5), 1)
        self.assertEqual(k_min(2, -3), 0)
        with self.assertRaises(ParityError):
            k_min(1, 2.5)
        with self.assertRaises(ParityError):
            k_min(1, 2, epsilon=0.5)

    def test_classify(self):
        self.assertEqual(classify(LosertIndex.of(3, 2, 1)), Sector.D)
        self.assertEqual(classify(LosertIndex.of(3, 2, 2)), Sector.D_PERP)
        self.assertEqual(classify(LosertIndex.of(0, 0, 0)), Sector.D_PERP)
        self.assertEqual(classify(LosertIndex.of(0.5, 0.5, 0)), Sector.D_PERP)
        self.assertEqual(classify(LosertIndex.of(1.5, 1.5, 0)), Sector.D)

    def test_index_validation(self):
        with self.assertRaises(ParityError):
            LosertIndex.of(1, 0.5, 0)
        with self.assertRaises(IndexRangeError):
            LosertIndex.of(1, 1, -1)

    def test_conjugate_and_order(self):
        idx = LosertIndex.of(1.5, -0.5, 3)
        self.assertEqual(idx.conjugate(), LosertIndex.of(-1.5, 0.5, 3))
        self.assertEqual(idx.with_k(0).k, 0)
        self.assertEqual(idx.epsilon, 0.5)
        self.assertLess(LosertIndex.of(0, 0, 0), LosertIndex.of(0, 0, 1))


class TestRadialFunctions(unittest.TestCase):

    def test_normalised(self):
        for m, n, k in [(2, 3, 0), (0, 0, 0), (0, 0, 4), (3, 2, 1), (-1.5, -2.5, 0), (0.5, -1.5, 2), (1, -2, 3)]:
            idx = LosertIndex.of(m, n, k)
            self.assertAlmostEqual(overlap(idx, idx), 1.0, places=9, msg=str(idx))

    def test_orthogonal_within_a_mode(self):
        for m, n in [(0, 0), (3, 2), (1.5, 2.5), (-0.5, 0.5)]:
            for k1 in range(4):
                for k2 in range(k1 + 1, 5):
                    first, second = LosertIndex.of(m, n, k1), LosertIndex.of(m, n, k2)
                    self.assertAlmostEqual(overlap(first, second), 0.0, places=9, msg=f"{first} {second}")

    def test_group_product_norm_is_one_half(self):
        f = basis_function(LosertIndex.of(1, 2, 1))
        self.assertAlmostEqual(inner_product_sl2(f, f).real, 0.25, places=9)

    def test_far_field_decay(self):
        idx = LosertIndex.of(0, 0, 0)
        x = np.array([1e6, 2e6])
        slope = np.diff(np.log(np.abs(eval_radial(idx, x)))) / np.diff(np.log(x))
        self.assertAlmostEqual(float(slope[0]), -1.0, places=5)

    def test_sector_d_swap_symmetry(self):
        x = np.linspace(1.0, 30.0, 17)
        for m, n, k in [(3, 2, 1), (2.5, 1.5, 0), (-3, -2, 0)]:
            sign = (-1) ** int(round(m - n))
            np.testing.assert_allclose(
                eval_radial(LosertIndex.of(m, n, k), x),
                sign * eval_radial(LosertIndex.of(n, m, k), x),
                rtol=1e-12, atol=1e-14,
            )

    def test_descriptor_sectors(self):
        self.assertEqual(radial_descriptor(LosertIndex.of(3, 2, 1)).sector, Sector.D)
        self.assertEqual(radial_descriptor(LosertIndex.of(3, 2, 2)).sector, Sector.D_PERP)

    def test_printed_x_form_agrees(self):
        x = np.linspace(1.0, 12.0, 9)
        for m, n, k in [(0, 2, 2), (2.5, 1.5, 0), (0.5, 0.5, 1), (2, 3, 1)]:
            idx = LosertIndex.of(m, n, k)
            d = radial_descriptor(idx)
            printed = (
                d.sign * d.normalization
                * (x - 1) ** d.x_minus_power * (x + 1) ** d.x_plus_power
                * jacobi_p(k, d.jacobi_alpha, d.jacobi_beta, x)
            )
            np.testing.assert_allclose(eval_radial(idx, x), printed, rtol=1e-10, atol=1e-14, err_msg=str(idx))

    def test_x_below_one(self):
        with self.assertRaises(IndexRangeError):
            eval_radial(LosertIndex.of(0, 0, 0), 0.5)

    def test_reduced_polynomial_shape(self):
        u = np.linspace(0.05, 0.95, 7)
        for m, n, k in [(0, 0, 3), (1.5, 2.5, 0), (-2, 1, 2)]:
            idx = LosertIndex.of(m, n, k)
            eps = idx.epsilon
            a = abs(m - n)
            np.testing.assert_allclose(
                radial_in_u(idx, u),
                u ** (1 + eps) * (1 - u) ** (a / 2) * reduced_polynomial(idx, u),
                rtol=1e-12,
            )
            # a polynomial of the stated degree is reproduced by its own interpolant
            degree = reduced_degree(idx)
            nodes = np.linspace(0.0, 1.0, degree + 1)
            coefficients = np.polyfit(nodes, reduced_polynomial(idx, nodes), degree)
            np.testing.assert_allclose(np.polyval(coefficients, u), reduced_polynomial(idx, u), rtol=1e-8, atol=1e-10)

    def test_exact_gram_entries_in_u(self):
        # int e e dx = 2 int_0^1 u^{2 eps} (1-u)^a q q du, a polynomial integrand
        idx = LosertIndex.of(1, -1, 2)
        other = idx.with_k(3)
        u, w = gauss_legendre(20, 0.0, 1.0)
        a = abs(idx.m - idx.n)
        weight = 2 * (1 - u) ** a
        self.assertAlmostEqual(np.sum(w * weight * reduced_polynomial(idx, u) ** 2), 1.0, places=12)
        self.assertAlmostEqual(np.sum(w * weight * reduced_polynomial(idx, u) * reduced_polynomial(other, u)), 0.0, places=12)

    def test_analytic_jet(self):
        idx = LosertIndex.of(1.5, -0.5, 2)
        rho = np.array([0.2, 0.9, 2.0])
        value, d1, d2 = radial_jet(idx, rho, 2)
        h = 1e-5
        f = lambda r: eval_radial(idx, np.cosh(2 * r))
        np.testing.assert_allclose(value, f(rho), rtol=1e-12)
        np.testing.assert_allclose(d1, (f(rho + h) - f(rho - h)) / (2 * h), rtol=1e-6, atol=1e-9)
        np.testing.assert_allclose(d2, (f(rho + h) - 2 * f(rho) + f(rho - h)) / h ** 2, rtol=1e-3, atol=1e-5)

    def test_basis_function_phase(self):
        idx = LosertIndex.of(1, 0, 0)
        f = basis_function(idx)
        p = GroupPoint(0.5, np.pi / 2, np.pi / 2)
        # e^{i(phi1 + phi2)} = e^{i pi} = -1
        self.assertAlmostEqual(f(p), -eval_radial(idx, np.cosh(1.0)), places=12)


class TestUMap(unittest.TestCase):

    def test_isometry(self):
        for m, n, k in [(0, 0, 2), (0.5, 1.5, 1), (3, 2, 0)]:
            idx = LosertIndex.of(m, n, k)
            self.assertAlmostEqual(u_map_norm(m, n, lambda x: eval_radial(idx, x)), 1.0, places=10)

    def test_closed_form_image(self):
        y = np.linspace(-0.9, 0.9, 11)
        for m, n, k in [(0, 0, 3), (-0.5, 0.5, 2), (2, 3, 1)]:
            idx = LosertIndex.of(m, n, k)
            np.testing.assert_allclose(
                u_map_image(idx)(y), u_map(m, n, lambda x: eval_radial(idx, x))(y), rtol=1e-10,
            )


class TestWindow(unittest.TestCase):

    def test_window_enumeration(self):
        indices = list(indices_in_window(1, 1, 2))
        self.assertEqual(len(indices), 27 + 12)
        self.assertEqual(len(set(indices)), len(indices))
        self.assertEqual(len(list(indices_in_window(1, 1, 2, parities=(0,)))), 27)

    def test_modes(self):
        self.assertEqual(modes_in_window(0.5, 0.5, parities=(0.5,)), [(-0.5, -0.5), (-0.5, 0.5), (0.5, -0.5), (0.5, 0.5)])


if __name__ == '__main__':
    unittest.main()
