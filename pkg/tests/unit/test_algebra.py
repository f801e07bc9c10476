import json
import math
import shutil
import tempfile
import unittest
from pathlib import Path

import numpy as np

from hypalg.algebra import (
    AlgebraElement,
    CentralCharges,
    FiniteLieAlgebra,
    bracket,
    build_structure_table,
    cocycle,
    cocycle_by_quadrature,
    commuting_family,
    current_bracket,
    current_of,
    decompose_discrete_product,
    element_from_current,
    element_grades,
    expand_product,
    get_algebra,
    graded_generator,
    killing_pairing,
    root_grading,
    sl2,
    structure_constants,
    structure_constants_by_quadrature,
    su2,
)
from hypalg.exceptions import UnsupportedSeries, WindowOverflow, WindowTooSmall
from hypalg.losert_basis import LosertIndex, basis_function
from hypalg.matrix_elements import MatrixElementIndex
from hypalg.numerics import GroupPoint, ModeSum
from hypalg.plancherel import SigmaGrid
from hypalg.sl2_reps import SeriesLabel


def T(a, m, n, k, coefficient=1.0):
    return AlgebraElement.generator(a, LosertIndex.of(m, n, k), coefficient)


class TestFiniteAlgebras(unittest.TestCase):

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def test_builtin_algebras_satisfy_jacobi(self):
        for algebra in (su2(), sl2()):
            self.assertEqual(algebra.dim, 3)
            self.assertLess(algebra.jacobi_residual(), 1e-14)

    def test_su2_killing_form(self):
        np.testing.assert_allclose(su2().killing_form, 2 * np.eye(3))
        np.testing.assert_allclose(su2().h, [[2.0]])

    def test_rejects_non_antisymmetric_constants(self):
        with self.assertRaises(ValueError):
            FiniteLieAlgebra("broken", np.ones((2, 2, 2)))
        with self.assertRaises(ValueError):
            FiniteLieAlgebra("flat", np.zeros((2, 3)))

    def test_load_from_file(self):
        path = Path(self.temp_dir) / "algebra.json"
        path.write_text(json.dumps(sl2().to_dict()))
        loaded = get_algebra(str(path))
        np.testing.assert_allclose(loaded.structure, sl2().structure)
        self.assertEqual(loaded.cartan.cartan_indices, (0,))
        self.assertEqual(get_algebra("su2").name, "su2")


class TestStructureConstants(unittest.TestCase):

    def test_exact_matches_quadrature(self):
        for idx1, idx2 in [
            (LosertIndex.of(0, 0, 0), LosertIndex.of(0, 0, 0)),
            (LosertIndex.of(1, 0, 1), LosertIndex.of(0, 1, 2)),
            (LosertIndex.of(0.5, 0.5, 0), LosertIndex.of(0.5, -0.5, 1)),
            (LosertIndex.of(2, 1, 1), LosertIndex.of(-1, -1, 0)),
        ]:
            expansion = expand_product(idx1, idx2)
            self.assertLess(expansion.residual, 1e-10, msg=f"{idx1} x {idx2}")
            k_top = max([k for k, _ in expansion.coefficients] + [0]) + 2
            exact = dict(expansion.coefficients)
            for k, value in structure_constants_by_quadrature(idx1, idx2, k_top):
                self.assertAlmostEqual(exact.get(k, 0.0), value, places=9, msg=f"{idx1} x {idx2} -> k={k}")

    def test_product_is_symmetric(self):
        idx1, idx2 = LosertIndex.of(1, 0, 1), LosertIndex.of(0, 1, 2)
        forward, backward = expand_product(idx1, idx2).coefficients, expand_product(idx2, idx1).coefficients
        self.assertEqual([k for k, _ in forward], [k for k, _ in backward])
        np.testing.assert_allclose([c for _, c in forward], [c for _, c in backward], rtol=1e-12, atol=1e-14)
        self.assertEqual(expand_product(idx1, idx2).target_mode, (1.0, 1.0))

    def test_truncation_raises(self):
        idx = LosertIndex.of(0, 0, 3)
        with self.assertRaises(WindowTooSmall):
            structure_constants(idx, idx, 0)
        self.assertTrue(structure_constants(idx, idx, 20))


class TestBracket(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.algebra = su2()
        cls.table = build_structure_table((1, 1, 4))

    def test_table_is_exact(self):
        self.assertLess(self.table.max_residual, 1e-10)
        self.assertEqual(
            self.table.lookup(LosertIndex.of(0, 1, 2), LosertIndex.of(1, 0, 1)),
            expand_product(LosertIndex.of(0, 1, 2), LosertIndex.of(1, 0, 1)).coefficients,
        )

    def test_self_bracket_vanishes(self):
        x = T(0, 0, 0, 1) + T(1, 1, 0, 0, 0.5) + T(2, -1, 1, 2, -2.0)
        self.assertLess(bracket(x, x, self.algebra, self.table).norm(), 1e-12)

    def test_antisymmetry(self):
        x = T(0, 0, 0, 1) + T(2, 0.5, 0.5, 0)
        y = T(1, 0, -1, 0) + T(0, -0.5, 0.5, 1, 1j)
        xy = bracket(x, y, self.algebra, self.table)
        yx = bracket(y, x, self.algebra, self.table)
        self.assertLess((xy + yx).norm(), 1e-13)

    def test_jacobi_identity(self):
        for x, y, z in [
            (T(0, 0, 0, 0), T(1, 0, 0, 1), T(2, 1, -1, 0)),
            (T(0, 1, 0, 0), T(1, -1, 0, 0), T(2, 0, 0, 0)),
            (T(0, 0.5, 0.5, 0), T(1, -0.5, -0.5, 0), T(2, 0, 0, 1) + T(0, 0, 0, 0)),
        ]:
            b = lambda p, q: bracket(p, q, self.algebra, self.table)
            total = b(x, b(y, z)) + b(y, b(z, x)) + b(z, b(x, y))
            self.assertLess(total.norm(), 1e-10)

    def test_central_term(self):
        x, y = T(0, 1, 2, 0), T(0, -1, -2, 0)
        result = bracket(x, y, self.algebra, self.table)
        self.assertEqual(result.terms, {})
        self.assertAlmostEqual(result.kl, 4.0)
        self.assertAlmostEqual(result.kr, 2.0)
        self.assertAlmostEqual(result.central_value(CentralCharges(1.0, 0.0)), 2 * 1.0 * 2.0)
        self.assertAlmostEqual(cocycle(x, y, CentralCharges(1.0, 0.0), self.algebra), 4.0)

    def test_weight_operators(self):
        x = T(1, 1, -1, 2, 3.0)
        result = bracket(AlgebraElement(l0=1.0, r0=2.0), x, self.algebra, self.table)
        self.assertAlmostEqual(result.terms[(1, LosertIndex.of(1, -1, 2))], 3.0 * (-1 + 2 * 1))

    def test_overflow_keeps_partial_result(self):
        x = T(0, 1, 1, 0) + T(0, 0, 0, 0)
        y = T(1, 1, 1, 0)
        with self.assertRaises(WindowOverflow) as ctx:
            bracket(x, y, self.algebra, self.table)
        partial = ctx.exception.partial
        self.assertTrue(all(idx.m == 1 and idx.n == 1 for _, idx in partial.terms))
        self.assertTrue(partial.terms)

    def test_serialisation(self):
        x = T(0, 1, 1, 0, 1 + 2j) + AlgebraElement(l0=0.5, kr=2)
        restored = AlgebraElement.from_dict(json.loads(json.dumps(x.to_dict())))
        self.assertEqual(restored.terms, x.terms)
        self.assertEqual((restored.l0, restored.kr), (0.5, 2))


class TestCocycle(unittest.TestCase):

    def test_killing_pairing(self):
        self.assertAlmostEqual(killing_pairing(T(0, 1, 2, 0), T(0, -1, -2, 0), su2()), 2.0)
        self.assertEqual(killing_pairing(T(0, 1, 2, 0), T(0, -1, -2, 1), su2()), 0)

    def test_cocycle_is_antisymmetric(self):
        charges = CentralCharges(1.0, 0.7)
        x, y = T(2, 1, 1, 0), T(2, -1, -1, 0)
        algebra = su2()
        self.assertAlmostEqual(cocycle(x, y, charges, algebra), -cocycle(y, x, charges, algebra))

    def test_closed_form_matches_quadrature(self):
        charges = CentralCharges(1.0, 0.5)
        x, y = T(0, 1, 2, 0), T(0, -1, -2, 0)
        closed = cocycle(x, y, charges, su2())
        self.assertAlmostEqual(closed, 2 * (2 * 1.0 + 1 * 0.5))
        self.assertAlmostEqual(cocycle_by_quadrature(x, y, charges, su2()), closed, places=7)


class TestCurrents(unittest.TestCase):

    def test_element_round_trip(self):
        idx = LosertIndex.of(0, 0, 1)
        theta = {0: ModeSum((basis_function(idx).scaled(2.0),))}
        x = element_from_current(theta, (0, 0, 3))
        self.assertAlmostEqual(x.terms[(0, idx)], 2.0, places=9)
        for key, value in x.terms.items():
            if key != (0, idx):
                self.assertLess(abs(value), 1e-9)
        back = current_of(T(0, 0, 0, 1, 2.0))
        p = GroupPoint(0.4, 0.1, 0.2)
        self.assertAlmostEqual(back[0](p), theta[0](p))

    def test_pointwise_bracket(self):
        algebra = su2()
        charges = CentralCharges(1.0, 0.0)
        theta1 = current_of(T(0, 1, 2, 0))
        theta2 = current_of(T(0, -1, -2, 0))
        currents, central = current_bracket(theta1, theta2, algebra, charges)
        self.assertEqual(currents, {})
        self.assertAlmostEqual(central, 4.0, places=7)

        theta3 = current_of(T(1, 0, 0, 0))
        currents, central = current_bracket(theta1, theta3, algebra, charges)
        self.assertEqual(central, 0)
        p = GroupPoint(0.6, 0.3, -0.2)
        self.assertAlmostEqual(currents[2](p), 1j * theta1[0](p) * theta3[1](p))


class TestGrading(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.algebra = su2()
        cls.table = build_structure_table((1, 1, 4))

    def test_graded_generators(self):
        grading = root_grading(self.algebra, (0, 0, 1))
        self.assertEqual(set(grading), {((0.0,), 0.0, 0.0), ((1.0,), 0.0, 0.0), ((-1.0,), 0.0, 0.0)})
        self.assertEqual(len(grading[((1.0,), 0.0, 0.0)]), 2)

    def test_bracket_respects_grading(self):
        h = graded_generator(self.algebra, (0.0,), LosertIndex.of(0, 0, 0))
        e = graded_generator(self.algebra, (1.0,), LosertIndex.of(1, 0, 1))
        result = bracket(h, e, self.algebra, self.table)
        grades = element_grades(result, self.algebra)
        self.assertTrue(grades)
        self.assertEqual({key for key in grades}, {((1.0,), 1.0, 0.0)})

    def test_commuting_family(self):
        family = commuting_family(self.algebra, (1, 1, 4))
        for x in family:
            for y in family:
                self.assertEqual(bracket(x, y, self.algebra, self.table).norm(), 0)


class TestDiscreteProducts(unittest.TestCase):

    def test_product_of_lowest_weight_elements(self):
        psi = MatrixElementIndex.of(SeriesLabel.discrete_plus(1), 1, 1)
        components = decompose_discrete_product(psi, psi, SigmaGrid(5.0, 8))
        self.assertAlmostEqual(components.discrete_plus[(2, 2, 2)], 2 / math.sqrt(6), places=8)
        self.assertAlmostEqual(abs(components.discrete_plus[(1, 2, 2)]), 0.0, places=8)

    def test_opposite_lowest_weights_have_no_discrete_part(self):
        plus = MatrixElementIndex.of(SeriesLabel.discrete_plus(1.5), 1.5, 1.5)
        minus = MatrixElementIndex.of(SeriesLabel.discrete_minus(1.5), -1.5, -1.5)
        components = decompose_discrete_product(plus, minus, SigmaGrid(5.0, 8))
        self.assertLess(components.discrete_norm(), 1e-10)
        self.assertTrue(components.continuous)

    def test_mixed_product_stays_below_the_smaller_weight(self):
        plus = MatrixElementIndex.of(SeriesLabel.discrete_plus(2), 3, 2)
        minus = MatrixElementIndex.of(SeriesLabel.discrete_minus(1), -1, -1)
        components = decompose_discrete_product(plus, minus, SigmaGrid(5.0, 8))
        present = {key: v for key, v in components.discrete_plus.items() if abs(v) > 1e-10}
        self.assertTrue(present)
        self.assertTrue(all(lam <= 1 for lam, _, _ in present))
        self.assertTrue(all(abs(v) < 1e-10 for v in components.discrete_minus.values()))

    def test_rejects_principal_series(self):
        psi = MatrixElementIndex.of(SeriesLabel.principal(1.0), 0, 0)
        with self.assertRaises(UnsupportedSeries):
            decompose_discrete_product(psi, psi)


if __name__ == '__main__':
    unittest.main()
