import unittest
import numpy as np
import numpy.testing as npt
from dmk.math.tabulate import tabulate, cached_tabulate, PiecewiseCheb1D
from dmk.math import functions
from dmk.math.pswf import pswf_build
from dmk.util import RefinementLimitError


class TestTabulate(unittest.TestCase):
    def test_identity(self):
        t = tabulate(lambda x: x, (-2, 3), 1e-14)
        self.assertEqual(len(t.coeff_blocks), 1)
        x = np.linspace(-2, 3, 77)
        npt.assert_allclose(t(x), x, atol=1e-14)

    def test_tolerance_below_rounding(self):
        # accepted at the rounding level of the function values
        t = tabulate(np.cos, (0, 1), 1e-18)
        self.assertLessEqual(len(t.coeff_blocks), 2)
        x = np.linspace(0, 1, 101)
        npt.assert_allclose(t(x), np.cos(x), atol=1e-14)
        t = tabulate(lambda x: 1e6 * np.exp(x), (0, 2), 1e-12)
        npt.assert_allclose(t(x), 1e6 * np.exp(x), rtol=1e-13)

    def test_erfc(self):
        t = tabulate(functions.erfc, (0, 8), 1e-14)
        x = np.random.default_rng(0).uniform(0, 8, 10**4)
        self.assertLessEqual(np.max(np.abs(t(x) - functions.erfc(x))), 1e-14)
        # continuity across breakpoints
        bp = t.breakpoints[1:-1]
        npt.assert_allclose(t(bp * (1 - 1e-15)), t(bp * (1 + 1e-15)), atol=1e-13)

    def test_pswf(self):
        psi = pswf_build(13.739999771118164)
        t = tabulate(psi.inside, (0, 1), 1e-13)
        x = np.linspace(0, 1, 10**4)
        self.assertLessEqual(np.max(np.abs(t(x) - psi.inside(x))), 1e-13)

    def test_shape(self):
        t = tabulate(np.cos, (0, 1), 1e-14)
        x = np.random.default_rng(0).uniform(0, 1, (3, 4))
        self.assertEqual(t(x).shape, (3, 4))
        self.assertEqual(t(0.5).shape, ())

    def test_refinement_limit(self):
        with self.assertRaises(RefinementLimitError):
            tabulate(np.sqrt, (0, 1), 1e-15, max_depth=4)
        with self.assertRaises(ValueError):
            tabulate(np.sqrt, (1, 0), 1e-3)
        with self.assertRaises(ValueError):
            PiecewiseCheb1D([0, 1, 0.5], np.zeros((2, 4)))

    def test_cache(self):
        import os
        import tempfile
        with tempfile.TemporaryDirectory() as d:
            old = os.environ.get('DMK_TABLE_CACHE')
            os.environ['DMK_TABLE_CACHE'] = d
            try:
                t1 = cached_tabulate('cos test', np.cos, (0, 2), 1e-13)
                self.assertEqual(len(os.listdir(d)), 1)
                t2 = cached_tabulate('cos test', np.cos, (0, 2), 1e-13)
                npt.assert_array_equal(t1.coeff_blocks, t2.coeff_blocks)
            finally:
                if old is None:
                    del os.environ['DMK_TABLE_CACHE']
                else:
                    os.environ['DMK_TABLE_CACHE'] = old
