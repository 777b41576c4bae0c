import unittest
import math
import warnings
import numpy as np
from dmk.config import config
from dmk.kernels import params
from dmk.kernels.kernel import Kernel, get_kernel


class TestTable(unittest.TestCase):
    def test_rows_verbatim(self):
        rows = params.parameter_rows()
        self.assertEqual([r['eps'] for r in rows], [1e-3, 1e-6, 1e-9, 1e-12])
        self.assertEqual([r['N1'] for r in rows], [13, 25, 39, 53])
        self.assertEqual([r['p'] for r in rows], [9, 18, 28, 38])
        self.assertEqual(rows[1]['c'], 13.739999771118164)
        self.assertEqual([r['N1 gaussian'] for r in rows], [22, 44, 66, 88])

    def test_snap_up(self):
        with warnings.catch_warnings(record=True) as w:
            warnings.simplefilter('always')
            row = params.parameter_row(5e-5)
        self.assertEqual(row['eps'], 1e-6)
        self.assertEqual(len(w), 1)
        with warnings.catch_warnings():
            warnings.simplefilter('error')
            self.assertEqual(params.parameter_row(1e-9)['c'], 20.736000061035156)

    def test_eps_range(self):
        for eps in [1e-2, 1e-13, 0.]:
            with self.assertRaises(ValueError):
                params.check_eps(eps)
        self.assertEqual(params.check_eps(1e-12), 1e-12)


class TestDefaults(unittest.TestCase):
    def test_leaf_size(self):
        self.assertEqual(params.leaf_size(Kernel['Yukawa3D'], 1e-6), 80)
        self.assertEqual(params.leaf_size(Kernel['Laplace3D'], 1e-9), 800)
        self.assertEqual(params.leaf_size(get_kernel('Power', d=2, alpha=0.5), 1e-3), 120)

    def test_box_order(self):
        self.assertEqual(params.box_order(2, 1e-9), 16)
        self.assertEqual(params.box_order(3, 1e-6), 16)
        self.assertEqual(params.box_order(3, 1e-9), 20)

    def test_window_margin(self):
        self.assertEqual(params.window_margin(1e-12), 6.)
        self.assertEqual(params.window_margin(1e-9), 6.)
        self.assertAlmostEqual(params.window_margin(1e-6), math.sqrt(math.log(1e6)) + 1)


class TestOrders(unittest.TestCase):
    def test_chebyshev_tail(self):
        tails = [params.chebyshev_tail(p, 5.)[0] for p in [6, 10, 14, 18]]
        self.assertTrue(all(a > b for a, b in zip(tails, tails[1:])))
        self.assertLess(tails[-1], 1e-6)

    def test_chebyshev_order_monotone(self):
        spectrum = lambda k: np.exp(-k**2 / 40)
        orders = [params.chebyshev_order(spectrum, 20., 0.5, 3, eps)
                  for eps in [1e-3, 1e-6, 1e-9]]
        self.assertTrue(orders[0] < orders[1] < orders[2])

    def test_bandlimit(self):
        # Gaussian spectrum in 3D: the tail beyond K holds eps/2 of the mass
        eps = 1e-6
        K = params.bandlimit(lambda k: np.exp(-k**2 / 4), 20., 3, eps)
        self.assertTrue(5 < K < 10)
        self.assertEqual(params.bandlimit(lambda k: np.exp(-k**2 / 4), 20., 3, eps, floor=12.), 12.)

    def test_split_params_dict(self):
        sp = params.SplitParams(1e-6, params.parameter_row(1e-6), c=13.74)
        sp.p = 20
        sp.n_f[0] = 12
        sp.h[0] = 2 * np.pi / 3
        d = sp.as_dict()
        self.assertEqual(d['N1'], {0: 25})
        self.assertAlmostEqual(d['h_over_pi'][0], 2 / 3)
        self.assertEqual(d['table row']['N1'], 25)
