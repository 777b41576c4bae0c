import unittest
import math
import numpy as np
import numpy.testing as npt
from dmk.math import integrate


class TestIntegrate(unittest.TestCase):
    def test_nintegrate(self):
        val = 2 * math.sin(1)**2
        self.assertAlmostEqual(integrate.nintegrate(math.sin, 0, 2), val, places=12)
        # tolerances below what quad accepts are clipped
        self.assertAlmostEqual(integrate.nintegrate(math.sin, 0, 2, epsrel=1e-16), val,
                               places=13)
        self.assertAlmostEqual(integrate.nintegrate(math.exp, 0, 1, epsrel=0.),
                               math.e - 1, places=13)

    def test_rules(self):
        x, w = integrate.gauss_legendre(16, 0, 2)
        self.assertAlmostEqual(np.sum(w), 2, places=14)
        self.assertAlmostEqual(np.sum(w * x**5), 2**6 / 6, places=12)
        # int_0^1 t^{-1/2} t dt = 2/3
        x, w = integrate.gauss_jacobi(10, 0., -0.5, 0., 1.)
        self.assertAlmostEqual(np.sum(w * x), 2 / 3, places=13)

    def test_radial_ft_gaussian(self):
        k = np.array([0., 1., 5., 12.])
        for d in [2, 3]:
            ft = integrate.radial_ft(lambda r: np.exp(-r**2), 8., k, d)
            npt.assert_allclose(ft, np.pi**(d / 2) * np.exp(-k**2 / 4), rtol=1e-12)
            r = np.array([0., 0.3, 1.])
            back = integrate.radial_ift(lambda q: np.pi**(d / 2) * np.exp(-q**2 / 4), 15., r, d)
            npt.assert_allclose(back, np.exp(-r**2), atol=1e-12)

    def test_discrete_gauss_rule(self):
        rng = np.random.default_rng(3)
        x = rng.uniform(0, 1, 60)
        w = rng.uniform(0.1, 1, 60)
        nodes, weights = integrate.discrete_gauss_rule(x, w, 8)
        self.assertTrue(np.all(weights > 0))
        for k in range(16):
            self.assertAlmostEqual(np.sum(weights * nodes**k), np.sum(w * x**k), places=12)
        with self.assertRaises(ValueError):
            integrate.discrete_gauss_rule(x, -w, 4)
