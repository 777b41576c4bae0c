import unittest
import math
import numpy as np
import numpy.testing as npt
import scipy.integrate
from dmk.math import functions


class TestFunctions(unittest.TestCase):
    def test_erf(self):
        self.assertEqual(functions.erf(0.), 0.)
        self.assertEqual(functions.erfc(0.), 1.)
        ref = 2 / math.sqrt(math.pi) * scipy.integrate.quad(
            lambda t: math.exp(-t**2), 0, 1, epsabs=0, epsrel=1e-15)[0]
        self.assertAlmostEqual(functions.erf(1.), ref, places=15)
        x = np.linspace(0, 10, 101)
        npt.assert_allclose(functions.erf(x) + functions.erfc(x), 1., rtol=0, atol=1e-15)
        # erfc keeps relative accuracy far in the tail
        self.assertAlmostEqual(functions.erfc(20.) / 5.395865611607901e-176, 1., places=12)

    def test_erfcinv(self):
        for y in [1e-3, 1e-6, 1e-12]:
            self.assertAlmostEqual(functions.erfc(functions.erfcinv(y)) / y, 1, places=12)

    def test_k0(self):
        # K0(1) from int exp(-e^{2s} - e^{-2s}/4) ds by the trapezoidal rule
        h = 0.02
        s = np.arange(-12, 6, h)
        ref = h * np.sum(np.exp(-np.exp(2 * s) - np.exp(-2 * s) / 4))
        self.assertAlmostEqual(functions.bessel_k0(1.) / ref, 1, places=13)
        # large-argument asymptotics
        x = 50.
        self.assertAlmostEqual(
            functions.bessel_k0(x) / (math.sqrt(math.pi / (2 * x)) * math.exp(-x)),
            1, delta=0.02)
        # small-argument expansion
        x = 1e-4
        self.assertAlmostEqual(
            functions.bessel_k0(x), -math.log(x / 2) - np.euler_gamma, delta=1e-4)
        with self.assertRaises(ValueError):
            functions.bessel_k0(0.)
        with self.assertRaises(ValueError):
            functions.bessel_k0(np.array([1., -1.]))

    def test_sinc_si(self):
        self.assertEqual(functions.sinc(0.), 1.)
        self.assertAlmostEqual(functions.sinc(2.), math.sin(2.) / 2., places=15)
        self.assertAlmostEqual(functions.si(1e3), math.pi / 2, delta=1e-3)

    def test_gaussian_moment(self):
        for k in [1, 3, 5]:
            ref = scipy.integrate.quad(lambda r: math.exp(-(2.5 * r)**2) * r**k,
                                       0, 0.7, epsabs=0, epsrel=1e-14)[0]
            self.assertAlmostEqual(functions.gaussian_moment(2.5, 0.7, k) / ref, 1, places=12)
