import unittest
import numpy as np
import numpy.testing as npt
from dmk.config import config
from dmk.math.pswf import pswf_build, pswf_integral, pswf_c_for_ratio, decay_ratio
from dmk.math.integrate import gauss_legendre, nintegrate
from dmk.util import ConvergenceError


class TestPswf(unittest.TestCase):
    def test_ratio_at_one(self):
        decay = config['verify']['pswf decay']
        psi = pswf_build(decay['c'])
        self.assertAlmostEqual(float(psi(1.)) / psi.psi0_at_0, decay_ratio(psi), places=15)
        # same value as independent prolate evaluations, about 1e-6
        self.assertAlmostEqual(decay_ratio(psi) / 6.6035e-7, 1, delta=1e-3)
        self.assertLessEqual(abs(np.log10(decay_ratio(psi) / decay['target'])),
                             decay['log10 tolerance'])

    def test_c_for_ratio(self):
        c = pswf_c_for_ratio(1e-6)
        self.assertTrue(15.5 < c < 16.893999099731445, msg=c)
        self.assertAlmostEqual(decay_ratio(pswf_build(c)) / 1e-6, 1, delta=1e-6)
        c3 = pswf_c_for_ratio(1e-3)
        self.assertTrue(c3 < c)
        self.assertAlmostEqual(decay_ratio(pswf_build(c3)) / 1e-3, 1, delta=1e-8)
        c12 = pswf_c_for_ratio(1e-12)
        self.assertTrue(c < c12 <= 60)
        self.assertAlmostEqual(decay_ratio(pswf_build(c12)) / 1e-12, 1, delta=1e-2)
        with self.assertRaises(ValueError):
            pswf_c_for_ratio(0.)
        with self.assertRaises(ValueError):
            pswf_c_for_ratio(1.5)

    def test_even_positive_normalized(self):
        psi = pswf_build(13.739999771118164)
        self.assertEqual(psi(0.3), psi(-0.3))
        x = np.linspace(-0.999, 0.999, 501)
        self.assertTrue(np.all(psi(x) > 0))
        t, w = gauss_legendre(200)
        self.assertAlmostEqual(np.sum(w * psi(t)**2), 1, places=13)

    def test_dense_oracle(self):
        c = 13.739999771118164
        psi = pswf_build(c)
        # the same operator on the full (even and odd) normalized Legendre basis
        n = len(psi.legendre_coeffs) + 20
        k = np.arange(n, dtype=float)
        mat = np.diag(k * (k + 1) + c**2 * (2 * k * (k + 1) - 1) / ((2 * k + 3) * (2 * k - 1)))
        kk = k[:-2]
        off = c**2 * (kk + 2) * (kk + 1) / ((2 * kk + 3) * np.sqrt((2 * kk + 1) * (2 * kk + 5)))
        mat += np.diag(off, 2) + np.diag(off, -2)
        vals, vecs = np.linalg.eigh(mat)
        v = vecs[:, 0]
        v = v * np.sign(np.polynomial.legendre.legval(0., v * np.sqrt(k + 0.5)))
        npt.assert_allclose(v[:len(psi.legendre_coeffs)], psi.legendre_coeffs, atol=1e-11)
        t, w = gauss_legendre(200)
        series = v * np.sqrt(k + 0.5)
        lam = np.sum(w * np.polynomial.legendre.legval(t, series)) \
            / np.polynomial.legendre.legval(0., series)
        self.assertAlmostEqual(psi.lambda0 / lam, 1, places=11)

    def test_self_similarity(self):
        c = 13.739999771118164
        psi = pswf_build(c)
        rng = np.random.default_rng(1)
        k = rng.uniform(-c, c, 200)
        t, w = gauss_legendre(200)
        # finite Fourier transform of the truncated function
        ft = np.cos(np.outer(k, t)) @ (w * psi(t))
        npt.assert_allclose(ft, psi.lambda0 * psi(k / c),
                            rtol=0, atol=1e-11 * psi.lambda0 * psi.psi0_at_0)

    def test_extension(self):
        psi = pswf_build(7.2462000846862793)
        # continuous through |x| = 1 and equal to the Fourier transform beyond
        self.assertAlmostEqual(psi(1. + 1e-12), psi(1.), places=12)
        t, w = gauss_legendre(200)
        x = np.array([1.5, 3., 10.])
        ft = np.cos(psi.c * np.outer(x, t)) @ (w * psi(t)) / psi.lambda0
        npt.assert_allclose(psi(x), ft, atol=1e-13)

    def test_deficit_ratio(self):
        psi = pswf_build(13.739999771118164)
        x = np.array([0.1, 0.5, 2., 7.])
        npt.assert_allclose(psi.deficit_ratio(x), (psi.psi0_at_0 - psi(x)) / x**2,
                            rtol=1e-10)
        self.assertAlmostEqual(psi.deficit_ratio(1e-9) / psi.deficit_ratio(0.), 1, places=10)

    def test_pswf_integral(self):
        psi = pswf_build(13.739999771118164)
        self.assertEqual(pswf_integral(psi, 1, 0.), 0.)
        self.assertEqual(pswf_integral(psi, 1, 1.), 1.)
        self.assertEqual(pswf_integral(psi, 2, 1.5), 1.)
        ref = nintegrate(psi.inside, 0, 0.5, epsrel=1e-14) / nintegrate(psi.inside, 0, 1, epsrel=1e-14)
        self.assertAlmostEqual(pswf_integral(psi, 1, 0.5), ref, places=13)
        ref = nintegrate(lambda t: t * psi.inside(t), 0, 0.3, epsrel=1e-14) \
            / nintegrate(lambda t: t * psi.inside(t), 0, 1, epsrel=1e-14)
        self.assertAlmostEqual(pswf_integral(psi, 2, 0.3), ref, places=13)
        x = np.linspace(0, 1, 400)
        self.assertTrue(np.all(np.diff(pswf_integral(psi, 1, x)) >= 0))
        self.assertAlmostEqual(psi.c0, nintegrate(psi.inside, 0, 1, epsrel=1e-14), places=13)

    def test_errors(self):
        with self.assertRaises(ValueError):
            pswf_build(0.)
        with self.assertRaises(ValueError):
            pswf_build(61.)
        self.assertTrue(issubclass(ConvergenceError, ValueError))
