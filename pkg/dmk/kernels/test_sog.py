import unittest
import math
import numpy as np
import numpy.testing as npt
from dmk.kernels.kernel import Kernel, get_kernel
from dmk.kernels import sog
from dmk.math.functions import erfc
from dmk.math.integrate import nintegrate
from dmk.util import ConvergenceError


class TestBuildSog(unittest.TestCase):
    def test_yukawa(self):
        eps = 1e-6
        kernel = get_kernel('Yukawa3D', lam=6.)
        eps0 = eps**0.125
        s = sog.build_sog(kernel, eps, (eps0, math.sqrt(3)))
        r = np.geomspace(eps0, math.sqrt(3), 1000)
        self.assertLessEqual(np.max(np.abs(s(r) / kernel(r) - 1)), eps)
        self.assertLessEqual(s.n_g, 60)

    def test_laplace(self):
        eps = 1e-6
        s = sog.build_sog(Kernel['Laplace3D'], eps, (1e-3, math.sqrt(3)))
        self.assertLessEqual(abs(s(0.5) * 0.5 - 1), eps)
        # partition at delta_L: the narrow part is negligible at r_L
        rL = 1 / 8
        delta = math.sqrt(math.log(1 / eps)) / rL
        narrow = s.select(delta)
        self.assertLessEqual(narrow(rL), eps / rL)
        npt.assert_allclose(narrow(0.01) + s.select(0., delta)(0.01), s(0.01), rtol=1e-14)

    def test_log(self):
        eps = 1e-6
        kernel = Kernel['Laplace2D']
        s = sog.build_sog(kernel, eps, (1e-3, math.sqrt(2)))
        r = np.geomspace(1e-3, math.sqrt(2), 200)
        err = np.abs(s(r) - kernel(r)) / np.maximum(np.abs(kernel(r)), 1)
        self.assertLessEqual(np.max(err), eps)
        self.assertNotEqual(s.const, 0.)

    def test_power(self):
        eps = 1e-9
        for kernel in [Kernel['SqrtLaplace3D'], get_kernel('Power', alpha=0.6)]:
            s = sog.build_sog(kernel, eps, (1e-3, math.sqrt(3)))
            r = np.geomspace(1e-3, math.sqrt(3), 300)
            self.assertLessEqual(np.max(np.abs(s(r) / kernel(r) - 1)), eps)

    def test_node_budget(self):
        with self.assertRaises(ConvergenceError):
            sog.build_sog(Kernel['Laplace3D'], 1e-9, (1e-4, math.sqrt(3)), max_nodes=10)
        with self.assertRaises(ValueError):
            sog.build_sog(Kernel['Laplace3D'], 1e-6, (1., 0.5))

    def test_fourier(self):
        s = sog.SogApprox([1., 3.], [0.5, 2.], (0., np.inf))
        k = np.array([0., 2.])
        ref = 0.5 * np.pi**1.5 * np.exp(-k**2 / 4) + 2 * (np.pi / 9)**1.5 * np.exp(-k**2 / 36)
        npt.assert_allclose(s.fourier(k, 3), ref, rtol=1e-14)
        self.assertAlmostEqual(s.at_zero(2.), 0.5)


class TestErfcSog(unittest.TestCase):
    def test_erfc(self):
        t_lo, t_hi = 2., 1e5
        s = sog.erfc_sog(t_lo, t_hi, breakpoints=[4., 8., 16.])
        r = np.geomspace(1e-3, 1., 50)
        ref = (erfc(t_lo * r) - erfc(t_hi * r)) / r
        npt.assert_allclose(s(r), ref, rtol=1e-12, atol=1e-14)
        # partial sums between breakpoints
        part = s.select(4., 8.)
        npt.assert_allclose(part(r), (erfc(4 * r) - erfc(8 * r)) / r, rtol=1e-12, atol=1e-14)


class TestLocalIntegrals(unittest.TestCase):
    def test_erfc_moments(self):
        t_top, a = 50., 0.02
        for d in [2, 3]:
            moments = sog.erfc_remainder_moments(t_top, d)
            for n in [0, 2, 4]:
                ref = nintegrate(lambda r: erfc(t_top * r) * r**(n + d - 2), 0, a)
                self.assertAlmostEqual(moments(a, n) / ref, 1, places=12)

    def test_quadrature_moments(self):
        kernel = Kernel['Laplace3D']
        s = sog.build_sog(kernel, 1e-6, (1e-3, math.sqrt(3)))
        rsog = sog.ResidualSog(kernel, s, lambda l: 3.7 * 2.0**l, lambda r: kernel(r) - s(r))
        moments = sog.residual_local_integrals(rsog, 2, 0.2, n_max=4)
        self.assertEqual(sorted(moments), [0, 2, 4])
        ref = nintegrate(lambda r: float(kernel(r) - s(r)) * r**4, 0, 0.05, epsrel=1e-10)
        self.assertAlmostEqual(moments[2] / ref, 1, places=5)


class TestFittedResidual(unittest.TestCase):
    def test_gaussian_mollifier(self):
        # M_l = erf(a r)/r with a = 4/r_l leaves R_l = erfc(a r)/r
        kernel = Kernel['Laplace3D']
        eps = 1e-6
        s = sog.build_sog(kernel, eps, (2e-3, math.sqrt(3)))

        def mollified(level, r):
            a = 4 * 2.0**level
            r = np.asarray(r, dtype=float)
            safe = np.where(r > 0, r, 1.)
            return np.where(r > 0, (1 - erfc(a * safe)) / safe, 2 * a / math.sqrt(math.pi))

        rsog = sog.FittedResidualSog(kernel, s, mollified, eps)
        for level in [0, 3]:
            rl = 2.0**-level
            r = np.geomspace(5e-3, min(4 * rl, 1.) * math.sqrt(3), 80)
            part = rsog.level_sog(level)
            npt.assert_allclose(part(r) + rsog.remainder(r), erfc(4 * r / rl) / r,
                                rtol=0, atol=20 * eps * (1 / r + 5 / rl), err_msg=level)
            self.assertTrue(np.all(part.nodes[~np.isin(part.nodes, s.nodes)]
                                   < rsog.narrow_threshold(level, eps)))
        # the base form keeps the Gaussians above the level threshold
        base = sog.ResidualSog(kernel, s, lambda l: 3.7 * 2.0**l, lambda r: kernel(r) - s(r))
        npt.assert_array_equal(base.level_sog(2).nodes, s.nodes[s.nodes >= 3.7 * 4])
        self.assertEqual(base.amplification(2), 1.)
