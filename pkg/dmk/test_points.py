import unittest
from unittest import mock
import numpy as np
import numpy.testing as npt
from dmk import points
from dmk.points import PointProblem, run_dmk, run_multilevel_ewald, direct_sum
from dmk.tree import build_point_tree, extra_refine
from dmk.util import SizeGuardError, rel_max_error


def uniform_problem(n, d, seed=0, **kwargs):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-0.5, 0.5, (n, d))
    rho = rng.uniform(-1, 1, n)
    return PointProblem(x, rho, **kwargs)


def sphere_problem(n, seed=0, **kwargs):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, 3))
    x = 0.45 * x / np.linalg.norm(x, axis=1)[:, None]
    return PointProblem(x, rng.uniform(-1, 1, n), **kwargs)


class TestProblem(unittest.TestCase):
    def test_defaults(self):
        pr = uniform_problem(10, 3)
        self.assertEqual(pr.n_s, 280)
        self.assertIs(pr.targets, pr.sources)
        self.assertEqual(pr.d, 3)
        self.assertEqual(uniform_problem(10, 2, kernel='Yukawa2D').n_s, 30)

    def test_invalid(self):
        with self.assertRaises(ValueError):
            PointProblem(np.zeros((3, 3)), np.ones(2))
        with self.assertRaises(ValueError):
            PointProblem(np.ones((3, 3)), np.ones(3))
        with self.assertRaises(ValueError):
            PointProblem(np.zeros((3, 2)), np.ones(3), kernel='Laplace3D')
        with self.assertRaises(ValueError):
            PointProblem(np.zeros((3, 3)), [1, np.nan, 1])
        with self.assertRaises(ValueError):
            PointProblem(np.zeros((3, 3)), np.ones(3), eps=1e-2)


class TestDirect(unittest.TestCase):
    def test_coincident(self):
        x = np.array([[0., 0., 0.], [0.3, 0., 0.]])
        u = direct_sum(PointProblem(x, [1., 2.])).u
        npt.assert_allclose(u, [2 / 0.3, 1 / 0.3])
        # K_0 is singular at 0; coincident pairs are never evaluated
        pr = PointProblem(x[:, :2], [1., 2.], kernel='Yukawa2D')
        k = float(pr.kernel(0.3))
        npt.assert_allclose(direct_sum(pr).u, [2 * k, k])
        pr = PointProblem(x[:, :2], [1., 2.], x[:1, :2], kernel='Yukawa2D')
        npt.assert_allclose(direct_sum(pr).u, [2 * k])

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        x = rng.uniform(-0.5, 0.5, (10, 2))
        y = rng.uniform(-0.5, 0.5, (10, 2))
        eye = np.eye(10)
        a = np.array([direct_sum(PointProblem(y, e, x, kernel='Laplace2D')).u for e in eye])
        b = np.array([direct_sum(PointProblem(x, e, y, kernel='Laplace2D')).u for e in eye])
        npt.assert_allclose(a, b.T, rtol=1e-14)
        npt.assert_array_equal(direct_sum(PointProblem(x, np.zeros(10), y,
                                                       kernel='Laplace2D')).u, 0)

    def test_compensated(self):
        pr = uniform_problem(300, 3, seed=4)
        u = direct_sum(pr, chunk=1000).u
        ref = []
        for xi in pr.targets:
            r = np.linalg.norm(pr.sources - xi, axis=1)
            terms = np.where(r > 0, pr.charges / np.where(r > 0, r, 1.), 0.)
            ref.append(np.sum(np.sort(terms)))
        npt.assert_allclose(u, ref, rtol=0, atol=1e-13 * np.max(np.abs(ref)))

    def test_subset_and_guard(self):
        pr = uniform_problem(100, 3)
        npt.assert_allclose(direct_sum(pr, subset=[3, 7]).u, direct_sum(pr).u[[3, 7]])
        with mock.patch.object(points, 'MAX_DIRECT_PAIRS', 1000):
            with self.assertRaises(SizeGuardError):
                direct_sum(pr)
            direct_sum(pr, subset=np.arange(10))


class TestResidualPass(unittest.TestCase):
    def test_refined_matches_reference(self):
        for kernel, scheme in [('Laplace3D', 'PswfPhysical'), ('Laplace2D', 'SogSplit')]:
            d = 3 if kernel == 'Laplace3D' else 2
            rng = np.random.default_rng(2)
            y = rng.uniform(-0.5, 0.5, (1500, d))
            y[:700] = -0.5 + 0.3 * (y[:700] + 0.5)**2
            x = rng.uniform(-0.5, 0.5, (800, d))
            rho = rng.uniform(-1, 1, 1500)
            tree = build_point_tree(y, x, 40, d)
            split = points._split(points.Kernel[kernel], scheme, 1e-6, tree.L_max)
            ref = points.reference_residual_pass(tree, split, rho)
            u = points.direct_residual_pass(extra_refine(tree), split, rho)
            npt.assert_allclose(u, ref, rtol=0, atol=5e-6 * np.max(np.abs(ref)), err_msg=kernel)
            with self.assertRaises(ValueError):
                points.direct_residual_pass(tree, split, rho)

    def test_compact_support(self):
        y = np.array([[-0.45, -0.45], [-0.4, -0.45]])
        x = np.array([[0.45, 0.45]])
        tree = build_point_tree(y, x, 1, 2)
        split = points._split(points.Kernel['Laplace2D'], None, 1e-6, tree.L_max)
        npt.assert_array_equal(points.reference_residual_pass(tree, split, [1., 1.]), 0)


class TestRunDmk(unittest.TestCase):
    def test_single_source(self):
        x = np.array([[-0.4, -0.4, -0.4]])
        t = np.array([[0.4, 0.35, 0.4]])
        u = run_dmk(PointProblem(x, [1.], t)).u
        r = np.linalg.norm(t - x)
        self.assertAlmostEqual(u[0] * r, 1, delta=1e-5)

    def test_cancellation(self):
        x = np.array([[-0.2, 0.1, 0.], [0.2, 0.1, 0.]])
        t = np.array([[0., -0.3, 0.25]])
        u = run_dmk(PointProblem(x, [1., -1.], t)).u
        self.assertLessEqual(abs(u[0]), 1e-5 * 2 / 0.45)

    def test_oracle(self):
        cases = [('Laplace3D', 'PswfPhysical', 3, 1e-6),
                 ('Laplace3D', 'GaussianPhysical', 3, 1e-3),
                 ('SqrtLaplace3D', 'AltPswf', 3, 1e-3),
                 ('Yukawa3D', 'SogSplit', 3, 1e-3),
                 ('Laplace2D', 'PswfFourier', 2, 1e-6),
                 ('SqrtLaplace2D', 'PswfPhysical', 2, 1e-6),
                 ('Yukawa2D', 'PswfFourier', 2, 1e-3)]
        for kernel, scheme, d, eps in cases:
            pr = uniform_problem(2000, d, seed=3, kernel=kernel, scheme=scheme, eps=eps, n_s=60)
            res = run_dmk(pr)
            err = rel_max_error(res.u, direct_sum(pr).u)
            self.assertLessEqual(err, 10 * eps, msg=kernel + ' ' + scheme)
            self.assertGreater(res.counters['levels'], 2)
            t = res.timings
            self.assertLessEqual(t['t_tree'] + t['t_fourier'] + t['t_direct'], t['t_total'])

    def test_sphere(self):
        pr = sphere_problem(3000, kernel='Laplace3D', eps=1e-6, n_s=50)
        err = rel_max_error(run_dmk(pr).u, direct_sum(pr).u)
        self.assertLessEqual(err, 1e-5)

    def test_reference_residual(self):
        pr = uniform_problem(1500, 2, seed=8, kernel='Laplace2D', eps=1e-6, n_s=40)
        u = run_dmk(pr).u
        with mock.patch.dict(points.config['points'], {'reference residual': True}):
            u_ref = run_dmk(pr).u
        npt.assert_allclose(u, u_ref, rtol=0, atol=5e-6 * np.max(np.abs(u_ref)))

    def test_deterministic_and_linear(self):
        rng = np.random.default_rng(9)
        x = rng.uniform(-0.5, 0.5, (1000, 3))
        r1, r2 = rng.uniform(-1, 1, (2, 1000))
        a = run_dmk(PointProblem(x, r1, n_s=50)).u
        npt.assert_array_equal(a, run_dmk(PointProblem(x, r1, n_s=50)).u)
        b = run_dmk(PointProblem(x, r2, n_s=50)).u
        c = run_dmk(PointProblem(x, r1 + r2, n_s=50)).u
        npt.assert_allclose(a + b, c, rtol=0, atol=1e-12 * np.max(np.abs(c)))

    def test_separate_targets(self):
        rng = np.random.default_rng(10)
        y = rng.uniform(-0.5, 0.5, (1200, 2))
        x = rng.uniform(-0.5, 0.5, (500, 2))
        x[:100] = y[:100]
        pr = PointProblem(y, rng.uniform(-1, 1, 1200), x, kernel='SqrtLaplace2D', n_s=40)
        self.assertLessEqual(rel_max_error(run_dmk(pr).u, direct_sum(pr).u), 1e-5)


class TestSupportMatrix(unittest.TestCase):
    def test_all_schemes(self):
        # every supported kernel and scheme against the oracle
        for name, schemes in points.config['split']['support'].items():
            kernel = points.Kernel[name]
            for scheme in schemes:
                for eps in [1e-3, 1e-6]:
                    with self.subTest(kernel=name, scheme=scheme, eps=eps):
                        pr = uniform_problem(1000, kernel.d, seed=12, kernel=kernel,
                                             scheme=scheme, eps=eps, n_s=40)
                        err = rel_max_error(run_dmk(pr).u, direct_sum(pr).u)
                        self.assertLessEqual(err, 10 * eps)


class TestMultilevelEwald(unittest.TestCase):
    def test_oracle(self):
        for kernel, d in [('Laplace2D', 2), ('Laplace3D', 3)]:
            pr = uniform_problem(2000, d, seed=5, kernel=kernel, n_s=60)
            u = run_multilevel_ewald(pr).u
            self.assertLessEqual(rel_max_error(u, direct_sum(pr).u), 1e-5, msg=kernel)
            self.assertLessEqual(rel_max_error(u, run_dmk(pr).u), 2e-5, msg=kernel)

    def test_single_source(self):
        x = np.array([[0.1, 0.2]])
        t = np.array([[-0.4, -0.3]])
        u = run_multilevel_ewald(PointProblem(x, [2.], t, kernel='Laplace2D')).u
        self.assertAlmostEqual(u[0], 2 * np.log(np.linalg.norm(t - x)), delta=1e-5)
