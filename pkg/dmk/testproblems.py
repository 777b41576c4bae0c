r"""Densities with known potentials, and point distributions.

For kernels whose transform is $s/(k^2 + \lambda^2)$ a density
$\rho = (-\Delta + \lambda^2) u$ built from an analytic u has the potential
$s u$. For the power kernels $1/r^\alpha$ the density is a sum of Gaussians
and the potential is evaluated from

$\int \frac{e^{-|y - y_0|^2/\delta}}{|x - y|^\alpha} dy = \frac{1}{\Gamma(\alpha/2)}
\int \left(\frac{\pi}{e^t + 1/\delta}\right)^{d/2}
e^{-|x - y_0|^2/(e^{-t} + \delta) + \alpha t/2} dt$

by the trapezoidal rule in t.
"""

import math
import numpy as np
from dmk.util import UnsupportedError


def gaussian_power_potential(x, center, delta, alpha, d, eps=1e-14, h=0.05):
    r"""Potential of the Gaussian density $e^{-|y - y_0|^2/\delta}$ under
    the kernel $1/r^\alpha$ at the points x, shape (n, d)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    R2 = np.sum((x - np.asarray(center))**2, axis=1)
    t = np.arange(-60., 60. + h / 2, h)

    def integrand(R2, t):
        return (np.pi / (np.exp(t) + 1 / delta))**(d / 2) \
            * np.exp(-R2[:, None] / (np.exp(-t) + delta) + alpha * t / 2)

    # truncate where the integrand is below eps times its peak for every x
    ends = integrand(np.array([0., np.max(R2, initial=0.)]), t)
    keep = np.max(ends, axis=0) >= eps * np.max(ends)
    t = t[keep]
    out = np.empty(len(x))
    chunk = 4096
    for i in range(0, len(x), chunk):
        out[i:i + chunk] = h * np.sum(integrand(R2[i:i + chunk], t), axis=1)
    return out / math.gamma(alpha / 2)


class AnalyticProblem(object):
    """Base class of the analytic test problems.

    Subclasses implement `u`, `laplacian` and, for power kernels,
    `gaussians()` returning (centers, weights, delta)."""

    d = None

    def u(self, x):
        raise NotImplementedError

    def laplacian(self, x):
        raise NotImplementedError

    def gaussians(self):
        raise UnsupportedError("{} has no Gaussian density form".format(type(self).__name__))

    def _check(self, kernel):
        if kernel.d != self.d:
            raise UnsupportedError("{} is a {}D problem, {} is {}D".format(
                type(self).__name__, self.d, kernel.name, kernel.d))

    def density(self, kernel):
        """The density (a vectorized function of points) for `kernel`."""
        self._check(kernel)
        if kernel.harmonic:
            lam2 = kernel.lam**2
            return lambda x: lam2 * self.u(x) - self.laplacian(x)
        centers, weights, delta = self.gaussians()

        def rho(x):
            x = np.atleast_2d(x)
            return sum(w * np.exp(-np.sum((x - c)**2, axis=1) / delta)
                       for c, w in zip(centers, weights))
        return rho

    def potential(self, kernel, x):
        """Exact potential of `density(kernel)` at the points x."""
        self._check(kernel)
        if kernel.harmonic:
            return kernel.fourier_scale * self.u(x)
        centers, weights, delta = self.gaussians()
        return sum(w * gaussian_power_potential(x, c, delta, kernel.alpha, self.d)
                   for c, w in zip(centers, weights))


class TwoGaussians(AnalyticProblem):
    r"""$u = \frac{1}{\pi\delta^{d/2}}e^{-|x - x_1|^2/\delta}
    - \frac{1}{2\pi\delta^{d/2}}e^{-|x - x_2|^2/\delta}$."""

    def __init__(self, delta=4e-3, d=3):
        if d not in (2, 3):
            raise ValueError("dimension must be 2 or 3, got {}".format(d))
        self.d = d
        self.delta = delta
        self.centers = np.array([[0.1, 0.02, 0.04], [0.03, -0.1, 0.05]])[:, :d]
        self.weights = np.array([1., -0.5]) / (np.pi * delta**(d / 2))

    def _terms(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        s = np.stack([np.sum((x - c)**2, axis=1) for c in self.centers])
        return s, self.weights[:, None] * np.exp(-s / self.delta)

    def u(self, x):
        return np.sum(self._terms(x)[1], axis=0)

    def laplacian(self, x):
        s, g = self._terms(x)
        dl = self.delta
        return np.sum(g * (4 * s / dl**2 - 2 * self.d / dl), axis=0)

    def gaussians(self):
        return self.centers, self.weights, self.delta


class Bump2D(AnalyticProblem):
    r"""$u = e^{-(|x|/r_0)^\alpha}$ in 2D, which drops sharply beyond the
    circle of radius r_0."""

    d = 2

    def __init__(self, alpha=60., r0=0.25):
        if alpha <= 2:
            raise ValueError("the bump needs alpha > 2, got {}".format(alpha))
        self.alpha = alpha
        self.r0 = r0

    def u(self, x):
        r = np.linalg.norm(np.atleast_2d(x), axis=1)
        return np.exp(-(r / self.r0)**self.alpha)

    def laplacian(self, x):
        r = np.linalg.norm(np.atleast_2d(x), axis=1)
        s = (r / self.r0)**self.alpha
        safe = np.where(r > 0, r, 1.)
        return np.where(r > 0, self.alpha**2 * s * (s - 1) * np.exp(-s) / safe**2, 0.)


class GaussianRing2D(AnalyticProblem):
    """Sum of n Gaussians of variance delta centered on a circle; only for
    the power kernels."""

    d = 2

    def __init__(self, delta=1e-3, n=40, radius=0.15):
        self.delta = delta
        phi = 2 * np.pi * np.arange(n) / n
        self.centers = radius * np.stack([np.cos(phi), np.sin(phi)], axis=1)
        self.weights = np.ones(n)

    def density(self, kernel):
        if kernel.harmonic:
            raise UnsupportedError("GaussianRing2D is defined for the power kernels only")
        return super().density(kernel)

    def potential(self, kernel, x):
        if kernel.harmonic:
            raise UnsupportedError("GaussianRing2D is defined for the power kernels only")
        return super().potential(kernel, x)

    def gaussians(self):
        return self.centers, self.weights, self.delta


def get_problem(name, d, **kwargs):
    """Analytic problem by name: 'gaussians', 'bump' or 'ring'."""
    if name == 'gaussians':
        return TwoGaussians(d=d, **kwargs)
    if d != 2:
        raise ValueError("Problem '{}' is two-dimensional".format(name))
    if name == 'bump':
        return Bump2D(**kwargs)
    if name == 'ring':
        return GaussianRing2D(**kwargs)
    raise ValueError("Unknown test problem '{}'".format(name))


def point_distribution(name, n, d, rng):
    """n points in the unit box: 'uniform' in the box, or uniform on the
    sphere ('sphere', 3D) or circle ('circle', 2D) of radius 0.45."""
    if name == 'uniform':
        return rng.uniform(-0.5, 0.5, (n, d))
    if name not in ('sphere', 'circle'):
        raise ValueError("Unknown distribution '{}'".format(name))
    if (name == 'sphere') != (d == 3):
        raise ValueError("Distribution '{}' is not available in {}D".format(name, d))
    x = rng.normal(size=(n, d))
    return 0.45 * x / np.linalg.norm(x, axis=1)[:, None]
