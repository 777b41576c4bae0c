r"""Prolate spheroidal wave function of order zero.

The function is expanded in normalized Legendre polynomials
$\bar P_k = \sqrt{k + 1/2} P_k$; only even degrees contribute. The expansion
coefficients are the eigenvector belonging to the smallest eigenvalue of the
symmetric tridiagonal matrix that represents the differential operator
$-(d/dx)(1-x^2)(d/dx) + c^2 x^2$ in that basis.

The decay ratio $\psi(1)/\psi(0)$ does not depend on the normalization. At
c = 16.893999099731445 it is 6.60e-7 rather than the round 1e-6 that c is
usually quoted for; `pswf_c_for_ratio` solves for the c of an exact ratio.
"""

from functools import lru_cache
import logging
import math
import numpy as np
import scipy.linalg
import scipy.optimize
from dmk.math.integrate import gauss_legendre, gauss_jacobi
from dmk.util import ConvergenceError

logger = logging.getLogger(__name__)


class Pswf(object):
    r"""The prolate spheroidal wave function $\psi_0^c$ on the real line.

    Parameters
    ----------
     - c: bandlimit parameter
     - legendre_coeffs: coefficients in the normalized Legendre basis
       (index = degree, odd entries vanish)
     - lambda0: eigenvalue of the finite Fourier transform
     - psi0_at_0: value at the origin

    On [-1, 1] the function is evaluated from its Legendre series. Outside,
    the eigenfunction relation
    $\psi(x) = \frac{2}{\lambda_0}\int_0^1 \cos(cxt)\psi(t) dt$
    is used as the definition, so that $\psi(k/c)$ is exactly the Fourier
    transform of the function truncated to [-1, 1], up to the factor
    $\lambda_0$.
    """

    def __init__(self, c, legendre_coeffs, lambda0, psi0_at_0):
        self.c = c
        self.legendre_coeffs = np.asarray(legendre_coeffs, dtype=float)
        self.lambda0 = lambda0
        self.psi0_at_0 = psi0_at_0
        degree = len(self.legendre_coeffs) - 1
        self._series = self.legendre_coeffs * np.sqrt(np.arange(degree + 1) + 0.5)
        self._t, self._w = gauss_legendre(degree + 20, 0., 1.)
        self._psi_t = self.inside(self._t)
        # c0 = int_0^1 psi, c2 = int_0^1 x^2 psi
        self.c0 = self.lambda0 * self.psi0_at_0 / 2
        self.c2 = float(np.sum(self._w * self._t**2 * self._psi_t))

    @property
    def degree(self):
        return len(self.legendre_coeffs) - 1

    def inside(self, x):
        """Legendre series, valid for |x| <= 1."""
        return np.polynomial.legendre.legval(x, self._series)

    def _nodes_for(self, xmax):
        panels = math.ceil(self.c * xmax / 20) + math.ceil(self.degree / 40) + 1
        edges = np.linspace(0., 1., panels + 1)
        t0, w0 = gauss_legendre(32)
        lo, hi = edges[:-1, None], edges[1:, None]
        t = ((hi - lo) / 2 * t0 + (hi + lo) / 2).ravel()
        w = ((hi - lo) / 2 * w0 * np.ones((panels, 1))).ravel()
        return t, w, self.inside(t)

    def _cosine_integral(self, x, integrand):
        x = np.abs(np.asarray(x, dtype=float))
        out = np.empty(x.shape)
        flat = x.ravel()
        res = out.reshape(-1)
        if flat.size == 0:
            return out
        t, w, psi_t = self._nodes_for(np.max(flat))
        chunk = max(1, 2**22 // len(t))
        for i in range(0, flat.size, chunk):
            xs = flat[i:i + chunk]
            res[i:i + chunk] = integrand(np.multiply.outer(xs, t)) @ (w * psi_t)
        return out

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape)
        inner = np.abs(x) <= 1
        out[inner] = self.inside(x[inner])
        if not np.all(inner):
            c = self.c
            out[~inner] = 2 / self.lambda0 * self._cosine_integral(
                x[~inner], lambda xt: np.cos(c * xt))
        return out

    def deficit_ratio(self, x):
        r"""$(\psi(0) - \psi(x))/x^2$, evaluated without cancellation.

        The limit at x = 0 is $c^2 c_2/\lambda_0$."""
        c = self.c

        def integrand(xt):
            # sin^2(c x t/2)/x^2 = (c t/2)^2 sinc^2(c x t/2)
            return (c / 2 * xt)**2 * np.sinc(c * xt / (2 * np.pi))**2

        x = np.abs(np.asarray(x, dtype=float))
        with np.errstate(divide='ignore', invalid='ignore'):
            out = 4 / self.lambda0 * self._cosine_integral(x, integrand)
            xx = np.where(x == 0, 1., x)
            out = np.where(x == 0, c**2 * self.c2 / self.lambda0, out / xx**2)
        return out

    def moment_integral(self, alpha, x):
        r"""$\int_0^x t^{\alpha-1}\psi(t) dt$ for $0 \le x \le 1$."""
        x = np.asarray(x, dtype=float)
        return x**alpha * self.moment_ratio(alpha, x)

    def moment_ratio(self, alpha, x):
        r"""$x^{-\alpha}\int_0^x t^{\alpha-1}\psi(t) dt$, smooth and even in x."""
        x = np.asarray(x, dtype=float)
        s, w = _jacobi_unit(self.degree + 10, float(alpha))
        return self.inside(np.multiply.outer(x, s)) @ w


@lru_cache(maxsize=64)
def _jacobi_unit(n, alpha):
    # weight s^(alpha-1) on [0, 1]
    s, w = gauss_jacobi(n, 0., alpha - 1, 0., 1.)
    return s, w


@lru_cache(maxsize=64)
def pswf_build(c):
    """Build the prolate spheroidal wave function of order zero with
    bandlimit parameter `c` (0 < c <= 60)."""
    if not 0 < c <= 60:
        raise ValueError("PSWF parameter must satisfy 0 < c <= 60, got {}".format(c))
    n = math.ceil(2 * c) + 30
    k = np.arange(0, n + 1, 2, dtype=float)
    diag = k * (k + 1) + c**2 * (2 * k * (k + 1) - 1) / ((2 * k + 3) * (2 * k - 1))
    kk = k[:-1]
    off = c**2 * (kk + 2) * (kk + 1) / ((2 * kk + 3) * np.sqrt((2 * kk + 1) * (2 * kk + 5)))
    chi, vec = scipy.linalg.eigh_tridiagonal(diag, off, select='i', select_range=(0, 0))
    v = vec[:, 0]
    if abs(v[-1]) > 1e-14 * np.max(np.abs(v)):
        raise ConvergenceError("Legendre expansion of the PSWF with c={} did not "
                               "converge; increase the basis size".format(c))
    coeffs = np.zeros(int(k[-1]) + 1)
    coeffs[::2] = v
    psi0 = np.polynomial.legendre.legval(0., coeffs * np.sqrt(np.arange(len(coeffs)) + 0.5))
    if psi0 < 0:
        coeffs = -coeffs
        psi0 = -psi0
    # int_{-1}^1 psi = sqrt(2) a_0
    lambda0 = math.sqrt(2) * coeffs[0] / psi0
    logger.debug("PSWF c=%g: chi=%.6g, lambda0=%.6g, psi(0)=%.6g", c, chi[0], lambda0, psi0)
    return Pswf(c, coeffs, lambda0, psi0)


def pswf_integral(psi, alpha, x):
    r"""$\Phi(x) = \frac{1}{c_0}\int_0^x t^{\alpha-1}\psi(t) dt$ with
    $c_0 = \int_0^1 t^{\alpha-1}\psi(t) dt$, so that $\Phi(0)=0$ and
    $\Phi(1)=1$; $\Phi(x) = 1$ for x > 1."""
    if alpha <= 0:
        raise ValueError("alpha must be positive, got {}".format(alpha))
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("pswf_integral requires x >= 0")
    c0 = psi.moment_integral(alpha, 1.)
    inner = np.minimum(x, 1.)
    out = psi.moment_integral(alpha, inner) / c0
    return np.where(x >= 1, 1., out)


def decay_ratio(psi):
    r"""$\psi(1)/\psi(0)$, independent of the normalization."""
    return float(psi.inside(1.)) / psi.psi0_at_0


def pswf_c_for_ratio(ratio):
    r"""Bandlimit parameter c with $\psi_0^c(1)/\psi_0^c(0)$ = `ratio`.

    The ratio decreases monotonically in c, roughly like e^-c. It is
    matched on the linear scale, where rounding in $\psi(1)$ for large c
    only shifts the function by a few ulps of $\psi(0)$."""
    if not 0 < ratio < 1:
        raise ValueError("PSWF decay ratio must be in (0, 1), got {}".format(ratio))
    upper = min(60., 3 * math.log(1 / ratio) + 5)
    return scipy.optimize.brentq(lambda c: decay_ratio(pswf_build(c)) - ratio,
                                 0.5, upper, xtol=1e-12)
