"""Quadrature rules and radial Fourier transforms."""

from functools import lru_cache
import math
import numpy as np
import scipy.integrate
import scipy.linalg
import scipy.special


# quad refuses relative tolerances below this when epsabs is 0
MIN_EPSREL = 50 * np.finfo(float).eps


def nintegrate(f, a, b, epsrel=1e-12, epsabs=0., **kwargs):
    epsrel = max(epsrel, MIN_EPSREL)
    return scipy.integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel,
                                limit=200, **kwargs)[0]

@lru_cache(maxsize=256)
def _leggauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w

def gauss_legendre(n, a=-1., b=1.):
    """Nodes and weights of the n-point Gauss-Legendre rule on [a, b]."""
    x, w = _leggauss(n)
    return (b - a) / 2 * x + (a + b) / 2, (b - a) / 2 * w

def gauss_jacobi(n, alpha, beta, a=-1., b=1.):
    """Nodes and weights for weight (b-x)^alpha (x-a)^beta on [a, b]."""
    x, w = scipy.special.roots_jacobi(n, alpha, beta)
    s = (b - a) / 2
    return s * x + (a + b) / 2, s**(1 + alpha + beta) * w

def composite_gauss_legendre(a, b, panels, n=32, breakpoints=()):
    """Composite rule with `panels` equal panels on [a, b], additionally
    split at `breakpoints`."""
    edges = np.linspace(a, b, max(int(panels), 1) + 1)
    extra = [p for p in breakpoints if a < p < b]
    edges = np.unique(np.concatenate([edges, extra]))
    x0, w0 = _leggauss(n)
    lo, hi = edges[:-1, None], edges[1:, None]
    x = (hi - lo) / 2 * x0 + (hi + lo) / 2
    w = (hi - lo) / 2 * w0 * np.ones_like(x)
    return x.ravel(), w.ravel()

def discrete_gauss_rule(x, weights, n):
    """n-point Gauss rule of the discrete measure sum_i weights_i delta(x - x_i)
    with positive weights, by Lanczos iteration with full
    reorthogonalization."""
    x = np.asarray(x, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if np.any(weights <= 0):
        raise ValueError("discrete_gauss_rule needs positive weights")
    if n > len(x):
        raise ValueError("Cannot build a {}-point rule from {} points".format(n, len(x)))
    total = np.sum(weights)
    q = np.zeros((len(x), n))
    q[:, 0] = np.sqrt(weights / total)
    diag, off = np.zeros(n), np.zeros(n - 1)
    for j in range(n):
        v = x * q[:, j]
        diag[j] = q[:, j] @ v
        for _ in range(2):
            v -= q[:, :j + 1] @ (q[:, :j + 1].T @ v)
        if j < n - 1:
            off[j] = np.linalg.norm(v)
            q[:, j + 1] = v / off[j]
    nodes, vecs = scipy.linalg.eigh_tridiagonal(diag, off)
    return nodes, total * vecs[0]**2

def _radial_kernel(k, r, d):
    kr = np.multiply.outer(k, r)
    if d == 3:
        return np.sinc(kr / np.pi) * r**2
    elif d == 2:
        return scipy.special.j0(kr) * r
    raise ValueError("dimension must be 2 or 3, got {}".format(d))

def _hankel_sum(values, nodes, weights, k, d, chunk=512):
    out = np.empty(len(k))
    for i in range(0, len(k), chunk):
        out[i:i + chunk] = _radial_kernel(k[i:i + chunk], nodes, d) @ (values * weights)
    return out

def radial_ft(f, R, k, d, breakpoints=()):
    r"""Fourier transform of a radial function supported on [0, R].

    $\hat f(k) = 4\pi\int_0^R \frac{\sin kr}{kr} f(r) r^2 dr$ in 3D and
    $2\pi\int_0^R J_0(kr) f(r) r dr$ in 2D."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    panels = math.ceil(np.max(k, initial=0.) * R / 20) + 1
    r, w = composite_gauss_legendre(0., R, panels, breakpoints=breakpoints)
    area = 4 * np.pi if d == 3 else 2 * np.pi
    return area * _hankel_sum(f(r), r, w, k, d)

def radial_ift(F, K, r, d, breakpoints=()):
    r"""Inverse radial Fourier transform of $F$ truncated at $|k| \le K$."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    panels = math.ceil(np.max(r, initial=0.) * K / 20) + 1
    k, w = composite_gauss_legendre(0., K, panels, breakpoints=breakpoints)
    norm = 1 / (2 * np.pi**2) if d == 3 else 1 / (2 * np.pi)
    return norm * _hankel_sum(F(k), k, w, r, d)
