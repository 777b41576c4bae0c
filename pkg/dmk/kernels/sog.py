r"""Sum-of-Gaussians approximations

$K(r) \approx C + \sum_i w_i e^{-r^2 t_i^2}$

obtained from the Gaussian integral representations of the kernels by the
trapezoidal rule in $u = \log t$.
"""

import logging
import math
import warnings
import numpy as np
import scipy.linalg
from dmk.config import config
from dmk.math.functions import erfc, gaussian_moment
from dmk.math.integrate import gauss_legendre, nintegrate, discrete_gauss_rule
from dmk.util import ConvergenceError

logger = logging.getLogger(__name__)


class SogApprox(object):
    """Sum of Gaussians with nodes `nodes` (inverse lengths), weights
    `weights` and an additive constant, valid on `r_range`."""

    def __init__(self, nodes, weights, r_range, const=0.):
        order = np.argsort(nodes)
        self.nodes = np.asarray(nodes, dtype=float)[order]
        self.weights = np.asarray(weights, dtype=float)[order]
        self.r_range = tuple(r_range)
        self.const = const

    @property
    def n_g(self):
        return len(self.nodes)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        flat = r.ravel()
        out = np.empty(flat.shape)
        chunk = max(1, 2**20 // max(self.n_g, 1))
        for i in range(0, flat.size, chunk):
            x = flat[i:i + chunk]
            out[i:i + chunk] = np.exp(-np.multiply.outer(x**2, self.nodes**2)) @ self.weights
        return (out + self.const).reshape(r.shape)

    def mask(self, lo=0., hi=np.inf):
        return (self.nodes >= lo) & (self.nodes < hi)

    def select(self, lo=0., hi=np.inf):
        """The Gaussians with lo <= t < hi; the constant is kept only if
        lo == 0."""
        m = self.mask(lo, hi)
        return SogApprox(self.nodes[m], self.weights[m], self.r_range,
                         self.const if lo == 0 else 0.)

    def fourier(self, k, d):
        """Fourier transform of the Gaussian part."""
        k = np.asarray(k, dtype=float)
        t, w = self.nodes, self.weights
        g = np.exp(-np.multiply.outer(k**2, 1 / (4 * t**2)))
        return g @ (w * (np.pi / t**2)**(d / 2))

    def at_zero(self, hi=np.inf):
        """Value at r = 0 of the Gaussians with t < hi, plus the constant."""
        return self.const + np.sum(self.weights[self.nodes < hi])


def _scale(kernel, values):
    if kernel.homogeneity == 0:
        return np.maximum(np.abs(values), 1.)
    return np.abs(values)


def _lump_wide(t, w, t_wide, n):
    # Gaussians with t < t_wide are replaced by the n-point Gauss rule of
    # their weights as a measure in t^2, which keeps the first 2n moments
    wide = t < t_wide
    if np.count_nonzero(wide) <= n:
        return t, w
    sign = np.sign(w[wide][0])
    if np.any(sign * w[wide] <= 0):
        return t, w
    x, mu = discrete_gauss_rule(t[wide]**2, sign * w[wide], n)
    return np.concatenate([np.sqrt(x), t[~wide]]), np.concatenate([sign * mu, w[~wide]])


def build_sog(kernel, eps, r_range, max_nodes=None):
    """Sum-of-Gaussians approximation of `kernel` with relative accuracy
    `eps` on `r_range` (absolute accuracy max(|K|, 1)·eps for log r).

    The trapezoidal step is halved until the accuracy is reached; nodes
    whose contribution stays below eps/1000 everywhere on the range are
    dropped."""
    max_nodes = max_nodes or config['split']['sog']['max nodes']
    r_min, r_max = r_range
    if not 0 < r_min < r_max:
        raise ValueError("Invalid SOG range [{}, {}]".format(r_min, r_max))
    samples = np.geomspace(r_min, r_max, 1000)
    n_wide = math.ceil(math.log10(1 / eps)) + 4
    ref = kernel(samples)
    scale = _scale(kernel, ref)
    h = math.pi**2 / (2 * (math.log(1 / eps) + 3))
    for _ in range(4):
        u = np.arange(math.floor(-40 / h), math.ceil(40 / h) + 1) * h
        t, w = kernel.sog_weights(u, h)
        terms = w * (np.exp(-np.multiply.outer(samples**2, t**2)) - kernel.sog_reference(t))
        keep = np.max(np.abs(terms) / scale[:, None], axis=0) > eps * 1e-3
        t, w = t[keep], w[keep]
        const = kernel.sog_constant(t, w)
        t, w = _lump_wide(t, w, 1 / r_max, n_wide)
        sog = SogApprox(t, w, r_range, const)
        err = np.max(np.abs(sog(samples) - ref) / scale)
        logger.debug("SOG for %s: h=%.4g, %d nodes, error %.3g", kernel.name, h, sog.n_g, err)
        if err <= eps:
            break
        h /= 2
    else:
        raise ConvergenceError("SOG for {} did not reach {:g} (error {:.3g})".format(
            kernel.name, eps, err))
    if sog.n_g > max_nodes:
        raise ConvergenceError("SOG for {} needs {} nodes, more than {}".format(
            kernel.name, sog.n_g, max_nodes))
    return sog


def erfc_sog(t_lo, t_hi, breakpoints=(), width=0.25, n=12):
    r"""Gauss-Legendre discretization of
    $\frac{2}{\sqrt\pi}\int_{t_{lo}}^{t_{hi}} e^{-r^2t^2}dt$ in $\log t$, with
    panels split at `breakpoints` so that the partial sums over
    [b_i, b_j) are accurate as well."""
    u_lo, u_hi = math.log(t_lo), math.log(t_hi)
    edges = [u_lo, u_hi] + [math.log(b) for b in breakpoints if t_lo < b < t_hi]
    edges = np.unique(edges)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        panels = max(1, math.ceil((b - a) / width))
        for i in range(panels):
            x, w = gauss_legendre(n, a + (b - a) * i / panels, a + (b - a) * (i + 1) / panels)
            nodes.append(np.exp(x))
            weights.append(2 / math.sqrt(math.pi) * w * np.exp(x))
    return SogApprox(np.concatenate(nodes), np.concatenate(weights), (0., np.inf))


class ResidualSog(object):
    """Gaussian representation of the residual kernels of a split, used by
    the box code.

    The residual at level l is the sum of the Gaussians with
    t >= `delta(l)` plus `remainder(r)`, a term concentrated at
    r < 1/t_max that is handled by moments.

    Parameters
    ----------
     - kernel
     - sog: SogApprox with all nodes
     - delta: function giving the level threshold
     - remainder: function of r
     - moments: optional closed form of the remainder moments,
       `moments(a, n)` = int_0^a remainder(r) r^(n+d-1) dr
    """

    def __init__(self, kernel, sog, delta, remainder, moments=None):
        self.kernel = kernel
        self.sog = sog
        self.delta = delta
        self.remainder = remainder
        self._moments = moments

    def narrow_threshold(self, level, eps):
        """Gaussians narrower than this are integrated by a Taylor expansion
        of the density at the target."""
        return 2 / (2.0**-level * eps**(1 / 6))

    def level_sog(self, level):
        """The Gaussians of the level-`level` residual."""
        return self.sog.select(self.delta(level))

    def amplification(self, level):
        """Sum of |weights| of the level Gaussians relative to the kernel
        scale; skipping a Gaussian is decided against eps over this."""
        return 1.

    def moments(self, a, n_max=4):
        d = self.kernel.d
        out = {}
        for n in range(0, n_max + 1, 2):
            if self._moments is not None:
                out[n] = self._moments(a, n)
            else:
                # split at the inner end of the SOG validity range
                r0 = min(self.sog.r_range[0], a / 2)
                f = lambda r, n=n: float(self.remainder(r) * r**(n + d - 1))
                out[n] = nintegrate(f, 0, r0, epsrel=1e-10) + nintegrate(f, r0, a, epsrel=1e-10)
        return out


class FittedResidualSog(ResidualSog):
    r"""Residual form for splits whose mollified kernels have no Gaussian
    representation of their own.

    With the kernel's sum-of-Gaussians $C + \sum_i w_i e^{-r^2t_i^2}$, the
    level-l residual is written as the kernel Gaussians with $t_i \ge 1/r_l$
    minus a least-squares Gaussian fit of
    $M_l - C - \sum_{t_i < 1/r_l} w_i e^{-r^2t_i^2}$ on the distances
    $[0, \min(4r_l, 1)\sqrt d]$ reached by near-field leaf pairs. The fit
    nodes stay below `narrow_threshold(l, eps)`, so only kernel Gaussians are
    integrated by Taylor expansion. The remainder $K - K_{sog}$ is handled by
    numerical moments.

    Parameters
    ----------
     - kernel
     - sog: SogApprox of the kernel
     - mollified: function `mollified(level, r)`
     - eps: target precision
     - step: spacing of the fit nodes in log t
    """

    def __init__(self, kernel, sog, mollified, eps, step=0.2):
        super().__init__(kernel, sog, lambda level: 1 / 2.0**-level,
                         lambda r: kernel(r) - sog(r))
        self.mollified = mollified
        self.eps = eps
        self.step = step
        self._fits = {}

    def level_sog(self, level):
        if level not in self._fits:
            self._fits[level] = self._fit(level)
        return self._fits[level][0]

    def amplification(self, level):
        self.level_sog(level)
        return self._fits[level][1]

    def _fit(self, level):
        rl = 2.0**-level
        reach = min(4 * rl, 1.) * math.sqrt(self.kernel.d)
        t_hi = 0.9 * self.narrow_threshold(level, self.eps)
        nodes = np.exp(np.arange(math.log(1 / reach), math.log(t_hi), self.step))
        r = np.linspace(0., reach, 1000)
        mollified = self.mollified(level, r)
        target = mollified - self.sog.select(0., self.delta(level))(r)
        scale = float(np.max(_scale(self.kernel, mollified)))
        A = np.exp(-np.multiply.outer(r**2, nodes**2))
        w = scipy.linalg.lstsq(A, target / scale, cond=1e-3 * self.eps)[0]
        err = float(np.max(np.abs(A @ w - target / scale)))
        logger.debug("Residual fit for %s at level %d: %d Gaussians, error %.3g",
                     self.kernel.name, level, len(nodes), err)
        if err > self.eps:
            warnings.warn("Gaussian fit of the level-{} mollified {} reaches only {:.3g}".format(
                level, self.kernel.name, err))
        keep = self.sog.select(self.delta(level))
        sog = SogApprox(np.concatenate([keep.nodes, nodes]),
                        np.concatenate([keep.weights, -scale * w]), (0., reach))
        return sog, max(1., float(np.sum(np.abs(w))))


def residual_local_integrals(residual_sog, level, eps0, n_max=4):
    r"""Moments $I_n = \int_0^{a} f(r) r^{n+d-1} dr$, n = 0, 2, ..., n_max,
    of the part of the residual kernel not represented by Gaussians, over
    the ball of radius $a = \epsilon_0 r_l$."""
    return residual_sog.moments(eps0 * 2.0**-level, n_max=n_max)


def erfc_remainder_moments(t_top, d):
    r"""Closed form of $\int_0^a \mathrm{erfc}(t r)/r \, r^{n+d-1} dr$."""
    def moments(a, n):
        m = n + d - 2
        return a**(m + 1) * erfc(t_top * a) / (m + 1) \
            + 2 * t_top / (math.sqrt(math.pi) * (m + 1)) * gaussian_moment(t_top, a, m + 1)
    return moments
