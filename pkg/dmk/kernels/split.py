r"""Multilevel kernel splits.

A split writes the kernel on the unit box as

$K = W_0 + \sum_{l<L} D_l + R_L$

where $M_l$ is a smooth mollified kernel, $R_l = K - M_l$ the residual
(negligible beyond $r_l = 2^{-l}$), $D_l = M_{l+1} - M_l$ the difference
kernel at level l and $W_0$ the windowed kernel, which agrees with $M_0$ for
$r \le \sqrt d$ and is compactly supported.

The difference and window kernels are represented by trapezoidal rules in
Fourier space (`FourierGrid`), the residual is evaluated directly.
"""

import logging
import math
import numpy as np
import scipy.special
from dmk.classes import NamedInstanceClass
from dmk.config import config
from dmk.kernels.kernel import Kernel
from dmk.kernels.params import (check_eps, parameter_row, window_margin,
                                chebyshev_order, bandlimit, SplitParams)
from dmk.kernels.sog import (build_sog, erfc_sog, ResidualSog, FittedResidualSog,
                             erfc_remainder_moments)
from dmk.math.functions import erfc, erfcinv
from dmk.math.integrate import radial_ft, radial_ift, composite_gauss_legendre
from dmk.math.pswf import pswf_build, pswf_c_for_ratio
from dmk.math.tabulate import cached_tabulate, tabulate
from dmk.util import UnsupportedError

logger = logging.getLogger(__name__)


def level_side(level):
    return 2.0**-level


class FourierGrid(object):
    r"""Trapezoidal rule for a radial Fourier integral on the tensor grid
    $k_m = h m$, $m \in [-n_f, n_f]^d$.

    `weights[m]` is $(h/2\pi)^d \hat F(h|m|)$, so that
    $F(x) \approx \sum_m w_m e^{i k_m \cdot x}$."""

    def __init__(self, level, h, n_f, d, spectrum, kind='difference'):
        self.level = level
        self.h = h
        self.n_f = int(n_f)
        self.d = d
        self.kind = kind
        m = np.arange(-self.n_f, self.n_f + 1)
        m2 = sum(np.meshgrid(*[m**2] * d, indexing='ij'))
        unique, inverse = np.unique(m2, return_inverse=True)
        values = np.asarray(spectrum(h * np.sqrt(unique)), dtype=float)
        self.weights = ((h / (2 * np.pi))**d * values)[inverse].reshape(m2.shape)

    @property
    def nodes(self):
        """1D wave numbers h m."""
        return self.h * np.arange(-self.n_f, self.n_f + 1)

    @property
    def n1(self):
        return 2 * self.n_f + 1

    @property
    def n_modes(self):
        return self.n1**self.d

    def __call__(self, x):
        """Evaluate the represented function at displacements `x` (n, d)."""
        x = np.atleast_2d(x)
        phases = [np.exp(1j * np.multiply.outer(x[:, j], self.nodes)) for j in range(self.d)]
        out = np.empty(len(x))
        letters = 'abc'[:self.d]
        expr = ','.join('n' + a for a in letters) + ',' + letters + '->n'
        out[:] = np.einsum(expr, *phases, self.weights).real
        return out

    def __repr__(self):
        return "FourierGrid({}, level={}, h={:.6g}, n_f={})".format(
            self.kind, self.level, self.h, self.n_f)


class KernelSplit(object):
    """Base class of the level splits of one kernel at one precision.

    Subclasses provide `mollified`, `mollified_at_zero`, `difference_ft`,
    `window_ft` and the level-0 band limits."""

    #: 'truncated' or 'cutoff'
    window_kind = 'cutoff'
    #: column of the stored parameter row that bounds p from below
    table_order = None

    def __init__(self, kernel, eps, L_max):
        self.kernel = kernel
        self.d = kernel.d
        self.eps = check_eps(eps)
        self.L_max = int(L_max)
        if self.L_max < 0:
            raise ValueError("L_max must be non-negative, got {}".format(L_max))
        self._grids = {}
        self._band_tables = {}
        self._window_grid = None

    def __repr__(self):
        return "{}({!r}, eps={:g}, L_max={})".format(
            self.scheme_name, self.kernel, self.eps, self.L_max)

    @property
    def scheme_name(self):
        return type(self).__name__

    @property
    def p(self):
        return self.params.p

    def _finish(self):
        """Set the window and the Chebyshev order once the split's own
        tables exist."""
        self._setup_window()
        self.params.window.update(self.window_info)
        levels = [0]
        if self.kernel.homogeneity is None:
            levels.append(min(6, max(self.L_max - 1, 0)))
        p = 0
        for l in sorted(set(levels)):
            rl = level_side(l)
            p = max(p, chebyshev_order(lambda k, l=l: self.difference_ft(l, k),
                                       self.bandwidth(l), rl / 2, self.d, self.eps))
        p = max(p, chebyshev_order(self.window_ft, self.window_bandwidth, 0.5,
                                   self.d, self.eps))
        if self.table_order:
            p = max(p, int(self.params.row[self.table_order]))
        self.params.p = p
        logger.info("%r: p=%d, window n_f=%d", self, p, self.params.window['n_f'])

    # physical space

    def residual(self, level, r):
        """$R_l(r)$ for r > 0, set to zero for r >= r_l."""
        r = np.asarray(r, dtype=float)
        return np.where(r < level_side(level), self._residual(level, r), 0.)

    def _residual(self, level, r):
        # R_l without the cut at r_l
        with np.errstate(divide='ignore', invalid='ignore'):
            return self.kernel(r) - self.mollified(level, r)

    def mollified(self, level, r):
        raise NotImplementedError

    def mollified_at_zero(self, level):
        raise NotImplementedError

    def difference(self, level, r):
        """$D_l(r) = M_{l+1}(r) - M_l(r)$."""
        return self.mollified(level + 1, r) - self.mollified(level, r)

    def residual_band(self, level):
        """$R_l$ as a function of $r^2$ on $[r_{l+1}^2, r_l^2]$, tabulated.

        The table holds the residual without the cut at r_l; callers mask
        r >= r_l."""
        if level not in self._band_tables:
            lo, hi = level_side(level + 1), level_side(level)
            scale = max(abs(float(self.kernel(lo))), 1.)
            self._band_tables[level] = tabulate(
                lambda s: self._residual(level, np.sqrt(s)), (lo**2, hi**2),
                1e-2 * self.eps * scale)
        return self._band_tables[level]

    def window(self, r):
        """Windowed kernel W_0(r)."""
        r = np.asarray(r, dtype=float)
        K = 1.5 * self.window_bandwidth
        # the transform oscillates on the scale 2 pi/support
        panels = math.ceil(K * self.params.window['support'] / 10)
        return radial_ift(self.window_ft, K, r.ravel(), self.d,
                          breakpoints=np.linspace(0, K, panels + 1)[1:-1]).reshape(r.shape)

    def similarity_factor(self):
        """s with $D_{l+1}(r) = s D_l(2r)$ for homogeneous kernels."""
        alpha = self.kernel.homogeneity
        return None if alpha is None else 2.0**alpha

    # Fourier space

    def difference_ft(self, level, k):
        raise NotImplementedError

    def window_ft(self, k):
        raise NotImplementedError

    def bandwidth(self, level):
        """Band limit of $\\hat D_l$."""
        return self._bandwidth0 / level_side(level)

    def fourier_grid(self, level):
        """Trapezoidal grid of $\\hat D_l$ with spacing $2\\pi/(3 r_l)$."""
        if level not in self._grids:
            h = 2 * np.pi / (3 * level_side(level))
            n_f = max(1, math.ceil(self.bandwidth(level) / h))
            self._grids[level] = FourierGrid(
                level, h, n_f, self.d, lambda k: self.difference_ft(level, k))
            self.params.h[level] = h
            self.params.n_f[level] = n_f
            logger.debug("%r: level %d grid h=%.4g n_f=%d", self, level, h, n_f)
        return self._grids[level]

    def window_grid(self):
        if self._window_grid is None:
            w = self.params.window
            self._window_grid = FourierGrid(0, w['h'], w['n_f'], self.d,
                                            self.window_ft, kind='window')
        return self._window_grid

    def _window_grid_info(self, support):
        # images of the window at 2 pi/h must clear all unit-box offsets
        h = 2 * np.pi / (1 + support)
        return {'kind': self.window_kind, 'support': support, 'h': h,
                'n_f': max(1, math.ceil(self.window_bandwidth / h)),
                'K': self.window_bandwidth}

    # box code

    def residual_sog(self):
        """Gaussian representation of the residuals for the box code: the
        kernel's sum-of-Gaussians with the mollified kernel of each level
        fitted out by Gaussians (`FittedResidualSog`)."""
        eps0 = self.eps**config['boxes']['asymptotic exponent']
        r_range = (eps0 * level_side(self.L_max) / 2, math.sqrt(self.d))
        sog = build_sog(self.kernel, self.eps, r_range)
        return FittedResidualSog(self.kernel, sog, self.mollified, self.eps,
                                 step=config['boxes']['fit step'])


class _CutoffWindow(object):
    r"""Window $W_0 = M_0 S$ with the smooth cutoff
    $S(r) = \frac12\mathrm{erfc}((r - \sqrt d - \Delta/2)/w)$."""

    window_kind = 'cutoff'

    def _setup_window(self):
        width = config['split']['cutoff width']
        self._cutoff_width = width
        self._cutoff_w = width / (2 * erfcinv(2 * self.eps))
        self._window_support = math.sqrt(self.d) + width
        k_max = 2 * max(self.bandwidth(0), 2 * math.sqrt(math.log(1 / self.eps)) / self._cutoff_w)
        self.window_bandwidth = bandlimit(self.window_ft, k_max, self.d, self.eps)
        self.window_info = self._window_grid_info(self._window_support)
        self.window_info['cutoff width'] = width

    def cutoff(self, r):
        return 0.5 * erfc((np.asarray(r) - math.sqrt(self.d) - self._cutoff_width / 2) / self._cutoff_w)

    def window(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r < self._window_support, self.mollified(0, r) * self.cutoff(r), 0.)

    def window_ft(self, k):
        k = np.asarray(k, dtype=float)
        return radial_ft(self.window, self._window_support, k.ravel(), self.d,
                         breakpoints=(1., math.sqrt(self.d))).reshape(k.shape)


class _TruncatedWindow(object):
    r"""Window $\hat W_0 = \chi_0 \hat T_R$ with $T_R$ the kernel truncated at
    R, where $\chi_0$ is the transform of the level-0 mollifying density."""

    window_kind = 'truncated'

    def _setup_window(self):
        margin = self._window_margin()
        self._truncation = math.sqrt(self.d) + margin
        self._window_support = self._truncation + margin
        self.window_info = self._window_grid_info(self._window_support)
        self.window_info.update({'R': self._truncation, 'b': self._margin_b})

    def window_ft(self, k):
        k = np.asarray(k, dtype=float)
        return self.density_ft(0, k) * self.kernel.truncated_fourier(k, self._truncation)


class GaussianPhysical(_TruncatedWindow, KernelSplit):
    r"""Gaussian split of 1/r in 3D: $R_l = \mathrm{erfc}(r/\sigma_l)/r$,
    $\sigma_l = r_l/\mathrm{erfc}^{-1}(\epsilon)$."""

    table_order = 'p gaussian'

    def __init__(self, kernel, eps, L_max):
        super().__init__(kernel, eps, L_max)
        row = parameter_row(self.eps)
        sigma0 = 1 / erfcinv(self.eps)
        self.params = SplitParams(self.eps, row, sigma0=sigma0)
        self._margin_b = window_margin(self.eps)
        self._log = math.log(1 / self.eps)
        k_max = 2 * math.sqrt(self._log) / self.params.sigma(1)
        self._bandwidth0 = bandlimit(lambda k: self.difference_ft(0, k), k_max,
                                     self.d, self.eps)
        self.window_bandwidth = 2 * math.sqrt(self._log) / sigma0
        self._finish()

    def _window_margin(self):
        return self._margin_b * self.params.sigma0

    def delta(self, level):
        return 1 / self.params.sigma(level)

    def _residual(self, level, r):
        with np.errstate(divide='ignore', invalid='ignore'):
            return erfc(r / self.params.sigma(level)) / r

    def mollified(self, level, r):
        r = np.asarray(r, dtype=float)
        s = self.params.sigma(level)
        with np.errstate(divide='ignore', invalid='ignore'):
            out = scipy.special.erf(r / s) / r
        return np.where(r == 0, 2 / (math.sqrt(math.pi) * s), out)

    def mollified_at_zero(self, level):
        return 2 / (math.sqrt(math.pi) * self.params.sigma(level))

    def density_ft(self, level, k):
        return np.exp(-np.asarray(k)**2 * self.params.sigma(level)**2 / 4)

    def difference_ft(self, level, k):
        k = np.asarray(k, dtype=float)
        s0, s1 = self.params.sigma(level), self.params.sigma(level + 1)
        with np.errstate(divide='ignore', invalid='ignore'):
            out = 4 * np.pi / k**2 * np.exp(-k**2 * s1**2 / 4) \
                * -np.expm1(-k**2 * (s0**2 - s1**2) / 4)
        return np.where(k == 0, np.pi * (s0**2 - s1**2), out)

    def residual_sog(self):
        eps0 = self.eps**config['boxes']['asymptotic exponent']
        t_top = erfcinv(self.eps) / (eps0 * level_side(self.L_max))
        breaks = [self.delta(l) for l in range(self.L_max + 2)]
        rsog = ResidualSog(self.kernel, None, self.delta,
                           lambda r: erfc(t_top * r) / r,
                           moments=erfc_remainder_moments(t_top, self.d))
        breaks += [rsog.narrow_threshold(l, self.eps) for l in range(self.L_max + 1)]
        rsog.sog = erfc_sog(self.delta(0), t_top, breakpoints=breaks)
        return rsog


class _PswfSplit(object):
    """Shared PSWF pieces: with x = k r_l / c the level-l density transform is
    psi(x)/psi(0)."""

    def _setup_pswf(self, c):
        self.psi = pswf_build(c)
        self.params.c = c

    def density_ft(self, level, kappa):
        psi = self.psi
        return psi(np.asarray(kappa, dtype=float) * level_side(level) / psi.c) / psi.psi0_at_0

    def _harmonic_difference(self, level, kappa, scale):
        # s (chi_{l+1} - chi_l)/kappa^2 without cancellation
        psi = self.psi
        c = psi.c
        r0, r1 = level_side(level), level_side(level + 1)
        kappa = np.asarray(kappa, dtype=float)
        return scale / (c**2 * psi.psi0_at_0) * (
            r0**2 * psi.deficit_ratio(kappa * r0 / c)
            - r1**2 * psi.deficit_ratio(kappa * r1 / c))


class PswfPhysical(_PswfSplit, KernelSplit):
    r"""PSWF split of $1/r^\alpha$ with
    $M_l(r) = r_l^{-\alpha} g(r/r_l)$, $g(x) = \Phi_\alpha(x)/x^\alpha$.

    For the harmonic case (1/r in 3D) the difference transform is known in
    closed form and the window is the truncated-kernel window; otherwise both
    are obtained by radial quadrature."""

    table_order = 'p'

    def __init__(self, kernel, eps, L_max):
        super().__init__(kernel, eps, L_max)
        if not kernel.alpha < kernel.d:
            raise UnsupportedError("1/r^{:g} is not locally integrable in {}D".format(
                kernel.alpha, kernel.d))
        row = parameter_row(self.eps)
        self.params = SplitParams(self.eps, row)
        self._setup_pswf(row['c'])
        self.alpha = kernel.alpha
        psi = self.psi
        c0 = float(psi.moment_integral(self.alpha, 1.))
        g0 = psi.psi0_at_0 / (self.alpha * c0)
        self._g = cached_tabulate(
            'pswf-moment-ratio-c{:.10g}-a{:.10g}-e{:.0e}'.format(psi.c, self.alpha, self.eps),
            lambda x: psi.moment_ratio(self.alpha, x) / c0, (0., 1.), 1e-3 * self.eps * g0)
        self.harmonic = kernel.harmonic
        if self.harmonic:
            self._bandwidth0 = psi.c / level_side(1)
        else:
            self._bandwidth0 = bandlimit(self._difference0_ft, 4 * psi.c, self.d,
                                         self.eps, floor=psi.c / level_side(1))
        self._finish()

    @property
    def window_kind(self):
        return 'truncated' if self.harmonic else 'cutoff'

    def _setup_window(self):
        if self.harmonic:
            self.window_bandwidth = self.psi.c
            _TruncatedWindow._setup_window(self)
        else:
            _CutoffWindow._setup_window(self)

    _margin_b = 1.

    def _window_margin(self):
        return 1.

    def cutoff(self, r):
        return _CutoffWindow.cutoff(self, r)

    def window(self, r):
        if self.harmonic:
            return KernelSplit.window(self, r)
        return _CutoffWindow.window(self, r)

    def window_ft(self, k):
        if self.harmonic:
            return _TruncatedWindow.window_ft(self, k)
        return _CutoffWindow.window_ft(self, k)

    def mollified(self, level, r):
        r = np.asarray(r, dtype=float)
        rl = level_side(level)
        x = r / rl
        inner = x < 1
        out = np.empty(r.shape)
        out[inner] = rl**-self.alpha * self._g(x[inner])
        out[~inner] = r[~inner]**-self.alpha
        return out

    def mollified_at_zero(self, level):
        return level_side(level)**-self.alpha * float(self._g(0.))

    def _difference0_ft(self, k):
        k = np.asarray(k, dtype=float)
        return radial_ft(lambda r: self.difference(0, r), 1., k.ravel(), self.d,
                         breakpoints=(0.5,)).reshape(k.shape)

    def difference_ft(self, level, k):
        if self.harmonic:
            return self._harmonic_difference(level, k, self.kernel.fourier_scale)
        rl = level_side(level)
        return rl**(self.d - self.alpha) * self._difference0_ft(np.asarray(k) * rl)


class AltPswf(_CutoffWindow, _PswfSplit, KernelSplit):
    r"""Split of $1/r^2$ in 3D with $R_l(r) = \psi(r/r_l)/(\psi(0) r^2)$,
    where c is chosen so that $\psi(1)/\psi(0) = \epsilon$."""

    def __init__(self, kernel, eps, L_max):
        super().__init__(kernel, eps, L_max)
        row = parameter_row(self.eps)
        self.params = SplitParams(self.eps, row)
        self._setup_pswf(pswf_c_for_ratio(row['eps']))
        psi = self.psi
        scale = psi.deficit_ratio(0.) / psi.psi0_at_0
        self._deficit = cached_tabulate(
            'pswf-deficit-c{:.12g}-e{:.0e}'.format(psi.c, self.eps),
            lambda x: psi.deficit_ratio(x) / psi.psi0_at_0, (0., 1.), 1e-3 * self.eps * scale)
        self._ratio = cached_tabulate(
            'pswf-ratio-c{:.12g}-e{:.0e}'.format(psi.c, self.eps),
            lambda x: psi.inside(x) / psi.psi0_at_0, (0., 1.), 1e-3 * self.eps)
        self._bandwidth0 = bandlimit(self._difference0_ft, 4 * psi.c, self.d, self.eps,
                                     floor=psi.c / level_side(1))
        self._finish()

    def _residual(self, level, r):
        x = np.minimum(r / level_side(level), 1.)
        with np.errstate(divide='ignore'):
            return self._ratio(x) / r**2

    def mollified(self, level, r):
        r = np.asarray(r, dtype=float)
        rl = level_side(level)
        x = r / rl
        inner = x < 1
        out = np.empty(r.shape)
        out[inner] = self._deficit(x[inner]) / rl**2
        out[~inner] = r[~inner]**-2.
        return out

    def mollified_at_zero(self, level):
        return float(self._deficit(0.)) / level_side(level)**2

    def _difference0_ft(self, k):
        k = np.asarray(k, dtype=float)
        return radial_ft(lambda r: self.difference(0, r), 1., k.ravel(), self.d,
                         breakpoints=(0.5,)).reshape(k.shape)

    def difference_ft(self, level, k):
        rl = level_side(level)
        return rl * self._difference0_ft(np.asarray(k) * rl)


class PswfFourier(_TruncatedWindow, _PswfSplit, KernelSplit):
    r"""PSWF split in Fourier space for kernels with
    $\hat K = s/(k^2 + \lambda^2)$:
    $\hat M_l = s\,\psi(\kappa r_l/c)/(\psi(0)\kappa^2)$,
    $\kappa = \sqrt{k^2 + \lambda^2}$.

    The physical mollified kernel is recovered from
    $M_l(0) - M_l(r)$, computed by inverse radial quadrature and tabulated
    per level."""

    _margin_b = 1.

    def __init__(self, kernel, eps, L_max):
        super().__init__(kernel, eps, L_max)
        row = parameter_row(self.eps)
        self.params = SplitParams(self.eps, row)
        self._setup_pswf(row['c'])
        self.lam = kernel.lam
        self.scale = kernel.fourier_scale
        self._deficits = {}
        self._bandwidth0 = self.psi.c / level_side(1)
        self.window_bandwidth = self.psi.c
        self._finish()

    def _window_margin(self):
        return 1.

    def kappa(self, k):
        return np.sqrt(np.asarray(k, dtype=float)**2 + self.lam**2)

    def density_ft(self, level, k):
        return _PswfSplit.density_ft(self, level, self.kappa(k))

    def difference_ft(self, level, k):
        return self._harmonic_difference(level, self.kappa(k), self.scale)

    def _deficit_table(self, level):
        # M_l(0) - M_l(r) on [0, r_l]
        if level not in self._deficits:
            rl = level_side(level)
            c = self.psi.c
            kmax2 = (2 * c / rl)**2 - self.lam**2
            kmax = math.sqrt(kmax2) if kmax2 > 0 else 2 * c / rl
            k, w = composite_gauss_legendre(0., kmax, math.ceil(kmax * rl / 10) + 2)
            kappa = self.kappa(k)
            mhat = self.scale * self.density_ft(level, k) / kappa**2
            d = self.d
            norm = 1 / (2 * np.pi**2) if d == 3 else 1 / (2 * np.pi)
            weights = norm * w * mhat * k**(d - 1)

            def deficit(r):
                kr = np.multiply.outer(np.asarray(r, dtype=float), k)
                if d == 3:
                    # series below kr = 1e-3
                    small = kr < 1e-3
                    safe = np.where(small, 1., kr)
                    one_minus = np.where(small, kr**2 / 6, 1 - np.sin(safe) / safe)
                else:
                    small = kr < 1e-3
                    one_minus = np.where(small, kr**2 / 4, 1 - scipy.special.j0(kr))
                return one_minus @ weights

            scale = max(abs(float(self.kernel(rl))), 1.)
            self._deficits[level] = tabulate(deficit, (0., rl), 1e-3 * self.eps * scale)
            logger.debug("%r: tabulated level-%d mollifier", self, level)
        return self._deficits[level]

    def mollified_at_zero(self, level):
        rl = level_side(level)
        return float(self.kernel(rl)) + float(self._deficit_table(level)(rl))

    def mollified(self, level, r):
        r = np.asarray(r, dtype=float)
        rl = level_side(level)
        inner = r < rl
        out = np.empty(r.shape)
        out[inner] = self.mollified_at_zero(level) - self._deficit_table(level)(r[inner])
        out[~inner] = self.kernel(r[~inner])
        return out

    def _residual(self, level, r):
        rl = level_side(level)
        x = np.minimum(r, rl)
        table = self._deficit_table(level)
        with np.errstate(divide='ignore', invalid='ignore'):
            return self.kernel(x) - float(self.kernel(rl)) + table(x) - float(table(rl))


class SogSplit(_CutoffWindow, KernelSplit):
    r"""Split by partitioning a sum-of-Gaussians approximation at the level
    thresholds $\delta_l = \sqrt{\log(1/\epsilon)}/r_l$:
    $M_l$ holds the Gaussians with $t < \delta_l$."""

    def __init__(self, kernel, eps, L_max):
        super().__init__(kernel, eps, L_max)
        row = parameter_row(self.eps)
        self.params = SplitParams(self.eps, row)
        self._log = math.log(1 / self.eps)
        eps0 = self.eps**config['boxes']['asymptotic exponent']
        r_range = (eps0 * level_side(self.L_max) / 2, math.sqrt(self.d))
        self.sog = build_sog(kernel, self.eps, r_range)
        self.params.row = dict(row, sog_nodes=self.sog.n_g)
        self._tables = {}
        logger.info("SOG for %s: %d Gaussians on [%.3g, %.3g]", kernel.name,
                    self.sog.n_g, *r_range)
        self._finish()

    def delta(self, level):
        return math.sqrt(self._log) / level_side(level)

    def bandwidth(self, level):
        k_max = 2 * math.sqrt(self._log) * self.delta(level + 1)
        return bandlimit(lambda k: self.difference_ft(level, k), k_max, self.d, self.eps)

    def _level_sog(self, level):
        return self.sog.select(0., self.delta(level))

    def _table(self, level):
        # M_l as a function of r^2
        if level not in self._tables:
            part = self._level_sog(level)
            hi = math.sqrt(self.d) + config['split']['cutoff width']
            scale = max(abs(part.at_zero()), 1.)
            self._tables[level] = tabulate(lambda s: part(np.sqrt(s)), (0., hi**2),
                                           1e-3 * self.eps * scale)
        return self._tables[level]

    def mollified(self, level, r):
        r = np.asarray(r, dtype=float)
        return self._table(level)(r**2)

    def mollified_at_zero(self, level):
        return float(self.sog.at_zero(self.delta(level)))

    def difference_ft(self, level, k):
        band = self.sog.select(self.delta(level), self.delta(level + 1))
        return band.fourier(np.asarray(k, dtype=float), self.d)

    def residual_sog(self):
        sog = self.sog
        kernel = self.kernel
        return ResidualSog(kernel, sog, self.delta,
                           lambda r: kernel(r) - sog(r))


class SplitScheme(NamedInstanceClass):
    """A splitting scheme, i.e. a named factory of `KernelSplit` objects."""

    def __init__(self, name, split_class):
        super().__init__(name)
        self.split_class = split_class

    def build(self, kernel, eps, L_max):
        return self.split_class(kernel, eps, L_max)


def supported_schemes(kernel):
    return list(config['split']['support'].get(kernel.name, []))


def make_split(kernel, scheme=None, eps=1e-6, L_max=10):
    """Build the split of `kernel` (a `Kernel` or a registered name) with
    `scheme` (default: the first supported scheme) at precision `eps`, for
    trees with levels up to `L_max`."""
    if isinstance(kernel, str):
        kernel = Kernel[kernel]
    schemes = supported_schemes(kernel)
    if not schemes:
        raise UnsupportedError("No splitting scheme for kernel {}".format(kernel.name))
    scheme = scheme or schemes[0]
    if scheme not in schemes:
        raise UnsupportedError("Scheme {} is not available for {}; use one of {}".format(
            scheme, kernel.name, ', '.join(schemes)))
    if kernel.family == 'Power' and not kernel.alpha < kernel.d:
        raise UnsupportedError("1/r^{:g} is not locally integrable in {}D".format(
            kernel.alpha, kernel.d))
    return SplitScheme[scheme].build(kernel, eps, L_max)


_s = SplitScheme('GaussianPhysical', GaussianPhysical)
_s.set_description("Gaussian mollifiers in physical space")
_s = SplitScheme('PswfPhysical', PswfPhysical)
_s.set_description("PSWF mollifiers in physical space")
_s = SplitScheme('AltPswf', AltPswf)
_s.set_description(r"Residual $\psi(r/r_l)/r^2$ for $1/r^2$")
_s = SplitScheme('PswfFourier', PswfFourier)
_s.set_description("PSWF mollifiers in Fourier space")
_s = SplitScheme('SogSplit', SogSplit)
_s.set_description("Partitioned sum-of-Gaussians approximation")
del _s
