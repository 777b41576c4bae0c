"""Precision-dependent parameters of the kernel splits."""

import logging
import math
import warnings
import numpy as np
import scipy.integrate
import scipy.special
from dmk.config import config

logger = logging.getLogger(__name__)

EPS_RANGE = (1e-12, 1e-3)


def check_eps(eps):
    eps = float(eps)
    if not EPS_RANGE[0] * (1 - 1e-9) <= eps <= EPS_RANGE[1] * (1 + 1e-9):
        raise ValueError("precision must be in [{:g}, {:g}], got {:g}".format(
            EPS_RANGE[0], EPS_RANGE[1], eps))
    return eps


def parameter_rows():
    """The stored PSWF parameter rows, loosest precision first."""
    return sorted(config['pswf parameters'], key=lambda row: -row['eps'])


def parameter_row(eps):
    """Row for precision `eps`, snapping up to the next tighter row."""
    eps = check_eps(eps)
    rows = [row for row in parameter_rows() if row['eps'] <= eps * (1 + 1e-9)]
    row = rows[0]
    if not math.isclose(row['eps'], eps, rel_tol=1e-9):
        warnings.warn("Precision {:g} is not tabulated; using the row for {:g}".format(
            eps, row['eps']))
    return dict(row)


def _bin(eps):
    # index into the per-precision lists: eps >= 1e-3, 1e-6, 1e-9, 1e-12
    eps = check_eps(eps)
    for i, bound in enumerate([1e-3, 1e-6, 1e-9]):
        if eps >= bound * (1 - 1e-9):
            return i
    return 3


def leaf_size(kernel, eps):
    """Default leaf capacity n_s of the point code."""
    return config['points']['leaf size'][kernel.leaf_size_key][_bin(eps)]


def box_order(d, eps):
    """Default Legendre order q of the box code."""
    orders = config['boxes']['order']
    if d == 2:
        return orders[0]
    return orders[1] if eps >= 1e-6 * (1 - 1e-9) else orders[2]


def window_margin(eps):
    """Truncation margin b of Gaussian mollifiers, in units of sigma."""
    if eps <= config['split']['window margin threshold']:
        return 6.
    return math.sqrt(math.log(1 / eps)) + 1


def chebyshev_tail(p, omega):
    """Bound on the error of degree p-1 Chebyshev interpolation of
    exp(i omega x) on [-1, 1]."""
    n = np.arange(p, p + 80)
    return 2 * np.sum(np.abs(scipy.special.jv(n[:, None], np.atleast_1d(omega)[None, :])), axis=0)


def chebyshev_order(spectrum, kmax, half_side, d, eps, pmin=4, pmax=80):
    """Smallest order p for which proxy charges and local expansions on a
    box of half side `half_side` resolve a field with radial spectrum
    `spectrum(k)`, k <= kmax, to relative precision eps."""
    k = np.linspace(0, kmax, 600)
    weight = np.abs(spectrum(k)) * k**(d - 1)
    total = scipy.integrate.trapezoid(weight, k)
    for p in range(pmin, pmax + 1):
        # source and target side, d axes each
        err = 2 * d * scipy.integrate.trapezoid(weight * chebyshev_tail(p, k * half_side), k) / total
        if err <= eps / 2:
            return p
    warnings.warn("Chebyshev order capped at {}".format(pmax))
    return pmax


def bandlimit(spectrum, k_max, d, eps, floor=0.):
    """Smallest K such that the part of the radial spectrum beyond K carries
    at most a fraction eps/2 of the total mass."""
    k = np.linspace(0, k_max, 2000)
    weight = np.abs(spectrum(k)) * k**(d - 1)
    cum = np.concatenate([[0], np.cumsum((weight[1:] + weight[:-1]) / 2 * np.diff(k))])
    tail = cum[-1] - cum
    idx = np.flatnonzero(tail <= eps / 2 * cum[-1])[0]
    return max(k[idx], floor)


class SplitParams(object):
    """Parameters of a kernel split at one precision.

    Attributes
    ----------
     - eps: requested precision
     - row: the stored parameter row the precision was snapped to
     - c: PSWF parameter (None for Gaussian and SOG splits)
     - sigma0: level-0 Gaussian width (Gaussian and SOG splits)
     - p: Chebyshev order
     - n_f: Fourier half width per level
     - h: Fourier spacing per level
     - window: dict with the window grid ('h', 'n_f'), its support radius
       and, for truncated-kernel windows, the truncation radius
    """

    def __init__(self, eps, row, c=None, sigma0=None):
        self.eps = eps
        self.row = row
        self.c = c
        self.sigma0 = sigma0
        self.p = None
        self.n_f = {}
        self.h = {}
        self.window = {}

    def sigma(self, level):
        return self.sigma0 * 2.0**-level

    def h0(self):
        return self.h.get(0)

    def as_dict(self):
        return {'eps': self.eps,
                'table row': {k: self.row[k] for k in sorted(self.row)},
                'c': self.c,
                'sigma0': self.sigma0,
                'p': self.p,
                'n_f': {int(l): int(n) for l, n in sorted(self.n_f.items())},
                'N1': {int(l): 2 * int(n) + 1 for l, n in sorted(self.n_f.items())},
                'h_over_pi': {int(l): h / math.pi for l, h in sorted(self.h.items())},
                'window': dict(self.window)}
