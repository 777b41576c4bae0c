"""Piecewise Chebyshev tables of scalar functions.

Kernel pieces that are expensive to evaluate (series, quadratures) are
tabulated once at setup and evaluated from the tables afterwards.
"""

import logging
import os
import re
import numpy as np
from numpy.polynomial import chebyshev
from dmk.config import config
from dmk.util import RefinementLimitError, table_cache_dir

logger = logging.getLogger(__name__)

# rounding floor of the acceptance test, in units of max|f|
ROUNDOFF_ULPS = 16


class PiecewiseCheb1D(object):
    """Piecewise Chebyshev interpolant on contiguous intervals.

    Parameters
    ----------
     - breakpoints: sorted array of n+1 interval boundaries
     - coeff_blocks: array of shape (n, order) with the Chebyshev
       coefficients on each interval (mapped to [-1, 1])
    """

    def __init__(self, breakpoints, coeff_blocks):
        self.breakpoints = np.asarray(breakpoints, dtype=float)
        self.coeff_blocks = np.asarray(coeff_blocks, dtype=float)
        if len(self.breakpoints) != len(self.coeff_blocks) + 1:
            raise ValueError("Need one more breakpoint than coefficient blocks")
        if np.any(np.diff(self.breakpoints) <= 0):
            raise ValueError("Breakpoints must be strictly increasing")

    @property
    def order(self):
        return self.coeff_blocks.shape[1]

    @property
    def domain(self):
        return self.breakpoints[0], self.breakpoints[-1]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        bp = self.breakpoints
        idx = np.clip(np.searchsorted(bp, flat, side='right') - 1,
                      0, len(self.coeff_blocks) - 1)
        a, b = bp[idx], bp[idx + 1]
        s = (2 * flat - a - b) / (b - a)
        values = chebyshev.chebval(s, self.coeff_blocks[idx].T, tensor=False)
        return values.reshape(x.shape)


def _fit(f, a, b, order):
    coeffs = chebyshev.chebinterpolate(
        lambda s: f((b - a) / 2 * s + (a + b) / 2), order - 1)
    # check points halfway between the interpolation nodes
    s = np.cos(np.pi * np.arange(order + 1) / order)
    x = (b - a) / 2 * s + (a + b) / 2
    fx = f(x)
    err = np.max(np.abs(chebyshev.chebval(s, coeffs) - fx))
    return coeffs, err, np.max(np.abs(fx))


def tabulate(f, domain, tol, order=None, max_depth=None):
    """Build a `PiecewiseCheb1D` approximating the vectorized function `f`
    on `domain` with absolute accuracy `tol`, by adaptive bisection.

    Tolerances below the rounding level of the function values are raised
    to `ROUNDOFF_ULPS` units in the last place of the largest sampled |f|."""
    order = order or config['tabulate']['order']
    max_depth = max_depth or config['tabulate']['max depth']
    a, b = map(float, domain)
    if not b > a:
        raise ValueError("Empty tabulation domain [{}, {}]".format(a, b))
    scale = 0.
    pieces = []
    stack = [(a, b, 0)]
    while stack:
        lo, hi, depth = stack.pop()
        coeffs, err, fmax = _fit(f, lo, hi, order)
        scale = max(scale, fmax)
        if err <= max(tol / 2, ROUNDOFF_ULPS * np.finfo(float).eps * scale):
            pieces.append((lo, coeffs))
            continue
        if depth >= max_depth:
            raise RefinementLimitError(
                "Tabulation on [{}, {}] did not reach tolerance {} "
                "(error {:.3g} on [{}, {}])".format(a, b, tol, err, lo, hi))
        mid = (lo + hi) / 2
        # push the right half first so that pieces come out sorted
        stack.append((mid, hi, depth + 1))
        stack.append((lo, mid, depth + 1))
    breakpoints = np.array([p[0] for p in pieces] + [b])
    table = PiecewiseCheb1D(breakpoints, np.array([p[1] for p in pieces]))
    logger.debug("Tabulated on [%g, %g] with %d intervals", a, b, len(pieces))
    return table


def cached_tabulate(key, f, domain, tol, **kwargs):
    """Like `tabulate`, but stores the table under `key` in the directory
    named by `DMK_TABLE_CACHE` and reuses it on later calls."""
    path = table_cache_dir()
    if path is None:
        return tabulate(f, domain, tol, **kwargs)
    fname = os.path.join(path, re.sub(r'[^A-Za-z0-9_.+-]', '_', key) + '.npz')
    if os.path.exists(fname):
        data = np.load(fname)
        return PiecewiseCheb1D(data['breakpoints'], data['coeff_blocks'])
    table = tabulate(f, domain, tol, **kwargs)
    np.savez(fname, breakpoints=table.breakpoints, coeff_blocks=table.coeff_blocks)
    return table
