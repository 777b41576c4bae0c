r"""Plane-wave expansions on the Fourier grids of a kernel split.

For a box B with center c at level l the outgoing expansion of the charges
$\rho_j$ at $y_j \in B$ is

$\Phi_m = \sum_j e^{-i k_m\cdot(y_j - c)} \rho_j$, $k_m = h_l m$,

and the incoming expansion of a target box T collects
$\Psi_m = \sum_S w_m e^{i k_m\cdot(c_T - c_S)} \Phi_m(S)$ over its
colleagues S, so that
$\mathrm{Re}\sum_m \Psi_m e^{i k_m\cdot(x - c_T)}$ is the difference kernel
potential at x.

Expansions are full complex tensors of shape (2n_f+1,)*d. All operators are
separable; their one-dimensional factors are memoized per level.
"""

from functools import lru_cache
import logging
import numpy as np
from dmk.config import config
from dmk.interp import cheb1d, apply_separated, _outer_sum, _contract

logger = logging.getLogger(__name__)


def grid_side(grid):
    """Side of the boxes a grid is used on (the root box for the window)."""
    return 2.0**-grid.level


class PlaneWaveExpansion(object):
    """Outgoing or incoming plane-wave expansion of one box.

    Parameters
    ----------
     - grid: the `FourierGrid` of the box level
     - center: box center
     - coeffs: complex array of shape (2n_f+1,)*d, zero if omitted
     - kind: 'outgoing' or 'incoming'
    """

    def __init__(self, grid, center, coeffs=None, kind='outgoing'):
        if kind not in ('outgoing', 'incoming'):
            raise ValueError("kind must be 'outgoing' or 'incoming', got {!r}".format(kind))
        self.grid = grid
        self.center = np.asarray(center, dtype=float)
        if coeffs is None:
            coeffs = np.zeros((grid.n1,) * grid.d, dtype=complex)
        elif coeffs.shape != (grid.n1,) * grid.d:
            raise ValueError("Expansion of shape {} does not fit {!r}".format(coeffs.shape, grid))
        self.coeffs = coeffs
        self.kind = kind

    @property
    def level(self):
        return self.grid.level

    def __repr__(self):
        return "PlaneWaveExpansion({}, level={}, center={})".format(
            self.kind, self.level, self.center.tolist())

    def __add__(self, other):
        if other.grid is not self.grid or np.any(other.center != self.center):
            raise ValueError("Cannot add expansions of different boxes")
        return PlaneWaveExpansion(self.grid, self.center, self.coeffs + other.coeffs, self.kind)

    def __mul__(self, a):
        return PlaneWaveExpansion(self.grid, self.center, a * self.coeffs, self.kind)

    __rmul__ = __mul__


def _phases(x, nodes, sign):
    # per-axis factors e^{sign i k x}, shape (n, 2n_f+1)
    return np.exp(sign * 1j * np.multiply.outer(x, nodes))


@lru_cache(maxsize=config['settings']['cache size'])
def _prox2pw_matrix(h, n_f, side, p):
    """(2n_f+1, p) matrix of e^{-i k_m x_j} at the Chebyshev nodes of a box."""
    x = side / 2 * cheb1d(p).nodes
    return _phases(x, h * np.arange(-n_f, n_f + 1), -1).T


@lru_cache(maxsize=config['settings']['cache size'])
def _pw2poly_matrix(h, n_f, side, p):
    """(p, 2n_f+1) matrix taking modes to Chebyshev coefficients on a box."""
    grid = cheb1d(p)
    x = side / 2 * grid.nodes
    return grid.Vinv @ _phases(x, h * np.arange(-n_f, n_f + 1), 1)


@lru_cache(maxsize=config['settings']['cache size'])
def _shift_vector(h, n_f, side, step):
    """e^{i k_m step r_l} along one axis."""
    return np.exp(1j * h * np.arange(-n_f, n_f + 1) * step * side)


def outgoing_from_points(points, charges, center, grid):
    """Outgoing expansion of point charges about `center` (exact)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    charges = np.asarray(charges, dtype=float)
    if len(charges) == 0:
        return PlaneWaveExpansion(grid, center)
    x = points - np.asarray(center)
    factors = [_phases(x[:, a], grid.nodes, -1) for a in range(grid.d)]
    return PlaneWaveExpansion(grid, center, _outer_sum(charges.astype(complex), factors))


def outgoing_from_proxy(proxy, center, grid):
    """Outgoing expansion of proxy charges on the Chebyshev grid of the box
    with the given center at the grid level."""
    mat = _prox2pw_matrix(grid.h, grid.n_f, grid_side(grid), proxy.shape[0])
    return PlaneWaveExpansion(grid, center, apply_separated([mat] * grid.d, proxy))


def translate(outgoing, target_center, out=None):
    """Incoming increment of the box at `target_center` from a colleague's
    outgoing expansion, $w_m e^{i k_m\\cdot(c_T - c_S)}\\Phi_m$.

    The increment is added to `out` if given. Raises `ValueError` if the
    boxes are not colleagues (offset larger than r_l along some axis)."""
    grid = outgoing.grid
    side = grid_side(grid)
    offset = (np.asarray(target_center, dtype=float) - outgoing.center) / side
    steps = np.rint(offset)
    if np.any(np.abs(steps) > 1) or np.any(np.abs(offset - steps) > 1e-9):
        raise ValueError("Boxes at {} and {} are not colleagues at level {}".format(
            outgoing.center.tolist(), list(target_center), grid.level))
    coeffs = grid.weights * outgoing.coeffs
    for a, step in enumerate(steps.astype(int)):
        if step:
            shape = [1] * grid.d
            shape[a] = grid.n1
            coeffs = coeffs * _shift_vector(grid.h, grid.n_f, side, step).reshape(shape)
    if out is None:
        return PlaneWaveExpansion(grid, target_center, coeffs, kind='incoming')
    out.coeffs += coeffs
    return out


def eval_at_points(incoming, points):
    """Real part of the expansion at points of its box."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if len(points) == 0:
        return np.zeros(0)
    grid = incoming.grid
    x = points - incoming.center
    factors = [_phases(x[:, a], grid.nodes, 1) for a in range(grid.d)]
    return _contract(incoming.coeffs, factors).real


def to_local(incoming, p):
    """Chebyshev local expansion of order p (real coefficient tensor of shape
    (p,)*d) of an incoming expansion on its box."""
    grid = incoming.grid
    mat = _pw2poly_matrix(grid.h, grid.n_f, grid_side(grid), p)
    return apply_separated([mat] * grid.d, incoming.coeffs).real
