"""Tensor-product Chebyshev and Legendre machinery.

Proxy charges and local expansions are real arrays of shape (p,)*d. Axis a
of such an array belongs to coordinate a; the node ordering along each axis
is that of the one-dimensional grid. Child boxes are numbered by the bits of
their index: bit a set means the child lies on the positive side of axis a.
"""

from functools import lru_cache
import string
import numpy as np
from numpy.polynomial import chebyshev, legendre
from dmk.config import config


class TensorGrid1D(object):
    """One-dimensional interpolation grid on [-1, 1].

    Subclasses provide `nodes`, `vander(x)` (values of the first n basis
    polynomials at x) and `Vinv` (the map from values at the nodes to
    coefficients)."""

    def __init__(self, n):
        self.n = n

    @property
    def V(self):
        return self.vander(self.nodes)

    def interpolation_matrix(self, x):
        """Matrix mapping nodal values to interpolated values at x."""
        return self.vander(x) @ self.Vinv

    def shifted_vander(self, s):
        """Basis values at the nodes of child `s` (s = -1 or +1), in parent
        coordinates."""
        return self.vander((self.nodes + s) / 2)


class Cheb1D(TensorGrid1D):
    """Chebyshev nodes of the first kind (roots of T_p)."""

    def __init__(self, p):
        super().__init__(p)
        self.p = p
        self.nodes = np.cos(np.pi * (2 * np.arange(p) + 1) / (2 * p))
        self.Vinv = np.linalg.inv(self.V)

    def vander(self, x):
        return chebyshev.chebvander(x, self.p - 1)


class Legendre1D(TensorGrid1D):
    """Gauss-Legendre nodes and weights of order q."""

    def __init__(self, q):
        super().__init__(q)
        self.q = q
        self.nodes, self.weights = legendre.leggauss(q)
        j = np.arange(q)
        # discrete orthogonality: c_j = (2j+1)/2 sum_i w_i P_j(x_i) f_i
        self.Vinv = (2 * j[:, None] + 1) / 2 * (self.vander(self.nodes) * self.weights[:, None]).T

    def vander(self, x):
        return legendre.legvander(x, self.q - 1)


@lru_cache(maxsize=config['settings']['cache size'])
def cheb1d(p):
    return Cheb1D(p)


@lru_cache(maxsize=config['settings']['cache size'])
def legendre1d(q):
    return Legendre1D(q)


def child_signs(d):
    """Array of shape (2^d, d) with the side (-1 or +1) of each child per axis."""
    idx = np.arange(2**d)
    return np.array([[1 if (i >> a) & 1 else -1 for a in range(d)] for i in idx])


def apply_separated(matrices, tensor):
    """Apply one matrix per axis to a tensor (staged, O(n^(d+1)))."""
    for axis, m in enumerate(matrices):
        tensor = np.moveaxis(np.tensordot(m, tensor, axes=([1], [axis])), 0, axis)
    return tensor


def _outer_sum(weights, factors):
    # sum_j weights_j prod_a factors[a][j, i_a]
    d = len(factors)
    letters = string.ascii_lowercase[:d]
    subs = 'z,' + ','.join('z' + l for l in letters) + '->' + letters
    return np.einsum(subs, weights, *factors, optimize=True)


def _contract(tensor, factors):
    # sum_i tensor_i prod_a factors[a][j, i_a]
    d = len(factors)
    letters = string.ascii_lowercase[:d]
    subs = letters + ',' + ','.join('z' + l for l in letters) + '->z'
    return np.einsum(subs, tensor, *factors, optimize=True)


def _scaled(points, center, side):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    return 2 * (points - np.asarray(center)) / side


def tensor_nodes(grid, center, side, d):
    """Coordinates of the tensor grid of a box, shape (n^d, d), in C order."""
    x = np.asarray(center)[:, None] + side / 2 * grid.nodes[None, :]
    mesh = np.meshgrid(*x, indexing='ij')
    return np.stack([m.ravel() for m in mesh], axis=-1)


def anterpolate_points(points, charges, center, side, p):
    """Proxy charges on the Chebyshev grid of a box reproducing the far
    field of point charges."""
    x = _scaled(points, center, side)
    grid = cheb1d(p)
    factors = [grid.interpolation_matrix(x[:, a]) for a in range(x.shape[1])]
    return _outer_sum(np.asarray(charges, dtype=float), factors)


@lru_cache(maxsize=config['settings']['cache size'])
def _c2p_matrices(p):
    grid = cheb1d(p)
    return {s: (grid.shifted_vander(s) @ grid.Vinv).T for s in (-1, 1)}


@lru_cache(maxsize=config['settings']['cache size'])
def _p2c_matrices(p):
    grid = cheb1d(p)
    return {s: grid.Vinv @ grid.shifted_vander(s) for s in (-1, 1)}


def merge_children(child_proxies, p):
    """Parent proxy charges from the proxy charges of its children.

    `child_proxies` is a sequence of length 2^d indexed by child number;
    missing children are None."""
    mats = _c2p_matrices(p)
    d = int(np.log2(len(child_proxies)))
    out = np.zeros((p,) * d)
    for signs, proxy in zip(child_signs(d), child_proxies):
        if proxy is not None:
            out += apply_separated([mats[s] for s in signs], proxy)
    return out


def split_to_child(parent, which_child):
    """Chebyshev coefficients of the parent polynomial restricted to a child."""
    p = parent.shape[0]
    mats = _p2c_matrices(p)
    signs = child_signs(parent.ndim)[which_child]
    return apply_separated([mats[s] for s in signs], parent)


def eval_local(expansion, points, center, side):
    """Evaluate a Chebyshev coefficient tensor at points in its box."""
    x = _scaled(points, center, side)
    p = expansion.shape[0]
    factors = [chebyshev.chebvander(x[:, a], p - 1) for a in range(x.shape[1])]
    return _contract(expansion, factors)


def values_to_coeffs(values, p=None):
    """Chebyshev coefficients from values on the tensor Chebyshev grid."""
    p = p or values.shape[0]
    vinv = cheb1d(p).Vinv
    return apply_separated([vinv] * values.ndim, values)


def legendre_values_to_coeffs(values, q=None):
    """Legendre coefficients from values on the tensor Gauss-Legendre grid."""
    q = q or values.shape[0]
    vinv = legendre1d(q).Vinv
    return apply_separated([vinv] * values.ndim, values)


def legendre_coeffs_to_values(coeffs):
    q = coeffs.shape[0]
    v = legendre1d(q).V
    return apply_separated([v] * coeffs.ndim, coeffs)


def legendre_eval(coeffs, points, center, side):
    """Evaluate a Legendre coefficient tensor at points in its box."""
    x = _scaled(points, center, side)
    q = coeffs.shape[0]
    factors = [legendre.legvander(x[:, a], q - 1) for a in range(x.shape[1])]
    return _contract(coeffs, factors)


def legendre_laplacian(coeffs, side):
    """Legendre coefficients of the Laplacian on a box of the given side."""
    q = coeffs.shape[0]
    out = np.zeros_like(coeffs)
    for axis in range(coeffs.ndim):
        der = legendre.legder(coeffs, m=2, scl=2 / side, axis=axis)
        pad = [(0, 0)] * coeffs.ndim
        pad[axis] = (0, q - der.shape[axis])
        out += np.pad(der, pad)
    return out
