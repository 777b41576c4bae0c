r"""Volume potentials of densities on the unit box,

$u(x) = \int_{B_0} K(|x - y|) \rho(y) dy$,

for a density given by tensor Legendre polynomials on the leaves of a
`build_density_tree` tree. Potentials are returned on the tensor
Gauss-Legendre grid of every leaf.

The far field uses the same window, plane-wave and local-expansion pass as
the point code, with proxy charges from Gauss-Legendre quadrature of the
leaf densities. The residual kernel is written as a sum of Gaussians plus a
remainder concentrated near r = 0: Gaussians of moderate width are
integrated against the Legendre polynomials of each source leaf with
separated one-dimensional matrices, narrow ones through a Taylor expansion
of the density at the target, and the remainder through its radial moments
over a ball of radius $\epsilon^{1/8} r_l$. Densities are assumed to vanish
near the boundary of the unit box.
"""

from functools import lru_cache
import logging
import math
import time
import numpy as np
from numpy.polynomial import legendre
from dmk.config import config
from dmk.interp import anterpolate_points, merge_children, eval_local, legendre1d, \
    legendre_coeffs_to_values, apply_separated
from dmk.kernels import Kernel, make_split
from dmk.kernels.params import check_eps
from dmk.kernels.sog import residual_local_integrals
from dmk.math.integrate import composite_gauss_legendre
from dmk.points import far_field_pass
from dmk.tree import DensityPatch

logger = logging.getLogger(__name__)

__all__ = ['DensityPatch', 'VolumeResult', 'proxy_from_patch', 'local_sog_pass',
           'local_asymptotic', 'run_box_dmk']


class VolumeResult(object):
    """Potential on the leaf grids.

    Attributes
    ----------
     - values: dict mapping leaf box ids to arrays of shape (q,)*d, laid out
       like `DensityPatch.values`
     - timings: seconds per phase
     - counters
    """

    def __init__(self, values, patches, timings=None, counters=None):
        self.values = values
        self.patches = patches
        self.timings = timings or {}
        self.counters = counters or {}

    def nodes(self, b):
        return self.patches[b].nodes()

    def flat(self):
        """All grid nodes and values, leaves in increasing id order."""
        leaves = sorted(self.values)
        if not leaves:
            return np.zeros((0, 0)), np.zeros(0)
        return (np.concatenate([self.nodes(b) for b in leaves]),
                np.concatenate([self.values[b].ravel() for b in leaves]))


def proxy_from_patch(patch, p):
    """Proxy charges on the order-p Chebyshev grid of the leaf reproducing the
    far field of the patch density, from its Gauss-Legendre quadrature."""
    if patch.q > p:
        raise ValueError("Legendre order q={} exceeds the proxy order p={}".format(patch.q, p))
    d = patch.coeffs.ndim
    w = legendre1d(patch.q).weights * patch.side / 2
    weights = w
    for _ in range(d - 1):
        weights = np.multiply.outer(weights, w)
    charges = (weights * patch.values).ravel()
    return anterpolate_points(patch.nodes(), charges, patch.center, patch.side, p)


@lru_cache(maxsize=config['settings']['cache size'])
def _gaussian_matrix(t, side_s, side_t, offset, q):
    """(q, q) matrix taking Legendre coefficients on a source interval of
    length side_s to the integrals against e^{-(x-y)^2 t^2} at the
    Gauss-Legendre nodes x of a target interval whose center lies at
    `offset` from the source center."""
    x = offset + side_t / 2 * legendre1d(q).nodes
    panels = max(1, math.ceil(side_s * t / 4))
    y, w = composite_gauss_legendre(-side_s / 2, side_s / 2, panels, n=q + 24)
    vander = legendre.legvander(2 * y / side_s, q - 1)
    return (np.exp(-np.subtract.outer(x, y)**2 * t**2) * w) @ vander


def _taylor(patch):
    """Density, Laplacian and bilaplacian at the grid nodes of a patch."""
    return (patch.values, legendre_coeffs_to_values(patch.laplacian),
            legendre_coeffs_to_values(patch.bilaplacian))


def _narrow_cut(residual_sog, level, eps):
    # neighbours are at most one level finer
    return residual_sog.narrow_threshold(level + 1, eps)


def _residual_sources(tree, t):
    """Source leaves whose residual reaches the target leaf t, i.e. with t
    inside the block of their same-level colleagues."""
    leaves = tree.leaves()
    gap = np.abs(tree.centers[leaves] - tree.centers[t]) \
        - (tree.sides[leaves, None] + tree.sides[t]) / 2
    near = np.all(gap < tree.sides[leaves, None] * (1 - 1e-12), axis=1)
    return leaves[near]


def local_sog_pass(tree, patches, residual_sog, eps):
    """Gaussian part of the residual interactions on every leaf grid.

    For a target leaf T the Gaussians with t >= the narrow cut of T are
    integrated over all space with the Taylor expansion
    $(\\pi/t^2)^{d/2}(\\rho + \\Delta\\rho/(4t^2) + \\Delta^2\\rho/(32t^4))$;
    the others, the rest of each source level's residual Gaussians, with
    separated Gaussian convolution matrices."""
    sog = residual_sog.sog
    d = tree.d
    log_eps = math.log(1 / eps) + 5
    out = {}
    for t in patches:
        patch_t = patches[t]
        q = patch_t.q
        level_t = tree.levels[t]
        cut = _narrow_cut(residual_sog, level_t, eps)
        narrow = sog.select(cut)
        u = np.zeros((q,) * d)
        if narrow.n_g:
            rho, lap, bilap = _taylor(patch_t)
            a = np.pi / narrow.nodes**2
            u += np.sum(narrow.weights * a**(d / 2)) * rho
            u += np.sum(narrow.weights * a**(d / 2) / (4 * narrow.nodes**2)) * lap
            u += np.sum(narrow.weights * a**(d / 2) / (32 * narrow.nodes**4)) * bilap
        for s in _residual_sources(tree, t):
            patch_s = patches[s]
            level_s = tree.levels[s]
            mid = residual_sog.level_sog(level_s).select(0., cut)
            skip = log_eps + math.log(residual_sog.amplification(level_s))
            offset = tree.centers[t] - tree.centers[s]
            gap = np.maximum(np.abs(offset) - (patch_s.side + patch_t.side) / 2, 0.)
            gap2 = float(np.sum(gap**2))
            for ti, wi in zip(mid.nodes, mid.weights):
                if gap2 * ti**2 > skip:
                    continue
                mats = [_gaussian_matrix(float(ti), float(patch_s.side), float(patch_t.side),
                                         float(offset[a]), q) for a in range(d)]
                u += wi * apply_separated(mats, patch_s.coeffs)
        out[t] = u
    return out


def local_asymptotic(patch, moments):
    r"""Integral of the residual remainder f over the ball |x - y| < a with
    the fourth order Taylor expansion of the density at x,
    $|S^{d-1}|(\rho I_0 + \Delta\rho I_2/(2d) + \Delta^2\rho I_4/(8d(d+2)))$,
    where `moments` maps n to $I_n = \int_0^a f(r) r^{n+d-1} dr$."""
    d = patch.coeffs.ndim
    sphere = 2 * np.pi if d == 2 else 4 * np.pi
    rho, lap, bilap = _taylor(patch)
    return sphere * (moments[0] * rho + moments[2] * lap / (2 * d)
                     + moments[4] * bilap / (8 * d * (d + 2)))


def run_box_dmk(tree, patches, kernel='Laplace3D', scheme=None, eps=1e-6):
    """Volume potential of the patch densities on the leaf grids.

    Raises `ValueError` if the Legendre order exceeds the Chebyshev order of
    the split."""
    t_start = time.perf_counter()
    kernel = Kernel[kernel] if isinstance(kernel, str) else kernel
    if kernel.d != tree.d:
        raise ValueError("Kernel {} is {}D, the tree {}D".format(kernel.name, kernel.d, tree.d))
    eps = check_eps(eps)
    split = make_split(kernel, scheme, eps, tree.L_max)
    residual_sog = split.residual_sog()
    q = next(iter(patches.values())).q
    if q > split.p:
        raise ValueError("Legendre order q={} exceeds the Chebyshev order p={}; "
                         "use q <= p".format(q, split.p))
    t0 = time.perf_counter()
    proxies = {}
    for b in reversed(range(tree.n_boxes)):
        if tree.f_leaf[b]:
            proxies[b] = proxy_from_patch(patches[b], split.p)
        else:
            proxies[b] = merge_children([proxies[c] for c in tree.children[b]], split.p)
    values = {b: np.zeros((q,) * tree.d) for b in patches}

    def evaluate(b, expansion):
        patch = patches[b]
        u = eval_local(expansion, patch.nodes(), patch.center, patch.side)
        values[b] += u.reshape((q,) * tree.d)

    far_field_pass(tree, split, proxies, lambda b: True, evaluate)
    t1 = time.perf_counter()
    for b, u in local_sog_pass(tree, patches, residual_sog, eps).items():
        values[b] += u
    eps0 = eps**config['boxes']['asymptotic exponent']
    moments = {}
    for b, patch in patches.items():
        level = tree.levels[b]
        if level not in moments:
            moments[level] = residual_local_integrals(residual_sog, level, eps0)
        values[b] += local_asymptotic(patch, moments[level])
    t2 = time.perf_counter()
    timings = {'t_tree': 0., 't_split': t0 - t_start, 't_fourier': t1 - t0,
               't_direct': t2 - t1, 't_total': t2 - t_start}
    counters = {'leaves': len(patches), 'levels': int(tree.L_max + 1), 'q': q,
                'p': int(split.p), 'sog_nodes': int(residual_sog.sog.n_g)}
    logger.info("Volume potential on %d leaves, q=%d, p=%d: %.3gs", len(patches), q,
                split.p, timings['t_total'])
    return VolumeResult(values, patches, timings, counters)
