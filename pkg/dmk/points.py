r"""Kernel sums over point sources

$u_i = \sum_j K(|x_i - y_j|) \rho_j$, excluding coincident pairs.

`run_dmk` is the linear-cost algorithm: proxy charges are merged upward,
every non-leaf box with sources emits a plane-wave expansion of its level's
difference kernel to its colleagues, the incoming expansions become
Chebyshev local expansions that are passed down to the leaves, and the
residual kernel of each source leaf is summed directly.
`run_multilevel_ewald` skips the proxy and local expansions and works with
the points at every level. `direct_sum` is the brute-force oracle.
"""

from functools import lru_cache
import logging
import time
import numpy as np
from dmk.config import config
from dmk.kernels import Kernel, make_split
from dmk.kernels.params import check_eps, leaf_size
from dmk.interp import anterpolate_points, merge_children, split_to_child, eval_local
from dmk import planewave
from dmk.tree import build_point_tree, extra_refine
from dmk.util import SizeGuardError, check_unit_box

logger = logging.getLogger(__name__)

#: largest number of pairs the oracle will sum
MAX_DIRECT_PAIRS = 10**9


class PointProblem(object):
    """A point kernel-summation problem.

    Parameters
    ----------
     - sources: array of shape (N, d) in the unit box [-1/2, 1/2]^d
     - charges: array of shape (N,)
     - targets: array of shape (M, d), defaults to the sources
     - kernel: a `Kernel` or the name of a registered one
     - scheme: splitting scheme name, defaults to the kernel's first scheme
     - eps: requested precision
     - n_s: leaf capacity, defaults to the configured value
    """

    def __init__(self, sources, charges, targets=None, kernel='Laplace3D',
                 scheme=None, eps=1e-6, n_s=None):
        self.kernel = Kernel[kernel] if isinstance(kernel, str) else kernel
        d = self.kernel.d
        self.sources = check_unit_box(sources, d, 'sources')
        self.targets = self.sources if targets is None else check_unit_box(targets, d, 'targets')
        self.charges = np.asarray(charges, dtype=float).ravel()
        if len(self.charges) != len(self.sources):
            raise ValueError("Got {} charges for {} sources".format(
                len(self.charges), len(self.sources)))
        if not np.all(np.isfinite(self.charges)):
            raise ValueError("charges must be finite")
        if len(self.sources) == 0:
            raise ValueError("Need at least one source")
        self.scheme = scheme
        self.eps = check_eps(eps)
        self.n_s = int(n_s) if n_s is not None else leaf_size(self.kernel, self.eps)

    @property
    def d(self):
        return self.kernel.d

    @property
    def n_sources(self):
        return len(self.sources)

    @property
    def n_targets(self):
        return len(self.targets)

    def __repr__(self):
        return "PointProblem({!r}, N={}, M={}, eps={:g})".format(
            self.kernel, self.n_sources, self.n_targets, self.eps)


class PotentialResult(object):
    """Potentials at the targets (original order) with timings in seconds
    and counters."""

    def __init__(self, u, timings=None, counters=None):
        self.u = u
        self.timings = timings or {}
        self.counters = counters or {}

    def __repr__(self):
        return "PotentialResult(M={}, t_total={:.3g}s)".format(
            len(self.u), self.timings.get('t_total', float('nan')))


@lru_cache(maxsize=config['settings']['cache size'])
def _split(kernel, scheme, eps, L_max):
    return make_split(kernel, scheme, eps, L_max)


def _emitting(tree, b):
    return tree.has_children(b) and tree.n_sources(b) > 0 and not tree.is_extra[b]


def _pairs(x, y):
    """Squared distances and the coincidence mask of two point sets."""
    diff = x[:, None, :] - y[None, :, :]
    return np.sum(diff**2, axis=-1), np.all(diff == 0, axis=-1)


def _residual_targets(tree, b):
    """Boxes whose targets may lie within r_l of the source leaf b: its
    same-level colleagues (with all their descendants) and its coarser
    neighbor leaves."""
    coll = [c for c in tree.colleagues(b) if not tree.is_extra[c]]
    return list(coll) + list(tree.coarse_neighbors(b))


def reference_residual_pass(tree, split, charges):
    """Residual interactions by a plain scan: the residual of the source
    leaf's level against all targets of `_residual_targets`."""
    rho = np.asarray(charges, dtype=float)[tree.src_perm]
    u = np.zeros(len(tree.trg_perm))
    for b in tree.leaves():
        if tree.n_sources(b) == 0:
            continue
        level = tree.levels[b]
        y = tree.sources[tree.source_slice(b)]
        rb = rho[tree.source_slice(b)]
        for t in _residual_targets(tree, b):
            sl = tree.target_slice(t)
            if sl.stop == sl.start:
                continue
            r2, same = _pairs(tree.targets[sl], y)
            r = np.sqrt(np.where(same, 1., r2))
            vals = np.where(same, 0., split.residual(level, r))
            u[tree.trg_perm[sl]] += vals @ rb
    return u


def _leaf_blocks(tree, b):
    """Finest boxes below b: the extra-refined children of its leaves."""
    out = []
    stack = [b]
    while stack:
        c = stack.pop()
        if tree.f_leaf[c] or tree.is_extra[c]:
            out.extend(tree.children[c] if tree.has_children(c) else [c])
        else:
            stack.extend(tree.children[c])
    return out


def _box_gap2(tree, a, b):
    gap = np.abs(tree.centers[a] - tree.centers[b]) - (tree.sides[a] + tree.sides[b]) / 2
    return float(np.sum(np.maximum(gap, 0.)**2))


def direct_residual_pass(tree, split, charges):
    """Residual interactions on an extra-refined tree.

    Source and target blocks are the children of the refined leaves; block
    pairs farther apart than r_l are skipped, and point pairs with
    r > r_{l+1} are evaluated from the smooth band table in r^2 of the
    residual. Coincident pairs contribute nothing."""
    if not np.any(tree.is_extra):
        raise ValueError("direct_residual_pass needs a tree from extra_refine")
    rho = np.asarray(charges, dtype=float)[tree.src_perm]
    u = np.zeros(len(tree.trg_perm))
    for b in tree.leaves():
        if tree.n_sources(b) == 0:
            continue
        level = tree.levels[b]
        rl2, rn2 = 4.0**-level, 4.0**-(level + 1)
        band = split.residual_band(level)
        blocks = [blk for t in _residual_targets(tree, b) for blk in _leaf_blocks(tree, t)
                  if tree.n_targets(blk) > 0]
        for s in tree.children[b]:
            ssl = tree.source_slice(s)
            if ssl.stop == ssl.start:
                continue
            y, rs = tree.sources[ssl], rho[ssl]
            for t in blocks:
                if _box_gap2(tree, s, t) >= rl2:
                    continue
                tsl = tree.target_slice(t)
                r2, same = _pairs(tree.targets[tsl], y)
                vals = np.zeros(r2.shape)
                inside = r2 < rl2
                smooth = inside & (r2 >= rn2)
                vals[smooth] = band(r2[smooth])
                near = inside & ~smooth & ~same
                vals[near] = split.residual(level, np.sqrt(r2[near]))
                u[tree.trg_perm[tsl]] += vals @ rs
    return u


def self_correction(tree, split, charges):
    """-M_l(0) rho_j for every target coinciding with a source y_j in a leaf
    at level l."""
    rho = np.asarray(charges, dtype=float)[tree.src_perm]
    u = np.zeros(len(tree.trg_perm))
    for b in tree.leaves():
        ssl, tsl = tree.source_slice(b), tree.target_slice(b)
        if ssl.stop == ssl.start or tsl.stop == tsl.start:
            continue
        _, same = _pairs(tree.targets[tsl], tree.sources[ssl])
        if np.any(same):
            u[tree.trg_perm[tsl]] -= split.mollified_at_zero(tree.levels[b]) * (same @ rho[ssl])
    return u


def _upward(tree, rho, p):
    """Proxy charges of every box holding sources."""
    proxies = {}
    for b in reversed(range(tree.n_boxes)):
        if tree.n_sources(b) == 0 or tree.is_extra[b]:
            continue
        if tree.f_leaf[b]:
            sl = tree.source_slice(b)
            proxies[b] = anterpolate_points(tree.sources[sl], rho[sl], tree.centers[b],
                                            tree.sides[b], p)
        else:
            proxies[b] = merge_children([proxies.get(c) for c in tree.children[b]], p)
    return proxies


def far_field_pass(tree, split, proxies, receives, evaluate):
    """Window, plane-wave and local-expansion pass.

    Every non-leaf box with proxy charges emits to its colleagues; boxes for
    which `receives(b)` holds collect incoming expansions and local
    expansions, and `evaluate(b, expansion)` is called on each such leaf."""
    p = split.p
    root = 0
    grid = split.window_grid()
    outgoing = planewave.outgoing_from_proxy(proxies[root], tree.centers[root], grid)
    local = {root: planewave.to_local(planewave.translate(outgoing, tree.centers[root]), p)}
    for level in range(tree.L_max + 1):
        boxes = tree.boxes_at_level(level)
        if level < tree.L_max:
            grid = split.fourier_grid(level)
            outgoing = {b: planewave.outgoing_from_proxy(proxies[b], tree.centers[b], grid)
                        for b in boxes if tree.has_children(b) and b in proxies}
            for t in boxes:
                sources = [s for s in tree.colleagues(t) if s in outgoing]
                if not sources or not receives(t):
                    continue
                incoming = planewave.PlaneWaveExpansion(grid, tree.centers[t], kind='incoming')
                for s in sources:
                    planewave.translate(outgoing[s], tree.centers[t], out=incoming)
                local[t] = local.get(t, 0.) + planewave.to_local(incoming, p)
        for t in boxes:
            if t not in local:
                continue
            expansion = local.pop(t)
            if tree.f_leaf[t]:
                evaluate(t, expansion)
                continue
            for i, c in enumerate(tree.children[t]):
                if receives(c):
                    local[c] = split_to_child(expansion, i)


def _downward(tree, split, proxies):
    """Far field at the targets, in sorted target order."""
    u = np.zeros(len(tree.trg_perm))

    def evaluate(t, expansion):
        sl = tree.target_slice(t)
        u[sl] += eval_local(expansion, tree.targets[sl], tree.centers[t], tree.sides[t])

    far_field_pass(tree, split, proxies, lambda b: tree.n_targets(b) > 0, evaluate)
    return u


def _unsort(tree, u_sorted):
    u = np.empty_like(u_sorted)
    u[tree.trg_perm] = u_sorted
    return u


def _setup(problem):
    t0 = time.perf_counter()
    tree = build_point_tree(problem.sources, problem.targets, problem.n_s, problem.d)
    t1 = time.perf_counter()
    split = _split(problem.kernel, problem.scheme, problem.eps, tree.L_max)
    t2 = time.perf_counter()
    return tree, split, {'t_tree': t1 - t0, 't_split': t2 - t1}


def _counters(tree, split):
    levels = range(tree.L_max)
    n_f = [split.fourier_grid(l).n_modes for l in levels] + [split.window_grid().n_modes]
    return {'boxes': int(tree.n_boxes), 'levels': int(tree.L_max + 1),
            'n_fourier': int(max(n_f)), 'p': int(split.p)}


def run_dmk(problem):
    """Evaluate the point problem with the linear-cost algorithm."""
    t_start = time.perf_counter()
    tree, split, timings = _setup(problem)
    rho = problem.charges[tree.src_perm]
    t0 = time.perf_counter()
    proxies = _upward(tree, rho, split.p)
    u = _unsort(tree, _downward(tree, split, proxies))
    t1 = time.perf_counter()
    if config['points']['reference residual']:
        u_near = reference_residual_pass(tree, split, problem.charges)
    else:
        u_near = direct_residual_pass(extra_refine(tree), split, problem.charges)
    u += u_near + self_correction(tree, split, problem.charges)
    t2 = time.perf_counter()
    timings.update({'t_fourier': t1 - t0, 't_direct': t2 - t1,
                    't_total': t2 - t_start})
    logger.info("%r: %d boxes, %d levels, p=%d; %.3gs", problem, tree.n_boxes,
                tree.L_max + 1, split.p, timings['t_total'])
    return PotentialResult(u, timings, _counters(tree, split))


def run_multilevel_ewald(problem):
    """Evaluate the point problem by forming plane-wave expansions from the
    points and evaluating them at the targets on every level."""
    t_start = time.perf_counter()
    tree, split, timings = _setup(problem)
    rho = problem.charges[tree.src_perm]
    t0 = time.perf_counter()
    grid = split.window_grid()
    root = 0
    outgoing = planewave.outgoing_from_points(tree.sources, rho, tree.centers[root], grid)
    u = planewave.eval_at_points(planewave.translate(outgoing, tree.centers[root]),
                                 tree.targets)
    for level in range(tree.L_max):
        grid = split.fourier_grid(level)
        boxes = tree.boxes_at_level(level)
        outgoing = {}
        for b in boxes:
            if _emitting(tree, b):
                sl = tree.source_slice(b)
                outgoing[b] = planewave.outgoing_from_points(tree.sources[sl], rho[sl],
                                                             tree.centers[b], grid)
        for t in boxes:
            sources = [s for s in tree.colleagues(t) if s in outgoing]
            if tree.n_targets(t) == 0 or not sources:
                continue
            incoming = planewave.PlaneWaveExpansion(grid, tree.centers[t], kind='incoming')
            for s in sources:
                planewave.translate(outgoing[s], tree.centers[t], out=incoming)
            sl = tree.target_slice(t)
            u[sl] += planewave.eval_at_points(incoming, tree.targets[sl])
    t1 = time.perf_counter()
    u = _unsort(tree, u) + reference_residual_pass(tree, split, problem.charges)
    u += self_correction(tree, split, problem.charges)
    t2 = time.perf_counter()
    timings.update({'t_fourier': t1 - t0, 't_direct': t2 - t1,
                    't_total': t2 - t_start})
    return PotentialResult(u, timings, _counters(tree, split))


def direct_sum(problem, subset=None, chunk=2**22):
    """Brute-force sum at all targets, or at the targets with indices
    `subset`. Raises `SizeGuardError` above 10^9 pairs."""
    t_start = time.perf_counter()
    targets = problem.targets if subset is None else problem.targets[subset]
    n_pairs = len(targets) * problem.n_sources
    if n_pairs > MAX_DIRECT_PAIRS:
        raise SizeGuardError("Direct sum over {:.3g} pairs exceeds the limit {:.0e}".format(
            n_pairs, MAX_DIRECT_PAIRS))
    u = np.zeros(len(targets))
    step = max(1, chunk // problem.n_sources)
    for i in range(0, len(targets), step):
        r2, same = _pairs(targets[i:i + step], problem.sources)
        vals = problem.kernel(np.sqrt(np.where(same, 1., r2)))
        u[i:i + step] = np.where(same, 0., vals) @ problem.charges
    return PotentialResult(u, {'t_total': time.perf_counter() - t_start},
                           {'pairs': int(n_pairs)})
