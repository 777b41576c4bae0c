"""Level-restricted adaptive 2^d-trees on the unit box [-1/2, 1/2]^d.

A box at level l has side r_l = 2^-l and integer coordinates (i_1, ..., i_d)
with 0 <= i_a < 2^l; it covers the half-open cell
[-1/2 + i_a r_l, -1/2 + (i_a + 1) r_l) along each axis (points on the upper
face of the unit box belong to the last cell).

Boxes are numbered breadth first, level by level. Points are stored sorted in
depth-first leaf order, so that every box owns a contiguous range of them.
"""

import itertools
import logging
import numpy as np
from dmk.config import config
from dmk.interp import tensor_nodes, legendre1d, legendre_values_to_coeffs, \
    legendre_coeffs_to_values, legendre_laplacian
from dmk.util import CapacityError, RefinementLimitError, check_unit_box

logger = logging.getLogger(__name__)


class _Node(object):
    __slots__ = ('src', 'trg', 'split', 'extra', 'coeffs')

    def __init__(self, src, trg, extra=False):
        self.src = src
        self.trg = trg
        self.split = False
        self.extra = extra
        self.coeffs = None


def _child_keys(key, d):
    level, ijk = key
    base = np.asarray(ijk) * 2
    keys = []
    for i in range(2**d):
        bits = [(i >> a) & 1 for a in range(d)]
        keys.append((level + 1, tuple(int(x) for x in base + bits)))
    return keys


def _parent_key(key):
    level, ijk = key
    return (level - 1, tuple(i // 2 for i in ijk))


def _cell_coords(points, level):
    n = 2**level
    return np.clip(np.floor((points + 0.5) * n).astype(np.int64), 0, n - 1)


def _split_node(nodes, key, sources, targets, d, extra=False):
    """Create the 2^d children of `key`, distributing its points."""
    node = nodes[key]
    level, ijk = key
    base = 2 * np.asarray(ijk, dtype=np.int64)
    node.split = True
    parts = {}
    for name, pts, idx in (('src', sources, node.src), ('trg', targets, node.trg)):
        if len(idx):
            bits = _cell_coords(pts[idx], level + 1) - base
            child = np.sum(bits << np.arange(d), axis=1)
        else:
            child = np.zeros(0, dtype=np.int64)
        parts[name] = [idx[child == i] for i in range(2**d)]
    for i, ckey in enumerate(_child_keys(key, d)):
        nodes[ckey] = _Node(parts['src'][i], parts['trg'][i], extra=extra)
    return _child_keys(key, d)


def _leaf_keys(nodes):
    return [k for k, n in nodes.items() if not n.split]


def _containing_key(nodes, key):
    # smallest existing box containing the cell `key`
    while key not in nodes:
        key = _parent_key(key)
    return key


def _balance(nodes, d, on_split):
    """Split coarse leaves until adjacent leaves differ by at most one level."""
    offsets = [o for o in itertools.product((-1, 0, 1), repeat=d) if any(o)]
    while True:
        to_split = set()
        for key in _leaf_keys(nodes):
            level, ijk = key
            if level < 2:
                continue
            n = 2**level
            for o in offsets:
                nb = tuple(i + di for i, di in zip(ijk, o))
                if min(nb) < 0 or max(nb) >= n:
                    continue
                ck = _containing_key(nodes, (level, nb))
                if ck[0] < level - 1 and not nodes[ck].split:
                    to_split.add(ck)
        if not to_split:
            return
        for key in sorted(to_split):
            on_split(key)


class LevelTree(object):
    """Adaptive level-restricted tree with per-box flags and neighbor lists.

    Attributes
    ----------
     - d: dimension
     - n_s: leaf capacity (None for density trees)
     - levels, centers, coords, parent, children: per-box geometry;
       `children[b]` holds 2^d box ids or -1
     - f_leaf, f_out, f_in, is_extra: per-box flags
     - sources, targets: points sorted by box; `src_perm[i]` (`trg_perm[i]`)
       is the original index of the i-th sorted point
     - src_start, src_end, trg_start, trg_end: per-box point ranges
    """

    def __init__(self, nodes, sources, targets, d, n_s):
        self.d = d
        self.n_s = n_s
        self._nodes = nodes
        self._sources = sources
        self._targets = targets
        keys = sorted(nodes, key=lambda k: (k[0], k[1]))
        self.index = {k: i for i, k in enumerate(keys)}
        nbox = len(keys)
        self.levels = np.array([k[0] for k in keys], dtype=int)
        self.coords = np.array([k[1] for k in keys], dtype=np.int64).reshape(nbox, d)
        self.sides = 2.0**-self.levels
        self.centers = -0.5 + (self.coords + 0.5) * self.sides[:, None]
        self.parent = np.full(nbox, -1, dtype=int)
        self.children = np.full((nbox, 2**d), -1, dtype=int)
        self.is_extra = np.array([nodes[k].extra for k in keys], dtype=bool)
        for b, k in enumerate(keys):
            if nodes[k].split:
                ids = [self.index[ck] for ck in _child_keys(k, d)]
                self.children[b] = ids
                self.parent[ids] = b
        has_children = self.children[:, 0] >= 0
        # pre-refinement leaves: no children, or only extra-refined ones
        self.f_leaf = ~self.is_extra & (~has_children | self.is_extra[np.maximum(self.children[:, 0], 0)] & has_children)
        self.L_max = int(np.max(self.levels[~self.is_extra]))
        self._sort_points(keys)
        n_src = self.src_end - self.src_start
        if n_s is None:
            self.f_out = ~self.f_leaf & ~self.is_extra
        else:
            self.f_out = (n_src > n_s) & ~self.is_extra
        self.f_in = np.array([np.any(self.f_out[self.colleagues(b)]) for b in range(nbox)])
        self.f_in &= ~self.is_extra
        self._by_level = [np.flatnonzero((self.levels == l) & ~self.is_extra)
                          for l in range(self.L_max + 1)]
        logger.debug("Tree with %d boxes, %d leaves, L_max=%d", nbox,
                     int(np.sum(self.f_leaf)), self.L_max)

    def _sort_points(self, keys):
        nbox = len(keys)
        src_order, trg_order = [], []
        self.src_start = np.zeros(nbox, dtype=int)
        self.src_end = np.zeros(nbox, dtype=int)
        self.trg_start = np.zeros(nbox, dtype=int)
        self.trg_end = np.zeros(nbox, dtype=int)
        ns = nt = 0
        # iterative depth-first traversal; post-order fills the range ends
        stack = [(0, False)]
        while stack:
            b, done = stack.pop()
            if done:
                self.src_end[b], self.trg_end[b] = ns, nt
                continue
            self.src_start[b], self.trg_start[b] = ns, nt
            stack.append((b, True))
            if self.children[b, 0] >= 0:
                for c in self.children[b][::-1]:
                    stack.append((c, False))
            else:
                node = self._nodes[keys[b]]
                src_order.append(node.src)
                trg_order.append(node.trg)
                ns += len(node.src)
                nt += len(node.trg)
        self.src_perm = np.concatenate(src_order).astype(int) if src_order else np.zeros(0, int)
        self.trg_perm = np.concatenate(trg_order).astype(int) if trg_order else np.zeros(0, int)
        self.sources = self._sources[self.src_perm]
        self.targets = self._targets[self.trg_perm]

    @property
    def n_boxes(self):
        return len(self.levels)

    def side(self, level):
        return 2.0**-level

    def key(self, b):
        return (int(self.levels[b]), tuple(int(i) for i in self.coords[b]))

    def has_children(self, b):
        return self.children[b, 0] >= 0

    def boxes_at_level(self, level):
        """Boxes of the pre-refinement tree at `level`."""
        return self._by_level[level]

    def leaves(self):
        return np.flatnonzero(self.f_leaf)

    def source_slice(self, b):
        return slice(self.src_start[b], self.src_end[b])

    def target_slice(self, b):
        return slice(self.trg_start[b], self.trg_end[b])

    def n_sources(self, b):
        return self.src_end[b] - self.src_start[b]

    def n_targets(self, b):
        return self.trg_end[b] - self.trg_start[b]

    def colleagues(self, b):
        """Same-level boxes sharing a boundary point with b, including b."""
        level, ijk = self.key(b)
        out = []
        for o in itertools.product((-1, 0, 1), repeat=self.d):
            nb = (level, tuple(i + di for i, di in zip(ijk, o)))
            if nb in self.index:
                out.append(self.index[nb])
        return np.array(sorted(out), dtype=int)

    def _touch(self, a, b):
        la, lb = self.levels[a], self.levels[b]
        m = max(la, lb)
        lo_a = self.coords[a] << (m - la)
        lo_b = self.coords[b] << (m - lb)
        hi_a = lo_a + (1 << (m - la))
        hi_b = lo_b + (1 << (m - lb))
        return bool(np.all(lo_a <= hi_b) and np.all(lo_b <= hi_a))

    def coarse_neighbors(self, b):
        """Leaf boxes one level coarser sharing a boundary point with b."""
        p = self.parent[b]
        if p < 0 or self.is_extra[b]:
            return np.zeros(0, dtype=int)
        return np.array([c for c in self.colleagues(p)
                         if self.f_leaf[c] and self._touch(b, c)], dtype=int)

    def fine_neighbors(self, b):
        """Leaf boxes one level finer sharing a boundary point with b."""
        if self.is_extra[b]:
            return np.zeros(0, dtype=int)
        out = []
        for c in self.colleagues(b):
            if self.f_leaf[c] or not self.has_children(c):
                continue
            out.extend(ch for ch in self.children[c]
                       if self.f_leaf[ch] and self._touch(b, ch))
        return np.array(sorted(out), dtype=int)

    def list1(self, b):
        """Leaf colleagues, coarse and fine neighbors of a leaf box."""
        coll = [c for c in self.colleagues(b) if self.f_leaf[c]]
        return np.concatenate([np.array(coll, dtype=int),
                               self.coarse_neighbors(b), self.fine_neighbors(b)])

    def to_records(self):
        """One dict per box for the JSON debug dump."""
        return [{'id': b,
                 'level': int(self.levels[b]),
                 'center': [float(x) for x in self.centers[b]],
                 'parent': int(self.parent[b]),
                 'leaf': bool(self.f_leaf[b]),
                 'f_out': bool(self.f_out[b]),
                 'f_in': bool(self.f_in[b]),
                 'extra': bool(self.is_extra[b]),
                 'n_sources': int(self.n_sources(b)),
                 'n_targets': int(self.n_targets(b))}
                for b in range(self.n_boxes)]


def build_point_tree(sources, targets, n_s, d):
    """Build a level-restricted tree in which every leaf holds at most `n_s`
    sources and at most `n_s` targets."""
    if d not in (2, 3):
        raise ValueError("dimension must be 2 or 3, got {}".format(d))
    if n_s < 1:
        raise ValueError("leaf capacity must be positive, got {}".format(n_s))
    sources = check_unit_box(sources, d, 'sources')
    targets = check_unit_box(targets, d, 'targets')
    max_depth = config['tree']['max depth']
    root = (0, (0,) * d)
    nodes = {root: _Node(np.arange(len(sources)), np.arange(len(targets)))}

    def split(key):
        if key[0] >= max_depth:
            raise CapacityError("Tree depth would exceed {} levels; more than "
                                "{} coincident points?".format(max_depth, n_s))
        return _split_node(nodes, key, sources, targets, d)

    queue = [root]
    while queue:
        key = queue.pop()
        node = nodes[key]
        if len(node.src) > n_s or len(node.trg) > n_s:
            queue.extend(split(key))
    _balance(nodes, d, split)
    return LevelTree(nodes, sources, targets, d, n_s)


def extra_refine(tree):
    """Return a copy of `tree` in which every leaf gained 2^d children
    flagged as extra-refined."""
    nodes = {k: _Node(n.src, n.trg, n.extra) for k, n in tree._nodes.items()}
    for k, n in tree._nodes.items():
        nodes[k].split = n.split
    for b in tree.leaves():
        _split_node(nodes, tree.key(b), tree._sources, tree._targets, tree.d, extra=True)
    return LevelTree(nodes, tree._sources, tree._targets, tree.d, tree.n_s)


class DensityPatch(object):
    """Tensor Legendre representation of a density on a leaf box.

    Parameters
    ----------
     - box: leaf box id
     - coeffs: Legendre coefficients, shape (q,)*d
     - center, side: geometry of the box
    """

    def __init__(self, box, coeffs, center, side):
        self.box = box
        self.coeffs = coeffs
        self.center = np.asarray(center, dtype=float)
        self.side = side
        self._values = self._lap = self._bilap = None

    @property
    def q(self):
        return self.coeffs.shape[0]

    @property
    def values(self):
        """Density at the tensor Gauss-Legendre nodes."""
        if self._values is None:
            self._values = legendre_coeffs_to_values(self.coeffs)
        return self._values

    @property
    def laplacian(self):
        if self._lap is None:
            self._lap = legendre_laplacian(self.coeffs, self.side)
        return self._lap

    @property
    def bilaplacian(self):
        if self._bilap is None:
            self._bilap = legendre_laplacian(self.laplacian, self.side)
        return self._bilap

    def nodes(self):
        return tensor_nodes(legendre1d(self.q), self.center, self.side, len(self.center))


def _legendre_fit(rho, key, q, d):
    level, ijk = key
    side = 2.0**-level
    center = -0.5 + (np.asarray(ijk) + 0.5) * side
    values = np.asarray(rho(tensor_nodes(legendre1d(q), center, side, d)), dtype=float)
    return legendre_values_to_coeffs(values.reshape((q,) * d))


def _tail(coeffs, q):
    mask = np.zeros(coeffs.shape, dtype=bool)
    for axis, idx in enumerate(np.indices(coeffs.shape)):
        mask |= idx >= q - 2
    return np.sum(np.abs(coeffs[mask]))


def build_density_tree(rho, q, eps, d):
    """Refine until the order-q tensor Legendre interpolant of the vectorized
    density `rho` is resolved to `eps` on every leaf.

    Returns the tree and a dict mapping leaf box ids to `DensityPatch`."""
    if d not in (2, 3):
        raise ValueError("dimension must be 2 or 3, got {}".format(d))
    if not 4 <= q <= 24:
        raise ValueError("Legendre order q must be in [4, 24], got {}".format(q))
    max_depth = config['tree']['max depth']
    empty = np.zeros(0, dtype=int)
    nopts = np.zeros((0, d))
    root = (0, (0,) * d)
    nodes = {root: _Node(empty, empty)}
    nodes[root].coeffs = _legendre_fit(rho, root, q, d)
    scale = [np.max(np.abs(nodes[root].coeffs))]

    def split(key):
        if key[0] >= max_depth:
            raise RefinementLimitError("Density not resolved at {} levels".format(max_depth))
        children = _split_node(nodes, key, nopts, nopts, d)
        nodes[key].coeffs = None
        for ck in children:
            nodes[ck].coeffs = _legendre_fit(rho, ck, q, d)
            scale[0] = max(scale[0], np.max(np.abs(nodes[ck].coeffs)))
        return children

    level = [root]
    while level:
        nxt = []
        for key in level:
            c = nodes[key].coeffs
            if _tail(c, q) > eps * max(scale[0], np.max(np.abs(c))):
                nxt.extend(split(key))
        level = nxt
    _balance(nodes, d, split)
    tree = LevelTree(nodes, nopts, nopts, d, None)
    patches = {}
    for b in tree.leaves():
        patches[b] = DensityPatch(b, nodes[tree.key(b)].coeffs, tree.centers[b], tree.sides[b])
    logger.info("Density tree: %d leaves, L_max=%d", len(patches), tree.L_max)
    return tree, patches


def density_tree_from_leaves(leaves, d):
    """Rebuild a density tree from (level, center, coeffs) leaf records.

    The leaves must tile the unit box and satisfy the level restriction.
    Returns the tree and its patches like `build_density_tree`."""
    if d not in (2, 3):
        raise ValueError("dimension must be 2 or 3, got {}".format(d))
    empty = np.zeros(0, dtype=int)
    nopts = np.zeros((0, d))
    nodes = {}
    volume = 0.
    for level, center, coeffs in leaves:
        side = 2.0**-level
        ijk = np.rint((np.asarray(center) + 0.5) / side - 0.5).astype(np.int64)
        if np.any(np.abs(-0.5 + (ijk + 0.5) * side - center) > 1e-12 * side) \
                or np.any(ijk < 0) or np.any(ijk >= 2**level):
            raise ValueError("Center {} is not a box center at level {}".format(
                list(center), level))
        key = (int(level), tuple(int(i) for i in ijk))
        if key in nodes:
            raise ValueError("Duplicate leaf {}".format(key))
        nodes[key] = _Node(empty, empty)
        nodes[key].coeffs = np.asarray(coeffs, dtype=float)
        volume += side**d
        while key[0] > 0:
            key = _parent_key(key)
            if key not in nodes:
                nodes[key] = _Node(empty, empty)
            nodes[key].split = True
    if not np.isclose(volume, 1., rtol=1e-12):
        raise ValueError("Leaves cover a volume of {}, not the unit box".format(volume))
    for key, node in nodes.items():
        if node.split and node.coeffs is not None:
            raise ValueError("Leaf {} overlaps finer leaves".format(key))
        if node.split and any(ck not in nodes for ck in _child_keys(key, d)):
            raise ValueError("Box {} is only partly covered by leaves".format(key))

    def refuse(key):
        raise ValueError("Leaves violate the level restriction at {}".format(key))

    _balance(nodes, d, refuse)
    tree = LevelTree(nodes, nopts, nopts, d, None)
    patches = {b: DensityPatch(b, nodes[tree.key(b)].coeffs, tree.centers[b], tree.sides[b])
               for b in tree.leaves()}
    return tree, patches
