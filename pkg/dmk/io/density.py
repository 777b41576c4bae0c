"""Sampled-density files.

A density file stores tensor Legendre coefficients on the leaves of a
level-restricted tree as little-endian 64-bit floats: a header (d, q,
N_leaf) followed by one record per leaf holding its center (d values), its
level and its q^d coefficients in C order.
"""

import logging
import numpy as np
from dmk.tree import density_tree_from_leaves

logger = logging.getLogger(__name__)

DTYPE = '<f8'


def write_density(f, tree, patches):
    """Write the patches of a density tree to the path or binary file `f`."""
    leaves = sorted(patches)
    if not leaves:
        raise ValueError("No patches to write")
    q = patches[leaves[0]].q
    records = [np.array([tree.d, q, len(leaves)], dtype=DTYPE)]
    for b in leaves:
        patch = patches[b]
        if patch.coeffs.shape != (q,) * tree.d:
            raise ValueError("Patch {} has coefficients of shape {}".format(
                b, patch.coeffs.shape))
        records.append(np.asarray(patch.center, dtype=DTYPE))
        records.append(np.array([tree.levels[b]], dtype=DTYPE))
        records.append(np.asarray(patch.coeffs, dtype=DTYPE).ravel())
    data = np.concatenate(records)
    if hasattr(f, 'write'):
        f.write(data.tobytes())
    else:
        with open(f, 'wb') as fh:
            fh.write(data.tobytes())
    logger.debug("Wrote %d leaves with q=%d", len(leaves), q)


def read_density(f):
    """Read a density file from a path or binary file.

    Returns the rebuilt tree and a dict mapping its leaf ids to
    `DensityPatch` objects."""
    if hasattr(f, 'read'):
        raw = f.read()
    else:
        with open(f, 'rb') as fh:
            raw = fh.read()
    if len(raw) % 8:
        raise ValueError("Density file length {} is not a multiple of 8".format(len(raw)))
    data = np.frombuffer(raw, dtype=DTYPE)
    if len(data) < 3:
        raise ValueError("Density file too short for its header")
    d, q, n_leaf = data[:3]
    if d not in (2, 3) or q != int(q) or q < 1 or n_leaf != int(n_leaf) or n_leaf < 1:
        raise ValueError("Invalid density file header {}".format(list(data[:3])))
    d, q, n_leaf = int(d), int(q), int(n_leaf)
    size = d + 1 + q**d
    if len(data) != 3 + n_leaf * size:
        raise ValueError("Density file holds {} values, expected {} for {} leaves".format(
            len(data), 3 + n_leaf * size, n_leaf))
    body = data[3:].reshape(n_leaf, size)
    leaves = []
    for rec in body:
        level = rec[d]
        if level != int(level) or level < 0:
            raise ValueError("Invalid leaf level {}".format(level))
        leaves.append((int(level), rec[:d].copy(), rec[d + 1:].reshape((q,) * d).copy()))
    tree, patches = density_tree_from_leaves(leaves, d)
    logger.info("Read density with %d leaves, q=%d, L_max=%d", n_leaf, q, tree.L_max)
    return tree, patches
