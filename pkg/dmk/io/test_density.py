import io
import os
import tempfile
import unittest
import numpy as np
import numpy.testing as npt
from dmk.io.density import write_density, read_density
from dmk.tree import build_density_tree


def patch_density(x):
    return np.exp(-np.sum((x - 0.1)**2, axis=1) / 0.01)


class TestDensityFile(unittest.TestCase):
    def test_layout(self):
        tree, patches = build_density_tree(patch_density, 6, 1e-4, 2)
        buf = io.BytesIO()
        write_density(buf, tree, patches)
        data = np.frombuffer(buf.getvalue(), dtype='<f8')
        n = len(patches)
        npt.assert_array_equal(data[:3], [2, 6, n])
        self.assertEqual(len(data), 3 + n * (2 + 1 + 36))
        first = min(patches)
        npt.assert_array_equal(data[3:5], tree.centers[first])
        self.assertEqual(data[5], tree.levels[first])
        npt.assert_array_equal(data[6:42], patches[first].coeffs.ravel())

    def test_read_back(self):
        tree, patches = build_density_tree(patch_density, 6, 1e-4, 3)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'rho.bin')
            write_density(path, tree, patches)
            tree2, patches2 = read_density(path)
        self.assertEqual(tree2.n_boxes, tree.n_boxes)
        npt.assert_array_equal(tree2.levels, tree.levels)
        self.assertEqual(sorted(patches2), sorted(patches))
        for b in patches:
            npt.assert_array_equal(patches2[b].coeffs, patches[b].coeffs)
            npt.assert_array_equal(patches2[b].center, patches[b].center)

    def test_invalid(self):
        tree, patches = build_density_tree(patch_density, 6, 1e-4, 2)
        buf = io.BytesIO()
        write_density(buf, tree, patches)
        raw = buf.getvalue()
        with self.assertRaises(ValueError):
            read_density(io.BytesIO(raw[:-8]))
        with self.assertRaises(ValueError):
            read_density(io.BytesIO(raw[:-3]))
        with self.assertRaises(ValueError):
            read_density(io.BytesIO(np.array([4, 6, 1], dtype='<f8').tobytes()))
        # a single leaf at level 1 does not cover the unit box
        rec = np.concatenate([[2, 4, 1, -0.25, -0.25, 1], np.zeros(16)])
        with self.assertRaises(ValueError):
            read_density(io.BytesIO(rec.astype('<f8').tobytes()))
        # off-grid center
        rec = np.concatenate([[2, 4, 1, 0.1, 0., 0], np.zeros(16)])
        with self.assertRaises(ValueError):
            read_density(io.BytesIO(rec.astype('<f8').tobytes()))

    def test_level_restriction(self):
        # level 3 leaves in the inner corner of the first quadrant touch
        # level 1 leaves
        leaves = [(1, (0, 1)), (1, (1, 0)), (1, (1, 1)), (2, (0, 0)), (2, (0, 1)), (2, (1, 0))]
        leaves.extend((3, (i, j)) for i in (2, 3) for j in (2, 3))
        records = [[2, 4, len(leaves)]]
        for level, ijk in leaves:
            side = 2.0**-level
            records.append(list(-0.5 + (np.array(ijk) + 0.5) * side) + [level] + [0.] * 16)
        raw = np.concatenate(records).astype('<f8').tobytes()
        with self.assertRaises(ValueError):
            read_density(io.BytesIO(raw))
