import io
import json
import unittest
import numpy as np
from dmk.io.report import write_report, dump_tree, COLUMNS
from dmk.tree import build_point_tree


class TestReport(unittest.TestCase):
    def test_json(self):
        report = {'rows': [{'N': np.int64(10), 'rel_err': np.float64(1e-7)}], 'command': 'points'}
        buf = io.StringIO()
        write_report(report, 'points', buf, 'json')
        text = buf.getvalue()
        self.assertLess(text.index('"command"'), text.index('"rows"'))
        self.assertEqual(json.loads(text)['rows'][0], {'N': 10, 'rel_err': 1e-7})

    def test_csv(self):
        rows = [{'check': 'oracle', 'case': 'a', 'value': 1e-7, 'tolerance': 1e-5,
                 'passed': True, 'extra': 3},
                {'passed': False, 'value': np.float64(2.), 'tolerance': 1., 'check': 'b',
                 'case': 'c'}]
        buf = io.StringIO()
        write_report({'rows': rows}, 'verify', buf, 'csv')
        lines = buf.getvalue().split('\n')
        self.assertEqual(lines[0], ','.join(COLUMNS['verify']))
        self.assertEqual(lines[1], 'oracle,a,1e-07,1e-05,True')
        self.assertEqual(lines[2], 'b,c,2.0,1.0,False')
        with self.assertRaises(ValueError):
            write_report({'rows': rows}, 'verify', buf, 'xml')

    def test_parameter_rows_csv(self):
        row = {'eps': 1e-6, 'c': 13.739999771118164, 'N1': 25, 'p': 18, 'h0': 1.3372,
               'N1 gaussian': 44, 'p gaussian': 30}
        buf = io.StringIO()
        write_report({'rows': [row]}, 'dump-params', buf, 'csv')
        fields = buf.getvalue().split('\n')[1].split(',')
        self.assertEqual([float(x) for x in fields],
                         [1e-6, 13.739999771118164, 25, 18, 1.3372, 44, 30])

    def test_tree_dump(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(-0.5, 0.5, (200, 2))
        tree = build_point_tree(x, x, 20, 2)
        buf = io.StringIO()
        dump_tree(tree, buf)
        records = json.loads(buf.getvalue())
        self.assertEqual(len(records), tree.n_boxes)
        self.assertEqual(set(records[0]), {'id', 'level', 'center', 'parent', 'leaf', 'f_out',
                                           'f_in', 'extra', 'n_sources', 'n_targets'})
        self.assertEqual(records[0]['n_sources'], 200)
        self.assertEqual(sum(r['n_sources'] for r in records if r['leaf']), 200)
