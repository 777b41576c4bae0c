"""Machine-readable reports of command-line runs.

JSON reports have sorted keys. CSV reports hold the `rows` of a report with
a fixed column order per command."""

import csv
import json
import numpy as np

TIMING_COLUMNS = ['t_tree', 't_split', 't_fourier', 't_direct', 't_total']

COLUMNS = {
    'points': ['kernel', 'scheme', 'd', 'eps', 'dist', 'N', 'n_s', 'seed', 'boxes', 'levels',
               'p', 'n_fourier', 'oracle', 'oracle_targets', 'rel_err'] + TIMING_COLUMNS
              + ['throughput'],
    'boxes': ['kernel', 'scheme', 'd', 'eps', 'density', 'q', 'leaves', 'levels', 'p',
              'sog_nodes', 'nodes', 'rel_err'] + TIMING_COLUMNS + ['throughput'],
    'bench': ['kernel', 'scheme', 'd', 'eps', 'dist', 'N', 'n_s', 'boxes', 'levels']
             + TIMING_COLUMNS + ['throughput', 'ratio'],
    'verify': ['check', 'case', 'value', 'tolerance', 'passed'],
    'dump-params': ['eps', 'c', 'N1', 'p', 'h0', 'N1 gaussian', 'p gaussian'],
}


def _plain(obj):
    # numpy scalars and arrays in reports
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError("Object of type {} is not JSON serializable".format(type(obj).__name__))


def to_json(report):
    return json.dumps(report, sort_keys=True, indent=2, default=_plain) + '\n'


def to_csv(report, command, stream):
    writer = csv.DictWriter(stream, fieldnames=COLUMNS[command], extrasaction='ignore',
                            lineterminator='\n')
    writer.writeheader()
    for row in report['rows']:
        writer.writerow({k: _plain(v) if isinstance(v, (np.generic, np.ndarray)) else v
                         for k, v in row.items()})


def write_report(report, command, stream, format='json'):
    """Write `report`, a dict with at least the key 'rows', to a text stream."""
    if format == 'json':
        stream.write(to_json(report))
    elif format == 'csv':
        to_csv(report, command, stream)
    else:
        raise ValueError("Unknown report format '{}'".format(format))


def dump_tree(tree, f):
    """Write the JSON debug dump of a tree (one object per box) to the path
    or text stream `f`."""
    text = json.dumps(tree.to_records(), sort_keys=True, indent=1) + '\n'
    if hasattr(f, 'write'):
        f.write(text)
    else:
        with open(f, 'w') as fh:
            fh.write(text)
