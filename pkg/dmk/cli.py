"""Command-line interface: problem generation, oracle checks, benchmarks
and parameter dumps.

Usage: ``dmk {points,boxes,verify,bench,dump-params} [options]``. Reports
go to stdout or to ``--out`` as JSON or CSV. The exit code is 0 on success,
1 on a runtime failure or a failed check and 2 on invalid usage.
"""

import argparse
import logging
import math
import os
import sys
import time
import warnings
import numpy as np
import voluptuous as vol
import yaml
from dmk.config import config
from dmk.boxes import run_box_dmk
from dmk.interp import anterpolate_points, tensor_nodes, cheb1d
from dmk.io.density import read_density
from dmk.io.instanceio import RunConfig, COMMANDS, DISTRIBUTIONS, FORMATS
from dmk.io.report import write_report, dump_tree
from dmk.kernels import make_split
from dmk.kernels.params import box_order, parameter_rows
from dmk.math.pswf import pswf_build, pswf_c_for_ratio, decay_ratio
from dmk.points import PointProblem, run_dmk, run_multilevel_ewald, direct_sum
from dmk.testproblems import get_problem, point_distribution
from dmk.tree import build_point_tree, build_density_tree
from dmk.util import UnsupportedError, rel_max_error

logger = logging.getLogger(__name__)


def build_parser():
    parser = argparse.ArgumentParser(
        prog='dmk', description='Fast kernel summation by dual-space multilevel kernel splitting.')
    parser.add_argument('command', choices=COMMANDS)
    parser.add_argument('--config', help='YAML file with run settings; flags take precedence')
    parser.add_argument('--kernel', help='kernel name, e.g. Laplace3D (default)')
    parser.add_argument('--scheme', help='splitting scheme (default: first supported)')
    parser.add_argument('--dim', type=int, help='dimension of the generic power kernel')
    parser.add_argument('--eps', type=float, help='requested precision (default 1e-6)')
    parser.add_argument('--n', type=int, help='number of points')
    parser.add_argument('--dist', choices=DISTRIBUTIONS, help='point distribution')
    parser.add_argument('--ns', type=int, help='leaf capacity of the point tree')
    parser.add_argument('--seed', type=int, help='random seed')
    parser.add_argument('--out', help='report file (default: stdout)')
    parser.add_argument('--format', choices=FORMATS, help='report format')
    parser.add_argument('--density', help='analytic problem (gaussians, bump, ring) '
                                          'or path of a density file')
    parser.add_argument('--q', type=int, help='Legendre order of the box code')
    parser.add_argument('--lam', type=float, help='Yukawa screening parameter')
    parser.add_argument('--alpha', type=float, help='exponent of the power kernel')
    parser.add_argument('--tree-dump', dest='tree_dump', help='write the tree as JSON')
    parser.add_argument('--ladder', type=int, nargs='+', help='problem sizes of bench')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true')
    verbosity.add_argument('-q', '--quiet', action='store_true')
    return parser


def get_config(args):
    """Validated `RunConfig` from the parsed arguments and the optional
    YAML file."""
    d = {}
    if args.config:
        with open(args.config, 'r') as f:
            d = yaml.safe_load(f) or {}
    for key in RunConfig._input_schema_dict:
        key = str(key)
        value = getattr(args, key, None)
        if value is not None:
            d[key] = value
    d['command'] = args.command
    return RunConfig.load_dict(d)


def point_problem(cfg, kernel, n=None, seed=None):
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    n = cfg.n if n is None else n
    try:
        x = point_distribution(cfg.dist, n, kernel.d, rng)
    except ValueError as e:
        raise UnsupportedError(str(e))
    rho = rng.uniform(-1, 1, n)
    return PointProblem(x, rho, kernel=kernel, scheme=cfg.scheme, eps=cfg.eps, n_s=cfg.ns)


def oracle_error(problem, u, seed):
    """Relative max error against the direct sum, on a seeded target
    subsample for large problems. Returns (error, oracle kind, targets)."""
    limit = config['verify']['full oracle limit']
    if problem.n_targets <= limit:
        return rel_max_error(u, direct_sum(problem).u), 'full', problem.n_targets
    size = config['verify']['subsample']
    rng = np.random.default_rng([seed, 1])
    subset = np.sort(rng.choice(problem.n_targets, size=size, replace=False))
    warnings.warn("Oracle restricted to {} of {} targets".format(size, problem.n_targets))
    return rel_max_error(u[subset], direct_sum(problem, subset).u), 'subsample', size


def _timings(timings):
    return {k: float(timings.get(k, 0.)) for k in
            ('t_tree', 't_split', 't_fourier', 't_direct', 't_total')}


def _point_row(cfg, kernel, problem, res):
    row = {'kernel': kernel.name, 'scheme': cfg.scheme_name(kernel), 'd': kernel.d,
           'eps': cfg.eps, 'dist': cfg.dist, 'N': problem.n_sources, 'n_s': problem.n_s,
           'seed': cfg.seed}
    row.update(res.counters)
    row.update(_timings(res.timings))
    row['throughput'] = problem.n_sources / max(res.timings['t_total'], 1e-300)
    return row


def cmd_points(cfg):
    kernel = cfg.get_kernel()
    problem = point_problem(cfg, kernel)
    res = run_dmk(problem)
    row = _point_row(cfg, kernel, problem, res)
    row['rel_err'], row['oracle'], row['oracle_targets'] = oracle_error(problem, res.u, cfg.seed)
    if cfg.tree_dump:
        dump_tree(build_point_tree(problem.sources, problem.targets, problem.n_s, problem.d),
                  cfg.tree_dump)
    logger.info("N=%d: relative error %.3g, %.3g points/s", problem.n_sources,
                row['rel_err'], row['throughput'])
    return {'rows': [row]}


def _box_density(cfg, kernel, q, eps):
    """Tree, patches and the analytic problem (None for density files)."""
    if cfg.density and os.path.isfile(cfg.density):
        tree, patches = read_density(cfg.density)
        if tree.d != kernel.d:
            raise UnsupportedError("Density file is {}D, kernel {} is {}D".format(
                tree.d, kernel.name, kernel.d))
        return tree, patches, None
    try:
        problem = get_problem(cfg.density or 'gaussians', kernel.d)
        rho = problem.density(kernel)
    except ValueError as e:
        raise UnsupportedError(str(e))
    tree, patches = build_density_tree(rho, q, eps, kernel.d)
    return tree, patches, problem


def cmd_boxes(cfg):
    kernel = cfg.get_kernel()
    scheme = cfg.scheme or 'SogSplit'
    t0 = time.perf_counter()
    q = cfg.q or box_order(kernel.d, cfg.eps)
    tree, patches, problem = _box_density(cfg, kernel, q, cfg.eps)
    t_tree = time.perf_counter() - t0
    res = run_box_dmk(tree, patches, kernel, scheme, cfg.eps)
    res.timings['t_tree'] = t_tree
    res.timings['t_total'] += t_tree
    x, u = res.flat()
    row = {'kernel': kernel.name, 'scheme': scheme, 'd': kernel.d, 'eps': cfg.eps,
           'density': cfg.density or 'gaussians', 'nodes': len(u)}
    row.update(res.counters)
    row.update(_timings(res.timings))
    row['throughput'] = len(u) / max(res.timings['t_total'], 1e-300)
    row['rel_err'] = None if problem is None else rel_max_error(u, problem.potential(kernel, x))
    if cfg.tree_dump:
        dump_tree(tree, cfg.tree_dump)
    return {'rows': [row]}


def cmd_bench(cfg):
    """One warm-up run, then a row per problem size of the ladder; `ratio`
    is the time relative to the previous row."""
    kernel = cfg.get_kernel()
    ladder = cfg.ladder or config['verify']['bench ladder']
    run_dmk(point_problem(cfg, kernel, ladder[0]))
    rows = []
    previous = None
    for n in ladder:
        problem = point_problem(cfg, kernel, n)
        res = run_dmk(problem)
        row = _point_row(cfg, kernel, problem, res)
        t = res.timings['t_total']
        row['ratio'] = None if previous is None else t / previous
        previous = t
        rows.append(row)
        logger.info("N=%d: %.3gs", n, t)
    return {'rows': rows}


def _check(name, case, value, tolerance):
    value = float(value)
    return {'check': name, 'case': case, 'value': value, 'tolerance': float(tolerance),
            'passed': bool(value <= tolerance)}


def check_telescoping(kernel, scheme, eps, seed, L_max=4):
    """Window, difference and residual kernels add up to the kernel."""
    split = make_split(kernel, scheme, eps, L_max)
    rng = np.random.default_rng(seed)
    n = config['verify']['telescoping samples']
    r = rng.uniform(1e-3, math.sqrt(kernel.d), n)
    L = rng.integers(0, L_max + 1, n)
    total = split.window(r)
    for l in range(L_max):
        total = total + np.where(l < L, split.difference(l, r), 0.)
    for l in range(L_max + 1):
        total = total + np.where(L == l, split.residual(l, r), 0.)
    K = kernel(r)
    return np.max(np.abs(total - K) / np.maximum(np.abs(K), 1.))


def check_proxy(d, p, seed):
    """Proxy charges reproduce point charges against tensor polynomials of
    degree below p."""
    rng = np.random.default_rng(seed)
    center, side = np.zeros(d), 0.5
    x = rng.uniform(-side / 2, side / 2, (50, d))
    rho = rng.uniform(-1, 1, 50)
    tau = anterpolate_points(x, rho, center, side, p)
    nodes = tensor_nodes(cheb1d(p), center, side, d)
    coeffs = rng.uniform(-1, 1, (d, p))

    def g(y):
        return np.prod([np.polynomial.chebyshev.chebval(2 * y[:, a] / side, coeffs[a])
                        for a in range(d)], axis=0)
    exact = np.sum(rho * g(x))
    return abs(np.sum(tau.ravel() * g(nodes)) - exact) / np.sum(np.abs(rho * g(x)))


def check_pswf_decay():
    """psi(1)/psi(0) at the configured c against its target, in decades,
    and the exact inverse `pswf_c_for_ratio` of the target."""
    decay = config['verify']['pswf decay']
    c, target = decay['c'], decay['target']
    value = abs(math.log10(decay_ratio(pswf_build(c)) / target))
    c_exact = pswf_c_for_ratio(target)
    case = 'c={:.6g}, exact c={:.6g} for {:g}'.format(c, c_exact, target)
    return _check('pswf decay', case, value, decay['log10 tolerance'])


def cmd_verify(cfg):
    kernel = cfg.get_kernel()
    scheme = cfg.scheme_name(kernel)
    factor = config['verify']['tolerance factor']
    case = '{} {} eps={:g}'.format(kernel.name, scheme, cfg.eps)
    rows = []
    rows.append(check_pswf_decay())
    rows.append(_check('telescoping', case,
                       check_telescoping(kernel, scheme, cfg.eps, cfg.seed), 5 * cfg.eps))
    p = make_split(kernel, scheme, cfg.eps, 2).p
    rows.append(_check('proxy exactness', 'd={} p={}'.format(kernel.d, p),
                       check_proxy(kernel.d, p, cfg.seed), 1e-12))
    problem = point_problem(cfg, kernel)
    res = run_dmk(problem)
    err, _, _ = oracle_error(problem, res.u, cfg.seed)
    rows.append(_check('oracle', case + ' N={}'.format(problem.n_sources), err,
                       factor * cfg.eps))
    again = run_dmk(problem).u
    rows.append(_check('determinism', case, np.max(np.abs(again - res.u)), 0.))
    for i in range(config['verify']['ewald problems']):
        seed = cfg.seed + 1 + i
        pr = point_problem(cfg, kernel, seed=seed)
        diff = rel_max_error(run_dmk(pr).u, run_multilevel_ewald(pr).u)
        rows.append(_check('ewald consistency', case + ' seed={}'.format(seed), diff,
                           2 * factor * cfg.eps))
    passed = all(row['passed'] for row in rows)
    for row in rows:
        log = logger.info if row['passed'] else logger.error
        log("%s (%s): %.3g <= %.3g %s", row['check'], row['case'], row['value'],
            row['tolerance'], 'ok' if row['passed'] else 'FAILED')
    return {'rows': rows, 'passed': passed}


def cmd_dump_params(cfg):
    """The stored PSWF parameter rows and the effective parameters of the
    configured split."""
    kernel = cfg.get_kernel()
    split = make_split(kernel, cfg.scheme, cfg.eps, 2)
    return {'rows': parameter_rows(), 'kernel': kernel.name, 'scheme': split.scheme_name,
            'split': split.params.as_dict()}


_handlers = {'points': cmd_points, 'boxes': cmd_boxes, 'verify': cmd_verify,
             'bench': cmd_bench, 'dump-params': cmd_dump_params}


def run(cfg):
    """Run the configured command and return its report."""
    report = _handlers[cfg.command](cfg)
    report['command'] = cfg.command
    report['config'] = cfg.get_yaml_dict()
    return report


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level)
    try:
        cfg = get_config(args)
        cfg.get_kernel()
    except (vol.Invalid, UnsupportedError, yaml.YAMLError, OSError) as e:
        logger.error("Invalid configuration: %s", e)
        return 2
    try:
        report = run(cfg)
        if cfg.out:
            with open(cfg.out, 'w', newline='') as f:
                write_report(report, cfg.command, f, cfg.format)
        else:
            write_report(report, cfg.command, sys.stdout, cfg.format)
    except UnsupportedError as e:
        logger.error("%s", e)
        return 2
    except Exception as e:
        logger.error("%s failed: %s", cfg.command, e, exc_info=args.verbose)
        return 1
    return 0 if report.get('passed', True) else 1


if __name__ == '__main__':
    sys.exit(main())
