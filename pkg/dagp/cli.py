"""
Command-line batch driver
Sub-commands enumerate initial monomials, run the local search, build LONs,
run the GP baseline and merge the resulting tables
"""

import argparse
import glob
import hashlib
import logging
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import networkx as nx
import numpy as np
from tqdm import tqdm

from dagp import __version__
from dagp.cache import is_cache_valid, load_cache, save_cache
from dagp.config import (
    MODES,
    RunConfig,
    apply_env,
    config_digest,
    config_to_dict,
    load_config,
    mode_is_scaled,
    select_equations,
    with_flags,
)
from dagp.dataset import (
    Dataset,
    EquationSpec,
    find_equation,
    generate_synthetic,
    load_table,
    registry,
    sample_uniform,
)
from dagp.errors import ConfigError, DagpError, UnknownEquationError, UnknownFormatError
from dagp.expr import to_infix
from dagp.gp_baseline import estimate_evaluations, gp_metadata, run_many, write_outcomes_jsonl
from dagp.initializer import enumerate_with_restart
from dagp.localsearch import (
    best_result,
    global_hit_evaluation,
    search_all,
    total_evaluations,
    write_trajectory_log,
)
from dagp.lon import build_lon, export_graph
from dagp.metrics import MetricsRow, metrics_row, write_degree_csv, write_metrics_csv, write_metrics_json
from dagp.startup import ensure_unit_tables_exist, init_output_directory
from dagp.units import describe, format_signature
from dagp.utils import (
    format_gp_cell,
    format_hit_cell,
    format_mse,
    json_safe,
    parse_optional_float,
    parse_optional_int,
    read_rows_csv,
    write_rows_csv,
)


logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

SEARCH_COLUMNS = ('equation', 'starts', 'evaluations', 'hit_evaluation', 'hits', 'best_mse', 'best_expression')
GP_COLUMNS = ('equation', 'runs', 'successes', 'total_evaluations', 'estimate')

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

_USAGE_ERRORS = (ConfigError, UnknownEquationError, UnknownFormatError)


def setup_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = os.getenv('LOG_LEVEL', 'INFO')
    if verbose:
        level = 'DEBUG'
    elif quiet:
        level = 'WARNING'
    logging.basicConfig(format=LOG_FORMAT, level=level, force=True)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON preset or a manifest from an earlier run')
    common.add_argument('--eq', nargs='+', help="equation ids, or 'all'")
    common.add_argument('--mode', choices=MODES + ('both',), help='fitness mode (default: both)')
    common.add_argument('--exp-range', dest='exp_range', help="exponent range, e.g. '-3,3' or '3'")
    common.add_argument('--const-set', dest='const_set', help="integer constants, e.g. '-2,-1,1,2' or '2'")
    common.add_argument('--op-order', '--ops', dest='op_order', help='comma-separated neighbourhood operators')
    common.add_argument('--data', help="data file, directory of <id> files, or a pattern with '{id}'")
    common.add_argument('--seed', type=int)
    common.add_argument('--n', type=int, help='rows per dataset')
    common.add_argument('--out', help='output directory')
    common.add_argument('--jobs', type=int, help='worker processes')
    common.add_argument('--reuse', action='store_true', help='skip equations whose cached result matches the config')
    common.add_argument('--trajectories', action='store_true', help='write per-start trajectory logs')
    common.add_argument('--gp-runs', dest='gp_runs', type=int)
    common.add_argument('--gp-budget', dest='gp_budget', type=int)

    parser = argparse.ArgumentParser(prog='dagp', description='Dimensionally-aware symbolic regression experiments')
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', '-v', action='store_true')
    verbosity.add_argument('--quiet', '-q', action='store_true')

    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('list', parents=[common], help='list the equation registry')
    sub.add_parser('enum', parents=[common], help='list initial monomials')
    sub.add_parser('search', parents=[common], help='run the greedy local search')
    sub.add_parser('lon', parents=[common], help='build LONs and graph metrics')
    sub.add_parser('gp', parents=[common], help='run the GP baseline')
    report = sub.add_parser('report', parents=[common], help='merge result tables')
    report.add_argument('directory', nargs='?', help='results directory (default: --out)')
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then --config, then environment, then flags"""
    cfg = load_config(args.config) if args.config else RunConfig()
    cfg = apply_env(cfg)
    return with_flags(
        cfg,
        eq=args.eq, mode=args.mode, exp_range=args.exp_range, const_set=args.const_set,
        op_order=args.op_order, data=args.data, seed=args.seed, n=args.n, out=args.out,
        jobs=args.jobs, trajectories=args.trajectories, gp_runs=args.gp_runs, gp_budget=args.gp_budget,
    )


def load_dataset(spec: EquationSpec, cfg: RunConfig) -> Dataset:
    """Synthetic data unless cfg.data points at real tables"""
    if cfg.data is None:
        return generate_synthetic(spec, cfg.n, cfg.seed)

    if '{id}' in cfg.data:
        path = Path(cfg.data.format(id=spec.id))
    elif Path(cfg.data).is_dir():
        path = Path(cfg.data) / spec.id
    else:
        path = Path(cfg.data)
    return sample_uniform(load_table(path, spec), cfg.n, cfg.seed)


def _unit_digest(digest: str, command: str, equation: str, mode: str) -> str:
    return hashlib.sha256(f"{digest}:{command}:{equation}:{mode}".encode('utf-8')).hexdigest()


def _versions() -> Dict[str, str]:
    return {
        'dagp': __version__,
        'python': platform.python_version(),
        'numpy': np.__version__,
        'networkx': nx.__version__,
    }


def write_manifest(out: Path, command: str, cfg: RunConfig, extra: Optional[Dict] = None) -> Path:
    """Config, digest, seeds and versions next to the outputs"""
    data = {
        'command': command,
        'config': config_to_dict(cfg),
        'seeds': {'data': cfg.seed, 'random_clustering': cfg.seed, 'gp': cfg.gp.seed},
        'versions': _versions(),
    }
    if extra:
        data.update(extra)
    path = out / f"manifest_{command}.json"
    save_cache(path, data, config_digest(cfg))
    return path


def _cached(path: Path, digest: str, reuse: bool) -> Optional[Dict]:
    if reuse and is_cache_valid(path, digest):
        logger.info(f"Reusing {path}")
        return load_cache(path)['data']
    return None


def cmd_list(cfg: RunConfig, specs: Sequence[EquationSpec]) -> int:
    for spec in specs:
        variables = ', '.join(f"{name} {format_signature(sig)}" for name, sig in zip(spec.names, spec.signatures))
        print(f"{spec.id:<10} p={spec.arity} units={spec.table_units} target={describe(spec.target)}  {spec.text}")
        print(f"{'':<10} {variables}")
    return EXIT_OK


def cmd_enum(cfg: RunConfig, specs: Sequence[EquationSpec], out: Path) -> int:
    for spec in specs:
        candidates = enumerate_with_restart(spec, cfg.neighbourhood.exp_range, cfg.search.max_widenings)
        lines = [f"{e.prefix}\t{to_infix(e, spec.names)}\t{format_signature(e.sig)}" for e in candidates]
        path = out / 'enum' / f"{spec.id}.txt"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
        print(f"# {spec.id}: {len(candidates)} candidates")
        for e in candidates:
            print(e.prefix)
    write_manifest(out, 'enum', cfg)
    return EXIT_OK


def _search_row(spec: EquationSpec, d: Dataset, cfg: RunConfig, mode: str, out: Path, jobs: int) -> Dict:
    search = replace(cfg.search, scaled=mode_is_scaled(mode))
    results = search_all(spec, d, cfg.neighbourhood, search, jobs=jobs)
    if cfg.trajectories:
        write_trajectory_log(out / 'trajectories' / mode / f"{spec.id}.jsonl", results, spec.names)

    best = best_result(results)
    return {
        'equation': spec.id,
        'starts': len(results),
        'evaluations': total_evaluations(results),
        'hit_evaluation': global_hit_evaluation(results, search.counting),
        'hits': sum(1 for r in results if r.hit),
        'best_mse': best.fitness.mse,
        'best_expression': to_infix(best.optimum, spec.names),
    }


def _search_unit(spec: EquationSpec, cfg: RunConfig, mode: str, out: Path, reuse: bool, jobs: int) -> Dict:
    cache_path = out / 'search' / mode / f"{spec.id}.json"
    unit = _unit_digest(config_digest(cfg), 'search', spec.id, mode)
    row = _cached(cache_path, unit, reuse)
    if row is None:
        row = _search_row(spec, load_dataset(spec, cfg), cfg, mode, out, jobs)
        save_cache(cache_path, json_safe(row), unit)
    return row


def _lon_unit(spec: EquationSpec, cfg: RunConfig, mode: str, out: Path, reuse: bool, jobs: int) -> Dict:
    digest = config_digest(cfg)
    cache_path = out / 'lon' / mode / f"{spec.id}.json"
    unit = _unit_digest(digest, 'lon', spec.id, mode)
    cached = _cached(cache_path, unit, reuse)
    if cached is not None:
        return cached

    search = replace(cfg.search, scaled=mode_is_scaled(mode))
    lon = build_lon(spec, load_dataset(spec, cfg), cfg.neighbourhood, search, digest=digest, jobs=jobs)
    suffixes = {'dot': '.dot', 'graphml': '.graphml', 'csv': '.csv'}
    for fmt in cfg.formats:
        export_graph(lon, fmt, out / 'lon' / mode / f"{spec.id}{suffixes[fmt]}")
    write_degree_csv(out / 'lon' / mode / f"{spec.id}_degrees.csv", lon)

    row = asdict(metrics_row(lon, cfg.cr_samples, cfg.seed))
    save_cache(cache_path, row, unit)
    return row


def _gp_unit(spec: EquationSpec, cfg: RunConfig, mode: str, out: Path, reuse: bool, jobs: int) -> Dict:
    cache_path = out / 'gp' / mode / f"{spec.id}.json"
    unit = _unit_digest(config_digest(cfg), 'gp', spec.id, mode)
    row = _cached(cache_path, unit, reuse)
    if row is None:
        gp_cfg = replace(cfg.gp, scaled=mode_is_scaled(mode))
        outcomes = run_many(spec, load_dataset(spec, cfg), gp_cfg, jobs=jobs)
        write_outcomes_jsonl(out / 'gp' / mode / f"{spec.id}.jsonl", outcomes, spec.id, mode)
        row = {
            'equation': spec.id,
            'runs': len(outcomes),
            'successes': sum(1 for o in outcomes if o.success),
            'total_evaluations': sum(o.evaluations for o in outcomes),
            'estimate': estimate_evaluations(outcomes),
        }
        save_cache(cache_path, row, unit)
    return row


_UNITS = {'search': _search_unit, 'lon': _lon_unit, 'gp': _gp_unit}


def _unit_worker(args) -> Dict:
    # Child process: the equation is looked up again since its formula is a lambda
    command, equation_id, cfg, mode, out, reuse = args
    return _UNITS[command](find_equation(equation_id), cfg, mode, out, reuse, 1)


def run_units(command: str, specs: Sequence[EquationSpec], cfg: RunConfig, mode: str, out: Path,
              reuse: bool, progress: bool) -> List[Dict]:
    """
    One row per equation, in input order.
    With several equations and jobs > 1 the equations run in worker processes,
    each writing only its own per-equation files; a single equation spreads
    its starts (or GP runs) over the workers instead
    """
    desc = f"{command} {mode}"
    if cfg.jobs > 1 and len(specs) > 1:
        tasks = [(command, spec.id, cfg, mode, out, reuse) for spec in specs]
        with ProcessPoolExecutor(max_workers=min(cfg.jobs, len(specs))) as pool:
            return list(tqdm(pool.map(_unit_worker, tasks), total=len(tasks), desc=desc, disable=not progress))
    return [_UNITS[command](spec, cfg, mode, out, reuse, cfg.jobs) for spec in tqdm(specs, desc=desc, disable=not progress)]


def cmd_search(cfg: RunConfig, specs: Sequence[EquationSpec], out: Path, reuse: bool, progress: bool) -> int:
    for mode in cfg.modes:
        rows = run_units('search', specs, cfg, mode, out, reuse, progress)
        write_rows_csv(out / f"search_{mode}.csv", SEARCH_COLUMNS, [
            [r['equation'], r['starts'], r['evaluations'], format_hit_cell(r['hit_evaluation']),
             r['hits'], format_mse(r['best_mse'] if r['best_mse'] is not None else float('inf')), r['best_expression']]
            for r in rows
        ])
        solved = sum(1 for r in rows if r['hit_evaluation'] is not None)
        logger.info(f"search {mode}: {solved}/{len(rows)} equations solved")
    write_manifest(out, 'search', cfg)
    return EXIT_OK


def cmd_lon(cfg: RunConfig, specs: Sequence[EquationSpec], out: Path, reuse: bool, progress: bool) -> int:
    for mode in cfg.modes:
        rows = [MetricsRow(**r) for r in run_units('lon', specs, cfg, mode, out, reuse, progress)]
        write_metrics_csv(out / f"lon_{mode}.csv", rows)
        write_metrics_json(out / f"lon_{mode}.json", rows)
    write_manifest(out, 'lon', cfg)
    return EXIT_OK


def cmd_gp(cfg: RunConfig, specs: Sequence[EquationSpec], out: Path, reuse: bool, progress: bool) -> int:
    for mode in cfg.modes:
        rows = run_units('gp', specs, cfg, mode, out, reuse, progress)
        write_rows_csv(out / f"gp_{mode}.csv", GP_COLUMNS, [
            [r['equation'], r['runs'], r['successes'], r['total_evaluations'],
             '-' if r['estimate'] is None else f"{r['estimate']:.1f}"]
            for r in rows
        ])
    write_manifest(out, 'gp', cfg, {'gp': gp_metadata(cfg.gp)})
    return EXIT_OK


def _mode_of(path: str, prefix: str) -> str:
    return Path(path).stem[len(prefix):]


def cmd_report(directory: Path) -> int:
    """
    Merge search_*.csv / gp_*.csv into an evaluations table and lon_*.csv
    into a side-by-side metrics table
    """
    evaluations: Dict[str, Dict[str, str]] = {}
    columns: List[str] = []

    for path in sorted(glob.glob(str(directory / 'search_*.csv'))):
        column = f"dagp {_mode_of(path, 'search_')}"
        columns.append(column)
        for r in read_rows_csv(path):
            evaluations.setdefault(r['equation'], {})[column] = format_hit_cell(parse_optional_int(r['hit_evaluation']))

    for path in sorted(glob.glob(str(directory / 'gp_*.csv'))):
        column = f"gp {_mode_of(path, 'gp_')}"
        columns.append(column)
        for r in read_rows_csv(path):
            estimate = parse_optional_float(r['estimate'])
            evaluations.setdefault(r['equation'], {})[column] = format_gp_cell(estimate, int(r['successes']))

    lon_paths = sorted(glob.glob(str(directory / 'lon_*.csv')))
    if not columns and not lon_paths:
        raise ConfigError(f"no search_*, gp_* or lon_* tables in {directory}")

    if columns:
        rows = [[eq] + [cells.get(c, '') for c in columns] for eq, cells in evaluations.items()]
        write_rows_csv(directory / 'report_evaluations.csv', ['equation'] + columns, rows)
        print('\t'.join(['equation'] + columns))
        for row in rows:
            print('\t'.join(row))

    if lon_paths:
        metrics: Dict[str, Dict[str, str]] = {}
        header = ['equation']
        for path in lon_paths:
            mode = _mode_of(path, 'lon_')
            table = read_rows_csv(path)
            names = [k for k in (table[0].keys() if table else []) if k != 'equation']
            header.extend(f"{name} {mode}" for name in names)
            for r in table:
                cells = metrics.setdefault(r['equation'], {})
                for name in names:
                    cells[f"{name} {mode}"] = r[name]
        write_rows_csv(directory / 'report_lon.csv', header,
                       [[eq] + [cells.get(h, '') for h in header[1:]] for eq, cells in metrics.items()])

    logger.info(f"Reports written to {directory}")
    return EXIT_OK


def run(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    progress = not args.quiet

    if args.command == 'report':
        return cmd_report(Path(args.directory or cfg.out))

    ensure_unit_tables_exist()
    specs = select_equations(cfg, registry())
    if args.command == 'list':
        return cmd_list(cfg, specs)

    out = init_output_directory(cfg.out)
    if args.command == 'enum':
        return cmd_enum(cfg, specs, out)
    if args.command == 'search':
        return cmd_search(cfg, specs, out, args.reuse, progress)
    if args.command == 'lon':
        return cmd_lon(cfg, specs, out, args.reuse, progress)
    return cmd_gp(cfg, specs, out, args.reuse, progress)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose, args.quiet)

    try:
        return run(args)
    except _USAGE_ERRORS as e:
        logger.error(f"{e}", exc_info=args.verbose)
        return EXIT_USAGE
    except (DagpError, OSError) as e:
        logger.error(f"Command '{args.command}' failed: {e}", exc_info=True)
        return EXIT_RUNTIME


if __name__ == '__main__':
    sys.exit(main())
