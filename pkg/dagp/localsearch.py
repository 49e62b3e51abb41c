"""
Greedy best-improvement local search
Every initial monomial is descended independently; evaluation counts are
kept per start and combined afterwards into one global counter
"""

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from dagp.config import NeighbourhoodConfig, SearchConfig
from dagp.dataset import Dataset, EquationSpec, find_equation, registry
from dagp.errors import UnknownEquationError
from dagp.expr import Expr, parse_prefix, to_infix
from dagp.fitness import FitnessEvaluator, FitnessValue, is_hit
from dagp.initializer import enumerate_with_restart
from dagp.neighbourhood import neighbours


logger = logging.getLogger(__name__)


@dataclass
class SearchResult:
    """
    Outcome of one greedy descent

    trajectory holds every accepted solution, start first and optimum last.
    evaluations counts the fitness calls of this start only (the start's own
    evaluation included); hit_evaluation is that local counter at the first
    hit, which need not be the optimum.
    """
    start_index: int
    optimum: Expr
    fitness: FitnessValue
    trajectory: List[Tuple[Expr, FitnessValue]] = field(default_factory=list)
    evaluations: int = 0
    hit: bool = False
    hit_evaluation: Optional[int] = None

    @property
    def start(self) -> Expr:
        return self.trajectory[0][0]

    @property
    def steps(self) -> int:
        return len(self.trajectory) - 1


def greedy_search(
    start: Expr,
    d: Dataset,
    spec: EquationSpec,
    cfg: NeighbourhoodConfig,
    scaled: bool = False,
    evaluator: Optional[FitnessEvaluator] = None,
    start_index: int = 0
) -> SearchResult:
    """
    Descend from start until no neighbour strictly improves the MSE

    Among equally good improving neighbours the first one in neighbour order
    wins.

    Args:
        start: Initial expression with the target signature
        d: Dataset to fit
        spec: Equation
        cfg: Neighbourhood settings
        scaled: Score with linear scaling
        evaluator: Shared evaluator (keeps the memo warm across starts);
            a fresh one is created when omitted
        start_index: Position of start in the initial list

    Returns:
        SearchResult with a local evaluation count
    """
    if evaluator is None:
        evaluator = FitnessEvaluator(d, scaled)
    base = evaluator.evaluations

    current = start
    current_fitness = evaluator(start)
    trajectory = [(current, current_fitness)]
    hit_evaluation = 1 if is_hit(current_fitness) else None

    while True:
        best: Optional[Expr] = None
        best_fitness = current_fitness
        for candidate in neighbours(current, spec, cfg):
            f = evaluator(candidate)
            if hit_evaluation is None and is_hit(f):
                hit_evaluation = evaluator.evaluations - base
            if f.better_than(best_fitness):
                best, best_fitness = candidate, f
        if best is None:
            break
        current, current_fitness = best, best_fitness
        trajectory.append((current, current_fitness))
        logger.debug(f"{spec.id} start {start_index} step {len(trajectory) - 1}: mse={current_fitness.mse:.6g} {current.prefix}")

    return SearchResult(
        start_index=start_index,
        optimum=current,
        fitness=current_fitness,
        trajectory=trajectory,
        evaluations=evaluator.evaluations - base,
        hit=is_hit(current_fitness),
        hit_evaluation=hit_evaluation,
    )


def _search_worker(args) -> SearchResult:
    # Runs in a child process; the equation is looked up again because its
    # formula is a lambda and cannot be pickled
    equation_id, X, y, text, index, cfg, scaled = args
    spec = find_equation(equation_id)
    d = Dataset(X, y, spec)
    start = parse_prefix(text, spec.signatures)
    return greedy_search(start, d, spec, cfg, scaled, start_index=index)


def _can_fork(spec: EquationSpec) -> bool:
    try:
        return find_equation(spec.id, registry()) == spec
    except UnknownEquationError:
        return False


def search_all(
    spec: EquationSpec,
    d: Dataset,
    cfg: NeighbourhoodConfig,
    search: Optional[SearchConfig] = None,
    jobs: int = 1,
    progress: bool = False
) -> List[SearchResult]:
    """
    One greedy descent per initial candidate, in enumeration order

    Args:
        spec: Equation
        d: Dataset
        cfg: Neighbourhood settings
        search: Scaling flag and widening limit
        jobs: Worker processes; results are re-ordered by start index
        progress: Show a tqdm bar over the starts

    Returns:
        SearchResult per start

    Raises:
        NoValidInitializationError: if no initial candidate exists
    """
    search = search or SearchConfig()
    starts = enumerate_with_restart(spec, cfg.exp_range, search.max_widenings)
    logger.info(f"{spec.id}: {len(starts)} initial candidates ({'scaled' if search.scaled else 'raw'})")

    if jobs > 1 and len(starts) > 1 and not _can_fork(spec):
        logger.warning(f"{spec.id} is not a registry equation, searching sequentially")
        jobs = 1

    if jobs > 1 and len(starts) > 1:
        tasks = [(spec.id, d.X, d.y, s.prefix, i, cfg, search.scaled) for i, s in enumerate(starts)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(tqdm(pool.map(_search_worker, tasks), total=len(tasks), desc=spec.id, disable=not progress))
        results.sort(key=lambda r: r.start_index)
    else:
        evaluator = FitnessEvaluator(d, search.scaled)
        results = [
            greedy_search(s, d, spec, cfg, search.scaled, evaluator, start_index=i)
            for i, s in enumerate(tqdm(starts, desc=spec.id, disable=not progress))
        ]

    hit = global_hit_evaluation(results, search.counting)
    if hit is not None:
        logger.info(f"{spec.id}: hit at global evaluation {hit}")
    return results


def total_evaluations(results: Sequence[SearchResult]) -> int:
    return sum(r.evaluations for r in results)


def global_hit_evaluation(results: Sequence[SearchResult], counting: str = 'sequential') -> Optional[int]:
    """
    Global evaluation counter at the first hit, rebuilt from per-start counts

    Args:
        results: Results in enumeration order
        counting: 'sequential' runs each start to completion before the
            next; 'starts-first' evaluates every start once and then
            descends from each in order

    Returns:
        Counter value, or None when no start hit
    """
    if counting == 'starts-first':
        for position, r in enumerate(results):
            if r.hit_evaluation == 1:
                return position + 1
        offset = len(results)
        for r in results:
            if r.hit_evaluation is not None:
                return offset + r.hit_evaluation - 1
            offset += r.evaluations - 1
        return None

    if counting != 'sequential':
        raise ValueError(f"unknown counting convention '{counting}'")
    offset = 0
    for r in results:
        if r.hit_evaluation is not None:
            return offset + r.hit_evaluation
        offset += r.evaluations
    return None


def best_result(results: Sequence[SearchResult]) -> Optional[SearchResult]:
    """Lowest final MSE; the earliest start wins ties"""
    best = None
    for r in results:
        if best is None or r.fitness.better_than(best.fitness):
            best = r
    return best


def write_trajectory_log(path: Union[str, Path], results: Sequence[SearchResult], names: Optional[Sequence[str]] = None) -> None:
    """
    One JSON record per accepted step

    Args:
        path: Output .jsonl file
        results: Search results
        names: Variable names for the infix text
    """
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        for r in results:
            for step, (e, fit) in enumerate(r.trajectory):
                record = {
                    'start': r.start_index,
                    'step': step,
                    'expression': to_infix(e, names),
                    'prefix': e.prefix,
                    'mse': fit.mse if np.isfinite(fit.mse) else None,
                    'a': fit.scale_a,
                    'b': fit.scale_b,
                }
                f.write(json.dumps(record) + '\n')
    logger.debug(f"Wrote trajectories of {len(results)} starts to {path}")
