"""
Baseline steady-state genetic programming
Dimension-blind symbolic regression over + - * / sin cos with variables as
the only terminals; used as the comparison point for the local search
"""

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from dagp.config import GpConfig
from dagp.dataset import Dataset, EquationSpec, find_equation, registry
from dagp.errors import UnknownEquationError
from dagp.fitness import FitnessValue, is_hit, score_outputs


logger = logging.getLogger(__name__)

ARITY = {'add': 2, 'sub': 2, 'mul': 2, 'div': 2, 'sin': 1, 'cos': 1, 'var': 0}
SYMBOLS = {'add': '+', 'sub': '-', 'mul': '*', 'div': '/'}

GpPath = Tuple[int, ...]


class GpNode:
    """Immutable GP tree node; op 'var' carries the variable index"""

    __slots__ = ('op', 'children', 'index')

    def __init__(self, op: str, children: Tuple['GpNode', ...] = (), index: int = 0):
        self.op = op
        self.children = tuple(children)
        self.index = index

    @property
    def arity(self) -> int:
        return len(self.children)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GpNode) and to_prefix(self) == to_prefix(other)

    def __hash__(self) -> int:
        return hash(to_prefix(self))

    def __repr__(self) -> str:
        return f"GpNode({to_prefix(self)})"


def terminal(index: int) -> GpNode:
    return GpNode('var', index=index)


def node(op: str, *children: GpNode) -> GpNode:
    if ARITY[op] != len(children):
        raise ValueError(f"{op} takes {ARITY[op]} operands, got {len(children)}")
    return GpNode(op, children)


def to_prefix(t: GpNode) -> str:
    if t.op == 'var':
        return f"x{t.index}"
    return '(' + ' '.join([t.op] + [to_prefix(c) for c in t.children]) + ')'


def to_infix(t: GpNode, names: Optional[Sequence[str]] = None) -> str:
    if t.op == 'var':
        return names[t.index] if names else f"x{t.index}"
    if t.arity == 1:
        return f"{t.op}({to_infix(t.children[0], names)})"
    left, right = (to_infix(c, names) for c in t.children)
    return f"({left} {SYMBOLS[t.op]} {right})"


def depth(t: GpNode) -> int:
    """Root is at depth 0"""
    if not t.children:
        return 0
    return 1 + max(depth(c) for c in t.children)


def size(t: GpNode) -> int:
    return 1 + sum(size(c) for c in t.children)


def nodes(t: GpNode) -> List[Tuple[GpPath, GpNode]]:
    """(path, subtree) pairs in pre-order"""
    out: List[Tuple[GpPath, GpNode]] = []

    def walk(n: GpNode, path: GpPath) -> None:
        out.append((path, n))
        for i, c in enumerate(n.children):
            walk(c, path + (i,))

    walk(t, ())
    return out


def subtree(t: GpNode, path: GpPath) -> GpNode:
    for step in path:
        t = t.children[step]
    return t


def replace(t: GpNode, path: GpPath, new: GpNode) -> GpNode:
    if not path:
        return new
    children = list(t.children)
    children[path[0]] = replace(children[path[0]], path[1:], new)
    return GpNode(t.op, tuple(children), t.index)


def evaluate(t: GpNode, X: np.ndarray) -> np.ndarray:
    """Vectorised output; division by zero gives inf/nan rather than raising"""
    with np.errstate(all='ignore'):
        return _evaluate(t, X)


def _evaluate(t: GpNode, X: np.ndarray) -> np.ndarray:
    if t.op == 'var':
        return X[:, t.index]
    args = [_evaluate(c, X) for c in t.children]
    if t.op == 'add':
        return args[0] + args[1]
    if t.op == 'sub':
        return args[0] - args[1]
    if t.op == 'mul':
        return args[0] * args[1]
    if t.op == 'div':
        return args[0] / args[1]
    if t.op == 'sin':
        return np.sin(args[0])
    return np.cos(args[0])


# Tree generation

def _pick(rng: np.random.Generator, items: Sequence):
    return items[int(rng.integers(len(items)))]


def random_tree(rng: np.random.Generator, functions: Sequence[str], n_vars: int, max_depth: int, method: str) -> GpNode:
    """
    Koza 'full' or 'grow' tree

    full puts functions on every level above max_depth; grow picks uniformly
    among functions and terminals until max_depth forces a terminal.
    """
    def build(level: int) -> GpNode:
        if level >= max_depth:
            return terminal(int(rng.integers(n_vars)))
        if method == 'grow' and level > 0 and rng.integers(len(functions) + n_vars) >= len(functions):
            return terminal(int(rng.integers(n_vars)))
        op = _pick(rng, functions)
        return GpNode(op, tuple(build(level + 1) for _ in range(ARITY[op])))

    return build(0)


def ramped_half_and_half(rng: np.random.Generator, cfg: GpConfig, n_vars: int) -> List[GpNode]:
    """Depths cycle over min_init_depth..max_depth, alternating grow and full"""
    depths = list(range(cfg.min_init_depth, cfg.max_depth + 1))
    population = []
    for i in range(cfg.population_size):
        method = 'grow' if (i // len(depths)) % 2 == 0 else 'full'
        population.append(random_tree(rng, cfg.function_set, n_vars, depths[i % len(depths)], method))
    return population


# Crossover: each takes two parents and returns one offspring

def _common_region(a: GpNode, b: GpNode, path: GpPath = ()) -> List[GpPath]:
    out = [path]
    if a.arity == b.arity:
        for i, (ca, cb) in enumerate(zip(a.children, b.children)):
            out.extend(_common_region(ca, cb, path + (i,)))
    return out


def crossover_subtree(a: GpNode, b: GpNode, rng: np.random.Generator) -> GpNode:
    """Replace a random subtree of a with a random subtree of b"""
    path, _ = _pick(rng, nodes(a))
    _, donor = _pick(rng, nodes(b))
    return replace(a, path, donor)


def crossover_one_point(a: GpNode, b: GpNode, rng: np.random.Generator) -> GpNode:
    """
    Both parents are walked over their common region (nodes of equal arity
    from the root down); one point in that region is chosen and b's subtree
    there replaces a's
    """
    path = _pick(rng, _common_region(a, b))
    return replace(a, path, subtree(b, path))


def crossover_size_fair(a: GpNode, b: GpNode, rng: np.random.Generator) -> GpNode:
    """
    Pick a point in a, then a donor in b no larger than twice the removed
    subtree plus one, so offspring size stays close to the parent's
    """
    path, removed = _pick(rng, nodes(a))
    limit = 2 * size(removed) + 1
    donors = [n for _, n in nodes(b) if size(n) <= limit]
    return replace(a, path, _pick(rng, donors))


def crossover_uniform(a: GpNode, b: GpNode, rng: np.random.Generator) -> GpNode:
    """
    Inside the common region each node label comes from either parent with
    probability 1/2; on its boundary whole subtrees are taken from either
    parent
    """
    def mix(x: GpNode, y: GpNode) -> GpNode:
        if x.arity == y.arity and x.arity > 0:
            source = x if rng.random() < 0.5 else y
            return GpNode(source.op, tuple(mix(cx, cy) for cx, cy in zip(x.children, y.children)))
        return x if rng.random() < 0.5 else y

    return mix(a, b)


def crossover_context_preserving(a: GpNode, b: GpNode, rng: np.random.Generator) -> GpNode:
    """Swap subtrees only between points with identical coordinates in both parents"""
    shared = sorted({p for p, _ in nodes(a)} & {p for p, _ in nodes(b)})
    path = _pick(rng, shared)
    return replace(a, path, subtree(b, path))


# Mutation: each takes one tree and returns the mutant

def mutate_subtree(t: GpNode, rng: np.random.Generator, cfg: GpConfig, n_vars: int) -> GpNode:
    """Replace a random subtree with a freshly grown one that fits the depth limit"""
    path, _ = _pick(rng, nodes(t))
    room = max(0, cfg.max_depth - len(path))
    grown = random_tree(rng, cfg.function_set, n_vars, int(rng.integers(room + 1)), 'grow')
    return replace(t, path, grown)


def mutate_hoist(t: GpNode, rng: np.random.Generator, cfg: GpConfig, n_vars: int) -> GpNode:
    """A random subtree becomes the whole individual"""
    return _pick(rng, nodes(t))[1]


def mutate_node_replace(t: GpNode, rng: np.random.Generator, cfg: GpConfig, n_vars: int) -> GpNode:
    """Swap one node's function for another of the same arity, or one variable for another"""
    path, target = _pick(rng, nodes(t))
    if target.op == 'var':
        others = [i for i in range(n_vars) if i != target.index]
        return replace(t, path, terminal(_pick(rng, others))) if others else t
    others = [op for op in cfg.function_set if ARITY[op] == target.arity and op != target.op]
    if not others:
        return t
    return replace(t, path, GpNode(_pick(rng, others), target.children))


def mutate_permutation(t: GpNode, rng: np.random.Generator, cfg: GpConfig, n_vars: int) -> GpNode:
    """Swap the two operands of a random binary node"""
    binaries = [(p, n) for p, n in nodes(t) if n.arity == 2]
    if not binaries:
        return t
    path, target = _pick(rng, binaries)
    return replace(t, path, GpNode(target.op, target.children[::-1]))


def mutate_shrink(t: GpNode, rng: np.random.Generator, cfg: GpConfig, n_vars: int) -> GpNode:
    """Replace a random function node with a random terminal"""
    functions = [p for p, n in nodes(t) if n.arity > 0]
    if not functions:
        return t
    return replace(t, _pick(rng, functions), terminal(int(rng.integers(n_vars))))


CROSSOVERS: Dict[str, Callable[[GpNode, GpNode, np.random.Generator], GpNode]] = {
    'subtree': crossover_subtree,
    'one_point': crossover_one_point,
    'size_fair': crossover_size_fair,
    'uniform': crossover_uniform,
    'context_preserving': crossover_context_preserving,
}

MUTATIONS: Dict[str, Callable[[GpNode, np.random.Generator, GpConfig, int], GpNode]] = {
    'subtree': mutate_subtree,
    'hoist': mutate_hoist,
    'node_replace': mutate_node_replace,
    'permutation': mutate_permutation,
    'shrink': mutate_shrink,
}


@dataclass
class GpRunOutcome:
    """One GP run; evaluations is the counter at the first hit, else the total spent"""
    seed: int
    success: bool
    evaluations: int
    best_mse: float
    best_expression: str


def _bounded(produce: Callable[[], GpNode], fallback: GpNode, max_depth: int) -> GpNode:
    # one retry, then fall back to a copy of the parent
    for _ in range(2):
        child = produce()
        if depth(child) <= max_depth:
            return child
    logger.debug(f"Offspring over depth {max_depth} twice, copying parent")
    return fallback


def run_gp(spec: EquationSpec, d: Dataset, cfg: GpConfig, seed: Optional[int] = None) -> GpRunOutcome:
    """
    One steady-state GP run

    Each step draws three distinct individuals, eliminates the worst, crosses
    the other two and mutates the offspring with probability
    cfg.mutation_rate; the offspring takes the eliminated slot. Evaluations
    of the initial population count toward the budget.

    Args:
        spec: Equation (variable names for the reported expression)
        d: Dataset
        cfg: GP parameters
        seed: RNG seed, cfg.seed when omitted

    Returns:
        GpRunOutcome
    """
    seed = cfg.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    n_vars = d.X.shape[1]

    evaluations = 0

    def score(t: GpNode) -> FitnessValue:
        nonlocal evaluations
        evaluations += 1
        return score_outputs(evaluate(t, d.X), d.y, cfg.scaled)

    def outcome(t: GpNode, f: FitnessValue, success: bool) -> GpRunOutcome:
        return GpRunOutcome(seed=seed, success=success, evaluations=evaluations,
                            best_mse=f.mse, best_expression=to_infix(t, spec.names))

    population = ramped_half_and_half(rng, cfg, n_vars)
    fitness: List[FitnessValue] = []
    for t in population:
        f = score(t)
        fitness.append(f)
        if is_hit(f):
            logger.debug(f"{spec.id} seed {seed}: hit during initialisation at {evaluations}")
            return outcome(t, f, True)

    crossovers = list(cfg.crossovers)
    mutations = list(cfg.mutations)
    while evaluations < cfg.budget:
        drawn = [int(i) for i in rng.choice(len(population), size=cfg.tournament_size, replace=False)]
        worst = max(drawn, key=lambda i: fitness[i].mse)
        parents = [i for i in drawn if i != worst]
        a, b = population[parents[0]], population[parents[1]]

        cx = CROSSOVERS[_pick(rng, crossovers)]
        child = _bounded(lambda: cx(a, b, rng), a, cfg.max_depth)
        if rng.random() < cfg.mutation_rate:
            mut = MUTATIONS[_pick(rng, mutations)]
            parent = child
            child = _bounded(lambda: mut(parent, rng, cfg, n_vars), parent, cfg.max_depth)

        f = score(child)
        population[worst] = child
        fitness[worst] = f
        if is_hit(f):
            logger.debug(f"{spec.id} seed {seed}: hit at evaluation {evaluations}")
            return outcome(child, f, True)

    best = min(range(len(population)), key=lambda i: fitness[i].mse)
    return outcome(population[best], fitness[best], False)


def _gp_worker(args) -> GpRunOutcome:
    # the closed form is a lambda, so it is looked up again in the child
    equation_id, X, y, cfg, seed = args
    spec = find_equation(equation_id)
    return run_gp(spec, Dataset(X, y, spec), cfg, seed)


def run_many(
    spec: EquationSpec,
    d: Dataset,
    cfg: GpConfig,
    seeds: Optional[Sequence[int]] = None,
    jobs: int = 1,
    progress: bool = False
) -> List[GpRunOutcome]:
    """
    Independent runs, one per seed

    Args:
        spec: Equation
        d: Dataset
        cfg: GP parameters
        seeds: Defaults to cfg.seed .. cfg.seed + cfg.runs - 1
        jobs: Worker processes
        progress: Show a tqdm bar

    Returns:
        Outcomes in seed order
    """
    seeds = list(seeds) if seeds is not None else [cfg.seed + i for i in range(cfg.runs)]

    forkable = True
    try:
        forkable = find_equation(spec.id, registry()) == spec
    except UnknownEquationError:
        forkable = False

    if jobs > 1 and len(seeds) > 1 and forkable:
        tasks = [(spec.id, d.X, d.y, cfg, s) for s in seeds]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(tqdm(pool.map(_gp_worker, tasks), total=len(tasks), desc=f"GP {spec.id}", disable=not progress))
    else:
        outcomes = [run_gp(spec, d, cfg, s) for s in tqdm(seeds, desc=f"GP {spec.id}", disable=not progress)]

    successes = sum(1 for o in outcomes if o.success)
    logger.info(f"{spec.id}: GP solved {successes}/{len(outcomes)} runs")
    return outcomes


def estimate_evaluations(outcomes: Sequence[GpRunOutcome]) -> Optional[float]:
    """Total evaluations over all runs divided by the successful runs; None without successes"""
    successes = sum(1 for o in outcomes if o.success)
    if successes == 0:
        return None
    return sum(o.evaluations for o in outcomes) / successes


def gp_metadata(cfg: GpConfig) -> Dict:
    """Conventions recorded next to GP outputs"""
    return {
        'init_counts_toward_budget': True,
        'depth_root': 0,
        'terminals': 'variables',
        'config': asdict(cfg),
    }


def write_outcomes_jsonl(path: Union[str, Path], outcomes: Sequence[GpRunOutcome], equation: str = '', mode: str = '') -> None:
    """One JSON record per run"""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        for o in outcomes:
            record = {'equation': equation, 'mode': mode, **asdict(o)}
            if not np.isfinite(record['best_mse']):
                record['best_mse'] = None
            f.write(json.dumps(record) + '\n')
