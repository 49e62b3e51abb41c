"""
Run configuration
Defaults -> JSON preset/manifest -> environment (.env) -> command-line flags
"""

import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

from dagp.errors import ConfigError


logger = logging.getLogger(__name__)

# Default order of the neighbourhood operators
OPERATORS = ('replace', 'mul_int', 'div_int', 'add_comm', 'sub_comm')

NO_SCALING = 'no-scaling'
LINEAR_SCALING = 'linear-scaling'
MODES = (NO_SCALING, LINEAR_SCALING)

COUNTING_CONVENTIONS = ('sequential', 'starts-first')

# 'subtree' leaves whole-tree replacement out of the basin-adjacency test
EDGE_SCOPES = ('subtree', 'full')

GP_FUNCTIONS = ('add', 'sub', 'mul', 'div', 'sin', 'cos')
GP_CROSSOVERS = ('subtree', 'one_point', 'size_fair', 'uniform', 'context_preserving')
GP_MUTATIONS = ('subtree', 'hoist', 'node_replace', 'permutation', 'shrink')

EXPORT_FORMATS = ('dot', 'graphml', 'csv')


@dataclass(frozen=True)
class NeighbourhoodConfig:
    """Knobs of the dimensionally-aware neighbourhood"""
    constants: Tuple[int, ...] = (-3, -2, -1, 1, 2, 3)
    exp_range: Tuple[int, int] = (-3, 3)
    max_size: int = 42
    operator_order: Tuple[str, ...] = OPERATORS
    allow_zero_multiplier: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'constants', tuple(sorted(int(k) for k in self.constants)))
        object.__setattr__(self, 'exp_range', tuple(int(x) for x in self.exp_range))
        object.__setattr__(self, 'operator_order', tuple(self.operator_order))

        if 0 in self.constants and not self.allow_zero_multiplier:
            raise ConfigError("the constant set must not contain 0 (set allow_zero_multiplier to use 0 in multiplications)")
        if len(set(self.constants)) != len(self.constants):
            raise ConfigError(f"duplicate constants in {self.constants}")
        if len(self.exp_range) != 2 or self.exp_range[0] > self.exp_range[1]:
            raise ConfigError(f"invalid exponent range {self.exp_range}")
        if self.max_size < 1:
            raise ConfigError(f"max_size must be >= 1, got {self.max_size}")
        if not self.operator_order:
            raise ConfigError("operator order is empty")
        unknown = [op for op in self.operator_order if op not in OPERATORS]
        if unknown:
            raise ConfigError(f"unknown operators {unknown}; choose from {', '.join(OPERATORS)}")
        if len(set(self.operator_order)) != len(self.operator_order):
            raise ConfigError(f"operator order repeats an operator: {self.operator_order}")


@dataclass(frozen=True)
class SearchConfig:
    """Local search and LON construction settings"""
    scaled: bool = False
    counting: str = 'sequential'
    max_widenings: int = 3
    probe_unrecorded: bool = False
    edge_scope: str = 'subtree'

    def __post_init__(self):
        if self.counting not in COUNTING_CONVENTIONS:
            raise ConfigError(f"unknown counting convention '{self.counting}'")
        if self.edge_scope not in EDGE_SCOPES:
            raise ConfigError(f"unknown edge scope '{self.edge_scope}'; choose from {', '.join(EDGE_SCOPES)}")
        if self.max_widenings < 0:
            raise ConfigError("max_widenings must be >= 0")


@dataclass(frozen=True)
class GpConfig:
    """Baseline steady-state GP parameters"""
    population_size: int = 500
    function_set: Tuple[str, ...] = GP_FUNCTIONS
    mutation_rate: float = 0.5
    max_depth: int = 6
    min_init_depth: int = 2
    crossovers: Tuple[str, ...] = GP_CROSSOVERS
    mutations: Tuple[str, ...] = GP_MUTATIONS
    budget: int = 100000
    runs: int = 50
    tournament_size: int = 3
    scaled: bool = False
    seed: int = 0

    def __post_init__(self):
        for name in ('function_set', 'crossovers', 'mutations'):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.population_size < self.tournament_size:
            raise ConfigError("population must hold at least one tournament")
        if self.tournament_size < 3:
            raise ConfigError("tournament size must be >= 3 (two parents plus one eliminated)")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ConfigError(f"mutation rate {self.mutation_rate} outside [0, 1]")
        if self.max_depth < 1 or not 1 <= self.min_init_depth <= self.max_depth:
            raise ConfigError(f"invalid depth limits {self.min_init_depth}..{self.max_depth}")
        if self.budget < 0 or self.runs < 1:
            raise ConfigError("budget must be >= 0 and runs >= 1")
        for name, allowed in (('function_set', GP_FUNCTIONS), ('crossovers', GP_CROSSOVERS), ('mutations', GP_MUTATIONS)):
            chosen = getattr(self, name)
            if not chosen or any(x not in allowed for x in chosen):
                raise ConfigError(f"{name} must be a non-empty subset of {', '.join(allowed)}")


@dataclass(frozen=True)
class RunConfig:
    """Everything one CLI invocation needs"""
    equations: Tuple[str, ...] = ('all',)
    modes: Tuple[str, ...] = MODES
    neighbourhood: NeighbourhoodConfig = field(default_factory=NeighbourhoodConfig)
    search: SearchConfig = field(default_factory=SearchConfig)
    gp: GpConfig = field(default_factory=GpConfig)
    data: Optional[str] = None
    seed: int = 0
    n: int = 100
    out: str = 'results'
    jobs: int = 1
    cr_samples: int = 100
    formats: Tuple[str, ...] = EXPORT_FORMATS
    trajectories: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'equations', tuple(self.equations))
        object.__setattr__(self, 'modes', tuple(self.modes))
        object.__setattr__(self, 'formats', tuple(self.formats))
        if not self.equations:
            raise ConfigError("no equations selected")
        if not self.modes or any(m not in MODES for m in self.modes):
            raise ConfigError(f"invalid mode in {self.modes}; choose from {', '.join(MODES)}")
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if any(f not in EXPORT_FORMATS for f in self.formats):
            raise ConfigError(f"unknown export format in {self.formats}")


_NESTED = {'neighbourhood': NeighbourhoodConfig, 'search': SearchConfig, 'gp': GpConfig}


def _build(cls, values: Dict[str, Any]):
    known = {f.name for f in fields(cls)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {', '.join(sorted(unknown))}")
    return cls(**values)


def config_from_dict(data: Dict[str, Any]) -> RunConfig:
    """Build a RunConfig from a (possibly partial) JSON dict"""
    if not isinstance(data, dict):
        raise ConfigError(f"configuration must be a JSON object, got {type(data).__name__}")
    values = dict(data)
    try:
        for name, cls in _NESTED.items():
            if name in values:
                values[name] = _build(cls, values[name] or {})
        return _build(RunConfig, values)
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from None


def config_to_dict(cfg: RunConfig) -> Dict[str, Any]:
    """JSON-serialisable form of a RunConfig"""
    return json.loads(json.dumps(asdict(cfg)))


def config_digest(cfg: RunConfig) -> str:
    """SHA-256 of the canonical JSON form"""
    text = json.dumps(config_to_dict(cfg), sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def load_config(path: Union[str, Path]) -> RunConfig:
    """
    Load a JSON preset or a manifest written by a previous run

    Args:
        path: JSON file; manifests keep the config under data.config

    Returns:
        Parsed configuration
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None

    if isinstance(data, dict) and isinstance(data.get('data'), dict) and 'config' in data['data']:
        data = data['data']['config']
    logger.info(f"Loaded configuration from {path}")
    return config_from_dict(data)


def apply_env(cfg: RunConfig) -> RunConfig:
    """Overlay DAGP_OUT / DAGP_JOBS / DAGP_SEED from the environment"""
    changes: Dict[str, Any] = {}
    if os.getenv('DAGP_OUT'):
        changes['out'] = os.getenv('DAGP_OUT')
    try:
        if os.getenv('DAGP_JOBS'):
            changes['jobs'] = int(os.getenv('DAGP_JOBS'))
        if os.getenv('DAGP_SEED'):
            changes['seed'] = int(os.getenv('DAGP_SEED'))
    except ValueError as e:
        raise ConfigError(f"invalid environment setting: {e}") from None
    return replace(cfg, **changes) if changes else cfg


def parse_int_range(text: str) -> Tuple[int, int]:
    """'-3,3', '-3:3' or '3' (meaning -3..3)"""
    parts = [p for p in text.replace(':', ',').split(',') if p.strip()]
    try:
        if len(parts) == 1:
            k = abs(int(parts[0]))
            return -k, k
        if len(parts) == 2:
            return int(parts[0]), int(parts[1])
    except ValueError:
        pass
    raise ConfigError(f"invalid range '{text}'")


def parse_constant_set(text: str) -> Tuple[int, ...]:
    """'-2,-1,1,2' as given, or a single 'k' meaning +-1..k without 0"""
    parts = [p for p in text.split(',') if p.strip()]
    try:
        values = [int(p) for p in parts]
    except ValueError:
        raise ConfigError(f"invalid constant set '{text}'") from None
    if len(values) == 1:
        k = abs(values[0])
        return tuple(x for x in range(-k, k + 1) if x != 0)
    return tuple(values)


def parse_operator_order(text: str) -> Tuple[str, ...]:
    return tuple(p.strip() for p in text.split(',') if p.strip())


def mode_is_scaled(mode: str) -> bool:
    if mode not in MODES:
        raise ConfigError(f"invalid mode '{mode}'")
    return mode == LINEAR_SCALING


def with_flags(cfg: RunConfig, **flags: Any) -> RunConfig:
    """
    Apply command-line overrides; None means "not given"

    Args:
        cfg: Base configuration
        **flags: eq, mode, exp_range, const_set, op_order, data, seed, n,
            out, jobs, gp_runs, gp_budget

    Returns:
        New configuration
    """
    top: Dict[str, Any] = {}
    hood: Dict[str, Any] = {}
    gp: Dict[str, Any] = {}

    if flags.get('eq'):
        top['equations'] = tuple(flags['eq'])
    if flags.get('mode'):
        top['modes'] = MODES if flags['mode'] == 'both' else (flags['mode'],)
    for name in ('data', 'seed', 'n', 'out', 'jobs'):
        if flags.get(name) is not None:
            top[name] = flags[name]
    if flags.get('trajectories'):
        top['trajectories'] = True

    if flags.get('exp_range'):
        hood['exp_range'] = parse_int_range(flags['exp_range'])
    if flags.get('const_set'):
        hood['constants'] = parse_constant_set(flags['const_set'])
    if flags.get('op_order'):
        hood['operator_order'] = parse_operator_order(flags['op_order'])

    if flags.get('gp_runs') is not None:
        gp['runs'] = flags['gp_runs']
    if flags.get('gp_budget') is not None:
        gp['budget'] = flags['gp_budget']

    if hood:
        top['neighbourhood'] = replace(cfg.neighbourhood, **hood)
    if gp:
        top['gp'] = replace(cfg.gp, **gp)
    return replace(cfg, **top) if top else cfg


def select_equations(cfg: RunConfig, specs: Sequence) -> list:
    """Resolve the equation selection ('all' expands to the whole registry)"""
    from dagp.dataset import find_equation

    if 'all' in cfg.equations:
        return list(specs)
    return [find_equation(eq, specs) for eq in cfg.equations]
