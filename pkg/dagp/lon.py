"""
Local Optima Network construction and export
Nodes are distinct optima of the multi-start search, basins are the unions
of the trajectories that reach them, and two basins are linked when a
recorded solution in one has a neighbour recorded in the other. By default
that neighbour must come from rewriting a proper subtree or wrapping the
root; replacing the whole tree reaches every initial monomial at once
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

import networkx as nx

from dagp.config import NeighbourhoodConfig, SearchConfig
from dagp.dataset import Dataset, EquationSpec
from dagp.errors import UnknownFormatError
from dagp.expr import Expr
from dagp.fitness import FitnessEvaluator, FitnessValue, is_hit
from dagp.localsearch import SearchResult, greedy_search, search_all
from dagp.neighbourhood import neighbours


logger = logging.getLogger(__name__)

FORMATS = ('dot', 'graphml', 'csv')


@dataclass
class LonNode:
    key: str
    expr: Optional[Expr]
    fitness: FitnessValue
    basin_size: int
    hit: bool


@dataclass
class Lon:
    """Undirected network of local optima, nodes sorted by canonical key"""
    equation: str
    nodes: List[LonNode] = field(default_factory=list)
    edges: Set[Tuple[int, int]] = field(default_factory=set)
    digest: str = ''

    @property
    def n_v(self) -> int:
        return len(self.nodes)

    @property
    def n_e(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> List[Tuple[int, int]]:
        return sorted(self.edges)


def _assign(basin: Dict[str, str], members: Dict[str, Expr], result: SearchResult) -> None:
    optimum_key = result.optimum.key
    for e, _ in result.trajectory:
        owner = basin.setdefault(e.key, optimum_key)
        if owner != optimum_key:
            # a commutative twin of a recorded solution descended elsewhere
            logger.debug(f"{e.key} already belongs to {owner}, not {optimum_key}")
        members.setdefault(e.key, e)


def build_lon(
    spec: EquationSpec,
    d: Dataset,
    cfg: NeighbourhoodConfig,
    search: Optional[SearchConfig] = None,
    results: Optional[Sequence[SearchResult]] = None,
    digest: str = '',
    jobs: int = 1
) -> Lon:
    """
    Build the LON of one equation

    Args:
        spec: Equation
        d: Dataset
        cfg: Neighbourhood settings
        search: Scaling flag, widening limit, probe_unrecorded and edge_scope
        results: Reuse an existing search_all() run instead of searching again
        digest: Config digest stored as provenance
        jobs: Worker processes for the search

    Returns:
        Lon with nodes sorted by canonical key
    """
    search = search or SearchConfig()
    if results is None:
        results = search_all(spec, d, cfg, search, jobs=jobs)

    basin: Dict[str, str] = {}
    members: Dict[str, Expr] = {}
    optima: Dict[str, Tuple[Expr, FitnessValue]] = {}
    for r in results:
        optima.setdefault(r.optimum.key, (r.optimum, r.fitness))
        _assign(basin, members, r)

    whole_tree = search.edge_scope == 'full'
    links: Set[Tuple[str, str]] = set()
    unrecorded: List[Tuple[str, Expr]] = []
    for key in sorted(members):
        owner = basin[key]
        for n in neighbours(members[key], spec, cfg, whole_tree):
            other = basin.get(n.key)
            if other is None:
                if search.probe_unrecorded:
                    unrecorded.append((owner, n))
            elif other != owner:
                links.add((min(owner, other), max(owner, other)))

    if unrecorded:
        logger.info(f"{spec.id}: probing {len(unrecorded)} unrecorded neighbours")
        evaluator = FitnessEvaluator(d, search.scaled)
        for owner, n in unrecorded:
            if n.key not in basin:
                probe = greedy_search(n, d, spec, cfg, search.scaled, evaluator)
                optima.setdefault(probe.optimum.key, (probe.optimum, probe.fitness))
                _assign(basin, members, probe)
            other = basin[n.key]
            if other != owner:
                links.add((min(owner, other), max(owner, other)))

    sizes: Dict[str, int] = {}
    for owner in basin.values():
        sizes[owner] = sizes.get(owner, 0) + 1

    keys = sorted(optima)
    index = {key: i for i, key in enumerate(keys)}
    nodes = [
        LonNode(key=key, expr=optima[key][0], fitness=optima[key][1], basin_size=sizes[key], hit=is_hit(optima[key][1]))
        for key in keys
    ]
    edges = {(index[a], index[b]) for a, b in links}

    lon = Lon(equation=spec.id, nodes=nodes, edges=edges, digest=digest)
    logger.info(f"{spec.id}: LON with {lon.n_v} nodes, {lon.n_e} edges, {count_hits(lon)} hits")
    return lon


def count_hits(l: Lon) -> int:
    """Number of hit nodes"""
    return sum(1 for node in l.nodes if node.hit)


def lon_to_networkx(l: Lon) -> nx.Graph:
    """networkx view with fitness, basin and hit node attributes"""
    g = nx.Graph(equation=l.equation)
    for i, node in enumerate(l.nodes):
        g.add_node(i, key=node.key, mse=float(node.fitness.mse), basin=node.basin_size, hit=node.hit)
    g.add_edges_from(l.sorted_edges())
    return g


def _dot_escape(text: str) -> str:
    return text.replace('\\', '\\\\').replace('"', '\\"')


def _write_dot(l: Lon, path: Path) -> None:
    lines = [f'graph "{_dot_escape(l.equation)}" {{']
    for i, node in enumerate(l.nodes):
        lines.append(
            f'  {i} [key="{_dot_escape(node.key)}", mse="{node.fitness.mse!r}", '
            f'basin={node.basin_size}, hit={"true" if node.hit else "false"}];'
        )
    for a, b in l.sorted_edges():
        lines.append(f'  {a} -- {b};')
    lines.append('}')
    path.write_text('\n'.join(lines) + '\n', encoding='utf-8')


def nodes_csv_path(path: Union[str, Path]) -> Path:
    """Companion node file of an edge-list CSV"""
    path = Path(path)
    return path.with_name(f"{path.stem}_nodes.csv")


def _write_csv(l: Lon, path: Path) -> None:
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['source', 'target'])
        writer.writerows(l.sorted_edges())
    with open(nodes_csv_path(path), 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['id', 'key', 'mse', 'basin', 'hit'])
        for i, node in enumerate(l.nodes):
            writer.writerow([i, node.key, repr(float(node.fitness.mse)), node.basin_size, int(node.hit)])


def export_graph(l: Lon, format: str, path: Union[str, Path]) -> Path:
    """
    Write the LON to disk

    Args:
        l: Network
        format: 'dot', 'graphml' or 'csv' (edge list plus <stem>_nodes.csv)
        path: Output file

    Returns:
        Path written

    Raises:
        UnknownFormatError: for any other format
    """
    fmt = format.lower()
    if fmt not in FORMATS:
        raise UnknownFormatError(f"unknown graph format '{format}'; choose from {', '.join(FORMATS)}")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == 'dot':
        _write_dot(l, path)
    elif fmt == 'graphml':
        nx.write_graphml(lon_to_networkx(l), str(path))
    else:
        _write_csv(l, path)
    logger.debug(f"Exported {l.equation} LON as {fmt} to {path}")
    return path


def lon_from_edge_csv(path: Union[str, Path], equation: str = '') -> Lon:
    """
    Rebuild a LON from an edge-list CSV and its nodes file

    Expressions are not stored in the CSV, so nodes come back with
    expr=None; metrics only need keys, fitness, basins and hits.
    """
    path = Path(path)
    nodes: List[LonNode] = []
    with open(nodes_csv_path(path), 'r', encoding='utf-8', newline='') as f:
        for row in csv.DictReader(f):
            mse = float(row['mse'])
            nodes.append(LonNode(
                key=row['key'],
                expr=None,
                fitness=FitnessValue(mse=mse, raw_mse=mse),
                basin_size=int(row['basin']),
                hit=row['hit'] == '1',
            ))

    edges: Set[Tuple[int, int]] = set()
    with open(path, 'r', encoding='utf-8', newline='') as f:
        for row in csv.DictReader(f):
            a, b = int(row['source']), int(row['target'])
            edges.add((min(a, b), max(a, b)))

    return Lon(equation=equation or path.stem, nodes=nodes, edges=edges)
