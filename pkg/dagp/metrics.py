"""
Graph metrics of a Local Optima Network
Clustering (with a random-graph baseline), mean shortest path,
connectivity and component count, plus degree plumbing
"""

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from dagp.lon import Lon, count_hits, lon_to_networkx


logger = logging.getLogger(__name__)

DEFAULT_CR_SAMPLES = 100

CSV_COLUMNS = ('equation', 'n_v', 'n_e', 'C', 'C_r', 'l', 'pi', 'S', 'n_hits')


@dataclass(frozen=True)
class MetricsRow:
    """One row of graph metrics; path_length is -1 for a disconnected LON"""
    equation: str
    n_v: int
    n_e: int
    clustering: float
    random_clustering: float
    path_length: float
    connected: int
    components: int
    n_hits: int

    def as_csv(self) -> List[str]:
        return [
            self.equation,
            str(self.n_v),
            str(self.n_e),
            f"{self.clustering:.2f}",
            f"{self.random_clustering:.2f}",
            f"{self.path_length:.2f}",
            str(self.connected),
            str(self.components),
            str(self.n_hits),
        ]


def _graph(l: Union[Lon, nx.Graph]) -> nx.Graph:
    return l if isinstance(l, nx.Graph) else lon_to_networkx(l)


def clustering(l: Union[Lon, nx.Graph]) -> float:
    """Mean local clustering over all nodes; degree < 2 counts as 0"""
    g = _graph(l)
    if g.number_of_nodes() == 0:
        return 0.0
    return float(nx.average_clustering(g, count_zeros=True))


def random_clustering(n_v: int, mean_degree: float, samples: int = DEFAULT_CR_SAMPLES, seed: int = 0) -> float:
    """
    Mean clustering of G(n, p) graphs with the same size and mean degree

    Args:
        n_v: Number of vertices
        mean_degree: Target mean degree; p = mean_degree / (n_v - 1), clamped to [0, 1]
        samples: Number of random graphs
        seed: Seed for the sample stream

    Returns:
        Average of the per-sample mean clustering
    """
    if n_v < 2 or samples < 1:
        return 0.0
    p = min(1.0, max(0.0, mean_degree / (n_v - 1)))
    rng = np.random.default_rng(seed)
    total = 0.0
    for _ in range(samples):
        g = nx.gnp_random_graph(n_v, p, seed=int(rng.integers(2 ** 31 - 1)))
        total += nx.average_clustering(g, count_zeros=True)
    return total / samples


def connectivity_and_components(l: Union[Lon, nx.Graph]) -> Tuple[int, int]:
    """(1 if connected else 0, number of connected components)"""
    g = _graph(l)
    components = nx.number_connected_components(g)
    return (1 if components == 1 else 0), components


def avg_shortest_path(l: Union[Lon, nx.Graph]) -> float:
    """Mean over unordered pairs; -1 when disconnected, 0 for a single node"""
    g = _graph(l)
    if g.number_of_nodes() <= 1:
        return 0.0
    if not nx.is_connected(g):
        return -1.0
    return float(nx.average_shortest_path_length(g))


def metrics_row(l: Lon, cr_samples: int = DEFAULT_CR_SAMPLES, seed: int = 0) -> MetricsRow:
    """
    All graph metrics of one LON

    Args:
        l: Network
        cr_samples: Random graphs drawn for the clustering baseline
        seed: Seed of the baseline

    Returns:
        MetricsRow
    """
    g = lon_to_networkx(l)
    n_v = g.number_of_nodes()
    n_e = g.number_of_edges()
    connected, components = connectivity_and_components(g)
    mean_degree = 2.0 * n_e / n_v if n_v else 0.0

    row = MetricsRow(
        equation=l.equation,
        n_v=n_v,
        n_e=n_e,
        clustering=clustering(g),
        random_clustering=random_clustering(n_v, mean_degree, cr_samples, seed),
        path_length=avg_shortest_path(g),
        connected=connected,
        components=components,
        n_hits=count_hits(l),
    )
    logger.debug(f"Metrics for {l.equation}: {row}")
    return row


def degree_distribution(l: Lon) -> Dict[int, int]:
    """degree -> number of nodes with that degree"""
    counts: Dict[int, int] = {}
    for _, degree in lon_to_networkx(l).degree():
        counts[degree] = counts.get(degree, 0) + 1
    return dict(sorted(counts.items()))


def degree_basin_pairs(l: Lon) -> List[Tuple[int, int, int]]:
    """(node id, degree, basin size) for every node"""
    g = lon_to_networkx(l)
    return [(i, g.degree(i), l.nodes[i].basin_size) for i in range(l.n_v)]


def write_degree_csv(path: Union[str, Path], l: Lon) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['id', 'degree', 'basin'])
        writer.writerows(degree_basin_pairs(l))


def write_metrics_csv(path: Union[str, Path], rows: Sequence[MetricsRow]) -> None:
    """Metrics table with two decimals for the real-valued columns"""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(row.as_csv())


def write_metrics_json(path: Union[str, Path], rows: Sequence[MetricsRow]) -> None:
    """Full-precision variant of write_metrics_csv()"""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump([asdict(row) for row in rows], f, indent=2)


def read_metrics_csv(path: Union[str, Path]) -> List[Dict[str, str]]:
    with open(path, 'r', encoding='utf-8', newline='') as f:
        return list(csv.DictReader(f))


def check_row(row: MetricsRow) -> None:
    """Raise ValueError if the row breaks the relations between its columns"""
    if (row.connected == 1) != (row.components == 1):
        raise ValueError(f"{row.equation}: connectivity {row.connected} with {row.components} components")
    if (row.path_length == -1) != (row.connected == 0 and row.n_v >= 2):
        raise ValueError(f"{row.equation}: path length {row.path_length} does not match connectivity")
    if not 0.0 <= row.clustering <= 1.0 or math.isnan(row.clustering):
        raise ValueError(f"{row.equation}: clustering {row.clustering} outside [0, 1]")
    if row.n_hits > row.n_v:
        raise ValueError(f"{row.equation}: {row.n_hits} hits among {row.n_v} nodes")
