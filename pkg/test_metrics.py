"""
Tests for LON graph metrics
"""

import json
from itertools import combinations

import networkx as nx
import pytest

from conftest import make_lon
from dagp.metrics import (
    CSV_COLUMNS,
    MetricsRow,
    avg_shortest_path,
    check_row,
    clustering,
    connectivity_and_components,
    degree_distribution,
    metrics_row,
    random_clustering,
    read_metrics_csv,
    write_degree_csv,
    write_metrics_csv,
    write_metrics_json,
)


PAIRS = list(combinations(range(5), 2))


def _oracle(n, edges):
    adjacent = {v: set() for v in range(n)}
    for a, b in edges:
        adjacent[a].add(b)
        adjacent[b].add(a)

    local = []
    for v in range(n):
        k = len(adjacent[v])
        if k < 2:
            local.append(0.0)
            continue
        links = sum(1 for a, b in combinations(sorted(adjacent[v]), 2) if b in adjacent[a])
        local.append(links / (k * (k - 1) / 2))

    inf = float('inf')
    dist = [[0 if i == j else (1 if j in adjacent[i] else inf) for j in range(n)] for i in range(n)]
    for m in range(n):
        for i in range(n):
            for j in range(n):
                dist[i][j] = min(dist[i][j], dist[i][m] + dist[m][j])

    seen, components = set(), 0
    for v in range(n):
        if v in seen:
            continue
        components += 1
        seen.update(u for u in range(n) if dist[v][u] < inf)

    pairs = [dist[i][j] for i, j in combinations(range(n), 2)]
    path = -1.0 if any(p == inf for p in pairs) else sum(pairs) / len(pairs)
    return sum(local) / n, path, components


def test_triangle():
    lon = make_lon(3, [(0, 1), (1, 2), (0, 2)])
    assert clustering(lon) == 1.0
    assert avg_shortest_path(lon) == 1.0
    assert connectivity_and_components(lon) == (1, 1)


def test_path_graph():
    lon = make_lon(3, [(0, 1), (1, 2)])
    assert clustering(lon) == 0.0
    assert avg_shortest_path(lon) == pytest.approx(4 / 3)


def test_disconnected_graph():
    lon = make_lon(4, [(0, 1), (2, 3)])
    assert avg_shortest_path(lon) == -1.0
    assert connectivity_and_components(lon) == (0, 2)


def test_single_node():
    row = metrics_row(make_lon(1, [], hits=(0,)))
    assert (row.n_v, row.n_e) == (1, 0)
    assert row.clustering == 0.0
    assert row.random_clustering == 0.0
    assert row.path_length == 0.0
    assert (row.connected, row.components) == (1, 1)
    assert row.n_hits == 1
    check_row(row)


def test_against_brute_force_on_every_five_vertex_graph():
    for mask in range(1 << len(PAIRS)):
        edges = [pair for bit, pair in enumerate(PAIRS) if mask >> bit & 1]
        g = nx.Graph()
        g.add_nodes_from(range(5))
        g.add_edges_from(edges)
        c, path, components = _oracle(5, edges)
        assert clustering(g) == pytest.approx(c), edges
        assert avg_shortest_path(g) == pytest.approx(path), edges
        assert connectivity_and_components(g) == (int(components == 1), components), edges


def test_random_clustering_complete_and_empty():
    assert random_clustering(10, 9.0, samples=5) == 1.0
    assert random_clustering(10, 0.0, samples=5) == 0.0
    assert random_clustering(1, 3.0) == 0.0
    # p is clamped to 1
    assert random_clustering(4, 10.0, samples=3) == 1.0


def test_random_clustering_is_seeded():
    assert random_clustering(30, 4.0, samples=20, seed=3) == random_clustering(30, 4.0, samples=20, seed=3)
    assert random_clustering(30, 4.0, samples=20, seed=3) != random_clustering(30, 4.0, samples=20, seed=4)


@pytest.mark.slow
def test_random_clustering_approaches_edge_probability():
    # for G(n, p) the expected clustering is p
    value = random_clustering(60, 0.3 * 59, samples=1000, seed=0)
    assert value == pytest.approx(0.3, abs=0.01)


def test_metrics_row_columns():
    lon = make_lon(4, [(0, 1), (1, 2), (0, 2)], hits=(0, 3))
    row = metrics_row(lon, cr_samples=10, seed=1)
    assert row.n_v == 4
    assert row.n_e == 3
    assert row.clustering == pytest.approx(0.75)
    assert row.path_length == -1.0
    assert (row.connected, row.components) == (0, 2)
    assert row.n_hits == 2
    check_row(row)


def test_check_row_catches_inconsistency():
    row = MetricsRow('x', 3, 1, 0.0, 0.0, -1.0, 1, 2, 0)
    with pytest.raises(ValueError):
        check_row(row)


def test_csv_has_two_decimals(tmp_path):
    row = MetricsRow('I.6.2', 12, 20, 0.4567, 0.301, 2.125, 1, 1, 3)
    path = tmp_path / 'lon.csv'
    write_metrics_csv(path, [row])
    lines = path.read_text().splitlines()
    assert lines[0] == ','.join(CSV_COLUMNS)
    assert lines[1] == 'I.6.2,12,20,0.46,0.30,2.12,1,1,3'
    assert read_metrics_csv(path)[0]['C'] == '0.46'


def test_json_keeps_full_precision(tmp_path):
    row = MetricsRow('I.6.2', 12, 20, 0.4567, 0.301, 2.125, 1, 1, 3)
    path = tmp_path / 'lon.json'
    write_metrics_json(path, [row])
    assert json.loads(path.read_text())[0]['clustering'] == 0.4567


def test_degree_outputs(tmp_path):
    lon = make_lon(4, [(0, 1), (0, 2), (0, 3)])
    assert degree_distribution(lon) == {1: 3, 3: 1}
    path = tmp_path / 'deg.csv'
    write_degree_csv(path, lon)
    assert path.read_text().splitlines() == ['id,degree,basin', '0,3,1', '1,1,1', '2,1,1', '3,1,1']
