"""
Tests for LON construction and graph export
"""

import networkx as nx
import pytest

from conftest import LENGTH, TIME, make_lon
from dagp.config import NeighbourhoodConfig, SearchConfig
from dagp.errors import UnknownFormatError
from dagp.expr import const, div, mul, var
from dagp.fitness import FitnessValue
from dagp.initializer import enumerate_initial
from dagp.localsearch import SearchResult
from dagp.lon import (
    build_lon,
    count_hits,
    export_graph,
    lon_from_edge_csv,
    lon_to_networkx,
    nodes_csv_path,
)
from dagp.metrics import metrics_row


CFG = NeighbourhoodConfig()


def _fit(value):
    return FitnessValue(mse=value, raw_mse=value)


def _descent(index, path):
    trajectory = [(e, _fit(m)) for e, m in path]
    return SearchResult(
        start_index=index, optimum=trajectory[-1][0], fitness=trajectory[-1][1],
        trajectory=trajectory, evaluations=len(path), hit=False,
    )


def test_single_candidate_equation_gives_one_node(spec_of, synthetic):
    lon = build_lon(spec_of('I.12.5'), synthetic('I.12.5'), CFG)
    assert lon.n_v == 1
    assert lon.n_e == 0
    assert lon.nodes[0].basin_size == 1
    assert count_hits(lon) == 1


def test_shared_optimum_merges_basins(speed_spec, speed_data):
    v = div(var(1, LENGTH), var(0, TIME))
    doubled, halved, tripled = mul(v, const(2)), div(v, const(2)), mul(v, const(3))
    results = [
        _descent(0, [(doubled, 3.0), (v, 0.0)]),
        _descent(1, [(halved, 2.0), (v, 0.0)]),
        _descent(2, [(tripled, 1.0)]),
    ]
    lon = build_lon(speed_spec, speed_data, CFG, results=results)
    assert lon.n_v == 2
    assert sorted(node.basin_size for node in lon.nodes) == [1, 3]
    # v * 3 is a neighbour of v, recorded in the other basin
    assert lon.edges == {(0, 1)}
    assert [node.key for node in lon.nodes] == sorted(node.key for node in lon.nodes)


def test_unrecorded_neighbours_are_ignored_by_default(speed_spec, speed_data):
    v = div(var(1, LENGTH), var(0, TIME))
    results = [_descent(0, [(v, 0.0)]), _descent(1, [(mul(v, const(-3)), 5.0)])]
    lon = build_lon(speed_spec, speed_data, CFG, results=results)
    assert lon.n_v == 2
    assert lon.n_e == 1


def test_searching_unrecorded_neighbours_adds_optima(speed_spec, speed_data):
    v = div(var(1, LENGTH), var(0, TIME))
    results = [_descent(0, [(mul(v, const(2)), 1.0)])]
    plain = build_lon(speed_spec, speed_data, CFG, results=results)
    probed = build_lon(speed_spec, speed_data, CFG, SearchConfig(probe_unrecorded=True), results=results)
    assert plain.n_v == 1
    assert probed.n_v > 1
    assert probed.n_e >= 1


def test_whole_tree_replacement_does_not_link_basins(spec_of, synthetic):
    spec = spec_of('II.11.3')
    d = synthetic('II.11.3', n=20)
    first, second = enumerate_initial(spec)[:2]
    results = [_descent(0, [(first, 1.0)]), _descent(1, [(second, 0.5)])]
    assert build_lon(spec, d, CFG, results=results).n_e == 0
    full = build_lon(spec, d, CFG, SearchConfig(edge_scope='full'), results=results)
    assert full.edges == {(0, 1)}


def test_connectivity_targets(spec_of, synthetic):
    energy = metrics_row(build_lon(spec_of('I.24.6'), synthetic('I.24.6'), CFG, SearchConfig(scaled=True)))
    assert (energy.connected, energy.components) == (1, 1)
    assert energy.path_length == 1.0
    assert energy.n_hits >= 1

    displacement = metrics_row(build_lon(spec_of('II.11.3'), synthetic('II.11.3'), CFG))
    assert displacement.connected == 0
    assert displacement.components > 1
    assert displacement.path_length == -1


def test_lon_invariants_on_a_real_search(spec_of, synthetic):
    spec = spec_of('II.34.29b')
    lon = build_lon(spec, synthetic('II.34.29b', n=100, seed=0), CFG, SearchConfig(scaled=True))
    assert 1 <= lon.n_v
    assert sum(node.basin_size for node in lon.nodes) >= lon.n_v
    assert all(a < b < lon.n_v for a, b in lon.edges)
    assert len({node.key for node in lon.nodes}) == lon.n_v
    assert all(node.expr.sig == spec.target for node in lon.nodes)


def test_lon_is_deterministic(spec_of, synthetic):
    spec = spec_of('I.24.6')
    d = synthetic('I.24.6', n=100, seed=0)
    a = build_lon(spec, d, CFG)
    b = build_lon(spec, d, CFG)
    assert [node.key for node in a.nodes] == [node.key for node in b.nodes]
    assert a.edges == b.edges


def test_networkx_view():
    g = lon_to_networkx(make_lon(4, [(0, 1), (1, 2)], hits=(2,)))
    assert g.number_of_nodes() == 4
    assert g.number_of_edges() == 2
    assert g.nodes[2]['hit'] is True
    assert g.nodes[3]['basin'] == 1


def test_dot_export(tmp_path):
    path = export_graph(make_lon(2, [(1, 0)], hits=(1,), equation='I.9.9'), 'dot', tmp_path / 'g.dot')
    assert path.read_text().splitlines() == [
        'graph "I.9.9" {',
        '  0 [key="k000", mse="0.0", basin=1, hit=false];',
        '  1 [key="k001", mse="1.0", basin=1, hit=true];',
        '  0 -- 1;',
        '}',
    ]


def test_graphml_export(tmp_path):
    path = export_graph(make_lon(3, [(0, 2)]), 'GraphML', tmp_path / 'g.graphml')
    g = nx.read_graphml(path)
    assert g.number_of_nodes() == 3
    assert g.number_of_edges() == 1


def test_csv_round_trip_keeps_metrics(tmp_path):
    lon = make_lon(5, [(0, 1), (1, 2), (3, 4)], hits=(4,))
    path = export_graph(lon, 'csv', tmp_path / 'g.csv')
    assert path.read_text().splitlines()[0] == 'source,target'
    assert nodes_csv_path(path).read_text().splitlines()[0] == 'id,key,mse,basin,hit'

    back = lon_from_edge_csv(path, 'test')
    assert back.edges == lon.edges
    assert [node.key for node in back.nodes] == [node.key for node in lon.nodes]
    assert count_hits(back) == 1
    assert metrics_row(back, seed=0) == metrics_row(lon, seed=0)


def test_export_is_deterministic(tmp_path):
    lon = make_lon(6, [(4, 5), (0, 3), (1, 2)])
    first = export_graph(lon, 'dot', tmp_path / 'a.dot').read_text()
    second = export_graph(lon, 'dot', tmp_path / 'b.dot').read_text()
    assert first == second


def test_unknown_format(tmp_path):
    with pytest.raises(UnknownFormatError):
        export_graph(make_lon(1, []), 'gexf', tmp_path / 'g.gexf')
