"""
Shared pytest fixtures
"""

import pytest

from dagp.dataset import Dataset, EquationSpec, find_equation, generate_synthetic, registry
from dagp.lon import Lon, LonNode
from dagp.fitness import FitnessValue
from dagp.units import UnitSignature


TIME = UnitSignature(s=1)
LENGTH = UnitSignature(m=1)
SPEED = UnitSignature(m=1, s=-1)

# Equations with exactly one initial monomial in [-3, 3]
TRIVIAL_IDS = (
    'I.12.5', 'I.14.3', 'I.14.4', 'I.29.4', 'I.32.5', 'I.34.8', 'I.39.1',
    'I.25.13', 'I.43.16', 'I.43.31', 'II.8.31', 'II.34.2', 'III.15.14',
)


@pytest.fixture(scope='session')
def specs():
    return registry()


@pytest.fixture(scope='session')
def spec_of(specs):
    def lookup(equation_id):
        return find_equation(equation_id, specs)
    return lookup


@pytest.fixture(scope='session')
def speed_spec():
    """v = d / t over (t, d)"""
    return EquationSpec(
        id='speed',
        names=('t', 'd'),
        signatures=(TIME, LENGTH),
        target=SPEED,
        formula=lambda t, d: d / t,
        ranges=((1.0, 5.0), (1.0, 5.0)),
        text='v = d/t',
        table_units=2,
    )


@pytest.fixture(scope='session')
def speed_data(speed_spec):
    return generate_synthetic(speed_spec, n=50, seed=1)


@pytest.fixture
def synthetic(spec_of):
    def make(equation_id, n=100, seed=0):
        return generate_synthetic(spec_of(equation_id), n=n, seed=seed)
    return make


def make_lon(n_v, edges, hits=(), equation='test'):
    """LON with placeholder nodes; edges given as index pairs"""
    nodes = [
        LonNode(key=f"k{i:03d}", expr=None, fitness=FitnessValue(mse=float(i), raw_mse=float(i)),
                basin_size=1, hit=i in hits)
        for i in range(n_v)
    ]
    return Lon(equation=equation, nodes=nodes, edges={(min(a, b), max(a, b)) for a, b in edges})
