"""
Tests for configuration layering and validation
"""

import glob
import json
from pathlib import Path

import pytest

from dagp.config import (
    LINEAR_SCALING,
    MODES,
    NO_SCALING,
    OPERATORS,
    GpConfig,
    NeighbourhoodConfig,
    RunConfig,
    SearchConfig,
    apply_env,
    config_digest,
    config_from_dict,
    config_to_dict,
    load_config,
    mode_is_scaled,
    parse_constant_set,
    parse_int_range,
    select_equations,
    with_flags,
)
from dagp.errors import ConfigError, UnknownEquationError


CONFIG_DIR = Path(__file__).resolve().parent / 'configs'


def test_defaults():
    cfg = RunConfig()
    assert cfg.neighbourhood.constants == (-3, -2, -1, 1, 2, 3)
    assert cfg.neighbourhood.exp_range == (-3, 3)
    assert cfg.neighbourhood.max_size == 42
    assert cfg.neighbourhood.operator_order == OPERATORS
    assert cfg.modes == MODES
    assert cfg.gp.population_size == 500
    assert cfg.gp.budget == 100000


@pytest.mark.parametrize('path', sorted(glob.glob(str(CONFIG_DIR / '*.json'))))
def test_bundled_presets_load(path):
    cfg = load_config(path)
    assert cfg.out.startswith('results')


def test_round_trip_and_digest():
    cfg = with_flags(RunConfig(), exp_range='2', const_set='-1,1', mode=NO_SCALING)
    back = config_from_dict(config_to_dict(cfg))
    assert back == cfg
    assert config_digest(back) == config_digest(cfg)
    assert config_digest(with_flags(cfg, seed=5)) != config_digest(cfg)


def test_manifest_envelope_is_accepted(tmp_path):
    cfg = with_flags(RunConfig(), n=40)
    path = tmp_path / 'manifest.json'
    path.write_text(json.dumps({'timestamp': 'x', 'digest': 'y', 'data': {'config': config_to_dict(cfg)}}))
    assert load_config(path) == cfg


def test_flags_override_environment(monkeypatch):
    monkeypatch.setenv('DAGP_OUT', 'env-out')
    monkeypatch.setenv('DAGP_JOBS', '4')
    cfg = apply_env(RunConfig())
    assert (cfg.out, cfg.jobs) == ('env-out', 4)
    assert with_flags(cfg, out='flag-out', jobs=None).out == 'flag-out'
    assert with_flags(cfg, out='flag-out', jobs=None).jobs == 4


def test_bad_environment(monkeypatch):
    monkeypatch.setenv('DAGP_SEED', 'abc')
    with pytest.raises(ConfigError):
        apply_env(RunConfig())


def test_flags():
    cfg = with_flags(RunConfig(), eq=['I.12.5'], mode='both', op_order='replace,add_comm',
                     gp_runs=5, gp_budget=10, trajectories=True)
    assert cfg.equations == ('I.12.5',)
    assert cfg.modes == MODES
    assert cfg.neighbourhood.operator_order == ('replace', 'add_comm')
    assert (cfg.gp.runs, cfg.gp.budget) == (5, 10)
    assert cfg.trajectories
    assert with_flags(cfg) == cfg


def test_parsers():
    assert parse_int_range('-2,4') == (-2, 4)
    assert parse_int_range('-3:3') == (-3, 3)
    assert parse_int_range('2') == (-2, 2)
    assert parse_constant_set('2') == (-2, -1, 1, 2)
    assert parse_constant_set('1,3') == (1, 3)
    with pytest.raises(ConfigError):
        parse_int_range('a,b')
    with pytest.raises(ConfigError):
        parse_constant_set('1,x')


def test_modes():
    assert not mode_is_scaled(NO_SCALING)
    assert mode_is_scaled(LINEAR_SCALING)
    with pytest.raises(ConfigError):
        mode_is_scaled('quadratic')


@pytest.mark.parametrize('kwargs', [
    {'constants': (0, 1)},
    {'constants': (1, 1)},
    {'exp_range': (3, -3)},
    {'max_size': 0},
    {'operator_order': ()},
    {'operator_order': ('replace', 'swap')},
    {'operator_order': ('replace', 'replace')},
])
def test_neighbourhood_validation(kwargs):
    with pytest.raises(ConfigError):
        NeighbourhoodConfig(**kwargs)


@pytest.mark.parametrize('cls, kwargs', [
    (SearchConfig, {'counting': 'random'}),
    (SearchConfig, {'max_widenings': -1}),
    (SearchConfig, {'edge_scope': 'optima'}),
    (GpConfig, {'population_size': 2}),
    (GpConfig, {'mutation_rate': 1.5}),
    (GpConfig, {'min_init_depth': 7}),
    (GpConfig, {'function_set': ('add', 'exp')}),
    (GpConfig, {'crossovers': ()}),
    (RunConfig, {'modes': ('cubic',)}),
    (RunConfig, {'formats': ('gexf',)}),
    (RunConfig, {'n': 0}),
])
def test_other_validation(cls, kwargs):
    with pytest.raises(ConfigError):
        cls(**kwargs)


def test_unknown_keys():
    with pytest.raises(ConfigError):
        config_from_dict({'neighbourhood': {'colour': 'red'}})


def test_select_equations(specs):
    assert len(select_equations(RunConfig(), specs)) == 27
    chosen = select_equations(with_flags(RunConfig(), eq=['i.14.3', 'I.12.5']), specs)
    assert [s.id for s in chosen] == ['I.14.3', 'I.12.5']
    with pytest.raises(UnknownEquationError):
        select_equations(with_flags(RunConfig(), eq=['I.0.0']), specs)
