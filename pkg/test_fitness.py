"""
Tests for MSE, linear scaling and hit detection
"""

import math

import numpy as np
import pytest

from conftest import LENGTH, TIME
from dagp.dataset import Dataset
from dagp.expr import add, const, div, mul, var
from dagp.fitness import (
    HIT_THRESHOLD,
    FitnessEvaluator,
    FitnessValue,
    is_hit,
    linear_scale,
    mse,
    score_outputs,
)
from dagp.config import NeighbourhoodConfig
from dagp.initializer import enumerate_initial
from dagp.neighbourhood import neighbours


def test_true_formula_has_zero_error(speed_spec, speed_data):
    e = div(var(1, LENGTH), var(0, TIME))
    f = mse(e, speed_data)
    assert f.mse < 1e-20
    assert is_hit(f)


def test_constant_tree_error(speed_spec):
    d = Dataset(np.ones((4, 2)), np.full(4, 2.0), speed_spec)
    assert mse(const(0), d).mse == 4.0


def test_division_by_zero_gives_worst_fitness(speed_spec):
    X = np.array([[1.0, 1.0], [0.0, 2.0]])
    d = Dataset(X, np.ones(2), speed_spec)
    f = mse(div(var(1, LENGTH), var(0, TIME)), d)
    assert math.isinf(f.mse)
    assert not f.valid
    assert not is_hit(f)


def test_linear_scaling_recovers_affine_constants(speed_spec, speed_data):
    # y = (T - 3) / 2 for T = 2 * y + 3
    T = 2.0 * speed_data.y + 3.0
    f = score_outputs(T, speed_data.y, scaled=True)
    assert f.mse < 1e-20
    assert abs(f.scale_a - (-1.5)) < 1e-9
    assert abs(f.scale_b - 0.5) < 1e-9


def test_linear_scaling_of_constant_tree(speed_spec, speed_data):
    f = linear_scale(const(3), speed_data)
    assert f.scale_b == 0.0
    assert f.scale_a == pytest.approx(np.mean(speed_data.y))
    assert f.mse == pytest.approx(np.var(speed_data.y))


def test_scaling_absorbs_constant_factor(speed_spec, speed_data):
    e = mul(div(var(1, LENGTH), var(0, TIME)), const(3))
    assert not is_hit(mse(e, speed_data))
    assert is_hit(linear_scale(e, speed_data))


def test_scaled_error_never_exceeds_raw_error(specs, synthetic):
    cfg = NeighbourhoodConfig()
    checked = 0
    for spec in specs:
        d = synthetic(spec.id, n=100, seed=1)
        for start in enumerate_initial(spec)[:5]:
            for e in [start] + neighbours(start, spec, cfg)[:40]:
                raw = mse(e, d)
                scaled = linear_scale(e, d)
                if raw.valid:
                    assert scaled.mse <= raw.mse * (1 + 1e-12) + 1e-300
                checked += 1
    assert checked >= 1000


def test_hit_threshold_is_strict():
    assert is_hit(FitnessValue(mse=0.0, raw_mse=0.0))
    assert not is_hit(FitnessValue(mse=HIT_THRESHOLD, raw_mse=HIT_THRESHOLD))
    assert not is_hit(FitnessValue(mse=math.inf, raw_mse=math.inf))


def test_evaluator_counts_every_call(speed_spec, speed_data):
    ev = FitnessEvaluator(speed_data, scaled=False)
    e = add(div(var(1, LENGTH), var(0, TIME)), div(var(1, LENGTH), var(0, TIME)))
    first = ev(e)
    second = ev(e)
    assert ev.evaluations == 2
    assert first == second
    ev.peek(e)
    assert ev.evaluations == 2


def test_score_outputs_rejects_non_finite():
    f = score_outputs(np.array([1.0, np.nan]), np.array([1.0, 1.0]), scaled=True)
    assert math.isinf(f.mse)


def test_better_than_is_strict():
    a = FitnessValue(mse=1.0, raw_mse=1.0)
    b = FitnessValue(mse=1.0, raw_mse=2.0)
    assert not a.better_than(b)
    assert FitnessValue(mse=0.5, raw_mse=0.5).better_than(a)
