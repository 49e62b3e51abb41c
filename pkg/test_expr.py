"""
Tests for expression trees: signatures, size, evaluation and substitution
"""

import numpy as np
import pytest

from conftest import LENGTH, SPEED, TIME
from dagp.errors import IncommensurableError, NonFiniteError, SignatureMismatchError, SizeLimitError
from dagp.expr import (
    add,
    canonicalize,
    const,
    depth,
    div,
    evaluate,
    evaluate_batch,
    mul,
    parse_prefix,
    positions,
    signature_of,
    size,
    sub,
    substitute_subtree,
    subtree_at,
    to_infix,
    to_prefix,
    var,
)
from dagp.units import DIMENSIONLESS, UnitSignature


t = var(0, TIME)
d = var(1, LENGTH)


def test_signature_of_monomial():
    assert signature_of(div(d, t)) == SPEED
    assert signature_of(const(3)) == DIMENSIONLESS


def test_signature_recomputed_from_given_signatures():
    e = mul(var(0, DIMENSIONLESS), var(1, DIMENSIONLESS))
    assert signature_of(e, [TIME, LENGTH]) == UnitSignature(m=1, s=1)


def test_incommensurable_addition_is_rejected():
    with pytest.raises(IncommensurableError):
        add(d, t)
    with pytest.raises(IncommensurableError):
        sub(t, const(1))


def test_size_counts_nodes():
    a, b, c, e = (var(i, DIMENSIONLESS) for i in range(4))
    assert size(var(0, TIME)) == 1
    assert size(mul(t, d)) == 3
    tree = add(mul(a, b), mul(c, e))
    assert size(tree) == 7
    assert tree.size == 7


def test_depth_of_leaf_is_zero():
    assert depth(t) == 0
    assert depth(div(d, mul(t, t))) == 2


def test_evaluate_point():
    assert evaluate(mul(var(0, DIMENSIONLESS), var(1, DIMENSIONLESS)), (3, 4)) == 12
    with pytest.raises(NonFiniteError):
        evaluate(div(const(2), var(0, DIMENSIONLESS)), (0,))


def test_evaluate_true_formula_matches_targets(synthetic, spec_of):
    spec = spec_of('I.12.5')
    data = synthetic('I.12.5', n=20, seed=3)
    e = mul(var(0, spec.signatures[0]), var(1, spec.signatures[1]))
    for row, target in zip(data.X, data.y):
        assert evaluate(e, row) == pytest.approx(target, rel=1e-9)


def test_evaluate_batch_marks_division_by_zero():
    X = np.array([[1.0], [0.0]])
    out = evaluate_batch(div(const(1), var(0, DIMENSIONLESS)), X)
    assert out[0] == 1.0
    assert not np.isfinite(out[1])


def test_evaluate_batch_memo_reuses_subtrees():
    X = np.array([[1.0, 2.0], [3.0, 4.0]])
    memo = {}
    shared = mul(var(0, DIMENSIONLESS), var(1, DIMENSIONLESS))
    first = evaluate_batch(add(shared, const(1)), X, memo)
    assert shared.key in memo
    second = evaluate_batch(sub(shared, const(1)), X, memo)
    np.testing.assert_allclose(first, [3.0, 13.0])
    np.testing.assert_allclose(second, [1.0, 11.0])


def test_canonical_key_ignores_commutative_order():
    assert canonicalize(mul(t, d)) == canonicalize(mul(d, t))
    assert canonicalize(add(t, mul(t, const(2)))) == canonicalize(add(mul(const(2), t), t))
    assert canonicalize(div(d, t)) != canonicalize(div(t, d))
    assert mul(t, d) != mul(d, t)


def test_positions_are_preorder():
    e = div(d, mul(t, t))
    paths = positions(e)
    assert paths == ((), (0,), (1,), (1, 0), (1, 1))
    assert positions(e) is paths
    assert subtree_at(e, (1,)) == mul(t, t)


def test_substitute_keeps_signature():
    result = substitute_subtree(t, 0, mul(t, const(2)))
    assert result.size == 3
    assert result.sig == TIME


def test_substitute_rejects_other_signature():
    with pytest.raises(SignatureMismatchError):
        substitute_subtree(div(d, t), 1, t)


def test_substitute_rejects_oversized_result():
    big = t
    for _ in range(20):
        big = mul(big, const(1))
    assert big.size == 41
    with pytest.raises(SizeLimitError):
        substitute_subtree(big, 0, add(big, t), max_size=42)


def test_substitute_position_out_of_range():
    with pytest.raises(IndexError):
        substitute_subtree(t, 1, t)


def test_prefix_round_trip():
    e = sub(div(d, t), mul(div(d, t), const(-3)))
    text = to_prefix(e)
    assert text == '(- (/ x1 x0) (* (/ x1 x0) -3))'
    assert parse_prefix(text, [TIME, LENGTH]) == e


@pytest.mark.parametrize('text', ['(* x0', '(^ x0 x1)', 'x0 x1', 'x5', '(* x0 y)'])
def test_parse_prefix_rejects_malformed_text(text):
    with pytest.raises(ValueError):
        parse_prefix(text, [TIME, LENGTH])


def test_infix_uses_names():
    e = mul(div(d, t), const(-2))
    assert to_infix(e, ['t', 'd']) == '((d / t) * (-2))'
