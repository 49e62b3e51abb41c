"""
Tests for the unit-signature algebra
"""

import pytest

from dagp.errors import IncommensurableError
from dagp.units import (
    DIMENSIONLESS,
    UnitSignature,
    describe,
    format_signature,
    parse_signature,
    sig_addsub_check,
    sig_div,
    sig_mul,
    sig_pow,
)


def test_multiplication_adds_exponents():
    assert sig_mul(UnitSignature(1, 0, 0, 0, 0), UnitSignature(0, -1, 0, 0, 0)) == UnitSignature(1, -1, 0, 0, 0)
    assert sig_mul(UnitSignature(1, -2, 0, 0, 0), DIMENSIONLESS) == UnitSignature(1, -2, 0, 0, 0)
    # acceleration times time squared is a length
    assert sig_mul(UnitSignature(1, -2, 0, 0, 0), UnitSignature(0, 2, 0, 0, 0)) == UnitSignature(1, 0, 0, 0, 0)


def test_division_subtracts_exponents():
    assert sig_div(UnitSignature(1, 0, 0, 0, 0), UnitSignature(0, 1, 0, 0, 0)) == UnitSignature(1, -1, 0, 0, 0)
    a = UnitSignature(2, -2, 1, 0, -1)
    assert sig_div(a, a) == DIMENSIONLESS
    assert sig_div(DIMENSIONLESS, UnitSignature(1, 0, 0, 0, 0)) == UnitSignature(-1, 0, 0, 0, 0)


def test_addition_requires_equal_signatures():
    assert sig_addsub_check(UnitSignature(1), UnitSignature(1)) == UnitSignature(1)
    assert sig_addsub_check(DIMENSIONLESS, DIMENSIONLESS) == DIMENSIONLESS
    with pytest.raises(IncommensurableError):
        sig_addsub_check(UnitSignature(1, 0, 0, 0, 0), UnitSignature(0, 1, 0, 0, 0))


def test_incommensurable_error_is_a_value_error():
    with pytest.raises(ValueError):
        sig_addsub_check(UnitSignature(m=1), UnitSignature(kg=1))


def test_power_scales_exponents():
    assert sig_pow(UnitSignature(0, 1, 0, 0, 0), -1) == UnitSignature(0, -1, 0, 0, 0)
    assert sig_pow(UnitSignature(1, 0, 0, 0, 0), 2) == UnitSignature(2, 0, 0, 0, 0)
    assert sig_pow(UnitSignature(1, -2, 0, 0, 0), 0) == DIMENSIONLESS


def test_format_and_parse():
    assert format_signature(UnitSignature(1, -2, 0, 0, 0)) == '[1,-2,0,0,0]'
    assert str(UnitSignature(2, -2, 1, 0, -1)) == '[2,-2,1,0,-1]'
    assert parse_signature(' [1, -2, 0,0, 0] ') == UnitSignature(1, -2, 0, 0, 0)
    assert parse_signature(format_signature(UnitSignature(-3, 1, 0, 2, -1))) == UnitSignature(-3, 1, 0, 2, -1)


@pytest.mark.parametrize('text', ['[1,2,3]', '1,0,0,0,0', '[a,0,0,0,0]', '[1,0,0,0,0,0]', ''])
def test_parse_rejects_malformed_text(text):
    with pytest.raises(ValueError):
        parse_signature(text)


def test_of_checks_length():
    assert UnitSignature.of([0, 1, 0, 0, 0]) == UnitSignature(s=1)
    with pytest.raises(ValueError):
        UnitSignature.of([1, 2])


def test_describe():
    assert describe(UnitSignature(1, -2, 0, 0, 0)) == 'm*s^-2'
    assert describe(UnitSignature(2, -2, 1, 0, 0)) == 'm^2*s^-2*kg'
    assert describe(DIMENSIONLESS) == '1'
