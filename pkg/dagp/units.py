"""
Unit-signature algebra
A signature is the vector of integer exponents over (m, s, kg, K, V);
multiplication and division add/subtract exponents, addition and
subtraction require identical signatures
"""

import re
from typing import Iterable, NamedTuple

from dagp.errors import IncommensurableError


UNIT_NAMES = ('m', 's', 'kg', 'K', 'V')

_SIGNATURE_PATTERN = re.compile(r'^\s*\[\s*(-?\d+(?:\s*,\s*-?\d+){4})\s*\]\s*$')


class UnitSignature(NamedTuple):
    """Integer exponents over length, time, mass, temperature and potential"""
    m: int = 0
    s: int = 0
    kg: int = 0
    K: int = 0
    V: int = 0

    @classmethod
    def of(cls, exponents: Iterable[int]) -> 'UnitSignature':
        values = tuple(int(x) for x in exponents)
        if len(values) != len(UNIT_NAMES):
            raise ValueError(f"signature needs {len(UNIT_NAMES)} exponents, got {len(values)}")
        return cls(*values)

    def __str__(self) -> str:
        return format_signature(self)


DIMENSIONLESS = UnitSignature()


def sig_mul(a: UnitSignature, b: UnitSignature) -> UnitSignature:
    """Signature of a product: component-wise sum of exponents"""
    return UnitSignature(a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3], a[4] + b[4])


def sig_div(a: UnitSignature, b: UnitSignature) -> UnitSignature:
    """Signature of a quotient: component-wise difference a - b"""
    return UnitSignature(a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3], a[4] - b[4])


def sig_addsub_check(a: UnitSignature, b: UnitSignature) -> UnitSignature:
    """
    Signature of a sum or difference

    Args:
        a: Left operand signature
        b: Right operand signature

    Returns:
        The shared signature

    Raises:
        IncommensurableError: if the operands differ
    """
    if a != b:
        raise IncommensurableError(f"cannot add or subtract {format_signature(a)} and {format_signature(b)}")
    return a


def sig_pow(a: UnitSignature, k: int) -> UnitSignature:
    """Signature of a raised to the integer power k"""
    return UnitSignature(a[0] * k, a[1] * k, a[2] * k, a[3] * k, a[4] * k)


def format_signature(sig: Iterable[int]) -> str:
    """Bracketed comma-separated form, e.g. [1,-2,0,0,0]"""
    return '[' + ','.join(str(int(x)) for x in sig) + ']'


def parse_signature(text: str) -> UnitSignature:
    """
    Parse the bracketed 5-tuple form

    Args:
        text: Text such as "[1, -2, 0, 0, 0]"

    Returns:
        Parsed signature

    Raises:
        ValueError: if the text is not a bracketed list of 5 integers
    """
    match = _SIGNATURE_PATTERN.match(text)
    if not match:
        raise ValueError(f"not a unit signature: {text!r}")
    return UnitSignature.of(part.strip() for part in match.group(1).split(','))


def describe(sig: UnitSignature) -> str:
    """Readable unit string such as m*s^-2 ('1' when dimensionless)"""
    parts = []
    for name, exponent in zip(UNIT_NAMES, sig):
        if exponent == 1:
            parts.append(name)
        elif exponent != 0:
            parts.append(f"{name}^{exponent}")
    return '*'.join(parts) if parts else '1'
