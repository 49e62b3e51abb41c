"""
Monomial initialisation
Scans every exponent vector in a range and keeps the monomials whose
signature matches; the same tables feed the neighbourhood operators
"""

import itertools
import logging
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

import numpy as np

from dagp.dataset import EquationSpec
from dagp.errors import NoValidInitializationError
from dagp.expr import Expr, const, div, mul, var
from dagp.units import UnitSignature, format_signature


logger = logging.getLogger(__name__)

DEFAULT_EXP_RANGE = (-3, 3)

ExponentVector = Tuple[int, ...]


@lru_cache(maxsize=64)
def _table(signatures: Tuple[UnitSignature, ...], lo: int, hi: int) -> Dict[UnitSignature, Tuple[ExponentVector, ...]]:
    p = len(signatures)
    vectors = np.array(list(itertools.product(range(lo, hi + 1), repeat=p)), dtype=np.int64).reshape(-1, p)
    sig_matrix = np.array(signatures, dtype=np.int64).reshape(p, 5)
    folded = vectors @ sig_matrix

    table: Dict[UnitSignature, List[ExponentVector]] = {}
    for row, sig in zip(vectors.tolist(), folded.tolist()):
        table.setdefault(UnitSignature(*sig), []).append(tuple(row))
    logger.debug(f"Monomial table over {p} variables in [{lo},{hi}]: {len(vectors)} vectors, {len(table)} signatures")
    return {sig: tuple(rows) for sig, rows in table.items()}


def monomial_table(spec: EquationSpec, exp_range: Tuple[int, int] = DEFAULT_EXP_RANGE) -> Dict[UnitSignature, Tuple[ExponentVector, ...]]:
    """
    Group all r^p exponent vectors by the signature of their monomial

    Args:
        spec: Equation whose variables span the monomials
        exp_range: Inclusive exponent bounds (lo, hi)

    Returns:
        Signature -> exponent vectors in lexicographic scan order
    """
    lo, hi = exp_range
    if lo > hi:
        return {}
    return _table(tuple(spec.signatures), int(lo), int(hi))


def _product(factors: List[Expr]) -> Expr:
    result = factors[0]
    for factor in factors[1:]:
        result = mul(result, factor)
    return result


def build_monomial(exponents: Sequence[int], spec: EquationSpec) -> Expr:
    """
    Materialise one exponent vector as a tree

    Positive exponents multiply left to right (d^2 becomes d*d), the product
    of the negative ones divides it, zero exponents are left out and an empty
    numerator is Const(1).

    Args:
        exponents: One exponent per variable of spec
        spec: Equation providing variable signatures

    Returns:
        Monomial expression
    """
    if len(exponents) != spec.arity:
        raise ValueError(f"{spec.id} has {spec.arity} variables, got {len(exponents)} exponents")

    numerator: List[Expr] = []
    denominator: List[Expr] = []
    for index, exponent in enumerate(exponents):
        leaf = var(index, spec.signatures[index])
        if exponent > 0:
            numerator.extend([leaf] * exponent)
        elif exponent < 0:
            denominator.extend([leaf] * -exponent)

    top = _product(numerator) if numerator else const(1)
    if not denominator:
        return top
    return div(top, _product(denominator))


@lru_cache(maxsize=4096)
def _monomials(spec: EquationSpec, sig: UnitSignature, lo: int, hi: int) -> Tuple[Expr, ...]:
    vectors = monomial_table(spec, (lo, hi)).get(sig, ())
    return tuple(build_monomial(v, spec) for v in vectors)


def monomials_for(spec: EquationSpec, sig: UnitSignature, exp_range: Tuple[int, int] = DEFAULT_EXP_RANGE) -> Tuple[Expr, ...]:
    """All monomials of the given signature, in lexicographic exponent order"""
    return _monomials(spec, UnitSignature.of(sig), int(exp_range[0]), int(exp_range[1]))


def enumerate_initial(spec: EquationSpec, exp_range: Tuple[int, int] = DEFAULT_EXP_RANGE) -> List[Expr]:
    """
    Every monomial whose signature equals the equation's target

    Args:
        spec: Equation
        exp_range: Inclusive exponent bounds

    Returns:
        Candidates in lexicographic order of their exponent vectors; may be empty
    """
    candidates = list(monomials_for(spec, spec.target, exp_range))
    logger.debug(f"{spec.id}: {len(candidates)} initial candidates in {tuple(exp_range)}")
    return candidates


def enumerate_with_restart(
    spec: EquationSpec,
    base_range: Tuple[int, int] = DEFAULT_EXP_RANGE,
    max_widenings: int = 3
) -> List[Expr]:
    """
    enumerate_initial(), widening the range by one on both ends while empty

    Args:
        spec: Equation
        base_range: Starting exponent bounds
        max_widenings: How many times the range may grow

    Returns:
        Non-empty candidate list

    Raises:
        NoValidInitializationError: if every widening still yields nothing
    """
    if max_widenings < 0:
        raise ValueError("max_widenings must be >= 0")

    lo, hi = base_range
    for attempt in range(max_widenings + 1):
        candidates = enumerate_initial(spec, (lo, hi))
        if candidates:
            return candidates
        if attempt < max_widenings:
            logger.warning(f"{spec.id}: no monomial of signature {format_signature(spec.target)} in [{lo},{hi}], widening")
            lo, hi = lo - 1, hi + 1

    raise NoValidInitializationError(
        f"{spec.id}: no monomial of signature {format_signature(spec.target)} "
        f"within [{lo},{hi}] after {max_widenings} widenings"
    )
