"""
Dimensionally-aware neighbourhood
Five operators that rewrite one subtree while keeping its signature, so
every neighbour keeps the signature of the whole expression
"""

import logging
from typing import Callable, Dict, List

from dagp.config import OPERATORS, NeighbourhoodConfig
from dagp.dataset import EquationSpec
from dagp.expr import ADD, DIV, MUL, SUB, Expr, binary, const, positions, subtree_at, substitute_subtree
from dagp.initializer import monomials_for


logger = logging.getLogger(__name__)

Operator = Callable[[Expr, int, EquationSpec, NeighbourhoodConfig], List[Expr]]


def _target(e: Expr, position: int) -> Expr:
    paths = positions(e)
    if not 0 <= position < len(paths):
        raise IndexError(f"position {position} outside tree of size {e.size}")
    return subtree_at(e, paths[position])


def _fits(e: Expr, removed: Expr, added_size: int, cfg: NeighbourhoodConfig) -> bool:
    return e.size - removed.size + added_size <= cfg.max_size


def _replace(e: Expr, position: int, spec: EquationSpec, cfg: NeighbourhoodConfig) -> List[Expr]:
    t = _target(e, position)
    out = []
    for m in monomials_for(spec, t.sig, cfg.exp_range):
        if m == t or not _fits(e, t, m.size, cfg):
            continue
        out.append(substitute_subtree(e, position, m, cfg.max_size))
    return out


def _wrap_constant(kind: str) -> Operator:
    def op(e: Expr, position: int, spec: EquationSpec, cfg: NeighbourhoodConfig) -> List[Expr]:
        t = _target(e, position)
        if not _fits(e, t, t.size + 2, cfg):
            return []
        out = []
        for k in cfg.constants:
            # 0 is only ever allowed as a multiplier
            if k == 0 and kind == DIV:
                continue
            out.append(substitute_subtree(e, position, binary(kind, t, const(k)), cfg.max_size))
        return out
    return op


def _wrap_commensurate(kind: str) -> Operator:
    def op(e: Expr, position: int, spec: EquationSpec, cfg: NeighbourhoodConfig) -> List[Expr]:
        t = _target(e, position)
        out = []
        for q in monomials_for(spec, t.sig, cfg.exp_range):
            if not _fits(e, t, t.size + 1 + q.size, cfg):
                continue
            out.append(substitute_subtree(e, position, binary(kind, t, q), cfg.max_size))
        return out
    return op


_OPERATORS: Dict[str, Operator] = {
    'replace': _replace,
    'mul_int': _wrap_constant(MUL),
    'div_int': _wrap_constant(DIV),
    'add_comm': _wrap_commensurate(ADD),
    'sub_comm': _wrap_commensurate(SUB),
}


def op_replace(e: Expr, position: int, spec: EquationSpec, cfg: NeighbourhoodConfig) -> List[Expr]:
    """Swap the subtree at position for every other monomial of its signature"""
    return _replace(e, position, spec, cfg)


def op_mul_int(e: Expr, position: int, cfg: NeighbourhoodConfig) -> List[Expr]:
    """(t * k) for every k in the constant set"""
    return _OPERATORS['mul_int'](e, position, None, cfg)


def op_div_int(e: Expr, position: int, cfg: NeighbourhoodConfig) -> List[Expr]:
    """(t / k) for every non-zero k in the constant set"""
    return _OPERATORS['div_int'](e, position, None, cfg)


def op_add_comm(e: Expr, position: int, spec: EquationSpec, cfg: NeighbourhoodConfig) -> List[Expr]:
    """(t + q) for every monomial q commensurate with t"""
    return _OPERATORS['add_comm'](e, position, spec, cfg)


def op_sub_comm(e: Expr, position: int, spec: EquationSpec, cfg: NeighbourhoodConfig) -> List[Expr]:
    """(t - q) for every monomial q commensurate with t"""
    return _OPERATORS['sub_comm'](e, position, spec, cfg)


def apply_operator(tag: str, e: Expr, position: int, spec: EquationSpec, cfg: NeighbourhoodConfig) -> List[Expr]:
    """
    Apply one operator at one pre-order position

    Args:
        tag: One of OPERATORS
        e: Expression
        position: Pre-order node index
        spec: Equation providing variable signatures
        cfg: Neighbourhood settings

    Returns:
        Candidates within the size cap, in deterministic order
    """
    if tag not in _OPERATORS:
        raise ValueError(f"unknown operator '{tag}'; choose from {', '.join(OPERATORS)}")
    return _OPERATORS[tag](e, position, spec, cfg)


def neighbours(e: Expr, spec: EquationSpec, cfg: NeighbourhoodConfig, whole_tree: bool = True) -> List[Expr]:
    """
    Complete neighbourhood of e

    Blocks follow cfg.operator_order; inside a block positions are visited in
    pre-order and constants/monomials in ascending order. Candidates over the
    size cap are dropped.

    Args:
        e: Expression whose signature equals the target
        spec: Equation
        cfg: Neighbourhood settings
        whole_tree: Include replacing the root itself; without it the
            initial monomials stop being neighbours of one another

    Returns:
        Ordered candidate list
    """
    count = len(positions(e))
    out: List[Expr] = []
    for tag in cfg.operator_order:
        op = _OPERATORS[tag]
        for position in range(count):
            if position == 0 and tag == 'replace' and not whole_tree:
                continue
            out.extend(op(e, position, spec, cfg))
    return out
