"""
Expression trees over +, -, *, / with variables and integer constants
Every node caches its unit signature and node count; trees are immutable
"""

import math
import re
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from dagp.errors import NonFiniteError, SignatureMismatchError, SizeLimitError
from dagp.units import DIMENSIONLESS, UnitSignature, sig_addsub_check, sig_div, sig_mul


ADD = 'add'
SUB = 'sub'
MUL = 'mul'
DIV = 'div'
VAR = 'var'
CONST = 'const'

BINARY_KINDS = (ADD, SUB, MUL, DIV)
COMMUTATIVE_KINDS = (ADD, MUL)

OP_SYMBOLS = {ADD: '+', SUB: '-', MUL: '*', DIV: '/'}
SYMBOL_KINDS = {symbol: kind for kind, symbol in OP_SYMBOLS.items()}

DEFAULT_MAX_SIZE = 42

Path = Tuple[int, ...]


class Expr:
    """
    Immutable expression node

    Build trees with var(), const(), add(), sub(), mul() and div() rather
    than calling the constructor directly.
    """

    __slots__ = ('kind', 'left', 'right', 'value', 'sig', 'size', '_prefix', '_key', '_paths')

    def __init__(
        self,
        kind: str,
        sig: UnitSignature,
        left: Optional['Expr'] = None,
        right: Optional['Expr'] = None,
        value: int = 0
    ):
        self.kind = kind
        self.left = left
        self.right = right
        self.value = value
        self.sig = sig
        self.size = 1 if left is None else 1 + left.size + right.size
        self._prefix: Optional[str] = None
        self._key: Optional[str] = None
        self._paths: Optional[Tuple[Path, ...]] = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    @property
    def children(self) -> Tuple['Expr', ...]:
        return () if self.is_leaf else (self.left, self.right)

    @property
    def prefix(self) -> str:
        """Structural prefix text, e.g. (* x0 (/ x1 3))"""
        if self._prefix is None:
            if self.kind == VAR:
                self._prefix = f"x{self.value}"
            elif self.kind == CONST:
                self._prefix = str(self.value)
            else:
                self._prefix = f"({OP_SYMBOLS[self.kind]} {self.left.prefix} {self.right.prefix})"
        return self._prefix

    @property
    def key(self) -> str:
        """Canonical text: operands of + and * sorted, - and / kept in order"""
        if self._key is None:
            if self.is_leaf:
                self._key = self.prefix
            else:
                a, b = self.left.key, self.right.key
                if self.kind in COMMUTATIVE_KINDS and b < a:
                    a, b = b, a
                self._key = f"({OP_SYMBOLS[self.kind]} {a} {b})"
        return self._key

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Expr) and self.prefix == other.prefix

    def __hash__(self) -> int:
        return hash(self.prefix)

    def __repr__(self) -> str:
        return f"Expr({self.prefix})"


def var(index: int, sig: UnitSignature) -> Expr:
    """Leaf for the index-th variable carrying its unit signature"""
    return Expr(VAR, UnitSignature.of(sig), value=int(index))


def const(k: int) -> Expr:
    """Dimensionless integer constant leaf"""
    return Expr(CONST, DIMENSIONLESS, value=int(k))


def add(a: Expr, b: Expr) -> Expr:
    return Expr(ADD, sig_addsub_check(a.sig, b.sig), a, b)


def sub(a: Expr, b: Expr) -> Expr:
    return Expr(SUB, sig_addsub_check(a.sig, b.sig), a, b)


def mul(a: Expr, b: Expr) -> Expr:
    return Expr(MUL, sig_mul(a.sig, b.sig), a, b)


def div(a: Expr, b: Expr) -> Expr:
    return Expr(DIV, sig_div(a.sig, b.sig), a, b)


_BUILDERS = {ADD: add, SUB: sub, MUL: mul, DIV: div}


def binary(kind: str, a: Expr, b: Expr) -> Expr:
    """Build a binary node of the given kind"""
    return _BUILDERS[kind](a, b)


def signature_of(e: Expr, signatures: Optional[Sequence[UnitSignature]] = None) -> UnitSignature:
    """
    Recompute the signature of a tree from its leaves

    Args:
        e: Expression
        signatures: Optional per-variable signatures; defaults to the ones
            stored on the Var leaves

    Returns:
        Folded signature

    Raises:
        IncommensurableError: if an addition/subtraction joins different signatures
    """
    if e.kind == VAR:
        return UnitSignature.of(signatures[e.value]) if signatures is not None else e.sig
    if e.kind == CONST:
        return DIMENSIONLESS
    left = signature_of(e.left, signatures)
    right = signature_of(e.right, signatures)
    if e.kind == MUL:
        return sig_mul(left, right)
    if e.kind == DIV:
        return sig_div(left, right)
    return sig_addsub_check(left, right)


def size(e: Expr) -> int:
    """Node count, recomputed from scratch"""
    if e.is_leaf:
        return 1
    return 1 + size(e.left) + size(e.right)


def depth(e: Expr) -> int:
    """Longest root-to-leaf edge count (a single leaf has depth 0)"""
    if e.is_leaf:
        return 0
    return 1 + max(depth(e.left), depth(e.right))


def canonicalize(e: Expr) -> bytes:
    """Canonical key, identical for trees that differ only in + / * operand order"""
    return e.key.encode('ascii')


def evaluate(e: Expr, point: Sequence[float]) -> float:
    """
    Evaluate a tree at a single point

    Args:
        e: Expression
        point: Variable values, indexed like Var leaves

    Returns:
        Finite result

    Raises:
        NonFiniteError: on division by zero, overflow or nan
    """
    try:
        result = _evaluate_scalar(e, point)
    except (ZeroDivisionError, OverflowError) as exc:
        raise NonFiniteError(f"{e.prefix} is not finite at {list(point)}") from exc
    if not math.isfinite(result):
        raise NonFiniteError(f"{e.prefix} is not finite at {list(point)}")
    return result


def _evaluate_scalar(e: Expr, point: Sequence[float]) -> float:
    if e.kind == VAR:
        return float(point[e.value])
    if e.kind == CONST:
        return float(e.value)
    a = _evaluate_scalar(e.left, point)
    b = _evaluate_scalar(e.right, point)
    if e.kind == ADD:
        return a + b
    if e.kind == SUB:
        return a - b
    if e.kind == MUL:
        return a * b
    return a / b


def evaluate_batch(e: Expr, X: np.ndarray, memo: Optional[Dict[str, np.ndarray]] = None) -> np.ndarray:
    """
    Evaluate a tree on every row of X at once

    Division by zero and overflow yield inf/nan entries instead of raising;
    the fitness layer maps those to the worst fitness.

    Args:
        e: Expression
        X: n x p matrix of variable values
        memo: Optional cache of subtree outputs keyed by canonical key;
            only valid for a single X

    Returns:
        Output vector of length n
    """
    with np.errstate(all='ignore'):
        return _evaluate_array(e, X, memo)


def _evaluate_array(e: Expr, X: np.ndarray, memo: Optional[Dict[str, np.ndarray]]) -> np.ndarray:
    if e.kind == VAR:
        return X[:, e.value]
    if e.kind == CONST:
        return np.full(X.shape[0], float(e.value))
    if memo is not None:
        cached = memo.get(e.key)
        if cached is not None:
            return cached
    a = _evaluate_array(e.left, X, memo)
    b = _evaluate_array(e.right, X, memo)
    if e.kind == ADD:
        out = a + b
    elif e.kind == SUB:
        out = a - b
    elif e.kind == MUL:
        out = a * b
    else:
        out = a / b
    if memo is not None:
        memo[e.key] = out
    return out


def positions(e: Expr) -> Tuple[Path, ...]:
    """Paths (0 = left, 1 = right) of every node in pre-order, cached on the node"""
    if e._paths is None:
        out: List[Path] = []

        def walk(node: Expr, path: Path) -> None:
            out.append(path)
            if not node.is_leaf:
                walk(node.left, path + (0,))
                walk(node.right, path + (1,))

        walk(e, ())
        e._paths = tuple(out)
    return e._paths


def subtree_at(e: Expr, path: Path) -> Expr:
    """Subtree reached by following a path from the root"""
    node = e
    for step in path:
        node = node.right if step else node.left
    return node


def _replace_at(e: Expr, path: Path, replacement: Expr) -> Expr:
    """Rebuild the spine of e with the subtree at path swapped (no checks)"""
    if not path:
        return replacement
    if path[0] == 0:
        return binary(e.kind, _replace_at(e.left, path[1:], replacement), e.right)
    return binary(e.kind, e.left, _replace_at(e.right, path[1:], replacement))


def substitute_subtree(e: Expr, position: int, replacement: Expr, max_size: int = DEFAULT_MAX_SIZE) -> Expr:
    """
    Swap the subtree at a pre-order index for a replacement of equal signature

    Args:
        e: Expression
        position: Pre-order node index
        replacement: New subtree
        max_size: Node cap for the result

    Returns:
        New tree with recomputed caches

    Raises:
        IndexError: if position is out of range
        SignatureMismatchError: if the replacement changes the signature
        SizeLimitError: if the result exceeds max_size
    """
    paths = positions(e)
    if not 0 <= position < len(paths):
        raise IndexError(f"position {position} outside tree of size {e.size}")
    path = paths[position]
    target = subtree_at(e, path)
    if target.sig != replacement.sig:
        raise SignatureMismatchError(f"replacement {replacement.sig} does not match subtree {target.sig}")
    new_size = e.size - target.size + replacement.size
    if new_size > max_size:
        raise SizeLimitError(f"tree of size {new_size} exceeds the cap of {max_size}")
    return _replace_at(e, path, replacement)


def to_prefix(e: Expr) -> str:
    return e.prefix


_TOKEN_PATTERN = re.compile(r'\(|\)|[^\s()]+')


def parse_prefix(text: str, signatures: Sequence[UnitSignature]) -> Expr:
    """
    Parse the prefix form written by to_prefix()

    Args:
        text: Text such as "(* x0 (/ x1 3))"
        signatures: Per-variable signatures to bind x<i> leaves

    Returns:
        Parsed tree

    Raises:
        ValueError: on malformed text
        IncommensurableError: if the text adds incommensurable subtrees
    """
    tokens = _TOKEN_PATTERN.findall(text)
    expr, pos = _parse_tokens(tokens, 0, signatures)
    if pos != len(tokens):
        raise ValueError(f"trailing tokens in {text!r}")
    return expr


def _parse_tokens(tokens: List[str], pos: int, signatures: Sequence[UnitSignature]) -> Tuple[Expr, int]:
    if pos >= len(tokens):
        raise ValueError("unexpected end of expression")
    token = tokens[pos]
    if token == '(':
        if pos + 1 >= len(tokens) or tokens[pos + 1] not in SYMBOL_KINDS:
            raise ValueError(f"expected operator after '(' at token {pos}")
        kind = SYMBOL_KINDS[tokens[pos + 1]]
        left, pos = _parse_tokens(tokens, pos + 2, signatures)
        right, pos = _parse_tokens(tokens, pos, signatures)
        if pos >= len(tokens) or tokens[pos] != ')':
            raise ValueError(f"expected ')' at token {pos}")
        return binary(kind, left, right), pos + 1
    if token.startswith('x'):
        index = int(token[1:])
        if index >= len(signatures):
            raise ValueError(f"variable {token} outside the {len(signatures)} known variables")
        return var(index, signatures[index]), pos + 1
    try:
        return const(int(token)), pos + 1
    except ValueError:
        raise ValueError(f"unexpected token {token!r}") from None


def to_infix(e: Expr, names: Optional[Sequence[str]] = None) -> str:
    """Parenthesised infix text using variable names when given"""
    if e.kind == VAR:
        return names[e.value] if names else f"x{e.value}"
    if e.kind == CONST:
        return f"({e.value})" if e.value < 0 else str(e.value)
    return f"({to_infix(e.left, names)} {OP_SYMBOLS[e.kind]} {to_infix(e.right, names)})"

