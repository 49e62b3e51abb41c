"""
Feynman equation registry, unit tables and datasets
Loads data tables in the Feynman row format, subsamples them and
generates synthetic data from the closed-form ground truth
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from fuzzywuzzy import process

from dagp.errors import (
    ArityMismatchError,
    IncommensurableError,
    InsufficientRowsError,
    MalformedRowError,
    RangeMisconfigurationError,
    UnknownEquationError,
)
from dagp.units import (
    DIMENSIONLESS,
    UnitSignature,
    format_signature,
    parse_signature,
    sig_addsub_check,
    sig_div,
    sig_mul,
    sig_pow,
)


logger = logging.getLogger(__name__)

UNIT_TABLE_DIR = Path(__file__).resolve().parent.parent / 'data' / 'units'
DEFAULT_RANGE = (1.0, 5.0)
MAX_RESAMPLE_ROUNDS = 100

Range = Tuple[float, float]


class Quantity:
    """
    Unit-carrying stand-in for a variable while folding a closed form

    Plain numbers mixed into the formula are dimensionless.
    """

    __slots__ = ('sig',)

    def __init__(self, sig: UnitSignature):
        self.sig = sig

    @staticmethod
    def _sig(other: Union['Quantity', float]) -> UnitSignature:
        return other.sig if isinstance(other, Quantity) else DIMENSIONLESS

    def __add__(self, other):
        return Quantity(sig_addsub_check(self.sig, self._sig(other)))

    def __radd__(self, other):
        return Quantity(sig_addsub_check(self._sig(other), self.sig))

    def __sub__(self, other):
        return Quantity(sig_addsub_check(self.sig, self._sig(other)))

    def __rsub__(self, other):
        return Quantity(sig_addsub_check(self._sig(other), self.sig))

    def __mul__(self, other):
        return Quantity(sig_mul(self.sig, self._sig(other)))

    def __rmul__(self, other):
        return Quantity(sig_mul(self._sig(other), self.sig))

    def __truediv__(self, other):
        return Quantity(sig_div(self.sig, self._sig(other)))

    def __rtruediv__(self, other):
        return Quantity(sig_div(self._sig(other), self.sig))

    def __pow__(self, k: int):
        if int(k) != k:
            raise ValueError(f"only integer powers keep signatures integral, got {k}")
        return Quantity(sig_pow(self.sig, int(k)))

    def __neg__(self):
        return self

    def __pos__(self):
        return self


def sqrt(x):
    """Square root for both numeric columns and Quantity folding"""
    if isinstance(x, Quantity):
        if any(e % 2 for e in x.sig):
            raise IncommensurableError(f"square root of {format_signature(x.sig)} has fractional exponents")
        return Quantity(UnitSignature.of(e // 2 for e in x.sig))
    return np.sqrt(x)


def cos(x):
    """Cosine for both numeric columns and Quantity folding (argument must be dimensionless)"""
    if isinstance(x, Quantity):
        if x.sig != DIMENSIONLESS:
            raise IncommensurableError(f"cosine of dimensioned argument {format_signature(x.sig)}")
        return Quantity(DIMENSIONLESS)
    return np.cos(x)


pi = math.pi


@dataclass(frozen=True)
class EquationSpec:
    """One Feynman benchmark problem"""
    id: str
    names: Tuple[str, ...]
    signatures: Tuple[UnitSignature, ...]
    target: UnitSignature
    formula: Callable = field(compare=False, repr=False)
    ranges: Tuple[Range, ...] = ()
    text: str = ''
    table_units: int = 0

    @property
    def arity(self) -> int:
        return len(self.names)

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        """Ground-truth outputs for every row of X"""
        with np.errstate(all='ignore'):
            return np.asarray(self.formula(*np.asarray(X, dtype=float).T), dtype=float)


@dataclass
class Dataset:
    """Sampled points with targets, bound to an equation"""
    X: np.ndarray
    y: np.ndarray
    spec: EquationSpec

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.X.ndim != 2 or self.X.shape[0] == 0:
            raise ValueError("dataset needs at least one row")
        if self.X.shape[1] != self.spec.arity:
            raise ArityMismatchError(f"{self.spec.id} expects {self.spec.arity} variables, got {self.X.shape[1]}")
        if self.y.shape != (self.X.shape[0],):
            raise ValueError(f"targets have shape {self.y.shape}, expected ({self.X.shape[0]},)")
        if not np.all(np.isfinite(self.y)):
            raise ValueError("dataset targets must be finite")

    @property
    def n(self) -> int:
        return self.X.shape[0]


# Registry order. Ranges default to DEFAULT_RANGE per variable.
_EQUATIONS = [
    {'id': 'I.8.14', 'text': 'd = sqrt((x2-x1)^2 + (y2-y1)^2)', 'units': 1,
     'formula': lambda x1, x2, y1, y2: sqrt((x2 - x1) ** 2 + (y2 - y1) ** 2)},
    {'id': 'I.12.1', 'text': 'F = mu*Nn', 'units': 3,
     'formula': lambda mu, Nn: mu * Nn},
    {'id': 'I.12.2', 'text': 'F = q1*q2/(4*pi*epsilon*r^2)', 'units': 4,
     'formula': lambda q1, q2, epsilon, r: q1 * q2 / (4 * pi * epsilon * r ** 2)},
    {'id': 'I.12.5', 'text': 'F = q2*Ef', 'units': 4,
     'formula': lambda q2, Ef: q2 * Ef},
    {'id': 'I.13.4', 'text': 'K = 1/2*m*(v^2 + u^2 + w^2)', 'units': 3,
     'formula': lambda m, v, u, w: 0.5 * m * (v ** 2 + u ** 2 + w ** 2)},
    {'id': 'I.14.3', 'text': 'U = m*g*z', 'units': 3,
     'formula': lambda m, g, z: m * g * z},
    {'id': 'I.14.4', 'text': 'U = k_spring*x^2/2', 'units': 3,
     'formula': lambda k_spring, x: k_spring * x ** 2 / 2},
    {'id': 'I.18.4', 'text': 'r = (m1*r1 + m2*r2)/(m1 + m2)', 'units': 2,
     'formula': lambda m1, m2, r1, r2: (m1 * r1 + m2 * r2) / (m1 + m2)},
    {'id': 'I.24.6', 'text': 'E = 1/4*m*(omega^2 + omega_0^2)*x^2', 'units': 3,
     'formula': lambda m, omega, omega_0, x: 0.25 * m * (omega ** 2 + omega_0 ** 2) * x ** 2},
    {'id': 'I.25.13', 'text': 'Ve = q/C', 'units': 4,
     'formula': lambda q, C: q / C},
    {'id': 'I.27.6', 'text': 'ff = 1/(1/d1 + n/d2)', 'units': 1,
     'formula': lambda d1, d2, n: 1 / (1 / d1 + n / d2)},
    {'id': 'I.29.4', 'text': 'k = omega/c', 'units': 2,
     'formula': lambda omega, c: omega / c},
    {'id': 'I.32.5', 'text': 'P = q^2*a^2/(6*pi*epsilon*c^3)', 'units': 4,
     'formula': lambda q, a, epsilon, c: q ** 2 * a ** 2 / (6 * pi * epsilon * c ** 3)},
    {'id': 'I.34.8', 'text': 'omega = q*v*B/p', 'units': 4,
     'formula': lambda q, v, B, p: q * v * B / p},
    {'id': 'I.39.1', 'text': 'En = 3/2*pr*V', 'units': 3,
     'formula': lambda pr, V: 1.5 * pr * V},
    {'id': 'I.39.22', 'text': 'PF = n*kb*T/V', 'units': 4,
     'formula': lambda n, T, V, kb: n * kb * T / V},
    {'id': 'I.43.16', 'text': 'v = mu_drift*q*Ve/d', 'units': 4,
     'formula': lambda mu_drift, q, Ve, d: mu_drift * q * Ve / d},
    {'id': 'I.43.31', 'text': 'D = mob*kb*T', 'units': 4,
     'formula': lambda mob, kb, T: mob * kb * T},
    {'id': 'II.2.42', 'text': 'P = kappa*(T2 - T1)*A/d', 'units': 4,
     'formula': lambda kappa, T1, T2, A, d: kappa * (T2 - T1) * A / d},
    {'id': 'II.8.31', 'text': 'E_den = epsilon*Ef^2/2', 'units': 4,
     'formula': lambda epsilon, Ef: epsilon * Ef ** 2 / 2},
    {'id': 'II.11.3', 'text': 'x = q*Ef/(m*(omega_0^2 - omega^2))', 'units': 4,
     'formula': lambda q, Ef, m, omega_0, omega: q * Ef / (m * (omega_0 ** 2 - omega ** 2)),
     'ranges': {'omega_0': (3.0, 5.0), 'omega': (1.0, 2.0)}},
    {'id': 'II.15.4', 'text': 'E = -mom*B*cos(theta)', 'units': 4,
     'formula': lambda mom, B, theta: -mom * B * cos(theta)},
    {'id': 'II.34.2', 'text': 'mom = q*v*r/2', 'units': 4,
     'formula': lambda q, v, r: q * v * r / 2},
    {'id': 'II.34.29b', 'text': 'E = g_*mom*B*Jz/h', 'units': 4,
     'formula': lambda g_, h, Jz, mom, B: g_ * mom * B * Jz / h},
    {'id': 'II.38.3', 'text': 'F = Y*A*x/d', 'units': 3,
     'formula': lambda Y, A, d, x: Y * A * x / d},
    {'id': 'III.13.18', 'text': 'v = 2*E_n*d^2*k/h', 'units': 3,
     'formula': lambda E_n, d, k, h: 2 * E_n * d ** 2 * k / h},
    {'id': 'III.15.14', 'text': 'm = h^2/(2*E_n*d^2)', 'units': 3,
     'formula': lambda h, E_n, d: h ** 2 / (2 * E_n * d ** 2)},
]


def load_unit_table(path: Union[str, Path]) -> Tuple[List[str], List[UnitSignature], UnitSignature]:
    """
    Load a unit-table file

    Args:
        path: File with one "name [v,w,x,y,z]" line per variable and a
            "target [..]" line

    Returns:
        Tuple of (variable names, variable signatures, target signature)
    """
    names: List[str] = []
    sigs: List[UnitSignature] = []
    target: Optional[UnitSignature] = None

    with open(path, 'r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            name, _, rest = line.partition(' ')
            try:
                sig = parse_signature(rest)
            except ValueError as e:
                raise MalformedRowError(str(e), line_number) from None
            if name == 'target':
                target = sig
            else:
                names.append(name)
                sigs.append(sig)

    if target is None:
        raise MalformedRowError(f"{path} has no target line")
    return names, sigs, target


def write_unit_table(path: Union[str, Path], names: Sequence[str], sigs: Sequence[UnitSignature], target: UnitSignature) -> None:
    """Write a unit-table file readable by load_unit_table()"""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        for name, sig in zip(names, sigs):
            f.write(f"{name} {format_signature(sig)}\n")
        f.write(f"target {format_signature(target)}\n")


def _build_spec(entry: Dict, unit_dir: Path) -> EquationSpec:
    names, sigs, target = load_unit_table(unit_dir / f"{entry['id']}.txt")
    overrides = entry.get('ranges', {})
    ranges = tuple(tuple(overrides.get(name, DEFAULT_RANGE)) for name in names)
    return EquationSpec(
        id=entry['id'],
        names=tuple(names),
        signatures=tuple(sigs),
        target=target,
        formula=entry['formula'],
        ranges=ranges,
        text=entry['text'],
        table_units=entry['units'],
    )


@lru_cache(maxsize=None)
def _registry(unit_dir: str) -> Tuple[EquationSpec, ...]:
    specs = tuple(_build_spec(entry, Path(unit_dir)) for entry in _EQUATIONS)
    logger.debug(f"Loaded {len(specs)} equations from {unit_dir}")
    return specs


def registry(unit_dir: Optional[Union[str, Path]] = None) -> List[EquationSpec]:
    """
    The 27 benchmark equations, in registry order

    Args:
        unit_dir: Directory of unit-table files (defaults to the bundled data)

    Returns:
        List of equation specs
    """
    return list(_registry(str(unit_dir or UNIT_TABLE_DIR)))


def ground_truth_signature(spec: EquationSpec) -> UnitSignature:
    """Fold the closed form through the unit algebra"""
    result = spec.formula(*(Quantity(sig) for sig in spec.signatures))
    return result.sig if isinstance(result, Quantity) else DIMENSIONLESS


def table_unit_count(spec: EquationSpec) -> int:
    """Number of distinct base units used by the variables"""
    used = set()
    for sig in spec.signatures:
        used.update(i for i, exponent in enumerate(sig) if exponent != 0)
    return len(used)


def normalize_id(equation_id: str) -> str:
    return equation_id.strip().lower()


def find_equation(query: str, specs: Optional[Sequence[EquationSpec]] = None) -> EquationSpec:
    """
    Look up an equation by id with typo tolerance

    Args:
        query: Equation id such as "I.12.5"
        specs: Specs to search (defaults to the registry)

    Returns:
        Matching spec

    Raises:
        UnknownEquationError: with up to three suggestions when nothing matches
    """
    specs = list(specs) if specs is not None else registry()

    # 1. Exact match
    for spec in specs:
        if spec.id == query:
            return spec

    # 2. Case-insensitive match
    query_norm = normalize_id(query)
    for spec in specs:
        if normalize_id(spec.id) == query_norm:
            return spec

    # 3. Fuzzy match, only used for suggestions: ids differ by a digit
    ids = [spec.id for spec in specs]
    suggestions = [match for match, score in process.extract(query, ids, limit=3) if score >= 80]
    raise UnknownEquationError(query, suggestions)


def load_table(path: Union[str, Path], spec: EquationSpec) -> Dataset:
    """
    Load a whitespace-separated data table (last column is the target)

    Args:
        path: Data file path
        spec: Equation the rows belong to

    Returns:
        Parsed dataset

    Raises:
        MalformedRowError: on a non-numeric or non-finite field
        ArityMismatchError: on a row with the wrong number of columns
    """
    rows: List[List[float]] = []
    expected = spec.arity + 1

    with open(path, 'r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, 1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != expected:
                raise ArityMismatchError(f"expected {expected} columns, found {len(fields)}", line_number)
            try:
                values = [float(x) for x in fields]
            except ValueError:
                raise MalformedRowError(f"non-numeric field in {line.strip()!r}", line_number) from None
            if not all(math.isfinite(v) for v in values):
                raise MalformedRowError(f"non-finite field in {line.strip()!r}", line_number)
            rows.append(values)

    if not rows:
        raise MalformedRowError(f"{path} contains no rows")

    table = np.array(rows, dtype=float)
    logger.info(f"Loaded {table.shape[0]} rows for {spec.id} from {path}")
    return Dataset(X=table[:, :-1], y=table[:, -1], spec=spec)


def write_table(path: Union[str, Path], d: Dataset) -> None:
    """Write rows in the Feynman format with enough digits to round-trip"""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, np.column_stack([d.X, d.y]), fmt='%.17g')


def sample_uniform(d: Dataset, n: int = 100, seed: Optional[int] = None) -> Dataset:
    """
    Choose n rows uniformly without replacement

    Args:
        d: Source dataset
        n: Number of rows to keep
        seed: Random seed

    Returns:
        Subset keeping the source row order

    Raises:
        InsufficientRowsError: if n exceeds the number of rows
    """
    if n > d.n:
        raise InsufficientRowsError(f"requested {n} rows from a dataset of {d.n}")
    if n < 1:
        raise InsufficientRowsError(f"requested {n} rows")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(d.n, size=n, replace=False))
    return Dataset(X=d.X[idx], y=d.y[idx], spec=d.spec)


def generate_synthetic(spec: EquationSpec, n: int = 100, seed: Optional[int] = None) -> Dataset:
    """
    Draw points uniformly from the equation's variable ranges and compute exact targets

    Rows whose target is not finite are redrawn.

    Args:
        spec: Equation
        n: Number of rows
        seed: Random seed

    Returns:
        Synthetic dataset

    Raises:
        RangeMisconfigurationError: on empty/inverted ranges or when
            singular rows keep coming back
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if len(spec.ranges) != spec.arity:
        raise RangeMisconfigurationError(f"{spec.id} has {len(spec.ranges)} ranges for {spec.arity} variables")
    for name, (lo, hi) in zip(spec.names, spec.ranges):
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise RangeMisconfigurationError(f"{spec.id}: invalid range [{lo}, {hi}] for {name}")

    rng = np.random.default_rng(seed)
    lows = np.array([lo for lo, _ in spec.ranges])
    highs = np.array([hi for _, hi in spec.ranges])

    X = rng.uniform(lows, highs, size=(n, spec.arity))
    y = spec.evaluate(X)
    bad = ~np.isfinite(y)

    rounds = 0
    while bad.any():
        rounds += 1
        if rounds > MAX_RESAMPLE_ROUNDS:
            raise RangeMisconfigurationError(f"{spec.id}: ranges keep producing singular targets")
        logger.warning(f"{spec.id}: redrawing {int(bad.sum())} singular rows")
        X[bad] = rng.uniform(lows, highs, size=(int(bad.sum()), spec.arity))
        y = spec.evaluate(X)
        bad = ~np.isfinite(y)

    return Dataset(X=X, y=y, spec=spec)
