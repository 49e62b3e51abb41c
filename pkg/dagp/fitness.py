"""
MSE fitness, linear scaling and the hit criterion
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from dagp.dataset import Dataset
from dagp.expr import Expr, evaluate_batch


logger = logging.getLogger(__name__)

HIT_THRESHOLD = 1e-9
WORST = math.inf
MEMO_LIMIT = 50000


@dataclass(frozen=True)
class FitnessValue:
    """
    Fitness of one expression on one dataset

    mse is the reported error (against a + b*T when scaled); raw_mse is the
    error of T itself. Invalid evaluations carry WORST in both.
    """
    mse: float
    raw_mse: float
    scale_a: float = 0.0
    scale_b: float = 1.0
    scaled: bool = False

    @property
    def reported(self) -> float:
        return self.mse

    @property
    def valid(self) -> bool:
        return math.isfinite(self.mse)

    def better_than(self, other: 'FitnessValue') -> bool:
        """Strict improvement on the reported MSE"""
        return self.reported < other.reported


INVALID = FitnessValue(mse=WORST, raw_mse=WORST)


def score_outputs(T: np.ndarray, y: np.ndarray, scaled: bool) -> FitnessValue:
    """
    Score a vector of model outputs against targets

    Args:
        T: Model outputs, one per row
        y: Targets
        scaled: Fit a + b*T by least squares before measuring the error

    Returns:
        FitnessValue (INVALID-like sentinel when any output is not finite)
    """
    if not np.all(np.isfinite(T)):
        return FitnessValue(mse=WORST, raw_mse=WORST, scaled=scaled)

    with np.errstate(all='ignore'):
        raw = float(np.mean((T - y) ** 2))
    if not math.isfinite(raw):
        raw = WORST
    if not scaled:
        return FitnessValue(mse=raw, raw_mse=raw)

    with np.errstate(all='ignore'):
        mean_t = float(np.mean(T))
        mean_y = float(np.mean(y))
        dt = T - mean_t
        var_t = float(np.mean(dt * dt))
        if var_t == 0.0:
            b = 0.0
        else:
            b = float(np.mean(dt * (y - mean_y))) / var_t
        a = mean_y - b * mean_t
        residual = float(np.mean((y - (a + b * T)) ** 2))

    if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(residual)):
        return FitnessValue(mse=raw, raw_mse=raw, scaled=True)
    # (a, b) = (0, 1) is always feasible; keep it when rounding makes the fit worse
    if raw < residual:
        return FitnessValue(mse=raw, raw_mse=raw, scale_a=0.0, scale_b=1.0, scaled=True)
    return FitnessValue(mse=residual, raw_mse=raw, scale_a=a, scale_b=b, scaled=True)


def mse(e: Expr, d: Dataset) -> FitnessValue:
    """Mean squared error of the unscaled expression"""
    return score_outputs(evaluate_batch(e, d.X), d.y, scaled=False)


def linear_scale(e: Expr, d: Dataset) -> FitnessValue:
    """MSE of a + b*e with (a, b) fitted by least squares"""
    return score_outputs(evaluate_batch(e, d.X), d.y, scaled=True)


def is_hit(f: FitnessValue) -> bool:
    """True iff the reported MSE is strictly below HIT_THRESHOLD"""
    return f.reported < HIT_THRESHOLD


class FitnessEvaluator:
    """
    Counting fitness function bound to one dataset

    Every call increments evaluations. Subtree outputs are memoised by
    canonical key, so neighbours sharing subtrees are cheap to score.
    """

    def __init__(self, d: Dataset, scaled: bool = False):
        self.dataset = d
        self.scaled = scaled
        self.evaluations = 0
        self._memo: Dict[str, np.ndarray] = {}

    def __call__(self, e: Expr) -> FitnessValue:
        self.evaluations += 1
        if len(self._memo) > MEMO_LIMIT:
            logger.debug(f"Clearing evaluation memo ({len(self._memo)} entries)")
            self._memo.clear()
        outputs = evaluate_batch(e, self.dataset.X, self._memo)
        return score_outputs(outputs, self.dataset.y, self.scaled)

    def peek(self, e: Expr) -> FitnessValue:
        """Score without counting (used for re-checks and reporting)"""
        outputs = evaluate_batch(e, self.dataset.X, self._memo)
        return score_outputs(outputs, self.dataset.y, self.scaled)
