"""
Utility functions for report cells, CSV files and JSON-safe values
"""

import csv
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union


UNSOLVED = '-'


def format_hit_cell(evaluations: Optional[int]) -> str:
    """
    Evaluation count of a deterministic search

    Args:
        evaluations: Global counter at the first hit, or None

    Returns:
        The count, or '-' when unsolved
    """
    return UNSOLVED if evaluations is None else str(int(evaluations))


def format_gp_cell(estimate: Optional[float], successes: int) -> str:
    """
    GP estimate with the number of successful runs, e.g. '580 (50)'

    Args:
        estimate: estimate_evaluations() result, or None
        successes: Successful runs

    Returns:
        Formatted cell, '-' when no run succeeded
    """
    if estimate is None or successes == 0:
        return UNSOLVED
    return f"{int(round(estimate))} ({successes})"


def parse_optional_int(text: str) -> Optional[int]:
    text = (text or '').strip()
    if text in ('', UNSOLVED):
        return None
    return int(float(text))


def parse_optional_float(text: str) -> Optional[float]:
    text = (text or '').strip()
    if text in ('', UNSOLVED):
        return None
    return float(text)


def json_safe(value: Any) -> Any:
    """Replace inf/nan floats (which JSON cannot hold) with None"""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value


def write_rows_csv(path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)


def read_rows_csv(path: Union[str, Path]) -> List[Dict[str, str]]:
    with open(path, 'r', encoding='utf-8', newline='') as f:
        return list(csv.DictReader(f))


def format_mse(value: float) -> str:
    """Full-precision repr for CSV cells; 'inf' for the invalid sentinel"""
    return repr(float(value)) if math.isfinite(value) else 'inf'
