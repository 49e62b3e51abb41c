"""
Startup checks
Creates the output directory and verifies the bundled unit tables
"""

import logging
from pathlib import Path
from typing import Union

from dagp.dataset import UNIT_TABLE_DIR, _EQUATIONS


logger = logging.getLogger(__name__)


def ensure_unit_tables_exist(unit_dir: Union[str, Path] = UNIT_TABLE_DIR) -> bool:
    """
    Check that every registry equation has a unit table

    Returns:
        True when none is missing
    """
    unit_dir = Path(unit_dir)
    missing = [entry['id'] for entry in _EQUATIONS if not (unit_dir / f"{entry['id']}.txt").exists()]
    if missing:
        logger.warning(f"Missing unit tables in {unit_dir}: {', '.join(missing)}")
        return False

    logger.info(f"Unit tables found for all {len(_EQUATIONS)} equations")
    return True


def init_output_directory(path: Union[str, Path]) -> Path:
    """Ensure the output directory exists"""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    logger.info(f"Output directory: {out.absolute()}")
    return out
