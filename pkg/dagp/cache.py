"""
JSON result envelopes keyed by config digest
A cached per-equation result is reused only while the digest still matches
"""

import json
import logging
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional, Union


logger = logging.getLogger(__name__)


def load_cache(cache_file: Union[str, Path]) -> Optional[Dict[str, Any]]:
    """
    Load an envelope from a JSON file

    Args:
        cache_file: Path to cache file

    Returns:
        Dict with 'timestamp', 'digest' and 'data' keys, or None if missing/invalid
    """
    if not os.path.exists(cache_file):
        return None

    try:
        with open(cache_file, 'r', encoding='utf-8') as f:
            return json.load(f)
    except (json.JSONDecodeError, IOError) as e:
        logger.warning(f"Error loading cache from {cache_file}: {e}")
        return None


def save_cache(cache_file: Union[str, Path], data: Any, digest: str = '') -> None:
    """
    Save data with a timestamp and the digest of the config that produced it

    Args:
        cache_file: Path to cache file
        data: JSON-serialisable payload
        digest: Config digest
    """
    Path(cache_file).parent.mkdir(parents=True, exist_ok=True)

    envelope = {
        'timestamp': datetime.now(timezone.utc).isoformat(),
        'digest': digest,
        'data': data
    }

    try:
        with open(cache_file, 'w', encoding='utf-8') as f:
            json.dump(envelope, f, indent=2, ensure_ascii=False, sort_keys=True)
    except IOError as e:
        logger.error(f"Error saving cache to {cache_file}: {e}")


def is_cache_valid(cache_file: Union[str, Path], digest: str) -> bool:
    """True if the file holds an envelope written under the same config digest"""
    cache = load_cache(cache_file)
    if not cache or 'data' not in cache:
        return False
    return cache.get('digest') == digest
