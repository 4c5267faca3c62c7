"""
Per-process memo for objects that are expensive to rebuild inside a worker:
noise bases, initial data, multipliers and norm weights. Keys are config
fingerprints, so two workers computing the same key produce identical objects
and nothing is shared. Every prefix holds at most CACHE_MAX_ENTRIES entries.
"""
import hashlib
import json
import logging
from collections import OrderedDict
from typing import Any, Callable, Dict, Optional

from core.config import settings

logger = logging.getLogger(__name__)

# Cache key prefixes
BASIS_PREFIX = "basis:"
INITIAL_PREFIX = "initial:"
NORM_PREFIX = "norm:"
MULTIPLIER_PREFIX = "multiplier:"
TABLE_PREFIX = "table:"

_store: Dict[str, "OrderedDict[str, Any]"] = {}


def fingerprint(payload: Any) -> str:
    """Stable short hash of a JSON-serializable payload"""
    blob = json.dumps(payload, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha1(blob).hexdigest()[:16]


def get_cached(prefix: str, key: str) -> Optional[Any]:
    entries = _store.get(prefix)
    if entries is None or key not in entries:
        return None
    entries.move_to_end(key)
    return entries[key]


def set_cached(prefix: str, key: str, value: Any) -> None:
    entries = _store.setdefault(prefix, OrderedDict())
    entries[key] = value
    entries.move_to_end(key)
    while len(entries) > max(1, settings.CACHE_MAX_ENTRIES):
        evicted, _ = entries.popitem(last=False)
        logger.debug("cache evict %s%s", prefix, evicted)


def get_or_build(prefix: str, key: str, builder: Callable[[], Any]) -> Any:
    """
    Return the cached object for prefix+key, building it on first use.

    Args:
        prefix: one of the *_PREFIX constants
        key: config fingerprint
        builder: zero-argument factory run on a miss

    Returns:
        the cached or freshly built object
    """
    value = get_cached(prefix, key)
    if value is None:
        value = builder()
        set_cached(prefix, key, value)
        logger.debug("cache miss %s%s", prefix, key)
    return value


def clear_cache(prefix: Optional[str] = None) -> None:
    """Drop every entry, or only those under one prefix"""
    if prefix is None:
        _store.clear()
        return
    _store.pop(prefix, None)
