"""Count tables behind a cache.

Inside an application context tables go through Flask-Caching under
``gtc-table:<TABLE_VERSION>:<mode>:<max_n>``; outside one, a module-level
memo stands in. A table cached for a larger size is reused by truncation.
"""
import logging
from typing import Dict, List, Optional, Tuple

from flask import has_app_context

from gtcnet.engine import DEFAULT_TRIVARIATE_CAP, CountTable, gtc_table
from gtcnet.exceptions import CapExceededError
from gtcnet.extensions import cache
from gtcnet.utils import setting

logger = logging.getLogger(__name__)

_memo: Dict[Tuple[str, int], CountTable] = {}

DEFAULT_BIVARIATE_CAP = 300


def mode_key(with_i: bool, max_k: Optional[int] = None, max_i: Optional[int] = None) -> str:
    mode = "k_i" if with_i else "k"
    if max_k is not None:
        mode += f"[k<={max_k}]"
    if with_i and max_i is not None:
        mode += f"[i<={max_i}]"
    return mode


def table_version() -> str:
    return str(setting("TABLE_VERSION", "1"))


def cache_key(mode: str, max_n: int) -> str:
    return f"gtc-table:{table_version()}:{mode}:{max_n}"


def _index_key(mode: str) -> str:
    return f"gtc-table:{table_version()}:{mode}:sizes"


def _lookup(mode: str, max_n: int) -> Optional[CountTable]:
    if not has_app_context():
        sizes = sorted(size for (m, size) in _memo if m == mode and size >= max_n)
        return _memo[(mode, sizes[0])].truncate(max_n) if sizes else None
    sizes: List[int] = cache.get(_index_key(mode)) or []
    for size in sorted(s for s in sizes if s >= max_n):
        payload = cache.get(cache_key(mode, size))
        if payload is not None:
            logger.info("✅ Table %s reused from cache (n<=%d)", mode, size)
            return CountTable.from_dict(payload).truncate(max_n)
    return None


def _store(mode: str, table: CountTable) -> None:
    if not has_app_context():
        _memo[(mode, table.max_n)] = table
        return
    try:
        cache.set(cache_key(mode, table.max_n), table.to_dict())
        sizes = set(cache.get(_index_key(mode)) or [])
        sizes.add(table.max_n)
        cache.set(_index_key(mode), sorted(sizes))
    except Exception as e:
        logger.warning(f"⚠️ Could not cache table {mode} (n<={table.max_n}): {e} → keeping it in memory")
        _memo[(mode, table.max_n)] = table


def get_table(max_n: int, with_i: bool = False, max_k: Optional[int] = None,
              max_i: Optional[int] = None, trivariate_cap: Optional[int] = None) -> CountTable:
    """GTC_{n,k} (or GTC_{n,k,i}) to ``max_n``, computed at most once per version."""
    bivariate_cap = int(setting("BIVARIATE_CAP", DEFAULT_BIVARIATE_CAP))
    if trivariate_cap is None:
        trivariate_cap = int(setting("TRIVARIATE_CAP", DEFAULT_TRIVARIATE_CAP))
    if max_n > bivariate_cap:
        raise CapExceededError(f"table requested to n={max_n}, above the cap {bivariate_cap}",
                               limit=bivariate_cap, requested=max_n, hint="raise GTC_BIVARIATE_CAP")
    if with_i and max_n > trivariate_cap:
        raise CapExceededError(f"joint (k, i) table requested to n={max_n}, above the cap {trivariate_cap}",
                               limit=trivariate_cap, requested=max_n,
                               hint="use the bivariate table (--by k), or raise GTC_TRIVARIATE_CAP")
    mode = mode_key(with_i, max_k, max_i)
    table = _lookup(mode, max_n)
    if table is not None:
        return table
    table = gtc_table(max_n, with_i_marker=with_i, max_k=max_k, max_i=max_i, trivariate_cap=trivariate_cap)
    _store(mode, table)
    return table


def clear() -> None:
    _memo.clear()
    if has_app_context():
        cache.clear()
        logger.info("✅ Table cache cleared")
