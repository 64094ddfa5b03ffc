# gtcnet/utils.py
import csv
import io
import json
import logging
import os
import tempfile
from typing import Any, Dict, Iterable, List, Optional, Sequence

from flask import current_app, has_app_context

logger = logging.getLogger(__name__)


def setting(name: str, default: Any) -> Any:
    """A config value from the current app, or ``default`` outside one."""
    if has_app_context():
        return current_app.config.get(name, default)
    return default

# ================================
# VALIDATION RESULTS
# ================================


class ValidationResult:
    """Standardized validation result"""

    def __init__(self, is_valid: bool, message: str = "", errors: Optional[Dict[str, str]] = None):
        self.is_valid = is_valid
        self.message = message
        self.errors = errors or {}

    @property
    def violations(self) -> List[str]:
        return list(self.errors)

    def __bool__(self) -> bool:
        return self.is_valid

    def to_dict(self) -> Dict:
        return {
            "valid": self.is_valid,
            "message": self.message,
            "errors": self.errors,
        }


# ================================
# PAYLOADS
# ================================


def error_response(message="Error", errors=None, kind: Optional[str] = None) -> Dict:
    # Keep `message` a plain string; structured detail goes under `errors`.
    if isinstance(message, dict):
        errors = errors if errors is not None else message
        message = "; ".join(str(v) for v in message.values()) or "Validation failed"
    elif isinstance(message, (list, tuple)):
        message = "; ".join(str(v) for v in message) or "Validation failed"

    payload = {"status": "error", "message": message}
    if kind is not None:
        payload["error"] = kind
    if errors is not None:
        payload["errors"] = errors
    return payload


def dumps(payload: Any) -> str:
    """JSON with exact integers kept as decimal strings."""
    return json.dumps(payload, default=_json_default, sort_keys=False)


def _json_default(value: Any):
    from fractions import Fraction

    if isinstance(value, Fraction):
        return {"numerator": str(value.numerator), "denominator": str(value.denominator)}
    if hasattr(value, "to_dict"):
        return value.to_dict()
    if isinstance(value, (set, frozenset, tuple)):
        return list(value)
    return str(value)


# ================================
# OUTPUT FILES
# ================================


def atomic_write(path: str, text: str) -> None:
    """Write `text` to `path` through a temp file in the same directory."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_path, path)
    except Exception:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    logger.info("✅ Wrote %s", path)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(cell) for cell in row])
    return buffer.getvalue()


def _csv_cell(cell: Any) -> str:
    if isinstance(cell, bool):
        return "true" if cell else "false"
    if isinstance(cell, float):
        return repr(cell)
    return str(cell)
