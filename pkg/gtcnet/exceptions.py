# gtcnet/exceptions.py
"""Domain errors raised across the package.

Everything derives from GtcError so the command layer (see
gtcnet/middleware.py) can map a failure to an exit code without caring
which module raised it.
"""
from typing import Dict, Optional


class GtcError(Exception):
    """Base class for every error raised by gtcnet."""

    kind = "gtc_error"

    def to_dict(self) -> Dict:
        return {"error": self.kind, "message": str(self)}


# ================================
# SERIES ERRORS
# ================================

class SeriesError(GtcError):
    kind = "series_error"


class MarkerMismatchError(SeriesError):
    kind = "marker_mismatch"


class ContractionError(SeriesError):
    """A fixed-point right-hand side reads the unknown at the order being solved."""

    kind = "contraction_violation"

    def __init__(self, message: str, term: Optional[str] = None):
        super().__init__(message)
        self.term = term

    def to_dict(self) -> Dict:
        payload = super().to_dict()
        payload["term"] = self.term
        return payload


class InversionError(SeriesError):
    kind = "inversion_undefined"


# ================================
# ENGINE / SURFACE ERRORS
# ================================

class CapExceededError(GtcError):
    """A requested size is above a configured cap."""

    kind = "cap_exceeded"

    def __init__(self, message: str, limit: int, requested: int, hint: str = ""):
        super().__init__(message)
        self.limit = limit
        self.requested = requested
        self.hint = hint

    def to_dict(self) -> Dict:
        payload = super().to_dict()
        payload.update({"limit": self.limit, "requested": self.requested})
        if self.hint:
            payload["hint"] = self.hint
        return payload


class InternalConsistencyError(GtcError):
    """Two routes that must agree did not (or an exact division was inexact)."""

    kind = "internal_consistency"


class VerificationError(GtcError):
    kind = "verification_failed"

    def __init__(self, message: str, criterion: Optional[str] = None, n: Optional[int] = None):
        super().__init__(message)
        self.criterion = criterion
        self.n = n

    def to_dict(self) -> Dict:
        payload = super().to_dict()
        if self.criterion:
            payload["criterion"] = self.criterion
        if self.n is not None:
            payload["n"] = self.n
        return payload


# ================================
# NETWORK ERRORS
# ================================

class NewickSyntaxError(GtcError):
    kind = "newick_syntax"

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position

    def to_dict(self) -> Dict:
        payload = super().to_dict()
        payload["position"] = self.position
        return payload


class NetworkValidationError(GtcError):
    kind = "invalid_network"

    def __init__(self, message: str, violations: Optional[Dict[str, str]] = None):
        super().__init__(message)
        self.violations = violations or {}

    def to_dict(self) -> Dict:
        payload = super().to_dict()
        payload["violations"] = self.violations
        return payload
