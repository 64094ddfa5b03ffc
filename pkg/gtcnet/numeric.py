"""Log-space helpers on top of mpmath.

Counts in this package reach thousands of digits long before n = 300, so
anything that compares them with a closed-form approximation goes through
natural logs at a fixed working precision (never below 64 bits).
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import mpmath

from gtcnet.utils import setting

DEFAULT_PRECISION_BITS = 96
MIN_PRECISION_BITS = 64

Exact = Union[int, Fraction]


def workprec(bits: Optional[int] = None):
    """mpmath working-precision context, floored at 64 bits.

    Without ``bits`` the app's HIGH_PRECISION_BITS applies.
    """
    bits = bits or int(setting("HIGH_PRECISION_BITS", DEFAULT_PRECISION_BITS))
    return mpmath.workprec(max(bits, MIN_PRECISION_BITS))


@dataclass(frozen=True)
class LogValue:
    """A positive quantity held by its natural log."""

    log: mpmath.mpf

    @property
    def value(self) -> Optional[float]:
        # None when the float would overflow.
        if self.log > 700:
            return None
        return float(mpmath.exp(self.log))

    def to_dict(self):
        return {"log": mpmath.nstr(self.log, 20), "value": self.value}


def log_exact(x: Exact, bits: Optional[int] = None) -> mpmath.mpf:
    """Natural log of a positive exact integer or rational."""
    if x <= 0:
        raise ValueError(f"log of non-positive value {x}")
    with workprec(bits):
        if isinstance(x, Fraction):
            return mpmath.log(mpmath.mpf(x.numerator)) - mpmath.log(mpmath.mpf(x.denominator))
        return mpmath.log(mpmath.mpf(x))


def ratio_from_logs(exact_log: mpmath.mpf, asym_log: mpmath.mpf, bits: Optional[int] = None) -> float:
    with workprec(bits):
        return float(mpmath.exp(exact_log - asym_log))
