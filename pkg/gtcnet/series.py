"""Truncated power series with exact coefficients and optional markers.

Every series is stored in *exponential* form: row ``m`` holds
``m! * [z^m]`` for each marker monomial, so the EGFs of integer counts
keep integer rows and a product is a binomial convolution of rows. The
ordinary coefficient is recovered with :meth:`TruncSeries.coeff`.

A row is a dict ``{marker exponents: value}``; a univariate series uses
the empty tuple as its only key. Marker exponents never exceed the
z-degree of their row, and a marker may carry a cap above which
monomials are dropped.
"""
import math
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from gtcnet.exceptions import InversionError, MarkerMismatchError, SeriesError

Value = Union[int, Fraction]
Exponents = Tuple[int, ...]
Row = Dict[Exponents, Value]
Caps = Tuple[Optional[int], ...]


@lru_cache(maxsize=None)
def binomial_row(m: int) -> Tuple[int, ...]:
    return tuple(math.comb(m, j) for j in range(m + 1))


@lru_cache(maxsize=None)
def factorial(m: int) -> int:
    return math.factorial(m)


def falling(m: int, d: int) -> int:
    """m (m-1) ... (m-d+1)."""
    return math.perm(m, d)


def normalize(value: Value) -> Value:
    if isinstance(value, Fraction) and value.denominator == 1:
        return value.numerator
    return value


# ================================
# ROW KERNELS
# ================================


def exceeds_caps(key: Exponents, caps: Caps) -> bool:
    for exponent, cap in zip(key, caps):
        if cap is not None and exponent > cap:
            return True
    return False


def accumulate_product(out: Row, a: Row, b: Row, scale: Value, caps: Caps) -> None:
    """out += scale * a * b for two rows over the same markers."""
    if not a or not b:
        return
    if not caps:
        va = a.get(())
        vb = b.get(())
        if va is not None and vb is not None:
            out[()] = out.get((), 0) + scale * va * vb
        return
    capped = any(cap is not None for cap in caps)
    for ea, va in a.items():
        sva = scale * va
        for eb, vb in b.items():
            key = tuple(x + y for x, y in zip(ea, eb))
            if capped and exceeds_caps(key, caps):
                continue
            out[key] = out.get(key, 0) + sva * vb


def accumulate(out: Row, a: Row, scale: Value = 1) -> None:
    for key, value in a.items():
        out[key] = out.get(key, 0) + scale * value


def clean_row(row: Row) -> Row:
    return {key: normalize(value) for key, value in row.items() if value != 0}


def convolve_rows(a: Sequence[Row], b: Sequence[Row], m: int, caps: Caps,
                  lo_a: int = 0, lo_b: int = 0) -> Row:
    """Row m of a*b, reading a[lo_a..m-lo_b] and b[lo_b..m-lo_a] only."""
    out: Row = {}
    binom = binomial_row(m)
    for j in range(lo_a, m - lo_b + 1):
        accumulate_product(out, a[j], b[m - j], binom[j], caps)
    return clean_row(out)


# ================================
# SERIES
# ================================


class TruncSeries:
    """Truncated series in z through ``order``, optionally marked."""

    __slots__ = ("order", "markers", "caps", "rows")

    def __init__(self, order: int, rows: Optional[Sequence[Mapping[Exponents, Value]]] = None,
                 markers: Sequence[str] = (), caps: Optional[Mapping[str, int]] = None,
                 check: bool = True):
        if order < 0:
            raise SeriesError(f"order must be >= 0, got {order}")
        self.order = order
        self.markers: Tuple[str, ...] = tuple(markers)
        self.caps: Caps = tuple((caps or {}).get(name) for name in self.markers)
        width = len(self.markers)
        stored: List[Row] = []
        for m in range(order + 1):
            source = rows[m] if rows is not None and m < len(rows) else {}
            row = {}
            for key, value in source.items():
                key = tuple(key)
                if value == 0:
                    continue
                if check:
                    if len(key) != width:
                        raise MarkerMismatchError(
                            f"monomial {key} does not match markers {self.markers}")
                    if any(e < 0 or e > m for e in key):
                        raise SeriesError(
                            f"marker exponents {key} exceed z-degree {m}")
                if exceeds_caps(key, self.caps):
                    continue
                row[key] = normalize(value)
            stored.append(row)
        self.rows: Tuple[Row, ...] = tuple(stored)

    # ---------- constructors ----------

    @classmethod
    def zero(cls, order: int, markers: Sequence[str] = (), caps=None) -> "TruncSeries":
        return cls(order, None, markers, caps)

    @classmethod
    def one(cls, order: int, markers: Sequence[str] = (), caps=None) -> "TruncSeries":
        return cls(order, [{(0,) * len(markers): 1}], markers, caps)

    @classmethod
    def variable(cls, order: int, markers: Sequence[str] = (), caps=None) -> "TruncSeries":
        """The series z."""
        return cls(order, [{}, {(0,) * len(markers): 1}], markers, caps)

    @classmethod
    def from_coefficients(cls, coefficients: Sequence[Value], order: Optional[int] = None) -> "TruncSeries":
        """Univariate series from ordinary coefficients c_0, c_1, ..."""
        if order is None:
            order = max(len(coefficients) - 1, 0)
        rows = [{(): factorial(m) * Fraction(c)} for m, c in enumerate(coefficients[:order + 1])]
        return cls(order, rows)

    @classmethod
    def from_terms(cls, order: int, terms: Mapping[Tuple[int, Exponents], Value],
                   markers: Sequence[str] = (), caps=None) -> "TruncSeries":
        """From ordinary coefficients keyed by (z-degree, marker exponents)."""
        rows: List[Row] = [{} for _ in range(order + 1)]
        for (m, exps), c in terms.items():
            if m <= order:
                rows[m][tuple(exps)] = factorial(m) * Fraction(c)
        return cls(order, rows, markers, caps)

    @classmethod
    def from_counts(cls, counts: Union[Sequence[Value], Mapping[Tuple[int, Exponents], Value]],
                    order: Optional[int] = None, markers: Sequence[str] = (), caps=None) -> "TruncSeries":
        """EGF of a counting sequence: the stored rows are the counts themselves."""
        if isinstance(counts, Mapping):
            if order is None:
                order = max((m for m, _ in counts), default=0)
            rows: List[Row] = [{} for _ in range(order + 1)]
            for (m, exps), value in counts.items():
                if m <= order:
                    rows[m][tuple(exps)] = value
            return cls(order, rows, markers, caps)
        if order is None:
            order = max(len(counts) - 1, 0)
        return cls(order, [{(): value} for value in counts[:order + 1]])

    # ---------- access ----------

    def row(self, m: int) -> Row:
        if m < 0 or m > self.order:
            return {}
        return dict(self.rows[m])

    def count(self, m: int, exps: Exponents = ()) -> Value:
        """Stored value m! * [z^m u^exps]."""
        if m < 0 or m > self.order:
            return 0
        return self.rows[m].get(tuple(exps), 0)

    def coeff(self, m: int, exps: Exponents = ()) -> Fraction:
        return Fraction(self.count(m, exps)) / factorial(m)

    def coefficients(self) -> List[Fraction]:
        """Ordinary coefficients of a univariate series."""
        self._require_univariate("coefficients")
        return [self.coeff(m) for m in range(self.order + 1)]

    def counts(self) -> List[Value]:
        self._require_univariate("counts")
        return [self.count(m) for m in range(self.order + 1)]

    def valuation(self) -> Optional[int]:
        for m, row in enumerate(self.rows):
            if row:
                return m
        return None

    def max_marker_exponents(self) -> Dict[str, int]:
        best = {name: 0 for name in self.markers}
        for row in self.rows:
            for key in row:
                for name, e in zip(self.markers, key):
                    best[name] = max(best[name], e)
        return best

    def marker_bound_holds(self) -> bool:
        return all(all(0 <= e <= m for e in key) for m, row in enumerate(self.rows) for key in row)

    # ---------- structural ops ----------

    def truncate(self, order: int) -> "TruncSeries":
        order = min(order, self.order)
        return self._with_rows(order, self.rows[:order + 1])

    def shift(self, d: int) -> "TruncSeries":
        """Multiply by z^d."""
        if d < 0:
            raise SeriesError("negative shift")
        rows: List[Row] = [{} for _ in range(self.order + 1)]
        for m in range(d, self.order + 1):
            factor = falling(m, d)
            rows[m] = {key: factor * value for key, value in self.rows[m - d].items()}
        return self._with_rows(self.order, rows)

    def derivative(self) -> "TruncSeries":
        self._require_univariate("derivative")
        if self.order == 0:
            return TruncSeries.zero(0)
        return TruncSeries(self.order - 1, self.rows[1:])

    def mul_monomial(self, exps: Exponents) -> "TruncSeries":
        exps = tuple(exps)
        if len(exps) != len(self.markers):
            raise MarkerMismatchError(f"monomial {exps} does not match markers {self.markers}")
        rows = [{tuple(x + y for x, y in zip(key, exps)): value for key, value in row.items()}
                for row in self.rows]
        return self._with_rows(self.order, rows)

    def mark_above(self, marker: str, min_order: int) -> "TruncSeries":
        """Multiply every row of z-degree >= min_order by ``marker``."""
        index = self._marker_index(marker)
        rows: List[Row] = []
        for m, row in enumerate(self.rows):
            if m < min_order:
                rows.append(dict(row))
                continue
            rows.append({key[:index] + (key[index] + 1,) + key[index + 1:]: value
                         for key, value in row.items()})
        return self._with_rows(self.order, rows)

    def evaluate_markers(self, values: Mapping[str, Value]) -> "TruncSeries":
        """Substitute numbers for some markers, keeping the others."""
        for name in values:
            self._marker_index(name)
        keep = [i for i, name in enumerate(self.markers) if name not in values]
        drop = [(i, values[name]) for i, name in enumerate(self.markers) if name in values]
        rows: List[Row] = []
        for row in self.rows:
            out: Row = {}
            for key, value in row.items():
                for i, x in drop:
                    value = value * x ** key[i]
                reduced = tuple(key[i] for i in keep)
                out[reduced] = out.get(reduced, 0) + value
            rows.append(clean_row(out))
        markers = tuple(self.markers[i] for i in keep)
        caps = {name: cap for name, cap in zip(self.markers, self.caps) if name in markers and cap is not None}
        return TruncSeries(self.order, rows, markers, caps)

    def marker_marginal(self, marker: str) -> "TruncSeries":
        """Drop every marker except ``marker`` by setting the others to 1."""
        return self.evaluate_markers({name: 1 for name in self.markers if name != marker})

    # ---------- arithmetic ----------

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        return add(self, other)

    def __sub__(self, other: "TruncSeries") -> "TruncSeries":
        return add(self, other * -1)

    def __neg__(self) -> "TruncSeries":
        return self * -1

    def __mul__(self, other) -> "TruncSeries":
        if isinstance(other, TruncSeries):
            return mul(self, other)
        scale = Fraction(other) if not isinstance(other, int) else other
        rows = [{key: scale * value for key, value in row.items()} for row in self.rows]
        return self._with_rows(self.order, rows)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return (self.order == other.order and self.markers == other.markers
                and all(a == b for a, b in zip(self.rows, other.rows)))

    def __hash__(self):
        return hash((self.order, self.markers, tuple(tuple(sorted(row.items())) for row in self.rows)))

    def __repr__(self) -> str:
        terms = []
        for m, row in enumerate(self.rows):
            for key, value in sorted(row.items()):
                c = Fraction(value) / factorial(m)
                monomial = "".join(f"*{name}^{e}" for name, e in zip(self.markers, key) if e)
                terms.append(f"{c}*z^{m}{monomial}")
        body = " + ".join(terms) or "0"
        return f"TruncSeries({body}; O(z^{self.order + 1}))"

    def to_json(self) -> List[Dict]:
        """Ordinary coefficients with integers as decimal strings."""
        payload = []
        for m, row in enumerate(self.rows):
            for key, value in sorted(row.items()):
                c = Fraction(value) / factorial(m)
                payload.append({
                    "exponents": [m, *key],
                    "numerator": str(c.numerator),
                    "denominator": str(c.denominator),
                })
        return payload

    # ---------- internals ----------

    def _with_rows(self, order: int, rows: Sequence[Row]) -> "TruncSeries":
        caps = {name: cap for name, cap in zip(self.markers, self.caps) if cap is not None}
        return TruncSeries(order, rows, self.markers, caps)

    def _marker_index(self, marker: str) -> int:
        try:
            return self.markers.index(marker)
        except ValueError:
            raise MarkerMismatchError(f"unknown marker {marker!r} (have {self.markers})") from None

    def _require_univariate(self, what: str) -> None:
        if self.markers:
            raise SeriesError(f"{what} is defined for univariate series only")


# ================================
# OPERATIONS
# ================================


def align(a: TruncSeries, b: TruncSeries) -> Tuple[TruncSeries, TruncSeries]:
    """Bring two series onto one marker tuple and one order.

    A univariate series is lifted onto the other's markers; any other
    difference in markers is an error.
    """
    if a.markers != b.markers:
        if not a.markers:
            a = lift(a, b.markers)
        elif not b.markers:
            b = lift(b, a.markers)
        else:
            raise MarkerMismatchError(f"incompatible markers {a.markers} and {b.markers}")
    order = min(a.order, b.order)
    return a.truncate(order), b.truncate(order)


def lift(a: TruncSeries, markers: Sequence[str]) -> TruncSeries:
    zeros = (0,) * len(markers)
    return TruncSeries(a.order, [{zeros: row[()]} if row else {} for row in a.rows], markers)


def merged_caps(a: TruncSeries, b: TruncSeries) -> Dict[str, int]:
    caps: Dict[str, int] = {}
    for series in (a, b):
        for name, cap in zip(series.markers, series.caps):
            if cap is not None:
                caps[name] = min(cap, caps.get(name, cap))
    return caps


def add(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    caps = merged_caps(a, b)
    a, b = align(a, b)
    rows = []
    for ra, rb in zip(a.rows, b.rows):
        out = dict(ra)
        accumulate(out, rb)
        rows.append(clean_row(out))
    return TruncSeries(a.order, rows, a.markers, caps, check=False)


def mul(a: TruncSeries, b: TruncSeries) -> TruncSeries:
    caps = merged_caps(a, b)
    a, b = align(a, b)
    cap_tuple = tuple(caps.get(name) for name in a.markers)
    rows = [convolve_rows(a.rows, b.rows, m, cap_tuple) for m in range(a.order + 1)]
    return TruncSeries(a.order, rows, a.markers, caps, check=False)


def pow_table(a: TruncSeries, kmax: int) -> List[TruncSeries]:
    """[a^0, a^1, ..., a^kmax]."""
    if kmax < 0:
        raise SeriesError("kmax must be >= 0")
    caps = {name: cap for name, cap in zip(a.markers, a.caps) if cap is not None}
    table = [TruncSeries.one(a.order, a.markers, caps)]
    for _ in range(kmax):
        table.append(mul(table[-1], a))
    return table


def reciprocal(a: TruncSeries) -> TruncSeries:
    """1/a for a univariate series with nonzero constant term."""
    a._require_univariate("reciprocal")
    a0 = a.count(0)
    if a0 == 0:
        raise InversionError("reciprocal needs a nonzero constant term")
    inv0 = Fraction(1, 1) / a0
    out: List[Value] = [normalize(inv0)]
    for m in range(1, a.order + 1):
        binom = binomial_row(m)
        total = sum(binom[j] * a.count(j) * out[m - j] for j in range(1, m + 1))
        out.append(normalize(-total * inv0))
    return TruncSeries.from_counts(out, a.order)


def lagrange_coeff(phi: TruncSeries, n: int) -> Fraction:
    """[z^n] M for M = z phi(M), i.e. (1/n) [w^(n-1)] phi(w)^n."""
    if n < 1:
        raise SeriesError(f"n must be >= 1, got {n}")
    phi._require_univariate("lagrange_coeff")
    if phi.count(0) == 0:
        raise InversionError("Lagrange inversion needs phi(0) != 0")
    if phi.order < n - 1:
        raise SeriesError(f"phi is known only to order {phi.order}, need {n - 1}")
    base = phi.truncate(n - 1)
    power = TruncSeries.one(n - 1)
    exponent, square = n, base
    while exponent:
        if exponent & 1:
            power = mul(power, square)
        exponent >>= 1
        if exponent:
            square = mul(square, square)
    return power.coeff(n - 1) / n


def lagrange_coefficients(phi: TruncSeries, order: int) -> List[Fraction]:
    """[z^n] M for n = 0..order, using running powers of phi."""
    phi._require_univariate("lagrange_coefficients")
    if phi.count(0) == 0:
        raise InversionError("Lagrange inversion needs phi(0) != 0")
    if order == 0:
        return [Fraction(0)]
    base = phi.truncate(order - 1)
    coefficients = [Fraction(0)]
    power = base
    for n in range(1, order + 1):
        coefficients.append(power.coeff(n - 1) / n)
        if n < order:
            power = mul(power, base)
    return coefficients
