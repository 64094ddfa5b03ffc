"""Online solver for fixed-point equations S = rhs(S).

The right-hand side is a small term tree over known series, the unknown,
sums, products, z-shifts, marker monomials and power sums. Coefficient n
of the solution is computed from coefficients < n in a single pass, so a
right-hand side must be contractive: structurally, row n of rhs may read
only rows < n of the unknown. That is checked before any row is solved.

Example, the equation M = z * phi(M)::

    m = Unknown()
    spec = FixedPointSpec(Shift(compose(phi, m), 1), order=20)
    solve_fixed_point(spec)
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from gtcnet.exceptions import ContractionError, InternalConsistencyError, MarkerMismatchError, SeriesError
from gtcnet.series import (
    Row, TruncSeries, Value, accumulate, accumulate_product, binomial_row, clean_row,
    exceeds_caps, falling, lift, normalize,
)

logger = logging.getLogger(__name__)

INF = math.inf


# ================================
# TERMS
# ================================


class Term:
    """A node of a right-hand side."""

    def valuation(self, uv: int) -> float:
        raise NotImplementedError

    def delay(self, uv: int) -> float:
        """How many orders below the current one the unknown is read at."""
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError

    def blame(self, uv: int) -> str:
        return self.describe()

    def compute_row(self, ev: "RowEvaluator", m: int) -> Row:
        raise NotImplementedError

    def __add__(self, other: "Term") -> "Term":
        return Sum(self, as_term(other))

    def __mul__(self, other: "Term") -> "Term":
        return Product(self, as_term(other))

    def __repr__(self) -> str:
        return self.describe()


class Known(Term):
    def __init__(self, series: TruncSeries, name: Optional[str] = None):
        self.series = series
        self.name = name

    def valuation(self, uv):
        v = self.series.valuation()
        return INF if v is None else v

    def delay(self, uv):
        return INF

    def describe(self):
        return f"Known({self.name or self.series.order})"

    def compute_row(self, ev, m):
        return ev.known_row(self.series, m)


class Unknown(Term):
    def valuation(self, uv):
        return uv

    def delay(self, uv):
        return 0

    def describe(self):
        return "S"

    def compute_row(self, ev, m):
        if m >= len(ev.unknown_rows):
            raise InternalConsistencyError(f"row {m} of the unknown was read before it was solved")
        return ev.unknown_rows[m]


class Sum(Term):
    def __init__(self, *terms: Term):
        self.terms = tuple(as_term(t) for t in terms)

    def valuation(self, uv):
        return min((t.valuation(uv) for t in self.terms), default=INF)

    def delay(self, uv):
        return min((t.delay(uv) for t in self.terms), default=INF)

    def describe(self):
        return "(" + " + ".join(t.describe() for t in self.terms) + ")"

    def blame(self, uv):
        worst = min(self.terms, key=lambda t: t.delay(uv))
        return worst.blame(uv)

    def compute_row(self, ev, m):
        out: Row = {}
        for t in self.terms:
            accumulate(out, ev.row(t, m))
        return clean_row(out)


class Product(Term):
    def __init__(self, a: Term, b: Term):
        self.a = as_term(a)
        self.b = as_term(b)

    def valuation(self, uv):
        return self.a.valuation(uv) + self.b.valuation(uv)

    def delay(self, uv):
        return min(self.a.delay(uv) + self.b.valuation(uv), self.b.delay(uv) + self.a.valuation(uv))

    def describe(self):
        return f"{self.a.describe()}*{self.b.describe()}"

    def blame(self, uv):
        if self.a.delay(uv) + self.b.valuation(uv) < 1:
            return self.a.blame(uv)
        return self.b.blame(uv)

    def compute_row(self, ev, m):
        va, vb = self.a.valuation(ev.uv), self.b.valuation(ev.uv)
        if va + vb > m:
            return {}
        binom = binomial_row(m)
        out: Row = {}
        for j in range(int(va), m - int(vb) + 1):
            accumulate_product(out, ev.row(self.a, j), ev.row(self.b, m - j), binom[j], ev.caps)
        return clean_row(out)


class Shift(Term):
    """z^d * term."""

    def __init__(self, term: Term, d: int = 1):
        if d < 0:
            raise SeriesError("negative shift")
        self.term = as_term(term)
        self.d = d

    def valuation(self, uv):
        return self.term.valuation(uv) + self.d

    def delay(self, uv):
        return self.term.delay(uv) + self.d

    def describe(self):
        return f"z^{self.d}*{self.term.describe()}"

    def blame(self, uv):
        return self.term.blame(uv)

    def compute_row(self, ev, m):
        if m < self.d:
            return {}
        factor = falling(m, self.d)
        return {k: factor * v for k, v in ev.row(self.term, m - self.d).items()}


class Marked(Term):
    """A marker monomial times a term, e.g. Marked(t, u=1)."""

    def __init__(self, term: Term, **exponents: int):
        self.term = as_term(term)
        self.exponents = exponents

    def valuation(self, uv):
        return self.term.valuation(uv)

    def delay(self, uv):
        return self.term.delay(uv)

    def describe(self):
        monomial = "*".join(f"{name}^{e}" for name, e in self.exponents.items())
        return f"{monomial}*{self.term.describe()}"

    def blame(self, uv):
        return self.term.blame(uv)

    def compute_row(self, ev, m):
        shift = ev.monomial(self.exponents)
        out: Row = {}
        for key, value in ev.row(self.term, m).items():
            moved = tuple(x + y for x, y in zip(key, shift))
            if not exceeds_caps(moved, ev.caps):
                out[moved] = value
        return out


class MarkAbove(Term):
    """Multiply the rows of z-degree >= min_order by one marker."""

    def __init__(self, term: Term, marker: str, min_order: int):
        self.term = as_term(term)
        self.marker = marker
        self.min_order = min_order

    def valuation(self, uv):
        return self.term.valuation(uv)

    def delay(self, uv):
        return self.term.delay(uv)

    def describe(self):
        return f"mark[{self.marker}>={self.min_order}]({self.term.describe()})"

    def blame(self, uv):
        return self.term.blame(uv)

    def compute_row(self, ev, m):
        row = ev.row(self.term, m)
        if m < self.min_order:
            return row
        shift = ev.monomial({self.marker: 1})
        out: Row = {}
        for key, value in row.items():
            moved = tuple(x + y for x, y in zip(key, shift))
            if not exceeds_caps(moved, ev.caps):
                out[moved] = value
        return out


class PowerSum(Term):
    """sum_k c_k * inner^k, or sum_k c_k * inner^k / k! when ``exponential``.

    Each c_k is a scalar or a known series. The exponential form keeps
    integer rows integral: inner^k / k! is built by giving the smallest
    label to the first factor.
    """

    def __init__(self, coefficients: Sequence[Union[Value, TruncSeries]], inner: Term,
                 exponential: bool = False):
        self.coefficients = tuple(coefficients)
        self.inner = as_term(inner)
        self.exponential = exponential

    def _coeff_valuation(self, c) -> float:
        if isinstance(c, TruncSeries):
            v = c.valuation()
            return INF if v is None else v
        return INF if c == 0 else 0

    def valuation(self, uv):
        vh = self.inner.valuation(uv)
        return min((self._coeff_valuation(c) + k * vh for k, c in enumerate(self.coefficients)), default=INF)

    def delay(self, uv):
        vh = self.inner.valuation(uv)
        dh = self.inner.delay(uv)
        best = INF
        for k, c in enumerate(self.coefficients):
            if k == 0:
                continue
            vc = self._coeff_valuation(c)
            if vc == INF:
                continue
            best = min(best, dh + (k - 1) * vh + vc)
        return best

    def describe(self):
        kind = "exp" if self.exponential else "ord"
        return f"PowerSum[{kind}, {len(self.coefficients)} terms]({self.inner.describe()})"

    def blame(self, uv):
        vh = self.inner.valuation(uv)
        dh = self.inner.delay(uv)
        for k, c in enumerate(self.coefficients):
            vc = self._coeff_valuation(c)
            if k and vc != INF and dh + (k - 1) * vh + vc < 1:
                return f"c_{k}*({self.inner.describe()})^{k}"
        return self.describe()

    def compute_row(self, ev, m):
        vh = int(self.inner.valuation(ev.uv)) if self.inner.valuation(ev.uv) != INF else None
        binom = binomial_row(m)
        out: Row = {}
        for k, c in enumerate(self.coefficients):
            if vh is None and k > 0:
                break
            if vh and k * vh > m:
                break
            if isinstance(c, TruncSeries):
                vc = c.valuation()
                if vc is None:
                    continue
                for j in range(vc, m - k * (vh or 0) + 1):
                    accumulate_product(out, ev.known_row(c, j), ev.power_row(self, k, m - j), binom[j], ev.caps)
            elif c:
                accumulate(out, ev.power_row(self, k, m), c)
        return clean_row(out)

    def power_row(self, ev: "RowEvaluator", k: int, r: int, previous: List[Row]) -> Row:
        vh = int(self.inner.valuation(ev.uv))
        out: Row = {}
        if self.exponential:
            if vh < 1:
                raise SeriesError("an exponential power sum needs an inner term of valuation >= 1")
            binom = binomial_row(r - 1) if r >= 1 else ()
            for i in range(vh, r - (k - 1) * vh + 1):
                accumulate_product(out, ev.row(self.inner, i), previous[r - i], binom[i - 1], ev.caps)
        else:
            binom = binomial_row(r)
            for i in range((k - 1) * vh, r - vh + 1):
                accumulate_product(out, previous[i], ev.row(self.inner, r - i), binom[i], ev.caps)
        return clean_row(out)


def as_term(value) -> Term:
    if isinstance(value, Term):
        return value
    if isinstance(value, TruncSeries):
        return Known(value)
    raise SeriesError(f"cannot use {value!r} as a series term")


def compose(phi: TruncSeries, inner: Term) -> PowerSum:
    """phi(inner) for a univariate known phi."""
    if phi.markers:
        raise SeriesError("compose needs a univariate outer series")
    return PowerSum([normalize(c) for c in phi.coefficients()], inner)


# ================================
# EVALUATION
# ================================


class RowEvaluator:
    """Computes term rows on demand, caching every row it produces."""

    def __init__(self, markers: Sequence[str], caps: Mapping[str, int], uv: int,
                 unknown_rows: Optional[List[Row]] = None):
        self.markers = tuple(markers)
        self.caps = tuple(caps.get(name) for name in self.markers) if self.markers else ()
        self.uv = uv
        self.unknown_rows: List[Row] = unknown_rows if unknown_rows is not None else []
        self._rows: Dict[int, List[Row]] = {}
        self._powers: Dict[int, List[List[Row]]] = {}
        self._known: Dict[int, TruncSeries] = {}

    def row(self, term: Term, m: int) -> Row:
        cache = self._rows.setdefault(id(term), [])
        while len(cache) <= m:
            cache.append(term.compute_row(self, len(cache)))
        return cache[m]

    def known_row(self, series: TruncSeries, m: int) -> Row:
        if m > series.order:
            raise SeriesError(f"known series of order {series.order} read at order {m}")
        aligned = self._known.get(id(series))
        if aligned is None:
            if series.markers == self.markers:
                aligned = series
            elif not series.markers:
                aligned = lift(series, self.markers)
            else:
                raise MarkerMismatchError(f"series markers {series.markers} do not match {self.markers}")
            self._known[id(series)] = aligned
        return aligned.rows[m]

    def power_row(self, term: PowerSum, k: int, r: int) -> Row:
        powers = self._powers.setdefault(id(term), [])
        while len(powers) <= k:
            powers.append([])
        cache = powers[k]
        while len(cache) <= r:
            index = len(cache)
            if k == 0:
                cache.append({(0,) * len(self.markers): 1} if index == 0 else {})
            else:
                need = index - int(term.inner.valuation(self.uv))
                if need >= 0:
                    self.power_row(term, k - 1, need)
                cache.append(term.power_row(self, k, index, powers[k - 1]))
        return cache[r]

    def monomial(self, exponents: Mapping[str, int]) -> Tuple[int, ...]:
        for name in exponents:
            if name not in self.markers:
                raise MarkerMismatchError(f"unknown marker {name!r} (have {self.markers})")
        return tuple(exponents.get(name, 0) for name in self.markers)


@dataclass(frozen=True)
class FixedPointSpec:
    rhs: Term
    order: int
    markers: Tuple[str, ...] = ()
    unknown_valuation: int = 1
    caps: Mapping[str, int] = field(default_factory=dict)


def check_contraction(spec: FixedPointSpec) -> None:
    delay = spec.rhs.delay(spec.unknown_valuation)
    if delay < 1:
        culprit = spec.rhs.blame(spec.unknown_valuation)
        raise ContractionError(
            f"right-hand side reads the unknown at the order being solved (term {culprit})",
            term=culprit,
        )


def solve_fixed_point(spec: FixedPointSpec) -> TruncSeries:
    """The unique S with S = rhs(S) through ``spec.order``."""
    if spec.order < 0:
        raise SeriesError("order must be >= 0")
    check_contraction(spec)
    ev = RowEvaluator(spec.markers, spec.caps, spec.unknown_valuation)
    for m in range(spec.order + 1):
        row = ev.row(spec.rhs, m)
        if m < spec.unknown_valuation and row:
            raise SeriesError(
                f"solution has a nonzero row {m} below the assumed valuation {spec.unknown_valuation}")
        ev.unknown_rows.append(row)
    logger.debug("Solved fixed point to order %d over markers %s", spec.order, spec.markers)
    return TruncSeries(spec.order, ev.unknown_rows, spec.markers, spec.caps, check=False)


def evaluate(term: Term, order: int, markers: Sequence[str] = (), caps: Optional[Mapping[str, int]] = None,
             unknown: Optional[TruncSeries] = None) -> TruncSeries:
    """Rows 0..order of a term, with the unknown fixed to ``unknown``."""
    caps = dict(caps or {})
    rows: List[Row] = []
    uv = 0
    if unknown is not None:
        if unknown.order < order:
            raise SeriesError(f"unknown known only to order {unknown.order}, need {order}")
        aligned = unknown if unknown.markers == tuple(markers) else lift(unknown, markers)
        rows = list(aligned.rows)
        uv = aligned.valuation() or 0
    ev = RowEvaluator(markers, caps, uv, rows)
    return TruncSeries(order, [ev.row(term, m) for m in range(order + 1)], markers, caps, check=False)


def residual(spec: FixedPointSpec, solution: TruncSeries) -> TruncSeries:
    """rhs(S) - S; zero through the order for an exact solution."""
    image = evaluate(spec.rhs, spec.order, spec.markers, spec.caps, unknown=solution)
    return image - solution.truncate(spec.order)
