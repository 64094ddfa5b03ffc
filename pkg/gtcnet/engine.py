"""Counting galled tree-child networks.

The exponential generating function G(z, u, v), with u marking
reticulations and v marking reticulations whose child is not a leaf,
satisfies

    G = sum_k  H^k / k! * B_k(z),      H = u * (z + v * (G - z)),

where B_k(z) = sum_{m>=1} L_{m+k,k} z^m / m! collects the one-component
networks with k reticulation slots and m plain leaves (B_0 is the tree
EGF, its first term is z). A slot is filled by a leaf (weight z) or by a
network of size >= 2 (weight v * (G - z)); giving the slots to the
attached structures by smallest label is what makes the 1/k! correct.

Every count in this module is an exact integer.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from scipy import stats

from gtcnet.exceptions import CapExceededError, InternalConsistencyError
from gtcnet.fixedpoint import (
    FixedPointSpec, Known, Marked, MarkAbove, PowerSum, Shift, Sum, Unknown, compose, evaluate,
    solve_fixed_point,
)
from gtcnet.onecomponent import l_count, series_Lprime, trees
from gtcnet.packed import packed_rows
from gtcnet.series import TruncSeries, factorial, lagrange_coefficients, reciprocal
from gtcnet.utils import csv_text, setting

logger = logging.getLogger(__name__)

DEFAULT_TRIVARIATE_CAP = 120
DEFAULT_DIRECT_CAP = 8

Shape = Union[int, Tuple["Shape", ...]]


# ================================
# COUNT TABLE
# ================================


class CountTable:
    """Exact counts GTC_{n,k} (or GTC_{n,k,i}) for n <= max_n.

    ``max_k`` / ``max_i`` are set when a marker was capped; cells above a
    cap are absent rather than zero, so row totals are only available for
    uncapped tables.
    """

    def __init__(self, max_n: int, cells: Mapping[Tuple[int, ...], int], with_i: bool = False,
                 max_k: Optional[int] = None, max_i: Optional[int] = None):
        self.max_n = max_n
        self.with_i = with_i
        self.max_k = max_k
        self.max_i = max_i
        self.cells: Dict[Tuple[int, ...], int] = {key: value for key, value in cells.items() if value}

    @property
    def mode(self) -> str:
        return "k_i" if self.with_i else "k"

    @property
    def complete(self) -> bool:
        return self.max_k is None and self.max_i is None

    def cell(self, n: int, k: int, i: Optional[int] = None) -> int:
        if i is None:
            if self.with_i:
                return sum(v for (n_, k_, _), v in self.cells.items() if n_ == n and k_ == k)
            return self.cells.get((n, k), 0)
        if not self.with_i:
            raise ValueError("this table does not carry the i index")
        return self.cells.get((n, k, i), 0)

    def row(self, n: int) -> List[int]:
        """[GTC_{n,0}, ..., GTC_{n,n-1}]."""
        self._check_n(n)
        return [self.cell(n, k) for k in range(max(n, 1))]

    def total(self, n: int) -> int:
        if self.max_k is not None:
            raise ValueError("row totals need a table without a reticulation cap")
        return sum(self.row(n))

    def totals(self) -> List[int]:
        return [self.total(n) for n in range(1, self.max_n + 1)]

    def column(self, k: int) -> List[int]:
        return [self.cell(n, k) for n in range(1, self.max_n + 1)]

    def marginal_i(self, n: int) -> Dict[int, int]:
        if not self.with_i:
            raise ValueError("this table does not carry the i index")
        out: Dict[int, int] = {}
        for (n_, _, i), value in self.cells.items():
            if n_ == n:
                out[i] = out.get(i, 0) + value
        return dict(sorted(out.items()))

    def joint(self, n: int) -> Dict[Tuple[int, int], int]:
        if not self.with_i:
            raise ValueError("this table does not carry the i index")
        return {(k, i): v for (n_, k, i), v in sorted(self.cells.items()) if n_ == n}

    def bivariate(self) -> "CountTable":
        if not self.with_i:
            return self
        if self.max_i is not None:
            raise ValueError("the i index was capped; summing it out would drop cells")
        cells: Dict[Tuple[int, ...], int] = {}
        for (n, k, _), value in self.cells.items():
            cells[(n, k)] = cells.get((n, k), 0) + value
        return CountTable(self.max_n, cells, False, self.max_k)

    def truncate(self, max_n: int) -> "CountTable":
        cells = {key: v for key, v in self.cells.items() if key[0] <= max_n}
        return CountTable(min(max_n, self.max_n), cells, self.with_i, self.max_k, self.max_i)

    def to_rows(self) -> List[Tuple[int, ...]]:
        rows = []
        for n in range(1, self.max_n + 1):
            for k in range(n):
                if self.max_k is not None and k > self.max_k:
                    break
                if self.with_i:
                    for i in range(k + 1):
                        if self.max_i is not None and i > self.max_i:
                            break
                        rows.append((n, k, i, self.cells.get((n, k, i), 0)))
                else:
                    rows.append((n, k, self.cells.get((n, k), 0)))
        return rows

    def to_csv(self) -> str:
        header = ["n", "k", "i", "count"] if self.with_i else ["n", "k", "count"]
        return csv_text(header, self.to_rows())

    def to_dict(self) -> Dict:
        return {
            "max_n": self.max_n,
            "mode": self.mode,
            "max_k": self.max_k,
            "max_i": self.max_i,
            "cells": [[*key, str(value)] for key, value in sorted(self.cells.items())],
        }

    to_json = to_dict

    @classmethod
    def from_dict(cls, payload: Mapping) -> "CountTable":
        with_i = payload["mode"] == "k_i"
        cells = {tuple(int(x) for x in entry[:-1]): int(entry[-1]) for entry in payload["cells"]}
        return cls(int(payload["max_n"]), cells, with_i, payload.get("max_k"), payload.get("max_i"))

    def __eq__(self, other) -> bool:
        if not isinstance(other, CountTable):
            return NotImplemented
        return (self.max_n, self.with_i, self.max_k, self.max_i, self.cells) == (
            other.max_n, other.with_i, other.max_k, other.max_i, other.cells)

    def _check_n(self, n: int) -> None:
        if n < 1 or n > self.max_n:
            raise CapExceededError(f"n={n} is outside this table (1..{self.max_n})",
                                   limit=self.max_n, requested=n)


# ================================
# ENGINE EQUATION
# ================================


def connector_series(k: int, order: int) -> TruncSeries:
    """B_k(z): stored row m is L_{m+k,k}."""
    rows = [0] + [l_count(m + k, k) for m in range(1, order + 1)]
    return TruncSeries.from_counts(rows, order)


def engine_spec(order: int, markers: Sequence[str] = ("u",), caps: Optional[Mapping[str, int]] = None) -> FixedPointSpec:
    g = Unknown()
    inner = MarkAbove(g, "v", 2) if "v" in markers else g
    if "u" in markers:
        inner = Marked(inner, u=1)
    connectors = [connector_series(k, order) for k in range(order + 1)]
    return FixedPointSpec(PowerSum(connectors, inner, exponential=True), order, tuple(markers),
                          caps=dict(caps or {}))


def exact_int(value, where: str) -> int:
    if isinstance(value, Fraction):
        if value.denominator != 1:
            raise InternalConsistencyError(f"non-integral count {value} at {where}")
        return value.numerator
    return value


ROUTES = ("packed", "solver")


def gtc_table(max_n: int, with_i_marker: bool = False, max_k: Optional[int] = None,
              max_i: Optional[int] = None, trivariate_cap: int = DEFAULT_TRIVARIATE_CAP,
              route: str = "packed") -> CountTable:
    """GTC_{n,k} (and GTC_{n,k,i} with the i marker) for 1 <= n <= max_n.

    The bivariate table takes the packed route unless ``route="solver"``;
    joint tables always go through the generic fixed-point solver.
    """
    if max_n < 1:
        raise CapExceededError("max_n must be >= 1", limit=1, requested=max_n)
    if route not in ROUTES:
        raise ValueError(f"unknown route {route!r}; use one of {ROUTES}")
    if with_i_marker and max_n > trivariate_cap:
        raise CapExceededError(
            f"joint (k, i) table requested to n={max_n}, above the cap {trivariate_cap}",
            limit=trivariate_cap, requested=max_n,
            hint="use the bivariate table (--by k), or raise GTC_TRIVARIATE_CAP",
        )
    if with_i_marker or route == "solver":
        cells = _solved_cells(max_n, with_i_marker, max_k, max_i)
    else:
        top = max_n - 1 if max_k is None else min(max_k, max_n - 1)
        connectors = [[0] + [l_count(m + k, k) for m in range(1, max_n + 1)] for k in range(top + 1)]
        rows = packed_rows(connectors, gtc_totals(max_n), max_k)
        cells = {(n, k): value for n, row in enumerate(rows, start=1) for k, value in enumerate(row)}
    table = CountTable(max_n, cells, with_i_marker, max_k, max_i if with_i_marker else None)
    logger.info("✅ Built %s table to n=%d%s", table.mode, max_n,
                f" (k <= {max_k})" if max_k is not None else "")
    return table


def _solved_cells(max_n: int, with_i_marker: bool, max_k: Optional[int],
                  max_i: Optional[int]) -> Dict[Tuple[int, ...], int]:
    markers = ("u", "v") if with_i_marker else ("u",)
    caps = {}
    if max_k is not None:
        caps["u"] = max_k
    if with_i_marker and max_i is not None:
        caps["v"] = max_i
    series = solve_fixed_point(engine_spec(max_n, markers, caps))
    cells: Dict[Tuple[int, ...], int] = {}
    for n in range(1, max_n + 1):
        for key, value in series.rows[n].items():
            cells[(n, *key)] = exact_int(value, f"n={n}, {dict(zip(markers, key))}")
    return cells


def gtc_series(max_n: int) -> TruncSeries:
    """G(z, 1, 1) as a univariate series."""
    return solve_fixed_point(engine_spec(max_n, ()))


def gtc_totals(max_n: int) -> List[int]:
    """[GTC_1, ..., GTC_max_n] from the univariate equation."""
    series = gtc_series(max_n)
    return [exact_int(series.count(n), f"n={n}") for n in range(1, max_n + 1)]


def gtc_total(n: int, table: Optional[CountTable] = None) -> int:
    if table is not None:
        return table.total(n)
    return gtc_totals(n)[-1]


def i_marginal_table(max_n: int, max_i: Optional[int] = None) -> Dict[int, Dict[int, int]]:
    """{n: {i: count}} from G(z, 1, v)."""
    caps = {"v": max_i} if max_i is not None else {}
    series = solve_fixed_point(engine_spec(max_n, ("v",), caps))
    return {n: {key[0]: exact_int(v, f"n={n}") for key, v in sorted(series.rows[n].items())}
            for n in range(1, max_n + 1)}


# ================================
# DIRECT TREE SUM
# ================================


def set_partitions(items: Sequence[int]) -> Iterator[List[Tuple[int, ...]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in set_partitions(rest):
        yield [(first,)] + partition
        for index in range(len(partition)):
            yield partition[:index] + [(first,) + partition[index]] + partition[index + 1:]


def component_tree_shapes(labels: Sequence[int]) -> Iterator[Shape]:
    """Every rooted phylogenetic tree (internal outdegree >= 2) on ``labels``.

    A leaf is its label; an internal vertex is the tuple of its children.
    """
    labels = tuple(sorted(labels))
    if len(labels) == 1:
        yield labels[0]
        return
    for blocks in set_partitions(labels):
        if len(blocks) < 2:
            continue
        blocks = sorted((tuple(sorted(b)) for b in blocks), key=lambda b: b[0])
        for children in product(*(list(component_tree_shapes(b)) for b in blocks)):
            yield tuple(children)


def _vertex_polynomial(children: int, leaf_children: int) -> Dict[int, int]:
    """sum_j binom(c_lf, j) L_{c, c - c_lf + j} x^(c - c_lf + j)."""
    forced = children - leaf_children
    out: Dict[int, int] = {}
    for j in range(leaf_children + 1):
        value = math.comb(leaf_children, j) * l_count(children, forced + j)
        if value:
            out[forced + j] = value
    return out


def shape_polynomial(shape: Shape) -> Tuple[Dict[int, int], int]:
    """(reticulation-count polynomial, number of non-root internal vertices)."""
    if isinstance(shape, int):
        return {0: 1}, 0
    leaf_children = sum(1 for child in shape if isinstance(child, int))
    poly = _vertex_polynomial(len(shape), leaf_children)
    internal = 0
    for child in shape:
        if isinstance(child, int):
            continue
        child_poly, child_internal = shape_polynomial(child)
        internal += child_internal + 1
        merged: Dict[int, int] = {}
        for a, x in poly.items():
            for b, y in child_poly.items():
                merged[a + b] = merged.get(a + b, 0) + x * y
        poly = merged
    return poly, internal


def gtc_direct(n: int, with_i: bool = False, cap: Optional[int] = None) -> Dict:
    """Counts of size n summed over component trees, keyed by k (or (k, i)).

    i is the number of internal non-root vertices of the component tree,
    each of which hangs below a reticulation.
    """
    if cap is None:
        cap = int(setting("DIRECT_FORMULA_CAP", DEFAULT_DIRECT_CAP))
    if n < 1 or n > cap:
        raise CapExceededError(f"direct tree sum is limited to 1 <= n <= {cap}", limit=cap, requested=n)
    out: Dict = {}
    for shape in component_tree_shapes(range(1, n + 1)):
        poly, internal = shape_polynomial(shape)
        for k, value in poly.items():
            key = (k, internal) if with_i else k
            out[key] = out.get(key, 0) + value
    return dict(sorted(out.items()))


def star_contribution(n: int) -> int:
    """The one-vertex component tree: every network of size n with one component."""
    return sum(math.comb(n, j) * l_count(n, j) for j in range(n))


# ================================
# MAXIMALLY RETICULATED NETWORKS
# ================================


def max_ret_spec(order: int, printed_form: bool = False) -> FixedPointSpec:
    m = Unknown()
    rhs = Shift(compose(series_Lprime(order), m), 1)
    if printed_form:
        rhs = Sum(Known(TruncSeries.variable(order), "z"), rhs)
    return FixedPointSpec(rhs, order)


def max_ret_series(max_n: int) -> List[int]:
    """[GTC_{n,n-1} for n = 1..max_n] from M = z L'(M), by two routes."""
    solved = solve_fixed_point(max_ret_spec(max_n))
    by_fixed_point = [exact_int(solved.count(n), f"n={n}") for n in range(1, max_n + 1)]
    coefficients = lagrange_coefficients(series_Lprime(max_n), max_n)
    by_lagrange = [exact_int(coefficients[n] * factorial(n), f"n={n}") for n in range(1, max_n + 1)]
    for n, (a, b) in enumerate(zip(by_fixed_point, by_lagrange), start=1):
        if a != b:
            raise InternalConsistencyError(
                f"maximal-reticulated counts disagree at n={n}: fixed point {a}, Lagrange {b}")
    return by_fixed_point


def max_ret_erratum(max_n: int) -> List[int]:
    """The same sequence from M = z + z L'(M), which counts the bare leaf twice."""
    solved = solve_fixed_point(max_ret_spec(max_n, printed_form=True))
    return [exact_int(solved.count(n), f"n={n}") for n in range(1, max_n + 1)]


# ================================
# DISTRIBUTIONS
# ================================


@dataclass
class DistSummary:
    """Exact law of a count on {0, 1, ...} at one size n.

    ``tail`` is the mass beyond the listed support when the table behind
    it was truncated; mean and variance are then left unset.
    """

    n: int
    support: List[int]
    masses: List[Fraction]
    mean: Optional[Fraction] = None
    variance: Optional[Fraction] = None
    tail: Fraction = Fraction(0)
    standardized: List[Tuple[float, float]] = field(default_factory=list)

    @classmethod
    def from_counts(cls, n: int, counts: Mapping[int, int], total: Optional[int] = None) -> "DistSummary":
        support = sorted(counts)
        whole = sum(counts.values())
        total = whole if total is None else total
        masses = [Fraction(counts[x], total) for x in support]
        tail = Fraction(total - whole, total)
        summary = cls(n, support, masses, tail=tail)
        if tail == 0:
            summary.mean = sum((x * p for x, p in zip(support, masses)), Fraction(0))
            summary.variance = sum((x * x * p for x, p in zip(support, masses)), Fraction(0)) - summary.mean ** 2
            if summary.variance > 0:
                sigma = math.sqrt(summary.variance)
                mu = float(summary.mean)
                summary.standardized = [((x - mu) / sigma, float(p)) for x, p in zip(support, masses)]
        return summary

    def mass(self, x: int) -> Fraction:
        for value, p in zip(self.support, self.masses):
            if value == x:
                return p
        return Fraction(0)

    def to_dict(self) -> Dict:
        return {
            "n": self.n,
            "support": self.support,
            "masses": [str(p) for p in self.masses],
            "mean": None if self.mean is None else str(self.mean),
            "variance": None if self.variance is None else str(self.variance),
            "tail": str(self.tail),
        }


def retic_distribution(n: int, table: CountTable) -> DistSummary:
    row = table.row(n)
    return DistSummary.from_counts(n, {k: c for k, c in enumerate(row) if c})


def i_distribution(n: int, source: Union[CountTable, Mapping[int, Mapping[int, int]]],
                   total: Optional[int] = None) -> DistSummary:
    """Law of I_n from a joint table or from an i-marginal table."""
    if isinstance(source, CountTable):
        counts = source.marginal_i(n)
        if total is None and source.complete:
            total = source.total(n)
    else:
        counts = dict(source[n])
    return DistSummary.from_counts(n, counts, total)


def normal_tv(summary: DistSummary, mean: Optional[float] = None, sigma: Optional[float] = None) -> float:
    """Total variation to N(mean, sigma^2), the normal mass of (k-1/2, k+1/2] standing in for k."""
    mu = float(summary.mean) if mean is None else mean
    sd = math.sqrt(summary.variance) if sigma is None else sigma
    distance = 0.0
    covered = 0.0
    for k, p in zip(summary.support, summary.masses):
        q = stats.norm.cdf((k + 0.5 - mu) / sd) - stats.norm.cdf((k - 0.5 - mu) / sd)
        covered += q
        distance += abs(float(p) - q)
    distance += max(0.0, 1.0 - covered)
    return distance / 2


def poisson_tv(summary: DistSummary, rate: float = 0.25) -> float:
    distance = 0.0
    covered = 0.0
    for i, p in zip(summary.support, summary.masses):
        q = float(stats.poisson.pmf(i, rate))
        covered += q
        distance += abs(float(p) - q)
    distance += abs(float(summary.tail) - max(0.0, 1.0 - covered))
    return distance / 2


# ================================
# MOMENTS
# ================================


@dataclass(frozen=True)
class Moments:
    n: int
    mean: Fraction
    variance: Fraction

    def to_dict(self) -> Dict:
        return {"n": self.n, "mean": str(self.mean), "variance": str(self.variance)}


def moments(max_n: int) -> Dict[int, Moments]:
    """Exact E(R_n) and Var(R_n) for n <= max_n without the bivariate table.

    With G = Phi(z, uG), differentiating at u = 1 gives
        G_u  = Phi_h G / (1 - Phi_h)
        G_uu = (Phi_hh (G + G_u)^2 + 2 Phi_h G_u) / (1 - Phi_h)
    where Phi_h, Phi_hh are the h-derivatives evaluated at h = G.
    """
    g = gtc_series(max_n)
    connectors = [connector_series(k, max_n) for k in range(max_n + 2)]
    known = Known(g, "G")
    phi_h = evaluate(PowerSum(connectors[1:], known, exponential=True), max_n)
    phi_hh = evaluate(PowerSum(connectors[2:], known, exponential=True), max_n)
    inverse = reciprocal(TruncSeries.one(max_n) - phi_h)
    g_u = phi_h * g * inverse
    g_uu = (phi_hh * (g + g_u) * (g + g_u) + phi_h * g_u * 2) * inverse
    out: Dict[int, Moments] = {}
    for n in range(1, max_n + 1):
        total = g.count(n)
        mean = Fraction(g_u.count(n), total)
        falling_second = Fraction(g_uu.count(n), total)
        out[n] = Moments(n, mean, falling_second + mean - mean ** 2)
    return out
