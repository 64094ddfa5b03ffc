"""Bounds, asymptotic formulas and limit-law diagnostics.

Everything that compares an exact count with a closed form goes through
natural logs (see gtcnet/numeric.py); exact integers are only turned into
logs at the comparison itself.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import mpmath

from gtcnet.engine import (
    CountTable, DistSummary, exact_int, gtc_table, gtc_totals, max_ret_series, moments, normal_tv, poisson_tv,
    retic_distribution,
)
from gtcnet.exceptions import CapExceededError, VerificationError
from gtcnet.fixedpoint import FixedPointSpec, Known, PowerSum, Product, Sum, Unknown, compose, solve_fixed_point
from gtcnet.numeric import LogValue, log_exact, ratio_from_logs, workprec
from gtcnet.onecomponent import l_count, otc, otc_local_limit, otc_total, otc_total_asym, series_A
from gtcnet.series import TruncSeries
from gtcnet.utils import csv_text

logger = logging.getLogger(__name__)


# ================================
# BOUNDS
# ================================


def u_sequence(max_n: int) -> List[int]:
    """[U_1, ..., U_max_n] from U = z + sum_{j>=2} OTC_j U^j / j!.

    U_n sums prod_v OTC_{c(v)} over component trees, i.e. decompression
    with every arrow placement allowed, so it overcounts GTC_n from n = 3.
    """
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    coefficients = [0, 0] + [otc_total(j) for j in range(2, max_n + 1)]
    rhs = Sum(Known(TruncSeries.variable(max_n), "z"), PowerSum(coefficients, Unknown(), exponential=True))
    solved = solve_fixed_point(FixedPointSpec(rhs, max_n))
    return [exact_int(solved.count(n), f"n={n}") for n in range(1, max_n + 1)]


def u_sequence_composed(max_n: int) -> List[int]:
    """The same sequence from U = z + U * A(U) with A(z) = sum OTC_{n+1} z^n / (n+1)!.

    Rational arithmetic throughout; kept as a cross-check for small max_n.
    """
    u = Unknown()
    rhs = Sum(Known(TruncSeries.variable(max_n), "z"), Product(u, compose(series_A(max_n), u)))
    solved = solve_fixed_point(FixedPointSpec(rhs, max_n))
    return [exact_int(solved.count(n), f"n={n}") for n in range(1, max_n + 1)]


def l_lower_sequence(max_n: int) -> List[int]:
    """[L_1, ..., L_max_n], networks whose component tree is a root with cherries and leaves.

    L_n = sum_j binom(n, 2j) (2j)!/(j! 2^j) sum_l binom(n-2j, l) L_{n-j, j+l}
    """
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    weights = {(c, k): l_count(c, k) for c in range(1, max_n + 1) for k in range(c)}
    out = []
    for n in range(1, max_n + 1):
        total = 0
        for j in range(n // 2 + 1):
            matchings = math.comb(n, 2 * j) * math.factorial(2 * j) // (math.factorial(j) * 2 ** j)
            inner = sum(math.comb(n - 2 * j, ell) * weights.get((n - j, j + ell), 0)
                        for ell in range(n - 2 * j + 1))
            total += matchings * inner
        out.append(total)
    return out


@dataclass
class SandwichRow:
    n: int
    lower: int
    gtc: int
    upper: int

    @property
    def holds(self) -> bool:
        return self.lower <= self.gtc <= self.upper

    @property
    def upper_ratio(self) -> float:
        return float(Fraction(self.upper, self.gtc))

    @property
    def lower_ratio(self) -> float:
        return float(Fraction(self.gtc, self.lower))

    @property
    def spread(self) -> float:
        """U_n / L_n."""
        return float(Fraction(self.upper, self.lower))


@dataclass
class SandwichReport:
    rows: List[SandwichRow]

    @property
    def passed(self) -> bool:
        return all(row.holds for row in self.rows)

    def row(self, n: int) -> SandwichRow:
        for row in self.rows:
            if row.n == n:
                return row
        raise KeyError(n)

    def spread_decreasing(self, grid: Sequence[int]) -> bool:
        spreads = [self.row(n).spread for n in grid]
        return all(b < a for a, b in zip(spreads, spreads[1:]))

    def to_csv(self) -> str:
        header = ["n", "lower", "gtc", "upper", "upper_ratio", "lower_ratio", "pass"]
        return csv_text(header, [(r.n, r.lower, r.gtc, r.upper, r.upper_ratio, r.lower_ratio, r.holds)
                                 for r in self.rows])

    def to_dict(self) -> Dict:
        return {
            "passed": self.passed,
            "rows": [{"n": r.n, "lower": str(r.lower), "gtc": str(r.gtc), "upper": str(r.upper),
                      "upper_ratio": r.upper_ratio, "lower_ratio": r.lower_ratio, "pass": r.holds}
                     for r in self.rows],
        }


def sandwich_check(max_n: int, totals: Optional[Sequence[int]] = None, raise_on_failure: bool = True) -> SandwichReport:
    """L_n <= GTC_n <= U_n for every n <= max_n, exactly."""
    totals = list(totals) if totals is not None else gtc_totals(max_n)
    upper = u_sequence(max_n)
    lower = l_lower_sequence(max_n)
    report = SandwichReport([SandwichRow(n, lower[n - 1], totals[n - 1], upper[n - 1])
                             for n in range(1, max_n + 1)])
    for row in report.rows:
        if not row.holds and raise_on_failure:
            raise VerificationError(
                f"bounds violated at n={row.n}: {row.lower} <= {row.gtc} <= {row.upper} is false",
                criterion="sandwich", n=row.n)
    logger.info("✅ Sandwich holds to n=%d", max_n)
    return report


# ================================
# ASYMPTOTIC FORMULAS
# ================================


def _log_growth(n):
    # 2 sqrt(n) + n (log 2 - 2) + 2 n log n, shared by every galled count
    return 2 * mpmath.sqrt(n) + n * (mpmath.log(2) - 2) + 2 * n * mpmath.log(n)


def _gtc_total(n, k=None, x=None):
    return -mpmath.log(2) - mpmath.mpf(1) / 4 - mpmath.mpf(5) / 4 * mpmath.log(n) + _log_growth(n)


def _otc_total(n, k=None, x=None):
    return otc_total_asym(int(n)).log


def _otc_local(n, k=None, x=None):
    if x is None:
        return otc_local_limit(int(n), k).log
    return (-mpmath.log(2) - mpmath.log(mpmath.e * mpmath.pi) / 2 - mpmath.mpf(3) / 2 * mpmath.log(n)
            + _log_growth(n) - mpmath.mpf(x) ** 2 / mpmath.sqrt(n))


def _max_reticulated(n, k=None, x=None):
    return (mpmath.log(mpmath.e * mpmath.pi) / 2 - mpmath.log(n) / 2
            + n * (mpmath.log(2) - 2) + 2 * n * mpmath.log(n))


def _fixed_k(n, k=None, x=None):
    return ((k - 1) * mpmath.log(2) + mpmath.log(2) / 2 - mpmath.log(mpmath.factorial(k))
            + n * (mpmath.log(2) - 1) + (n + 2 * k - 1) * mpmath.log(n))


def _galled_total(n, k=None, x=None):
    constant = mpmath.log(mpmath.sqrt(2 * mpmath.e * mpmath.e ** (mpmath.mpf(1) / 4)) / 4)
    return constant - mpmath.log(n) + n * (mpmath.log(8) - 2) + 2 * n * mpmath.log(n)


@dataclass(frozen=True)
class AsymFormula:
    name: str
    description: str
    log_eval: Callable
    needs_k: bool = False
    has_exact: bool = True


FORMULAS: Dict[str, AsymFormula] = {f.name: f for f in (
    AsymFormula("gtc_total", "GTC_n", _gtc_total),
    AsymFormula("otc_total", "one-component networks of size n", _otc_total),
    AsymFormula("otc_local", "one-component networks with k reticulations, k near n - sqrt(n)",
                _otc_local, needs_k=True),
    AsymFormula("max_reticulated", "GTC_{n,n-1}", _max_reticulated),
    AsymFormula("fixed_k", "GTC_{n,k} for fixed k", _fixed_k, needs_k=True),
    AsymFormula("upper_bound", "U_n", _gtc_total),
    AsymFormula("lower_bound", "L_n", _gtc_total),
    AsymFormula("galled_total", "galled networks of size n (reference curve)", _galled_total, has_exact=False),
)}


def get_formula(name: str) -> AsymFormula:
    try:
        return FORMULAS[name]
    except KeyError:
        raise ValueError(f"unknown asymptotic formula {name!r}; known: {sorted(FORMULAS)}") from None


def asym_eval(name: str, n: int, k: Optional[int] = None, x: Optional[float] = None,
              bits: Optional[int] = None) -> LogValue:
    formula = get_formula(name)
    if n < 1:
        raise ValueError("n must be >= 1")
    if formula.needs_k and k is None and x is None:
        raise ValueError(f"formula {name!r} needs k")
    with workprec(bits):
        return LogValue(+formula.log_eval(mpmath.mpf(n), k, x))


def exact_values(name: str, grid: Sequence[int], k: Optional[int] = None,
                 table: Optional[CountTable] = None) -> Dict[int, int]:
    """Exact counterparts of a formula on ``grid``."""
    formula = get_formula(name)
    if not formula.has_exact:
        raise ValueError(f"formula {name!r} is a reference curve without exact values")
    top = max(grid)
    if name == "gtc_total":
        values = table.totals() if table is not None and table.complete else gtc_totals(top)
        return {n: values[n - 1] for n in grid}
    if name == "otc_total":
        return {n: otc_total(n) for n in grid}
    if name == "otc_local":
        return {n: otc(n, k) for n in grid}
    if name == "max_reticulated":
        values = max_ret_series(top)
        return {n: values[n - 1] for n in grid}
    if name == "fixed_k":
        if table is None or (table.max_k is not None and table.max_k < k) or table.max_n < top:
            table = gtc_table(top, max_k=k)
        return {n: table.cell(n, k) for n in grid}
    if name == "upper_bound":
        values = u_sequence(top)
        return {n: values[n - 1] for n in grid}
    values = l_lower_sequence(top)
    return {n: values[n - 1] for n in grid}


# ================================
# REPORTS
# ================================


@dataclass
class ReportRow:
    """One grid point. Ratio rows carry logs; distance rows only ``distance``."""

    name: str
    n: int
    exact_log: Optional[mpmath.mpf] = None
    asym_log: Optional[mpmath.mpf] = None
    ratio: Optional[float] = None
    distance: Optional[float] = None
    passed: bool = True

    def __post_init__(self):
        if self.distance is None and self.ratio is not None:
            self.distance = abs(self.ratio - 1.0)

    def cells(self) -> tuple:
        def fmt(x):
            return "" if x is None else mpmath.nstr(x, 15)
        return (self.name, self.n, fmt(self.exact_log), fmt(self.asym_log),
                "" if self.ratio is None else self.ratio,
                "" if self.distance is None else self.distance, self.passed)


@dataclass
class ConvergenceReport:
    """Rows of one sequence along an n-grid, plus trend verdicts.

    A row passes when its distance did not grow from the previous row.
    """

    name: str
    rows: List[ReportRow] = field(default_factory=list)
    tolerance: Optional[float] = None

    HEADER = ("name", "n", "exact_log", "asym_log", "ratio", "distance", "pass")

    def __post_init__(self):
        self.mark_rows()

    def mark_rows(self) -> None:
        previous = None
        for row in self.rows:
            row.passed = previous is None or row.distance <= previous
            previous = row.distance

    @property
    def distances(self) -> List[float]:
        return [row.distance for row in self.rows]

    @property
    def monotone(self) -> bool:
        d = self.distances
        return all(b <= a for a, b in zip(d, d[1:]))

    @property
    def strictly_monotone(self) -> bool:
        d = self.distances
        return all(b < a for a, b in zip(d, d[1:]))

    @property
    def within_tolerance(self) -> Optional[bool]:
        if self.tolerance is None or not self.rows:
            return None
        return self.rows[-1].distance <= self.tolerance

    @property
    def ratios_positive(self) -> bool:
        return all(r.ratio is None or (math.isfinite(r.ratio) and r.ratio > 0) for r in self.rows)

    def verdicts(self) -> Dict[str, Optional[bool]]:
        return {
            "monotone": self.monotone,
            "strictly_monotone": self.strictly_monotone,
            "within_tolerance": self.within_tolerance,
            "ratios_positive": self.ratios_positive,
        }

    def to_rows(self) -> List[tuple]:
        return [row.cells() for row in self.rows]

    def to_csv(self) -> str:
        return csv_text(self.HEADER, self.to_rows())

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "tolerance": self.tolerance,
            "verdicts": self.verdicts(),
            "rows": [dict(zip(self.HEADER, row)) for row in self.to_rows()],
        }


def convergence_report(name: str, exact: Mapping[int, int], grid: Sequence[int], k: Optional[int] = None,
                       tolerance: Optional[float] = None, bits: Optional[int] = None) -> ConvergenceReport:
    """exact(n) / asymptotic(n) along ``grid``."""
    rows = []
    with workprec(bits):
        for n in grid:
            value = exact[n]
            if value <= 0:
                raise VerificationError(f"{name}: exact value at n={n} is not positive", criterion=name, n=n)
            exact_log = log_exact(value, bits)
            asym_log = asym_eval(name, n, k=k, bits=bits).log
            rows.append(ReportRow(name if k is None else f"{name}[k={k}]", n, exact_log, asym_log,
                                  ratio_from_logs(exact_log, asym_log, bits)))
    report = ConvergenceReport(name if k is None else f"{name}[k={k}]", rows, tolerance)
    logger.info("✅ %s: distances %s", report.name, ", ".join(f"{d:.4g}" for d in report.distances))
    return report


def moment_report(grid: Sequence[int], mean_tolerance: Optional[float] = None,
                  variance_tolerance: Optional[float] = None) -> List[ConvergenceReport]:
    """|E(R_n) - (n - sqrt n)| and |Var(R_n) / (sqrt(n)/2) - 1| along ``grid``."""
    exact = moments(max(grid))
    mean_rows, variance_rows = [], []
    for n in grid:
        m = exact[n]
        root = math.sqrt(n)
        mean_rows.append(ReportRow("mean_offset", n, distance=abs(float(m.mean) - (n - root))))
        variance_rows.append(ReportRow("variance_deviation", n, distance=abs(float(m.variance) / (root / 2) - 1)))
    return [ConvergenceReport("mean_offset", mean_rows, mean_tolerance),
            ConvergenceReport("variance_deviation", variance_rows, variance_tolerance)]


def independence_defect(n: int, joint: CountTable, summary: DistSummary, total: int) -> float:
    """max over i and standardized-k bins of |P(I=i, bin) - P(I=i) P(bin)|.

    Bins have width 1/2 between -2 and 2, plus the two tails.
    """
    mu = float(summary.mean)
    sigma = math.sqrt(summary.variance)
    edges = [-2.0 + 0.5 * j for j in range(9)]

    def bin_of(k: int) -> int:
        z = (k - mu) / sigma
        index = 0
        while index < len(edges) and z > edges[index]:
            index += 1
        return index

    bin_mass: Dict[int, Fraction] = {}
    for k, p in zip(summary.support, summary.masses):
        b = bin_of(k)
        bin_mass[b] = bin_mass.get(b, Fraction(0)) + p
    cells: Dict[tuple, Fraction] = {}
    i_mass: Dict[int, Fraction] = {}
    for (k, i), count in joint.joint(n).items():
        p = Fraction(count, total)
        cells[(i, bin_of(k))] = cells.get((i, bin_of(k)), Fraction(0)) + p
        i_mass[i] = i_mass.get(i, Fraction(0)) + p
    return max(float(abs(cells.get((i, b), Fraction(0)) - pi * pb))
               for i, pi in i_mass.items() for b, pb in bin_mass.items())


def limit_law_report(grid: Sequence[int], bivariate: Optional[CountTable] = None,
                     joint: Optional[CountTable] = None, trivariate_cap: int = 120,
                     max_i: Optional[int] = 4) -> List[ConvergenceReport]:
    """Distances (a) through (e) along ``grid``; each should shrink as n grows.

    (a) mean offset, (b) variance deviation, (c) TV of R_n to the normal law
    with exact centering (and with n - sqrt n, (n/4)^(1/4)), (d) TV of I_n to
    Poisson(1/4), (e) the independence defect of (I_n, R_n).
    """
    top = max(grid)
    if top > trivariate_cap:
        raise CapExceededError(f"limit-law report needs the joint table to n={top}, above the cap {trivariate_cap}",
                               limit=trivariate_cap, requested=top,
                               hint="use a smaller grid, or `report --kind moments` for (a) and (b) alone")
    if bivariate is None or bivariate.max_n < top:
        bivariate = gtc_table(top)
    if joint is None or joint.max_n < top:
        joint = gtc_table(top, with_i_marker=True, max_i=max_i, trivariate_cap=trivariate_cap)
    named: Dict[str, List[ReportRow]] = {key: [] for key in (
        "mean_offset", "variance_deviation", "normal_tv", "normal_tv_asymptotic_centering",
        "poisson_tv", "independence_defect")}
    for n in grid:
        summary = retic_distribution(n, bivariate)
        total = bivariate.total(n)
        root = math.sqrt(n)
        named["mean_offset"].append(ReportRow("mean_offset", n, distance=abs(float(summary.mean) - (n - root))))
        named["variance_deviation"].append(
            ReportRow("variance_deviation", n, distance=abs(float(summary.variance) / (root / 2) - 1)))
        named["normal_tv"].append(ReportRow("normal_tv", n, distance=normal_tv(summary)))
        named["normal_tv_asymptotic_centering"].append(
            ReportRow("normal_tv_asymptotic_centering", n, distance=normal_tv(summary, n - root, (n / 4) ** 0.25)))
        marginal = joint.marginal_i(n)
        i_law = DistSummary.from_counts(n, marginal, total)
        named["poisson_tv"].append(ReportRow("poisson_tv", n, distance=poisson_tv(i_law)))
        named["independence_defect"].append(
            ReportRow("independence_defect", n, distance=independence_defect(n, joint, summary, total)))
    return [ConvergenceReport(name, rows) for name, rows in named.items()]


def reports_csv(reports: Sequence[ConvergenceReport]) -> str:
    return csv_text(ConvergenceReport.HEADER, [row for report in reports for row in report.to_rows()])
