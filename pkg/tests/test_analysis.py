import math

import pytest

from gtcnet.analysis import (
    ConvergenceReport, ReportRow, asym_eval, convergence_report, exact_values, get_formula, l_lower_sequence,
    limit_law_report, moment_report, reports_csv, sandwich_check, u_sequence, u_sequence_composed,
)
from gtcnet.engine import gtc_totals
from gtcnet.exceptions import CapExceededError, VerificationError


def test_upper_bound_head():
    assert u_sequence(3) == [1, 3, 66]


def test_upper_bound_two_routes_agree():
    assert u_sequence(7) == u_sequence_composed(7)


def test_lower_bound_head():
    assert l_lower_sequence(3) == [1, 3, 42]


def test_sandwich_holds_and_tightens_at_three():
    report = sandwich_check(10)
    assert report.passed
    row = report.row(3)
    assert (row.lower, row.gtc, row.upper) == (42, 48, 66)
    assert row.spread == 66 / 42
    assert report.to_dict()["rows"][2]["gtc"] == "48"
    with pytest.raises(KeyError):
        report.row(11)


def test_sandwich_reports_a_forged_total():
    totals = gtc_totals(4)
    totals[2] = 70
    with pytest.raises(VerificationError) as info:
        sandwich_check(4, totals)
    assert info.value.n == 3
    assert not sandwich_check(4, totals, raise_on_failure=False).passed


def test_formula_lookup():
    assert get_formula("gtc_total").has_exact
    assert not get_formula("galled_total").has_exact
    with pytest.raises(ValueError):
        get_formula("catalan")


def test_asym_eval_arguments():
    with pytest.raises(ValueError):
        asym_eval("fixed_k", 10)
    with pytest.raises(ValueError):
        asym_eval("gtc_total", 0)
    assert asym_eval("fixed_k", 50, k=1).log > asym_eval("fixed_k", 40, k=1).log


def test_asym_eval_values():
    log2 = math.log(2)
    gtc = -log2 - 0.25 - 1.25 * math.log(100) + 20 + 100 * (log2 - 2) + 200 * math.log(100)
    assert float(asym_eval("gtc_total", 100).log) == pytest.approx(gtc, rel=1e-12)
    max_ret = 0.5 * math.log(math.e * math.pi) - 0.5 * math.log(50) + 50 * (log2 - 2) + 100 * math.log(50)
    assert float(asym_eval("max_reticulated", 50).log) == pytest.approx(max_ret, rel=1e-12)
    fixed = log2 + 0.5 * log2 - math.log(2) + 60 * (log2 - 1) + 63 * math.log(60)
    assert float(asym_eval("fixed_k", 60, k=2).log) == pytest.approx(fixed, rel=1e-12)


def test_exact_values_for_reference_curve_is_refused():
    with pytest.raises(ValueError):
        exact_values("galled_total", [10])


def test_exact_values_routes():
    assert exact_values("gtc_total", [3, 4]) == {3: 48, 4: 1611}
    assert exact_values("max_reticulated", [4]) == {4: 600}
    assert exact_values("fixed_k", [3], k=1) == {3: 21}
    assert exact_values("upper_bound", [3]) == {3: 66}
    assert exact_values("lower_bound", [3]) == {3: 42}


def test_convergence_report_rows():
    grid = [10, 20, 40]
    totals = gtc_totals(40)
    report = convergence_report("gtc_total", {n: totals[n - 1] for n in grid}, grid, tolerance=10.0)
    assert [row.n for row in report.rows] == grid
    assert report.ratios_positive
    assert set(report.verdicts()) == {"monotone", "strictly_monotone", "within_tolerance", "ratios_positive"}
    assert report.within_tolerance is not None
    assert report.to_csv().splitlines()[0] == "name,n,exact_log,asym_log,ratio,distance,pass"


def test_convergence_report_rejects_zero():
    with pytest.raises(VerificationError):
        convergence_report("gtc_total", {5: 0}, [5])


def test_rows_pass_while_distance_shrinks():
    rows = [ReportRow("x", n, distance=d) for n, d in ((1, 0.5), (2, 0.3), (3, 0.4))]
    report = ConvergenceReport("x", rows)
    assert [row.passed for row in report.rows] == [True, True, False]
    assert not report.monotone
    assert report.within_tolerance is None


def test_moment_report_shape():
    mean_report, variance_report = moment_report([2, 3, 4])
    assert mean_report.name == "mean_offset"
    assert [row.n for row in variance_report.rows] == [2, 3, 4]
    assert all(row.distance >= 0 for row in mean_report.rows)


def test_limit_law_report_small_grid():
    reports = {r.name: r for r in limit_law_report([6, 8])}
    assert set(reports) == {"mean_offset", "variance_deviation", "normal_tv", "normal_tv_asymptotic_centering",
                            "poisson_tv", "independence_defect"}
    for name in ("normal_tv", "poisson_tv", "independence_defect"):
        assert all(0 <= row.distance <= 1 for row in reports[name].rows)
    lines = reports_csv(list(reports.values())).splitlines()
    assert lines[0] == "name,n,exact_log,asym_log,ratio,distance,pass"
    assert len(lines) == 1 + 6 * 2


def test_limit_law_report_respects_the_joint_cap():
    with pytest.raises(CapExceededError):
        limit_law_report([10], trivariate_cap=5)
