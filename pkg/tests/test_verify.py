import pytest

from gtcnet import verify
from gtcnet.analysis import ReportRow
from gtcnet.config import Config
from gtcnet.exceptions import CapExceededError
from gtcnet.verify import Context, check_erratum, ratio_drift, run_verification


def test_context_levels_and_overrides():
    with pytest.raises(ValueError):
        Context("slow")
    ctx = Context("fast", {"ORACLE_CAP": 3, "UNRELATED": 1}, {"poisson_tv_max": 0.5})
    assert ctx["ORACLE_CAP"] == 3
    assert "UNRELATED" not in ctx.settings
    assert ctx.tolerances["poisson_tv_max"] == 0.5
    assert ctx.tolerances["chi_square_alpha"] == 1e-3
    assert ctx.seed == verify.SAMPLER_SEED
    assert Context("full", {"DEFAULT_SEED": "5"}).seed == 5


def test_known_totals_criterion():
    report = run_verification("fast", only=["known-totals"])
    assert report.passed
    assert report.to_dict()["status"] == "passed"
    assert [c.name for c in report.criteria] == ["known-totals"]


def test_structural_criteria_at_three():
    names = ["table-vs-oracle", "decompression-vs-oracle", "galled-characterization", "max-reticulated"]
    report = run_verification("fast", {"ORACLE_CAP": 3}, only=names)
    assert report.passed, report.failed
    details = report.criteria[0].details
    assert details["row_3"] == [3, 21, 24]


def test_erratum_is_documented():
    result = check_erratum(Context("fast"))
    assert result.passed
    assert result.status == "documented-erratum"
    assert result.details["printed_form"][2] == 84


def test_full_only_criteria_are_skipped_in_fast_mode():
    report = run_verification("fast", only=["gtc-growth"])
    assert report.criteria == []


def test_a_raising_criterion_is_reported_as_failed(monkeypatch):
    def boom(*args, **kwargs):
        raise CapExceededError("too big", limit=1, requested=2)

    monkeypatch.setattr(verify, "oracle_counts", boom)
    report = run_verification("fast", {"ORACLE_CAP": 3}, only=["table-vs-oracle"])
    assert not report.passed
    assert report.failed == ["table-vs-oracle"]
    assert report.criteria[0].details["error"] == "cap_exceeded"


def test_sampler_criterion_small(app):
    report = run_verification("fast", {"FAST_SAMPLER_DRAWS": 4800}, only=["sampler-uniformity"])
    run = report.criteria[0].details["runs"][0]
    assert run["invalid"] == 0
    assert run["cells"] == 48
    assert run["p_value"] > app.config["TOLERANCES"]["chi_square_alpha"]
    assert report.passed


def test_default_settings_follow_config():
    for key in verify.SETTING_KEYS:
        assert verify.DEFAULT_SETTINGS[key] == getattr(Config, key)
    assert Context("full")["OTC_GRID"] == Config.OTC_GRID


def test_ratio_drift():
    rows = [ReportRow("x", 10, ratio=1.0), ReportRow("x", 100, ratio=10.0), ReportRow("x", 1000, ratio=10.0)]
    assert ratio_drift(rows) == pytest.approx([1.0, 0.0])


@pytest.mark.slow
def test_gtc_growth_reports_the_constant_gap():
    result = run_verification("full", only=["gtc-growth"]).criteria[0]
    assert not result.passed
    assert result.status == "documented-deviation"
    ratios = [row["ratio"] for row in result.details["rows"]]
    assert ratios == pytest.approx([1.4198, 1.4619, 1.5028, 1.5242], abs=1e-3)
    drift = result.details["log_ratio_drift"]
    assert drift == pytest.approx([0.0421, 0.0398, 0.0348], abs=1e-3)


@pytest.mark.slow
def test_max_reticulated_growth_trend():
    result = run_verification("full", only=["max-reticulated-growth"]).criteria[0]
    assert result.passed
    ratios = [row["ratio"] for row in result.details["rows"]]
    assert ratios == pytest.approx([1.0337, 1.0161, 1.0079, 1.0052], abs=1e-3)


@pytest.mark.slow
def test_fixed_k_growth_trend():
    result = run_verification("full", only=["fixed-k-growth"]).criteria[0]
    assert result.passed
    k1 = [row["ratio"] for row in result.details["fixed-k-growth[k=1]"]["rows"]]
    k2 = [row["ratio"] for row in result.details["fixed-k-growth[k=2]"]["rows"]]
    assert k1 == pytest.approx([0.8736, 0.9109, 0.9371, 0.9487], abs=1e-3)
    assert k2 == pytest.approx([0.6273, 0.7237, 0.7980, 0.8325], abs=1e-3)


@pytest.mark.slow
def test_reticulation_limit_trend():
    result = run_verification("full", only=["reticulation-limit"]).criteria[0]
    assert result.passed
    offsets = [row["distance"] for row in result.details["mean_offset"]["rows"]]
    deviations = [row["distance"] for row in result.details["variance_deviation"]["rows"]]
    assert offsets == pytest.approx([0.1029, 0.0797, 0.0604, 0.0509], abs=1e-3)
    assert deviations == pytest.approx([0.1038, 0.0684, 0.0453, 0.0358], abs=1e-3)


@pytest.mark.slow
def test_i_limit_trend():
    result = run_verification("full", only=["i-limit"]).criteria[0]
    poisson = [row["distance"] for row in result.details["poisson_tv"]["rows"]]
    assert [row["n"] for row in result.details["poisson_tv"]["rows"]] == [40, 80, 120]
    assert all(0 <= d <= 1 for d in poisson)
    assert result.passed, poisson


@pytest.mark.slow
def test_one_component_trend():
    result = run_verification("full", only=["one-component"]).criteria[0]
    assert result.passed
    rows = result.details["otc_total"]["rows"]
    assert [row["n"] for row in rows] == [100, 200, 400, 800]
    assert [row["distance"] for row in rows] == pytest.approx([0.00608, 0.00519, 0.00412, 0.00314], abs=1e-4)
