from fractions import Fraction
from math import factorial

import pytest

from gtcnet.engine import (
    CountTable, component_tree_shapes, connector_series, gtc_direct, gtc_table, gtc_total, gtc_totals,
    i_distribution, i_marginal_table, max_ret_erratum, max_ret_series, moments, normal_tv, poisson_tv,
    retic_distribution, set_partitions, star_contribution,
)
from gtcnet.exceptions import CapExceededError
from gtcnet.onecomponent import otc_total, series_Lprime, trees
from gtcnet.series import lagrange_coeff

KNOWN_TOTALS = [1, 3, 48, 1611, 87660, 6891615, 734112540, 101717195895, 17813516259420, 3857230509496875]


def test_totals_match_published_values():
    assert gtc_totals(10) == KNOWN_TOTALS
    assert gtc_total(4) == 1611


def test_bivariate_table_rows():
    table = gtc_table(5)
    assert table.row(1) == [1]
    assert table.row(2) == [1, 2]
    assert table.row(3) == [3, 21, 24]
    assert table.totals() == KNOWN_TOTALS[:5]
    assert table.cell(4, 3) == 600


def test_trees_fill_column_zero():
    table = gtc_table(6)
    assert table.column(0) == [trees(n) for n in range(1, 7)]


def test_joint_table_at_three():
    joint = gtc_table(4, with_i_marker=True)
    assert joint.joint(3) == {(0, 0): 3, (1, 0): 18, (1, 1): 3, (2, 0): 18, (2, 1): 6}
    assert joint.marginal_i(3) == {0: 39, 1: 9}
    assert joint.bivariate() == gtc_table(4)


def test_i_never_exceeds_k():
    joint = gtc_table(7, with_i_marker=True)
    assert all(i <= k for (_, k, i) in joint.cells)


def test_max_k_truncation_keeps_low_columns():
    full = gtc_table(8)
    capped = gtc_table(8, max_k=2)
    for k in range(3):
        assert capped.column(k) == full.column(k)
    assert capped.cell(8, 3) == 0
    with pytest.raises(ValueError):
        capped.total(8)


def test_i_marginal_route_agrees_with_joint():
    joint = gtc_table(6, with_i_marker=True)
    marginal = i_marginal_table(6)
    for n in range(1, 7):
        assert marginal[n] == joint.marginal_i(n)


def test_table_round_trips_through_plain_data():
    table = gtc_table(6, with_i_marker=True, max_i=2)
    assert CountTable.from_dict(table.to_dict()) == table
    assert table.truncate(3).max_n == 3


def test_csv_layout():
    lines = gtc_table(3).to_csv().splitlines()
    assert lines == ["n,k,count", "1,0,1", "2,0,1", "2,1,2", "3,0,3", "3,1,21", "3,2,24"]


def test_cell_outside_table():
    with pytest.raises(CapExceededError):
        gtc_table(3).row(4)


def test_connector_series_rows():
    assert connector_series(0, 3).counts() == [0, 1, 1, 3]
    assert connector_series(1, 2).counts() == [0, 1, 6]


def test_set_partitions_bell_numbers():
    assert [sum(1 for _ in set_partitions(list(range(n)))) for n in range(1, 6)] == [1, 2, 5, 15, 52]


def test_component_tree_shapes_count():
    # rooted phylogenetic trees (any outdegree >= 2): 1, 1, 4, 26
    assert [sum(1 for _ in component_tree_shapes(range(1, n + 1))) for n in range(1, 5)] == [1, 1, 4, 26]


@pytest.mark.parametrize("n", range(1, 7))
def test_direct_sum_matches_engine(n):
    joint = gtc_table(6, with_i_marker=True)
    assert gtc_direct(n, with_i=True) == joint.joint(n)


def test_direct_sum_cap():
    with pytest.raises(CapExceededError):
        gtc_direct(9)


def test_direct_sum_cap_follows_app_config(app):
    app.config["DIRECT_FORMULA_CAP"] = 3
    with app.app_context():
        assert gtc_direct(3) == {0: 3, 1: 21, 2: 24}
        with pytest.raises(CapExceededError) as excinfo:
            gtc_direct(4)
    assert excinfo.value.limit == 3
    assert gtc_direct(4)[3] == 600


def test_star_contribution_is_one_component_total():
    assert star_contribution(4) == otc_total(4)


def test_max_reticulated_two_routes():
    assert max_ret_series(4) == [1, 2, 24, 600]
    table = gtc_table(12)
    assert max_ret_series(12) == [table.cell(n, n - 1) for n in range(1, 13)]


def test_max_reticulated_matches_lagrange_at_sixty():
    series = max_ret_series(60)
    assert series[59] == lagrange_coeff(series_Lprime(59), 60) * factorial(60)
    assert series[29] == lagrange_coeff(series_Lprime(29), 30) * factorial(30)


def test_printed_form_counts_the_leaf_twice():
    printed = max_ret_erratum(3)
    assert printed[0] == 2
    assert printed[2] == 84


def test_exact_moments():
    m = moments(3)
    assert m[2].mean == Fraction(2, 3)
    assert m[2].variance == Fraction(2, 9)
    assert m[3].mean == Fraction(23, 16)
    assert m[3].variance == Fraction(95, 256)


def test_moments_agree_with_table():
    table = gtc_table(15)
    exact = moments(15)
    for n in (5, 10, 15):
        summary = retic_distribution(n, table)
        assert summary.mean == exact[n].mean
        assert summary.variance == exact[n].variance


def test_distribution_summaries():
    table = gtc_table(12, with_i_marker=True, max_i=2)
    with pytest.raises(ValueError):
        table.bivariate()
    r = retic_distribution(12, gtc_table(12))
    assert sum(r.masses) == 1
    assert 0 <= normal_tv(r) <= 1
    i_law = i_distribution(12, table, total=gtc_table(12).total(12))
    assert i_law.tail >= 0
    assert 0 <= poisson_tv(i_law) <= 1
