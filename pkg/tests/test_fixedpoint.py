import pytest

from gtcnet.exceptions import ContractionError
from gtcnet.fixedpoint import (
    FixedPointSpec, Known, Marked, PowerSum, Product, Shift, Sum, Unknown, compose, evaluate, residual,
    solve_fixed_point,
)
from gtcnet.series import TruncSeries


def binary_trees_spec(order):
    # T = z + T^2 / 2 (exponential): rooted binary trees on labelled leaves
    return FixedPointSpec(
        Sum(Known(TruncSeries.variable(order), "z"), PowerSum([0, 0, 1], Unknown(), exponential=True)), order)


def test_exponential_power_sum_counts_binary_trees():
    solved = solve_fixed_point(binary_trees_spec(6))
    assert solved.counts() == [0, 1, 1, 3, 15, 105, 945]


def test_residual_vanishes():
    spec = binary_trees_spec(6)
    assert residual(spec, solve_fixed_point(spec)) == TruncSeries.zero(6)


def test_ordinary_product_gives_catalan():
    order = 7
    t = Unknown()
    spec = FixedPointSpec(Sum(Known(TruncSeries.variable(order)), Product(t, t)), order)
    solved = solve_fixed_point(spec)
    assert [solved.coeff(n) for n in range(1, 8)] == [1, 1, 2, 5, 14, 42, 132]


def test_compose_with_shift():
    order = 6
    phi = TruncSeries.from_coefficients([1] * (order + 1), order=order)
    spec = FixedPointSpec(Shift(compose(phi, Unknown()), 1), order)
    solved = solve_fixed_point(spec)
    assert [solved.coeff(n) for n in range(1, 7)] == [1, 1, 2, 5, 14, 42]


def test_marked_unknown_tracks_depth():
    # S = z + u * S^2 / 2: u counts internal vertices
    order = 4
    rhs = Sum(Known(TruncSeries.variable(order)), Marked(PowerSum([0, 0, 1], Unknown(), exponential=True), u=1))
    solved = solve_fixed_point(FixedPointSpec(rhs, order, ("u",)))
    assert solved.count(3, (2,)) == 3
    assert solved.count(4, (3,)) == 15
    assert solved.marker_bound_holds()


def test_non_contractive_rhs_is_rejected():
    with pytest.raises(ContractionError) as info:
        solve_fixed_point(FixedPointSpec(Sum(Known(TruncSeries.variable(3)), Unknown()), 3))
    assert info.value.term == "S"


def test_evaluate_with_fixed_unknown():
    g = TruncSeries.from_counts([0, 1, 3], 2)
    squared = evaluate(PowerSum([0, 0, 1], Unknown(), exponential=True), 2, unknown=g)
    assert squared.counts() == [0, 0, 1]
