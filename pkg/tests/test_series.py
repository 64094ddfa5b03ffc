from fractions import Fraction

import pytest

from gtcnet.exceptions import InversionError, MarkerMismatchError, SeriesError
from gtcnet.series import TruncSeries, lagrange_coeff, lagrange_coefficients, mul, pow_table, reciprocal


def test_exponential_rows_hold_counts():
    s = TruncSeries.from_counts([0, 1, 1, 3, 15])
    assert s.counts() == [0, 1, 1, 3, 15]
    assert s.coeff(3) == Fraction(1, 2)
    assert s.coefficients() == [0, 1, Fraction(1, 2), Fraction(1, 2), Fraction(15, 24)]


def test_product_is_binomial_convolution():
    z = TruncSeries.variable(4)
    square = z * z
    # z^2 has ordinary coefficient 1 at degree 2, stored as 2!
    assert square.count(2) == 2
    assert square.coeff(2) == 1
    assert (z * z * z).coeff(3) == 1


def test_reciprocal_of_one_minus_z():
    s = TruncSeries.from_coefficients([1, -1], order=5)
    inv = reciprocal(s)
    assert inv.coefficients() == [1] * 6
    assert mul(s, inv) == TruncSeries.one(5)


def test_reciprocal_needs_constant_term():
    with pytest.raises(InversionError):
        reciprocal(TruncSeries.variable(3))


def test_lagrange_catalan():
    # M = z / (1 - M) has [z^n] M = Catalan(n - 1)
    phi = TruncSeries.from_coefficients([1] * 8, order=7)
    assert [lagrange_coeff(phi, n) for n in range(1, 7)] == [1, 1, 2, 5, 14, 42]
    assert lagrange_coefficients(phi, 6)[1:] == [1, 1, 2, 5, 14, 42]


def test_markers_and_marginals():
    s = TruncSeries.from_counts({(1, (0,)): 1, (2, (1,)): 2, (3, (1,)): 6, (3, (2,)): 3}, markers=("u",))
    assert s.max_marker_exponents() == {"u": 2}
    flat = s.marker_marginal("u")
    assert flat.counts() == [0, 1, 2, 9]
    at_two = s.evaluate_markers({"u": 2})
    assert at_two.count(3) == 6 * 2 + 3 * 4


def test_marker_exponent_cannot_exceed_degree():
    with pytest.raises(SeriesError):
        TruncSeries.from_counts({(1, (2,)): 1}, markers=("u",))


def test_mixed_markers_do_not_combine():
    a = TruncSeries.variable(2, markers=("u",))
    b = TruncSeries.variable(2, markers=("v",))
    with pytest.raises(MarkerMismatchError):
        a + b


def test_univariate_lifts_onto_marked():
    a = TruncSeries.variable(3, markers=("u",)).mul_monomial((1,))
    total = a + TruncSeries.variable(3)
    assert total.count(1, (1,)) == 1
    assert total.count(1, (0,)) == 1


def test_caps_drop_high_monomials():
    a = TruncSeries.variable(3, markers=("u",), caps={"u": 1}).mul_monomial((1,))
    powers = pow_table(a, 3)
    assert powers[1].count(1, (1,)) == 1
    assert powers[2].row(2) == {}


def test_shift_and_derivative():
    s = TruncSeries.from_coefficients([1, 1, 1, 1], order=3)
    assert s.shift(1).coefficients() == [0, 1, 1, 1]
    assert s.derivative().coefficients() == [1, 2, 3]


def test_to_json_keeps_exact_values():
    payload = TruncSeries.from_counts([0, 1, 1]).to_json()
    assert payload[-1] == {"exponents": [2], "numerator": "1", "denominator": "2"}


def test_from_terms_and_mark_above():
    s = TruncSeries.from_terms(3, {(1, (0,)): 1, (2, (1,)): Fraction(1, 2), (3, (0,)): 2}, markers=("v",))
    assert s.count(2, (1,)) == 1
    assert s.coeff(3, (0,)) == 2
    marked = s.mark_above("v", 2)
    assert marked.count(1, (0,)) == 1
    assert marked.count(2, (2,)) == 1
    assert marked.count(3, (1,)) == 12
    assert marked.count(3, (0,)) == 0
