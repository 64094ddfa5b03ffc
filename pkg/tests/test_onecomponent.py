import math
from collections import Counter

import numpy as np
import pytest

from gtcnet.network import is_one_component, is_tree_child, validate
from gtcnet.newick import canonical
from gtcnet.numeric import log_exact
from gtcnet.onecomponent import (
    certify_hat_counts, enumerate_hat_networks, enumerate_trees, hat_weight, l_count, otc, otc_local_limit,
    otc_total, otc_total_asym, sample_one_component, sample_tree, series_A, series_Lprime, trees,
)


def test_closed_forms_small():
    assert [otc(2, k) for k in range(2)] == [1, 2]
    assert [otc(3, k) for k in range(3)] == [3, 18, 18]
    assert otc_total(3) == 39
    assert otc(3, 3) == 0 and otc(0, 0) == 0


def test_l_count_divides_out_labels():
    for n in range(1, 9):
        for k in range(n):
            assert l_count(n, k) * math.comb(n, k) == otc(n, k)


def test_trees_double_factorial():
    assert [trees(n) for n in range(1, 6)] == [1, 1, 3, 15, 105]


def test_series_Lprime_head():
    assert series_Lprime(3).coefficients() == [1, 1, 3, 15]


def test_series_A_head():
    # A(z) = OTC_2 z / 2! + OTC_3 z^2 / 3! + ...
    a = series_A(2)
    assert a.coeff(1) == otc_total(2) / 2
    assert a.coeff(2) == otc_total(3) / 6


def test_hat_weight_matches_l_count():
    certify_hat_counts(7)
    assert hat_weight(3, 1) == 6
    assert hat_weight(3, 3) == 0


@pytest.mark.parametrize("c,k", [(2, 1), (3, 1), (3, 2), (4, 2)])
def test_hat_listing_is_exhaustive_and_distinct(c, k):
    nets = list(enumerate_hat_networks(c, k))
    keys = {canonical(net) for net in nets}
    assert len(nets) == len(keys) == l_count(c, k)
    for net in nets:
        assert validate(net)
        assert is_tree_child(net) and is_one_component(net)
        assert sorted(net.label(net.child(r)) for r in net.reticulations()) == list(range(1, k + 1))


def test_enumerate_trees_counts():
    assert len(list(enumerate_trees([1, 2, 3, 4]))) == 15


def test_sample_tree_is_valid(rng):
    net = sample_tree(5, [1, 2, 3, 4, 5], rng)
    assert validate(net)
    assert net.retic_count == 0


@pytest.mark.parametrize("model", ["L", "otc"])
def test_sample_one_component_is_valid(rng, model):
    for _ in range(20):
        net = sample_one_component(5, 2, rng, model=model)
        assert validate(net)
        assert is_tree_child(net) and is_one_component(net)
        assert net.retic_count == 2


def test_sample_one_component_is_uniform_in_L_model():
    rng = np.random.default_rng(7)
    draws = Counter(canonical(sample_one_component(3, 1, rng)) for _ in range(3000))
    expected = {canonical(net) for net in enumerate_hat_networks(3, 1)}
    assert set(draws) == expected
    # 6 equally likely networks, 500 expected each
    assert all(380 < count < 620 for count in draws.values())


def test_sample_one_component_rejects_bad_sizes(rng):
    with pytest.raises(ValueError):
        sample_one_component(3, 3, rng)
    with pytest.raises(ValueError):
        sample_one_component(3, 1, rng, model="bogus")


def test_asymptotic_forms_are_log_values():
    local = otc_local_limit(400, 380)
    total = otc_total_asym(400)
    assert local.log < total.log
    assert total.value is None
    assert otc_total_asym(10).value > 0


def test_total_asymptotic_at_sixty():
    ratio = math.exp(float(log_exact(otc_total(60)) - otc_total_asym(60).log))
    assert ratio == pytest.approx(0.9938, abs=1e-3)
