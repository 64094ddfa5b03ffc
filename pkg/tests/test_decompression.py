import pytest

from gtcnet.decompression import DecompressionPlan, PlanNode, enumerate_by_decompression, realize
from gtcnet.exceptions import NetworkValidationError
from gtcnet.network import is_gtc, validate
from gtcnet.newick import canonical
from gtcnet.oracle import enumerate_gtc
from gtcnet.onecomponent import enumerate_hat_networks


def hat(c, k):
    return next(iter(enumerate_hat_networks(c, k)))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_decompression_rebuilds_the_corpus(n, gtc_corpus):
    rebuilt = [canonical(net) for net in enumerate_by_decompression(n)]
    assert len(rebuilt) == len(set(rebuilt))
    assert set(rebuilt) == {canonical(net) for net in gtc_corpus[n]}


def test_realize_single_leaf():
    assert canonical(realize(DecompressionPlan(1))) == "1;"


def test_realize_nested_plan():
    inner = PlanNode((2,), [3], hat(2, 1))
    plan = DecompressionPlan(PlanNode((1,), [inner], hat(2, 1)))
    assert plan.n == 3
    assert plan.retic_stats == (2, 1)
    net = realize(plan)
    assert validate(net) and is_gtc(net)
    assert net.labels() == [1, 2, 3]
    assert net.retic_stats() == (2, 1)


def test_slots_must_follow_smallest_label():
    plan = DecompressionPlan(PlanNode((1,), [3, 2], hat(3, 2)))
    with pytest.raises(NetworkValidationError):
        plan.check()


def test_component_needs_a_plain_leaf():
    with pytest.raises(NetworkValidationError):
        DecompressionPlan(PlanNode((), [1, 2], hat(2, 1))).check()


def test_component_size_must_match():
    with pytest.raises(NetworkValidationError):
        DecompressionPlan(PlanNode((1,), [2], hat(3, 1))).check()


def test_missing_component():
    with pytest.raises(NetworkValidationError):
        realize(DecompressionPlan(PlanNode((1,), [2])))


@pytest.mark.slow
def test_decompression_rebuilds_the_corpus_at_four():
    rebuilt = [canonical(net) for net in enumerate_by_decompression(4)]
    assert len(rebuilt) == len(set(rebuilt)) == 1611
    assert set(rebuilt) == {canonical(net) for net in enumerate_gtc(4)}
