import pytest

from gtcnet.engine import gtc_table
from gtcnet.exceptions import CapExceededError
from gtcnet.network import PhyloNetwork, is_gtc, is_one_component, validate
from gtcnet.newick import canonical
from gtcnet.oracle import (
    counts_by_k, enumerate_gtc, enumerate_one_component, enumerate_shapes, labelled_count, oracle_counts,
)


def test_oracle_at_two():
    assert oracle_counts(2) == {(0, 0): 1, (1, 0): 2}


def test_oracle_matches_engine_at_three():
    assert oracle_counts(3) == gtc_table(3, with_i_marker=True).joint(3)


def test_one_component_oracle():
    assert counts_by_k(oracle_counts(3, "one_component")) == {0: 3, 1: 18, 2: 18}


def test_tree_child_total_at_three():
    assert sum(oracle_counts(3, "tc").values()) == 66


def test_labelled_count_of_a_cherry():
    cherry = PhyloNetwork.from_edges([(0, 1), (1, 2), (1, 3)], {2: 1, 3: 2})
    assert labelled_count(cherry) == 1


def test_shapes_are_pairwise_distinct():
    shapes = enumerate_shapes(3)
    assert sum(labelled_count(s) for s in shapes if is_gtc(s)) == 48


def test_corpus_is_distinct_and_galled(gtc_corpus):
    assert [len(gtc_corpus[n]) for n in (1, 2, 3)] == [1, 3, 48]
    keys = [canonical(net) for net in gtc_corpus[3]]
    assert len(set(keys)) == 48
    assert all(validate(net) and is_gtc(net) for net in gtc_corpus[3])


def test_tree_child_corpus_contains_galled_corpus(gtc_corpus, tc_corpus):
    assert len(tc_corpus[3]) == 66
    assert {canonical(n) for n in gtc_corpus[3]} <= {canonical(n) for n in tc_corpus[3]}


def test_oracle_caps():
    with pytest.raises(CapExceededError):
        oracle_counts(5)
    with pytest.raises(CapExceededError):
        oracle_counts(0)
    with pytest.raises(ValueError):
        oracle_counts(3, "orchard")


def test_oracle_caps_follow_app_config(app):
    app.config.update(ORACLE_CAP=2, ORACLE_LONG_CAP=3)
    with app.app_context():
        with pytest.raises(CapExceededError) as excinfo:
            oracle_counts(3)
        assert excinfo.value.limit == 2
        assert oracle_counts(3, long_run=True) == gtc_table(3, with_i_marker=True).joint(3)
        with pytest.raises(CapExceededError):
            enumerate_gtc(3)
        assert len(enumerate_gtc(3, long_run=True)) == 48


@pytest.mark.slow
def test_oracle_matches_engine_at_four():
    joint = gtc_table(4, with_i_marker=True)
    assert oracle_counts(4) == joint.joint(4)
    assert counts_by_k(oracle_counts(4)) == {k: joint.cell(4, k) for k in range(4)}


def test_one_component_corpus():
    nets = enumerate_one_component(3)
    assert len(nets) == 39
    assert all(is_one_component(net) for net in nets)
