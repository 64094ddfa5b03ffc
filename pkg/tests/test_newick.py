import json

import pytest

from gtcnet.exceptions import NetworkValidationError, NewickSyntaxError
from gtcnet.network import PhyloNetwork
from gtcnet.newick import canonical, from_edge_json, from_newick, parse, parse_lines, same_network, serialize


def test_single_leaf():
    assert serialize(PhyloNetwork.single_leaf(1)) == "1;"
    assert from_newick("1;").size == 1


def test_canonical_ignores_child_order():
    assert canonical(from_newick("(2,1);")) == "(1,2);"
    assert canonical(from_newick("(3,(2,1));")) == canonical(from_newick("((1,2),3);"))


def test_reticulation_written_once_then_referenced():
    net = PhyloNetwork.from_edges([(0, 1), (1, 2), (1, 3), (3, 2), (3, 5), (2, 4)], {4: 1, 5: 2})
    text = serialize(net)
    assert text == "(((1)#H1,2),#H1);"
    back = from_newick(text)
    assert same_network(back, net)
    assert back.retic_stats() == (1, 0)


def test_multi_child_hybrid_block_is_accepted():
    # (1,2)#H1 puts a tree node below the reticulation
    net = from_newick("(((1,2)#H1,3),#H1);")
    assert net.retic_stats() == (1, 1)
    assert canonical(net) == "((((1,2))#H1,3),#H1);"


def test_edge_json_round_trip():
    net = from_newick("((((1)#H1,2),#H1),3);")
    text = serialize(net, "json")
    payload = json.loads(text)
    assert {node["type"] for node in payload["nodes"]} == {"root", "tree", "reticulation", "leaf"}
    assert same_network(parse(text, "json"), net)


@pytest.mark.parametrize("text", ["((1,2);", "(1,2)", "(1,,2);", "(1,#X1);"])
def test_syntax_errors_carry_a_position(text):
    with pytest.raises(NewickSyntaxError) as info:
        from_newick(text)
    assert info.value.position >= 0
    assert info.value.to_dict()["error"] == "newick_syntax"


@pytest.mark.parametrize("text,violation", [
    ("(1,1);", "label bijection"),
    ("(1,3);", "label bijection"),
    ("(1,2,3);", "node degree"),
])
def test_structural_errors(text, violation):
    with pytest.raises(NetworkValidationError) as info:
        from_newick(text)
    assert violation in info.value.violations


def test_undefined_reticulation_reference():
    with pytest.raises(NetworkValidationError):
        from_newick("(1,#H2);")


def test_malformed_json():
    with pytest.raises(NetworkValidationError):
        from_edge_json("{not json")


def test_parse_lines_skips_headers():
    nets = parse_lines(["# n=2 seed=1 table_version=1", "(1,2);", ""])
    assert len(nets) == 1


def test_unknown_format():
    with pytest.raises(ValueError):
        serialize(PhyloNetwork.single_leaf(1), "nexus")
