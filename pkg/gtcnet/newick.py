# gtcnet/newick.py
"""Extended Newick and edge-list JSON for phylogenetic networks.

The Newick writer is canonical: children are ordered by their fully
expanded (index-free) text, a reticulation is written ``(child)#Hi`` at
its first visit and ``#Hi`` afterwards, and indices follow visit order.
Two labelled networks get the same string exactly when they are equal up
to renaming of internal nodes, so the string doubles as a dedupe key.
"""
import json
import logging
from functools import lru_cache
from typing import Dict, List, Optional

import networkx as nx
from pyparsing import (
    Combine, Forward, Group, Literal, Optional as Opt, ParseException, Suppress, Word,
    delimited_list, nums, StringEnd,
)

from gtcnet.exceptions import NetworkValidationError, NewickSyntaxError
from gtcnet.network import PhyloNetwork, require_valid

logger = logging.getLogger(__name__)

FORMATS = ("newick", "json")


# ================================
# WRITER
# ================================


def _expanded(net: PhyloNetwork):
    @lru_cache(maxsize=None)
    def expand(v: int) -> str:
        children = list(net.successors(v))
        if not children:
            return str(net.label(v))
        if net.in_degree(v) >= 2:
            return "(" + expand(children[0]) + ")#H"
        return "(" + ",".join(sorted(expand(c) for c in children)) + ")"
    return expand


def to_newick(net: PhyloNetwork) -> str:
    expand = _expanded(net)
    indices: Dict[int, int] = {}

    def write(v: int) -> str:
        if net.in_degree(v) >= 2:
            if v in indices:
                return f"#H{indices[v]}"
            indices[v] = len(indices) + 1
            index = indices[v]
            return "(" + write(net.child(v)) + f")#H{index}"
        children = list(net.successors(v))
        if not children:
            return str(net.label(v))
        ordered = sorted(children, key=expand)
        return "(" + ",".join(write(c) for c in ordered) + ")"

    return write(net.child(net.root)) + ";"


canonical = to_newick


def to_edge_json(net: PhyloNetwork) -> str:
    nodes = []
    for v in sorted(net.nodes):
        entry = {"id": v, "type": net.kind(v)}
        if net.label(v) is not None:
            entry["label"] = net.label(v)
        nodes.append(entry)
    edges = [[a, b] for a, b in sorted(net.edges)]
    return json.dumps({"nodes": nodes, "edges": edges}, separators=(",", ":"))


def serialize(net: PhyloNetwork, fmt: str = "newick") -> str:
    if fmt == "newick":
        return to_newick(net)
    if fmt == "json":
        return to_edge_json(net)
    raise ValueError(f"unknown network format {fmt!r}; use one of {FORMATS}")


# ================================
# PARSER
# ================================


class _Leaf:
    def __init__(self, tokens):
        self.label = int(tokens[0])


class _HybridRef:
    def __init__(self, tokens):
        self.index = int(tokens[0][2:])


class _Internal:
    def __init__(self, tokens):
        self.children = list(tokens[0])
        self.hybrid: Optional[int] = int(tokens[1][2:]) if len(tokens) > 1 else None


def _grammar():
    label = Word(nums).set_parse_action(_Leaf)
    hybrid_tag = Combine(Literal("#H") + Word(nums))
    hybrid_ref = hybrid_tag.copy().set_parse_action(_HybridRef)
    subtree = Forward()
    children = Group(Suppress("(") + delimited_list(subtree) + Suppress(")"))
    internal = (children + Opt(hybrid_tag)).set_parse_action(_Internal)
    subtree <<= internal | hybrid_ref | label
    return subtree + Suppress(";") + StringEnd()


_NEWICK = _grammar()


def from_newick(text: str) -> PhyloNetwork:
    try:
        (top,) = _NEWICK.parse_string(text.strip(), parse_all=True)
    except ParseException as e:
        raise NewickSyntaxError(f"malformed Newick: {e.msg}", e.loc) from None

    net = PhyloNetwork()
    root = net.new_node()
    hybrids: Dict[int, int] = {}
    defined = set()

    def hybrid_node(index: int) -> int:
        if index not in hybrids:
            hybrids[index] = net.new_node()
        return hybrids[index]

    def build(item, parent: int) -> None:
        if isinstance(item, _Leaf):
            net.add_edge(parent, net.new_node(label=item.label))
        elif isinstance(item, _HybridRef):
            net.add_edge(parent, hybrid_node(item.index))
        elif item.hybrid is not None:
            if item.hybrid in defined:
                raise NetworkValidationError(f"reticulation #H{item.hybrid} is defined twice",
                                             {"node degree": f"#H{item.hybrid} defined twice"})
            defined.add(item.hybrid)
            r = hybrid_node(item.hybrid)
            net.add_edge(parent, r)
            if len(item.children) == 1:
                build(item.children[0], r)
            else:
                inner = net.new_node()
                net.add_edge(r, inner)
                for child in item.children:
                    build(child, inner)
        else:
            node = net.new_node()
            net.add_edge(parent, node)
            for child in item.children:
                build(child, node)

    build(top, root)
    missing = set(hybrids) - defined
    if missing:
        raise NetworkValidationError(f"reticulations referenced but never defined: {sorted(missing)}",
                                     {"node degree": "undefined reticulation reference"})
    require_valid(net)
    return net


def from_edge_json(text: str) -> PhyloNetwork:
    try:
        payload = json.loads(text)
        nodes = payload["nodes"]
        edges = payload["edges"]
    except (ValueError, KeyError, TypeError) as e:
        raise NetworkValidationError(f"malformed edge-list JSON: {e}", {"format": str(e)}) from None
    net = PhyloNetwork()
    for entry in nodes:
        attrs = {"label": int(entry["label"])} if entry.get("label") is not None else {}
        net.add_node(int(entry["id"]), **attrs)
    net.add_edges_from((int(a), int(b)) for a, b in edges)
    require_valid(net)
    return net


def parse(text: str, fmt: str = "newick") -> PhyloNetwork:
    if fmt == "newick":
        return from_newick(text)
    if fmt == "json":
        return from_edge_json(text)
    raise ValueError(f"unknown network format {fmt!r}; use one of {FORMATS}")


def same_network(a: PhyloNetwork, b: PhyloNetwork) -> bool:
    """Equal up to internal node ids, with leaf labels matched."""
    return nx.is_isomorphic(a, b, node_match=lambda x, y: x.get("label") == y.get("label"))


def parse_lines(lines: List[str], fmt: str = "newick") -> List[PhyloNetwork]:
    return [parse(line, fmt) for line in lines if line.strip() and not line.startswith("#")]
