# gtcnet/network.py
"""Rooted leaf-labelled binary phylogenetic networks.

A network is a networkx DiGraph on integer node ids. Leaves carry a
``label`` attribute (an int); node kinds are read off the degrees:

    root          indegree 0, outdegree 1
    tree          indegree 1, outdegree 2
    reticulation  indegree 2, outdegree 1
    leaf          indegree 1, outdegree 0
"""
import logging
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

import networkx as nx

from gtcnet.exceptions import NetworkValidationError
from gtcnet.utils import ValidationResult

logger = logging.getLogger(__name__)

ROOT = "root"
TREE = "tree"
RETICULATION = "reticulation"
LEAF = "leaf"


class PhyloNetwork(nx.DiGraph):
    """A phylogenetic network; see the module docstring for node kinds."""

    @classmethod
    def single_leaf(cls, label: int = 1) -> "PhyloNetwork":
        net = cls()
        net.add_node(0)
        net.add_node(1, label=label)
        net.add_edge(0, 1)
        return net

    @classmethod
    def from_edges(cls, edges: Iterable[Tuple[int, int]], labels: Mapping[int, int]) -> "PhyloNetwork":
        net = cls()
        net.add_edges_from(edges)
        for node, label in labels.items():
            net.add_node(node, label=label)
        return net

    # ---------- node kinds ----------

    def kind(self, node: int) -> str:
        indeg, outdeg = self.in_degree(node), self.out_degree(node)
        if indeg == 0:
            return ROOT
        if outdeg == 0:
            return LEAF
        if indeg >= 2:
            return RETICULATION
        return TREE

    @property
    def root(self) -> int:
        roots = [v for v in self.nodes if self.in_degree(v) == 0]
        if len(roots) != 1:
            raise NetworkValidationError("network has no unique root", {"root": f"{len(roots)} candidates"})
        return roots[0]

    def leaves(self) -> List[int]:
        return [v for v in self.nodes if self.out_degree(v) == 0 and self.in_degree(v) > 0]

    def reticulations(self) -> List[int]:
        return [v for v in self.nodes if self.in_degree(v) >= 2]

    def label(self, node: int) -> Optional[int]:
        return self.nodes[node].get("label")

    def labels(self) -> List[int]:
        return sorted(self.label(v) for v in self.leaves())

    def leaf_by_label(self) -> Dict[int, int]:
        return {self.label(v): v for v in self.leaves()}

    @property
    def size(self) -> int:
        return len(self.leaves())

    @property
    def retic_count(self) -> int:
        return len(self.reticulations())

    def parent(self, node: int) -> int:
        (p,) = self.predecessors(node)
        return p

    def child(self, node: int) -> int:
        (c,) = self.successors(node)
        return c

    # ---------- edits ----------

    def new_node(self, **attr) -> int:
        node = max(self.nodes, default=-1) + 1
        self.add_node(node, **attr)
        return node

    def subdivide(self, u: int, v: int) -> int:
        """Replace edge u->v by u->w->v and return w."""
        if not self.has_edge(u, v):
            raise NetworkValidationError(f"no edge {u}->{v} to subdivide")
        w = self.new_node()
        self.remove_edge(u, v)
        self.add_edge(u, w)
        self.add_edge(w, v)
        return w

    def add_leaf(self, parent: int, label: int) -> int:
        leaf = self.new_node(label=label)
        self.add_edge(parent, leaf)
        return leaf

    def graft(self, leaf: int, other: "PhyloNetwork") -> Dict[int, int]:
        """Replace ``leaf`` by the network ``other`` hanging from its root edge.

        Returns the node map from ``other`` (root excluded) into self.
        """
        (parent,) = self.predecessors(leaf)
        self.remove_node(leaf)
        other_root = other.root
        offset = max(self.nodes, default=-1) + 1
        mapping = {v: offset + i for i, v in enumerate(sorted(other.nodes)) if v != other_root}
        for v, image in mapping.items():
            self.add_node(image, **other.nodes[v])
        for a, b in other.edges:
            if a == other_root:
                self.add_edge(parent, mapping[b])
            else:
                self.add_edge(mapping[a], mapping[b])
        return mapping

    def relabel(self, mapping: Mapping[int, int]) -> "PhyloNetwork":
        """Copy with leaf labels sent through ``mapping``."""
        net = self.copy()
        for v in net.leaves():
            net.nodes[v]["label"] = mapping[net.nodes[v]["label"]]
        return net

    def compact(self) -> "PhyloNetwork":
        """Copy with node ids renumbered 0..|V|-1 in breadth-first order."""
        order = [self.root] + [v for _, v in nx.bfs_edges(self, self.root)]
        seen: Dict[int, int] = {}
        for v in order:
            seen.setdefault(v, len(seen))
        return nx.relabel_nodes(self, seen, copy=True)

    def retic_stats(self) -> Tuple[int, int]:
        """(k, i): reticulations, and reticulations whose child is not a leaf."""
        rets = self.reticulations()
        i = sum(1 for r in rets if self.out_degree(self.child(r)) > 0)
        return len(rets), i


# ================================
# STRUCTURAL VALIDATION
# ================================


def validate(net: nx.DiGraph) -> ValidationResult:
    """Check the structural invariants of a phylogenetic network.

    Never raises; every broken invariant is reported under its name.
    """
    errors: Dict[str, str] = {}
    if net.number_of_nodes() == 0:
        errors["empty"] = "network has no nodes"
        return ValidationResult(False, "Invalid network", errors)

    if not nx.is_directed_acyclic_graph(net):
        errors["acyclicity"] = "network contains a directed cycle"

    roots = [v for v in net.nodes if net.in_degree(v) == 0]
    if len(roots) != 1:
        errors["root"] = f"expected one node of indegree 0, found {len(roots)}"
    elif net.out_degree(roots[0]) != 1:
        errors["root"] = f"root has outdegree {net.out_degree(roots[0])}, expected 1"

    bad_leaves = [v for v in net.nodes if net.out_degree(v) == 0 and net.in_degree(v) != 1]
    if bad_leaves:
        errors["leaf degree"] = f"leaves with indegree != 1: {sorted(bad_leaves)}"

    bad_internal = [
        v for v in net.nodes
        if net.in_degree(v) > 0 and net.out_degree(v) > 0
        and (net.in_degree(v), net.out_degree(v)) not in ((1, 2), (2, 1))
    ]
    if bad_internal:
        errors["node degree"] = f"nodes that are neither tree nodes nor reticulations: {sorted(bad_internal)}"

    leaves = [v for v in net.nodes if net.out_degree(v) == 0 and net.in_degree(v) > 0]
    labels = [net.nodes[v].get("label") for v in leaves]
    labelled_internal = [v for v in net.nodes if v not in leaves and net.nodes[v].get("label") is not None]
    if (None in labels or len(set(labels)) != len(labels)
            or set(labels) != set(range(1, len(labels) + 1)) or labelled_internal):
        errors["label bijection"] = f"leaf labels {sorted(l for l in labels if l is not None)} are not 1..{len(labels)}"

    if errors:
        return ValidationResult(False, "Invalid network", errors)
    return ValidationResult(True, "Valid network")


def require_valid(net: nx.DiGraph) -> None:
    result = validate(net)
    if not result:
        raise NetworkValidationError(
            "invalid network: " + ", ".join(result.violations), result.errors)


# ================================
# CLASS PREDICATES
# ================================


def is_tree_child(net: PhyloNetwork) -> bool:
    """Every non-leaf node has a child that is not a reticulation."""
    for v in net.nodes:
        children = list(net.successors(v))
        if children and all(net.in_degree(c) >= 2 for c in children):
            return False
    return True


def _tree_chain(net: PhyloNetwork, start: int, budget: int) -> List[int]:
    """``start`` and its ancestors reached through tree nodes only."""
    chain: List[int] = []
    node = start
    while net.in_degree(node) == 1 and net.out_degree(node) == 2:
        chain.append(node)
        if len(chain) > budget:
            raise NetworkValidationError("tree-node chain longer than the network; is it acyclic?",
                                         {"acyclicity": "cycle through tree nodes"})
        node = next(iter(net.predecessors(node)))
    return chain


def is_galled(net: PhyloNetwork) -> bool:
    """Every reticulation lies on a tree cycle.

    The two tree-node chains above the parents of a reticulation meet
    exactly when a common tree node reaches both parents along tree
    nodes, which gives the two edge-disjoint paths of a tree cycle.
    """
    budget = net.number_of_nodes()
    for r in net.reticulations():
        parents = list(net.predecessors(r))
        if len(parents) != 2:
            return False
        first = _tree_chain(net, parents[0], budget)
        second = _tree_chain(net, parents[1], budget)
        if not first or not second or not set(first) & set(second):
            return False
    return True


def is_one_component(net: PhyloNetwork) -> bool:
    return all(net.out_degree(net.child(r)) == 0 for r in net.reticulations())


def is_gtc(net: PhyloNetwork) -> bool:
    return is_tree_child(net) and is_galled(net)


# ================================
# COMPONENT GRAPH
# ================================


class ComponentTree(nx.DiGraph):
    """Component graph of a network.

    Vertices are ``("component", top)`` for the tree-component whose top
    node is ``top`` (the root or a reticulation) and ``("leaf", label)``.
    Edges carry ``arrow=True`` when they record an attachment below a
    reticulation.
    """

    @property
    def top(self):
        (top,) = [v for v in self.nodes if self.in_degree(v) == 0]
        return top

    def arrows(self) -> List[Tuple]:
        return [(a, b) for a, b, arrow in self.edges(data="arrow") if arrow]


def component_of(net: PhyloNetwork) -> Dict[int, int]:
    """Map every node to the top node of its tree-component."""
    top_nodes = [net.root] + net.reticulations()
    owner: Dict[int, int] = {}
    for top in top_nodes:
        owner[top] = top
        stack = list(net.successors(top))
        while stack:
            v = stack.pop()
            if net.in_degree(v) >= 2:
                continue
            owner[v] = top
            stack.extend(net.successors(v))
    return owner


def component_graph(net: PhyloNetwork) -> ComponentTree:
    ct = ComponentTree()
    if net.size == 1 and net.retic_count == 0:
        (leaf,) = net.leaves()
        ct.add_node(("leaf", net.label(leaf)), kind="leaf", label=net.label(leaf))
        return ct

    owner = component_of(net)

    def vertex(top: int):
        if net.in_degree(top) >= 2:
            child = net.child(top)
            if net.out_degree(child) == 0:
                return ("leaf", net.label(child))
        return ("component", top)

    for top in set(owner.values()):
        v = vertex(top)
        if v[0] == "leaf":
            ct.add_node(v, kind="leaf", label=v[1])
        else:
            ct.add_node(v, kind="component")

    for leaf in net.leaves():
        parent = net.parent(leaf)
        if net.in_degree(parent) >= 2:
            continue
        label = net.label(leaf)
        ct.add_node(("leaf", label), kind="leaf", label=label)
        ct.add_edge(vertex(owner[parent]), ("leaf", label), arrow=False)

    for r in net.reticulations():
        sources = [vertex(owner[p]) for p in net.predecessors(r)]
        target = vertex(r)
        if len(set(sources)) == 1:
            ct.add_edge(sources[0], target, arrow=True)
        else:
            for source in sources:
                ct.add_edge(source, target, arrow=False)
    return ct


def erase_arrows(ct: ComponentTree) -> nx.DiGraph:
    plain = nx.DiGraph()
    plain.add_nodes_from(ct.nodes(data=True))
    plain.add_edges_from(ct.edges)
    return plain


def is_phylogenetic_tree(graph: nx.DiGraph) -> bool:
    """A rooted tree, internal outdegree >= 2, leaves with distinct labels."""
    if graph.number_of_nodes() == 0:
        return False
    if graph.number_of_nodes() == 1:
        (only,) = graph.nodes
        return graph.nodes[only].get("label") is not None
    if not nx.is_arborescence(graph):
        return False
    labels = []
    for v in graph.nodes:
        outdeg = graph.out_degree(v)
        if outdeg == 0:
            label = graph.nodes[v].get("label")
            if label is None:
                return False
            labels.append(label)
        elif outdeg < 2:
            return False
    return len(labels) == len(set(labels))


def non_galled_witness() -> PhyloNetwork:
    """A tree-child network on 4 leaves with 2 reticulations that is not galled.

    The second reticulation has one parent in the root component and the
    other below the first reticulation.
    """
    # 0 root, 1 a, 2 b, 3 c, 4 d, 5 e, 6 r1, 7 r2, 8-11 leaves
    edges = [
        (0, 1), (1, 2), (1, 3),
        (2, 6), (2, 8),
        (3, 6), (3, 4),
        (4, 7), (4, 9),
        (6, 5),
        (5, 7), (5, 10),
        (7, 11),
    ]
    return PhyloNetwork.from_edges(edges, {8: 1, 9: 2, 10: 3, 11: 4})
