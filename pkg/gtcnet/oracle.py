"""Exhaustive enumeration at small sizes, independent of every counting route.

Networks are grown from a single leaf by the inverse cherry operations

    cherry            hang a new leaf next to leaf x
    reticulated cherry subdivide the edges into leaves x != y with r and w,
                      then add w -> r

Every tree-child network is reached this way (cherry-picking reduces it
to a leaf, staying tree-child throughout), so states that are not
tree-child can be dropped on the spot. Work happens on unlabelled shapes,
deduplicated up to isomorphism; labelled counts are n! / |Aut|.
"""
import logging
import math
from itertools import permutations
from typing import Callable, Dict, Iterator, List, Optional, Tuple

import networkx as nx
from networkx.algorithms.isomorphism import DiGraphMatcher

from gtcnet.exceptions import CapExceededError
from gtcnet.network import PhyloNetwork, is_galled, is_one_component, is_tree_child
from gtcnet.newick import canonical
from gtcnet.utils import setting

logger = logging.getLogger(__name__)

KINDS = ("gtc", "tc", "one_component")
DEFAULT_CAP = 4
LONG_CAP = 5
ONE_COMPONENT_CAP = 6

Keep = Callable[[PhyloNetwork], bool]


# ================================
# SHAPES
# ================================


class ShapeSet:
    """Unlabelled networks up to isomorphism, bucketed by a WL hash."""

    def __init__(self):
        self._buckets: Dict[Tuple, List[PhyloNetwork]] = {}

    def add(self, shape: PhyloNetwork) -> bool:
        key = (shape.size, shape.retic_count, nx.weisfeiler_lehman_graph_hash(shape, iterations=4))
        bucket = self._buckets.setdefault(key, [])
        if any(nx.is_isomorphic(shape, other) for other in bucket):
            return False
        bucket.append(shape)
        return True

    def __iter__(self) -> Iterator[PhyloNetwork]:
        for bucket in self._buckets.values():
            yield from bucket

    def __len__(self) -> int:
        return sum(len(b) for b in self._buckets.values())


def _cherry(shape: PhyloNetwork, x: int) -> PhyloNetwork:
    grown = shape.copy()
    w = grown.subdivide(grown.parent(x), x)
    grown.add_edge(w, grown.new_node())
    return grown


def _reticulated_cherry(shape: PhyloNetwork, x: int, y: int) -> PhyloNetwork:
    grown = shape.copy()
    r = grown.subdivide(grown.parent(x), x)
    w = grown.subdivide(grown.parent(y), y)
    grown.add_edge(w, r)
    return grown


def expansions(shape: PhyloNetwork) -> Iterator[PhyloNetwork]:
    leaves = shape.leaves()
    for x in leaves:
        yield _cherry(shape, x)
    for x in leaves:
        for y in leaves:
            if x != y:
                yield _reticulated_cherry(shape, x, y)


def enumerate_shapes(n: int, keep: Optional[Keep] = None) -> List[PhyloNetwork]:
    """Tree-child shapes with n leaves (further pruned by ``keep``), one per isomorphism class."""
    start = PhyloNetwork()
    start.add_edge(0, 1)
    layer = [start]
    found = ShapeSet()
    if n == 1:
        found.add(start)
    # a size-s state with k reticulations sits at layer (s - 1) + k <= 2n - 2
    for depth in range(1, 2 * n - 1):
        nxt = ShapeSet()
        for shape in layer:
            for grown in expansions(shape):
                if grown.size > n or grown.retic_count >= grown.size:
                    continue
                if not is_tree_child(grown) or (keep is not None and not keep(grown)):
                    continue
                if nxt.add(grown) and grown.size == n:
                    found.add(grown)
        layer = list(nxt)
        logger.debug("layer %d: %d shapes", depth, len(layer))
    logger.info("✅ Enumerated %d shapes with %d leaves", len(found), n)
    return list(found)


def leaf_automorphisms(shape: PhyloNetwork) -> int:
    """Number of distinct leaf permutations induced by automorphisms."""
    leaves = sorted(shape.leaves())
    seen = set()
    for mapping in DiGraphMatcher(shape, shape).isomorphisms_iter():
        seen.add(tuple(mapping[v] for v in leaves))
    return len(seen)


def labelled_count(shape: PhyloNetwork) -> int:
    return math.factorial(shape.size) // leaf_automorphisms(shape)


def _keep_for(kind: str) -> Optional[Keep]:
    if kind not in KINDS:
        raise ValueError(f"unknown oracle kind {kind!r}; use one of {KINDS}")
    return is_one_component if kind == "one_component" else None


def _member(kind: str, shape: PhyloNetwork) -> bool:
    if kind == "gtc":
        return is_galled(shape)
    return True


def _cap_for(kind: str, long_run: bool) -> int:
    if kind == "one_component":
        return int(setting("ONE_COMPONENT_ORACLE_CAP", ONE_COMPONENT_CAP))
    if long_run:
        return int(setting("ORACLE_LONG_CAP", LONG_CAP))
    return int(setting("ORACLE_CAP", DEFAULT_CAP))


def oracle_counts(n: int, kind: str = "gtc", long_run: bool = False,
                  cap: Optional[int] = None) -> Dict[Tuple[int, int], int]:
    """Labelled counts of size n keyed by (k, i)."""
    keep = _keep_for(kind)
    cap = cap if cap is not None else _cap_for(kind, long_run)
    if n < 1 or n > cap:
        raise CapExceededError(f"{kind} oracle is limited to 1 <= n <= {cap}", limit=cap, requested=n,
                               hint="pass --long for a longer run" if kind != "one_component" and not long_run else "")
    counts: Dict[Tuple[int, int], int] = {}
    for shape in enumerate_shapes(n, keep):
        if not _member(kind, shape):
            continue
        key = shape.retic_stats()
        counts[key] = counts.get(key, 0) + labelled_count(shape)
    return dict(sorted(counts.items()))


def counts_by_k(counts: Dict[Tuple[int, int], int]) -> Dict[int, int]:
    out: Dict[int, int] = {}
    for (k, _), value in counts.items():
        out[k] = out.get(k, 0) + value
    return dict(sorted(out.items()))


# ================================
# LABELLED CORPORA
# ================================


def labellings(shape: PhyloNetwork) -> Iterator[PhyloNetwork]:
    """Every distinct labelling of ``shape`` by 1..n."""
    leaves = sorted(shape.leaves())
    seen = set()
    for perm in permutations(range(1, len(leaves) + 1)):
        net = shape.copy()
        for v, label in zip(leaves, perm):
            net.nodes[v]["label"] = label
        key = canonical(net)
        if key not in seen:
            seen.add(key)
            yield net


def labelled_corpus(n: int, kind: str = "gtc", long_run: bool = False) -> List[PhyloNetwork]:
    keep = _keep_for(kind)
    cap = _cap_for("gtc", long_run)
    if n < 1 or n > cap:
        raise CapExceededError(f"labelled corpus is limited to 1 <= n <= {cap}", limit=cap, requested=n)
    out = []
    for shape in enumerate_shapes(n, keep):
        if _member(kind, shape):
            out.extend(net.compact() for net in labellings(shape))
    out.sort(key=canonical)
    return out


def enumerate_gtc(n: int, long_run: bool = False) -> List[PhyloNetwork]:
    return labelled_corpus(n, "gtc", long_run)


def enumerate_one_component(n: int) -> List[PhyloNetwork]:
    return labelled_corpus(n, "one_component")


def enumerate_tree_child(n: int) -> List[PhyloNetwork]:
    return labelled_corpus(n, "tc")
