"""Building networks back up from component trees.

A plan node is one tree-component: the leaves that hang from it directly
(``plain``) and, in slot order, whatever hangs below each of its
reticulations (``attached``). Slot s of a component receives the attached
structure with the s-th smallest minimum label, which is what lets an
unordered set of attached structures meet an ordered list of slots.
"""
import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from gtcnet.engine import set_partitions
from gtcnet.exceptions import NetworkValidationError
from gtcnet.network import PhyloNetwork
from gtcnet.onecomponent import enumerate_hat_networks

logger = logging.getLogger(__name__)


@dataclass
class PlanNode:
    plain: Tuple[int, ...]
    attached: List[Union[int, "PlanNode"]] = field(default_factory=list)
    # L-model one-component network on len(plain) + k leaves: reticulation
    # leaves 1..k are the slots, leaves k+1.. the plain leaves in order.
    component: Optional[PhyloNetwork] = None

    @property
    def k(self) -> int:
        return len(self.attached)

    @property
    def c(self) -> int:
        return len(self.plain) + self.k

    @property
    def labels(self) -> Tuple[int, ...]:
        out = list(self.plain)
        for item in self.attached:
            out.extend([item] if isinstance(item, int) else item.labels)
        return tuple(sorted(out))

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def min_label(self) -> int:
        return self.labels[0]


def _min_label(item: Union[int, PlanNode]) -> int:
    return item if isinstance(item, int) else item.min_label


@dataclass
class DecompressionPlan:
    """A component tree with every component realised; a bare int is the one-leaf network."""

    root: Union[int, PlanNode]

    @property
    def n(self) -> int:
        return 1 if isinstance(self.root, int) else self.root.size

    def nodes(self) -> Iterator[PlanNode]:
        stack = [] if isinstance(self.root, int) else [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(item for item in node.attached if isinstance(item, PlanNode))

    def check(self) -> None:
        """Slots in smallest-label order, components of the planned size."""
        for node in self.nodes():
            mins = [_min_label(item) for item in node.attached]
            if mins != sorted(mins):
                raise NetworkValidationError("attached structures are not in smallest-label order",
                                             {"plan": f"slots {mins}"})
            if not node.plain:
                raise NetworkValidationError("a component needs at least one plain leaf",
                                             {"plan": f"component over {node.labels}"})
            if node.component is not None and node.component.size != node.c:
                raise NetworkValidationError(
                    f"component has {node.component.size} leaves, plan needs {node.c}",
                    {"plan": "component size"})

    @property
    def retic_stats(self) -> Tuple[int, int]:
        """(k, i) the realised network will have."""
        k = i = 0
        for node in self.nodes():
            k += node.k
            i += sum(1 for item in node.attached if isinstance(item, PlanNode))
        return k, i


def _realize_node(node: PlanNode) -> PhyloNetwork:
    if node.component is None:
        raise NetworkValidationError("plan node has no component realisation", {"plan": "missing component"})
    net = node.component.copy()
    by_label = net.leaf_by_label()
    k = node.k
    relabel: Dict[int, int] = {}
    for offset, label in enumerate(node.plain):
        relabel[by_label[k + 1 + offset]] = label
    for slot, item in enumerate(node.attached, start=1):
        leaf = by_label[slot]
        if isinstance(item, int):
            relabel[leaf] = item
        else:
            net.graft(leaf, _realize_node(item))
    for v, label in relabel.items():
        net.nodes[v]["label"] = label
    return net


def realize(plan: DecompressionPlan) -> PhyloNetwork:
    plan.check()
    if isinstance(plan.root, int):
        return PhyloNetwork.single_leaf(plan.root)
    return _realize_node(plan.root).compact()


# ================================
# EXHAUSTIVE DECOMPRESSION
# ================================


def _ordered_blocks(labels: Sequence[int], k: int) -> Iterator[List[Tuple[int, ...]]]:
    """Set partitions of ``labels`` into exactly k blocks, blocks by smallest label."""
    for blocks in set_partitions(list(labels)):
        if len(blocks) == k:
            yield sorted((tuple(sorted(b)) for b in blocks), key=lambda b: b[0])


def enumerate_plans(labels: Sequence[int]) -> Iterator[Union[int, PlanNode]]:
    labels = tuple(sorted(labels))
    n = len(labels)
    if n == 1:
        yield labels[0]
        return
    for m in range(1, n + 1):
        for plain in combinations(labels, m):
            rest = [x for x in labels if x not in plain]
            for k in range(len(rest) + 1):
                if k == 0 and rest:
                    continue
                for blocks in (_ordered_blocks(rest, k) if k else [[]]):
                    for attached in _attachments(blocks):
                        for component in enumerate_hat_networks(m + k, k):
                            yield PlanNode(tuple(plain), list(attached), component)


def _attachments(blocks: List[Tuple[int, ...]]) -> Iterator[List[Union[int, PlanNode]]]:
    if not blocks:
        yield []
        return
    first, rest = blocks[0], blocks[1:]
    for head in enumerate_plans(first):
        for tail in _attachments(rest):
            yield [head] + tail


def enumerate_by_decompression(n: int) -> Iterator[PhyloNetwork]:
    """Every galled tree-child network on labels 1..n, once each."""
    for root in enumerate_plans(range(1, n + 1)):
        yield realize(DecompressionPlan(root))
