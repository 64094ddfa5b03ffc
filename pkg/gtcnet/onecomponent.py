"""One-component tree-child networks: closed forms and uniform construction.

A one-component network is a tree-child network in which every
reticulation has a leaf child. Counting conventions:

    otc(n, k)     all labellings of size n with k reticulations
    l_count(n, k) those whose reticulation leaves are labelled 1..k
"""
import logging
import math
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from gtcnet.exceptions import InternalConsistencyError
from gtcnet.network import PhyloNetwork
from gtcnet.numeric import LogValue, workprec
from gtcnet.series import TruncSeries

logger = logging.getLogger(__name__)

MODELS = ("L", "otc")


# ================================
# COUNTS
# ================================


def otc(n: int, k: int) -> int:
    if n < 1 or k < 0 or k >= n:
        return 0
    return math.comb(n, k) * math.factorial(2 * n - 2) // (2 ** (n - 1) * math.factorial(n - k - 1))


def l_count(n: int, k: int) -> int:
    total = otc(n, k)
    if total == 0:
        return 0
    quotient, remainder = divmod(total, math.comb(n, k))
    if remainder:
        raise InternalConsistencyError(f"otc({n},{k}) is not divisible by binom({n},{k})")
    return quotient


def otc_total(n: int) -> int:
    return sum(otc(n, k) for k in range(n))


def trees(n: int) -> int:
    """Rooted binary phylogenetic trees on n labelled leaves, (2n-3)!!."""
    if n < 1:
        return 0
    return math.factorial(2 * n - 2) // (2 ** (n - 1) * math.factorial(n - 1))


def labelled_weight(c: int) -> int:
    """(2c-2)! / 2^(c-1), the stored EGF row of L."""
    return math.factorial(2 * c - 2) // 2 ** (c - 1)


# ================================
# GENERATING FUNCTIONS
# ================================


def series_L(order: int) -> TruncSeries:
    return TruncSeries.from_counts([0] + [labelled_weight(m) for m in range(1, order + 1)], order)


def series_Lprime(order: int) -> TruncSeries:
    """L'(z) = 1 + z + 3z^2 + 15z^3 + ..."""
    return series_L(order + 1).derivative()


def series_A(order: int) -> TruncSeries:
    """A(z) = sum_{n>=1} OTC_{n+1} z^n / (n+1)!."""
    rows = [0] + [Fraction(otc_total(n + 1), n + 1) for n in range(1, order + 1)]
    return TruncSeries.from_counts(rows, order)


# ================================
# ASYMPTOTICS
# ================================


def otc_local_limit(n: int, k: int, bits: Optional[int] = None) -> LogValue:
    """Local limit approximation of otc(n, k) around k = n - sqrt(n)."""
    with workprec(bits):
        n_ = mpmath.mpf(n)
        x = k - n_ + mpmath.sqrt(n_)
        log = (-mpmath.log(2) - mpmath.log(mpmath.e * mpmath.pi) / 2 - mpmath.mpf(3) / 2 * mpmath.log(n_)
               + 2 * mpmath.sqrt(n_) + n_ * (mpmath.log(2) - 2) + 2 * n_ * mpmath.log(n_)
               - x ** 2 / mpmath.sqrt(n_))
        return LogValue(log)


def otc_total_asym(n: int, bits: Optional[int] = None) -> LogValue:
    with workprec(bits):
        n_ = mpmath.mpf(n)
        log = (-mpmath.log(2) - mpmath.mpf(1) / 2 - mpmath.mpf(5) / 4 * mpmath.log(n_)
               + 2 * mpmath.sqrt(n_) + n_ * (mpmath.log(2) - 2) + 2 * n_ * mpmath.log(n_))
        return LogValue(log)


# ================================
# HAT CONSTRUCTION
# ================================


def eligible_edges(net: PhyloNetwork) -> List[Tuple[int, int]]:
    """Edges that touch no reticulation."""
    return [(a, b) for a, b in sorted(net.edges)
            if net.in_degree(a) < 2 and net.in_degree(b) < 2]


def pair_from_index(index: int, size: int) -> Tuple[int, int]:
    """The index-th multiset {a <= b} of range(size), row by row."""
    a = 0
    while index >= size - a:
        index -= size - a
        a += 1
    return a, a + index


def insert_hat(net: PhyloNetwork, first: Tuple[int, int], second: Tuple[int, int], label: int) -> int:
    """Add a reticulation above a new leaf, its parents subdividing two edges."""
    upper = net.subdivide(*first)
    if first == second:
        lower = net.subdivide(upper, first[1])
    else:
        lower = net.subdivide(*second)
    r = net.new_node()
    net.add_edge(upper, r)
    net.add_edge(lower, r)
    net.add_leaf(r, label)
    return r


def hat_steps(c: int, k: int) -> List[int]:
    """Number of placements available to each of the k hats."""
    t = c - k
    return [math.comb(2 * t - 1 + 2 * i + 1, 2) for i in range(k)]


def hat_weight(c: int, k: int) -> int:
    if k < 0 or k >= c:
        return 0
    return trees(c - k) * math.prod(hat_steps(c, k))


def certify_hat_counts(max_c: int) -> None:
    for c in range(1, max_c + 1):
        for k in range(c):
            if hat_weight(c, k) != l_count(c, k):
                raise InternalConsistencyError(
                    f"hat construction weight {hat_weight(c, k)} != l_count({c},{k}) = {l_count(c, k)}")


def sample_tree(t: int, labels: Sequence[int], rng: np.random.Generator) -> PhyloNetwork:
    """Uniform rooted binary tree by sequential leaf insertion."""
    if t < 1 or len(labels) != t:
        raise ValueError(f"need t >= 1 labels, got t={t} and {len(labels)} labels")
    net = PhyloNetwork.single_leaf(labels[0])
    for label in labels[1:]:
        edges = sorted(net.edges)
        u, v = edges[int(rng.integers(len(edges)))]
        w = net.subdivide(u, v)
        net.add_leaf(w, label)
    return net


def sample_one_component(c: int, k: int, rng: np.random.Generator, model: str = "L") -> PhyloNetwork:
    """Uniform one-component tree-child network of size c with k reticulations.

    In the ``"L"`` model the reticulation leaves are labelled 1..k; in the
    ``"otc"`` model they carry a uniform k-subset of 1..c.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; use one of {MODELS}")
    if c < 1 or k < 0 or k >= c:
        raise ValueError(f"no one-component network with c={c}, k={k} (need 0 <= k < c)")
    net = sample_tree(c - k, list(range(k + 1, c + 1)), rng)
    for label in range(1, k + 1):
        edges = eligible_edges(net)
        a, b = pair_from_index(int(rng.integers(math.comb(len(edges) + 1, 2))), len(edges))
        insert_hat(net, edges[a], edges[b], label)
    if model == "otc":
        chosen = sorted(int(x) + 1 for x in rng.choice(c, size=k, replace=False))
        rest = [x for x in range(1, c + 1) if x not in set(chosen)]
        net = net.relabel(dict(zip(range(1, c + 1), chosen + rest)))
    return net


def enumerate_trees(labels: Sequence[int]) -> Iterator[PhyloNetwork]:
    """Every rooted binary tree on ``labels``, once each."""
    if len(labels) == 1:
        yield PhyloNetwork.single_leaf(labels[0])
        return
    for base in enumerate_trees(labels[:-1]):
        for u, v in sorted(base.edges):
            net = base.copy()
            w = net.subdivide(u, v)
            net.add_leaf(w, labels[-1])
            yield net


def enumerate_hat_networks(c: int, k: int) -> Iterator[PhyloNetwork]:
    """Every hat placement sequence on every tree, in the L model."""
    if k < 0 or k >= c:
        return

    def place(net: PhyloNetwork, label: int) -> Iterator[PhyloNetwork]:
        if label > k:
            yield net
            return
        edges = eligible_edges(net)
        for a in range(len(edges)):
            for b in range(a, len(edges)):
                grown = net.copy()
                insert_hat(grown, edges[a], edges[b], label)
                yield from place(grown, label + 1)

    for tree in enumerate_trees(list(range(k + 1, c + 1))):
        yield from place(tree, 1)
