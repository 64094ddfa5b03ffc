"""Uniform random galled tree-child networks by the recursive method.

Reading G = sum_k H^k/k! B_k(z) at u = v = 1 coefficient-wise,

    GTC_n = sum_{k, m} binom(n, m) L_{m+k,k} Q_k[n-m]

where m counts the leaves hanging directly from the root component and
Q_k[r] counts ordered-by-smallest-label lists of k networks on r labels.
Every draw descends this sum with exact integer weights.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from gtcnet.decompression import DecompressionPlan, PlanNode, realize
from gtcnet.engine import CountTable, gtc_table, gtc_totals
from gtcnet.exceptions import CapExceededError, InternalConsistencyError
from gtcnet.network import PhyloNetwork
from gtcnet.onecomponent import l_count, sample_one_component
from gtcnet.series import binomial_row

logger = logging.getLogger(__name__)

SeedLike = Union[None, int, np.random.SeedSequence]


# ================================
# EXACT DRAWS
# ================================


def uniform_below(total: int, rng: np.random.Generator) -> int:
    """Uniform integer in [0, total) for totals of any size."""
    if total <= 0:
        raise ValueError("need a positive total")
    bits = total.bit_length()
    nbytes = (bits + 7) // 8
    while True:
        x = int.from_bytes(rng.bytes(nbytes), "big") >> (8 * nbytes - bits)
        if x < total:
            return x


def choose_weighted(weights: Sequence[int], rng: np.random.Generator) -> int:
    """Index drawn with probability weights[i] / sum(weights)."""
    x = uniform_below(sum(weights), rng)
    for index, w in enumerate(weights):
        if x < w:
            return index
        x -= w
    raise InternalConsistencyError("weighted draw ran past the last weight")


def random_subset(items: Sequence[int], size: int, rng: np.random.Generator) -> Tuple[int, ...]:
    chosen = rng.choice(len(items), size=size, replace=False) if size else []
    return tuple(sorted(items[int(i)] for i in chosen))


# ================================
# WEIGHT TABLES
# ================================


@dataclass
class SamplerTables:
    """g[n] = GTC_n and q[k][r] = Q_k[r] for n, r <= max_n."""

    max_n: int
    g: List[int]
    q: List[List[int]]

    @classmethod
    def build(cls, max_n: int, totals: Optional[Sequence[int]] = None) -> "SamplerTables":
        g = [0] + list(totals if totals is not None else gtc_totals(max_n))[:max_n]
        q = [[1] + [0] * max_n]
        for k in range(1, max_n + 1):
            prev = q[-1]
            row = [0] * (max_n + 1)
            for r in range(k, max_n + 1):
                binom = binomial_row(r - 1)
                row[r] = sum(binom[i - 1] * g[i] * prev[r - i] for i in range(1, r - k + 2) if prev[r - i])
            q.append(row)
        tables = cls(max_n, g, q)
        for n in range(2, max_n + 1):
            if sum(w for _, w in tables.splits(n)) != g[n]:
                raise InternalConsistencyError(f"sampler weights do not sum to GTC_{n}")
        logger.info("✅ Sampler tables built to n=%d", max_n)
        return tables

    def splits(self, n: int) -> List[Tuple[Tuple[int, int], int]]:
        """((k, m), weight) for the root component of a size-n network."""
        binom = binomial_row(n)
        out = []
        for m in range(1, n + 1):
            for k in range(n - m + 1):
                w = binom[m] * l_count(m + k, k) * self.q[k][n - m]
                if w:
                    out.append(((k, m), w))
        return out

    def first_block(self, k: int, r: int) -> List[Tuple[int, int]]:
        """(size, weight) of the block holding the smallest of r labels, k blocks in all."""
        binom = binomial_row(r - 1)
        return [(i, binom[i - 1] * self.g[i] * self.q[k - 1][r - i])
                for i in range(1, r - k + 2) if self.q[k - 1][r - i]]


@lru_cache(maxsize=4)
def sampler_tables(max_n: int) -> SamplerTables:
    return SamplerTables.build(max_n)


def _tables_for(n: int, tables: Optional[SamplerTables]) -> SamplerTables:
    if tables is None:
        return sampler_tables(n)
    if n > tables.max_n:
        raise CapExceededError(f"sampler tables reach n={tables.max_n}, asked for n={n}",
                               limit=tables.max_n, requested=n)
    return tables


# ================================
# PLANS
# ================================


def sample_plan(labels: Sequence[int], rng: np.random.Generator,
                tables: Optional[SamplerTables] = None) -> Union[int, PlanNode]:
    labels = tuple(sorted(labels))
    n = len(labels)
    if n == 1:
        return labels[0]
    tables = _tables_for(n, tables)
    splits = tables.splits(n)
    k, m = splits[choose_weighted([w for _, w in splits], rng)][0]
    plain = random_subset(labels, m, rng)
    rest = [x for x in labels if x not in set(plain)]
    attached: List[Union[int, PlanNode]] = []
    for blocks_left in range(k, 0, -1):
        options = tables.first_block(blocks_left, len(rest))
        size = options[choose_weighted([w for _, w in options], rng)][0]
        block = (rest[0],) + random_subset(rest[1:], size - 1, rng)
        attached.append(sample_plan(block, rng, tables))
        rest = [x for x in rest if x not in set(block)]
    component = sample_one_component(m + k, k, rng, model="L")
    return PlanNode(plain, attached, component)


def sample_gtc(n: int, rng: np.random.Generator, tables: Optional[SamplerTables] = None) -> PhyloNetwork:
    """A uniformly random galled tree-child network on labels 1..n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    plan = DecompressionPlan(sample_plan(range(1, n + 1), rng, tables))
    return realize(plan)


def sample_retic_count(n: int, rng: np.random.Generator, table: Optional[CountTable] = None) -> int:
    """Exact draw of R_n from row n of the bivariate table."""
    if table is None:
        table = gtc_table(n)
    return choose_weighted(table.row(n), rng)


def sample_batch(n: int, count: int, seed: SeedLike = None,
                 tables: Optional[SamplerTables] = None) -> List[PhyloNetwork]:
    """``count`` independent draws, draw j seeded by the j-th child of ``seed``."""
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    tables = _tables_for(n, tables) if n > 1 else tables
    return [sample_gtc(n, np.random.default_rng(child), tables) for child in root.spawn(count)]


def batch_header(n: int, seed: SeedLike, table_version: str) -> str:
    return f"# n={n} seed={seed} table_version={table_version}"


def summarize(nets: Sequence[PhyloNetwork]) -> Dict[int, int]:
    """Reticulation counts of a batch, {k: draws}."""
    out: Dict[int, int] = {}
    for net in nets:
        out[net.retic_count] = out.get(net.retic_count, 0) + 1
    return dict(sorted(out.items()))
