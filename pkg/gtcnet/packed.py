"""The bivariate table GTC_{n,k} with rows packed into single integers.

Row n of G(z, u) is a polynomial in u. With every coefficient below
2^width it is stored as the integer sum_s a_s * 2^(width * s), so a
product of two rows is one GMP multiplication and a sum of rows is one
addition. Every quantity in the recursion is a nonnegative count bounded
by the matching row of exp(G(z, 1)), which fixes the slot width.

The recursion is the one of the generic solver, specialised to
G = sum_k (uG)^k / k! * B_k(z):

    P_k[r] = sum_i C(r-1, i-1) G[i] P_{k-1}[r-i]          (u^k factored out)
    G[r]   = sum_k u^k sum_j C(r, j) B_k[j] P_k[r-j]
"""
import logging
from typing import List, Optional, Sequence

from gmpy2 import mpz

from gtcnet.exceptions import InternalConsistencyError
from gtcnet.series import binomial_row

logger = logging.getLogger(__name__)


def exp_rows(rows: Sequence[int]) -> List[int]:
    """EGF rows of exp(F) for F with rows[0] == 0."""
    out = [1] + [0] * (len(rows) - 1)
    for r in range(1, len(rows)):
        binom = binomial_row(r - 1)
        out[r] = sum(binom[i - 1] * rows[i] * out[r - i] for i in range(1, r + 1))
    return out


def slot_width(totals: Sequence[int]) -> int:
    """Bits per u-slot, whole bytes, for totals [GTC_1, ..., GTC_N]."""
    bound = max(exp_rows([0, *totals]))
    return max(8, -(-bound.bit_length() // 8) * 8)


def unpack(value, width: int, slots: int) -> List[int]:
    """The first ``slots`` coefficients of a packed polynomial."""
    size = width // 8
    raw = int(value).to_bytes(size * slots, "little")
    return [int.from_bytes(raw[s * size:(s + 1) * size], "little") for s in range(slots)]


def packed_rows(connectors: Sequence[Sequence[int]], totals: Sequence[int],
                max_k: Optional[int] = None) -> List[List[int]]:
    """[GTC_{n,0}, ..., GTC_{n,top}] for n = 1..N, with top = min(max_k, n - 1).

    ``connectors[k][j]`` is row j of B_k, ``totals`` the uncapped row
    sums of the table, used for the slot width and checked at the end.
    """
    max_n = len(totals)
    top = max_n - 1 if max_k is None else min(max_k, max_n - 1)
    capped = top < max_n - 1
    width = slot_width(totals)
    masks = [(mpz(1) << (width * (top - k + 1))) - 1 for k in range(top + 1)]

    g: List = [mpz(0)] * (max_n + 1)
    powers: List[List] = [[mpz(1)] + [mpz(0)] * max_n]
    for r in range(1, max_n + 1):
        binom = binomial_row(r)
        acc = mpz(connectors[0][r])
        for k in range(1, min(top, r - 1) + 1):
            row_k, part = powers[k], mpz(0)
            for j in range(1, r - k + 1):
                weight = connectors[k][j]
                if weight:
                    part += (binom[j] * weight) * row_k[r - j]
            acc += part << (width * k)
        g[r] = acc

        binom = binomial_row(r - 1)
        for k in range(1, min(top, r) + 1):
            if k == len(powers):
                powers.append([mpz(0)] * k)
            previous, total = powers[k - 1], mpz(0)
            for i in range(1, r - k + 2):
                total += binom[i - 1] * g[i] * previous[r - i]
            powers[k].append(total & masks[k] if capped else total)
        if r % 50 == 0:
            logger.debug("Packed rows solved to n=%d", r)

    rows = [unpack(g[n], width, min(n, top + 1)) for n in range(1, max_n + 1)]
    for n, (row, total) in enumerate(zip(rows, totals), start=1):
        found = sum(row)
        if found > total or (not capped and found != total):
            raise InternalConsistencyError(f"packed row {n} sums to {found}, expected {total}")
    logger.debug("Packed %d rows at %d bits per slot", max_n, width)
    return rows
