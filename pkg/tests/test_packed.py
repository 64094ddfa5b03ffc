import time

import pytest
from gmpy2 import mpz

from gtcnet.engine import gtc_table
from gtcnet.exceptions import InternalConsistencyError
from gtcnet.onecomponent import l_count
from gtcnet.packed import exp_rows, packed_rows, slot_width, unpack

# Desk budget for the n = 300 bivariate build.
BUILD_BUDGET_SECONDS = 30 * 60


def _connectors(max_n):
    return [[0] + [l_count(m + k, k) for m in range(1, max_n + 1)] for k in range(max_n)]


def test_exp_rows():
    assert exp_rows([0, 1, 0, 0]) == [1, 1, 1, 1]
    assert exp_rows([0, 1, 3, 48]) == [1, 1, 4, 58]


def test_slot_width_is_whole_bytes():
    assert slot_width([1, 3, 48]) == 8
    assert slot_width([1, 3, 48, 1611]) % 8 == 0


def test_unpack():
    value = 5 + (7 << 8) + (1 << 16)
    assert unpack(value, 8, 3) == [5, 7, 1]
    assert unpack(mpz(value), 8, 4) == [5, 7, 1, 0]


def test_packed_rows_small():
    rows = packed_rows(_connectors(4), [1, 3, 48, 1611])
    assert rows[:3] == [[1], [1, 2], [3, 21, 24]]
    assert rows[3][3] == 600
    assert sum(rows[3]) == 1611


def test_packed_rows_capped():
    rows = packed_rows(_connectors(4), [1, 3, 48, 1611], max_k=1)
    assert rows == [[1], [1, 2], [3, 21], [15, 228]]


def test_packed_rows_reject_wrong_totals():
    with pytest.raises(InternalConsistencyError):
        packed_rows(_connectors(3), [1, 3, 49])


def test_packed_route_matches_solver():
    assert gtc_table(14) == gtc_table(14, route="solver")


@pytest.mark.parametrize("max_k", [0, 2, 5])
def test_packed_route_matches_solver_when_capped(max_k):
    assert gtc_table(12, max_k=max_k) == gtc_table(12, max_k=max_k, route="solver")


def test_unknown_route():
    with pytest.raises(ValueError):
        gtc_table(3, route="fast")


@pytest.mark.slow
def test_bivariate_build_time_extrapolates_to_budget():
    # row products grow about like n^5 in bit operations
    start = time.perf_counter()
    table = gtc_table(150)
    elapsed = time.perf_counter() - start
    assert table.total(150) == sum(table.row(150))
    assert elapsed * (300 / 150) ** 5 <= BUILD_BUDGET_SECONDS
