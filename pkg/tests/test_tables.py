import pytest

from gtcnet import tables
from gtcnet.engine import gtc_table
from gtcnet.exceptions import CapExceededError
from gtcnet.extensions import cache


@pytest.fixture(autouse=True)
def empty_memo():
    tables.clear()
    yield
    tables.clear()


def test_mode_keys():
    assert tables.mode_key(False) == "k"
    assert tables.mode_key(True) == "k_i"
    assert tables.mode_key(True, max_i=2) == "k_i[i<=2]"
    assert tables.mode_key(False, max_k=2, max_i=3) == "k[k<=2]"


def test_cache_key_embeds_version(app):
    with app.app_context():
        app.config["TABLE_VERSION"] = "7"
        assert tables.cache_key("k", 5) == "gtc-table:7:k:5"


def test_larger_cached_table_is_truncated(app):
    with app.app_context():
        big = tables.get_table(6)
        assert cache.get(tables.cache_key("k", 6)) is not None
        assert tables.get_table(4) == gtc_table(4)
        assert big.truncate(4) == tables.get_table(4)


def test_capped_tables_are_separate_entries(app):
    with app.app_context():
        capped = tables.get_table(5, max_k=1)
        assert capped.max_k == 1
        assert cache.get(tables.cache_key("k[k<=1]", 5)) is not None
        assert cache.get(tables.cache_key("k", 5)) is None


def test_caps(app):
    with app.app_context():
        app.config["BIVARIATE_CAP"] = 10
        with pytest.raises(CapExceededError) as info:
            tables.get_table(11)
        assert info.value.limit == 10
        with pytest.raises(CapExceededError):
            tables.get_table(8, with_i=True, trivariate_cap=5)


def test_clear_drops_cached_tables(app):
    with app.app_context():
        tables.get_table(3)
        tables.clear()
        assert cache.get(tables.cache_key("k", 3)) is None


def test_memo_outside_app_context():
    table = tables.get_table(4, with_i=True)
    assert ("k_i", 4) in tables._memo
    assert tables.get_table(3, with_i=True) == table.truncate(3)
