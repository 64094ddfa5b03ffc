import os
from pathlib import Path
from typing import Dict, Tuple

basedir = Path(__file__).parent.parent


def _int(key: str, default: int) -> int:
    v = os.getenv(key)
    return default if v in (None, "") else int(v)


def _float(key: str, default: float) -> float:
    v = os.getenv(key)
    return default if v in (None, "") else float(v)


def _grid(key: str, default: Tuple[int, ...]) -> Tuple[int, ...]:
    v = os.getenv(key)
    if not v:
        return default
    return tuple(int(part) for part in v.split(",") if part.strip())


class Config:
    ENV = os.getenv("FLASK_ENV", "development")
    DEBUG = False
    TESTING = False

    # Bumping this orphans every cached table (keys embed it).
    TABLE_VERSION = os.getenv("GTC_TABLE_VERSION", "1")

    # ✅ Size caps. The bivariate table is the expensive one in pure
    # Python; totals, fixed-k columns and moments have their own cheaper
    # routes and only honour the bivariate cap as an upper bound.
    BIVARIATE_CAP = _int("GTC_BIVARIATE_CAP", 300)
    TRIVARIATE_CAP = _int("GTC_TRIVARIATE_CAP", 120)
    DIRECT_FORMULA_CAP = _int("GTC_DIRECT_FORMULA_CAP", 8)
    ORACLE_CAP = _int("GTC_ORACLE_CAP", 4)
    ORACLE_LONG_CAP = _int("GTC_ORACLE_LONG_CAP", 5)
    ONE_COMPONENT_ORACLE_CAP = _int("GTC_ONE_COMPONENT_ORACLE_CAP", 6)
    HAT_CHECK_CAP = _int("GTC_HAT_CHECK_CAP", 7)

    # I_n is concentrated on {0, 1, 2}; joint (k, i) tables truncate i here.
    I_MARKER_CAP = _int("GTC_I_MARKER_CAP", 4)

    CACHE_TYPE = os.getenv("GTC_CACHE_TYPE", "FileSystemCache")
    CACHE_DIR = os.getenv("GTC_CACHE_DIR") or str(basedir / ".gtc-cache")
    CACHE_DEFAULT_TIMEOUT = 0
    CACHE_THRESHOLD = _int("GTC_CACHE_THRESHOLD", 500)

    HIGH_PRECISION_BITS = _int("GTC_PRECISION_BITS", 96)
    DEFAULT_SEED = os.getenv("GTC_SEED")

    # Engineering defaults for the trend checks; none of them is a
    # proven rate.
    TOLERANCES: Dict[str, float] = {
        "growth_deviation_max": _float("GTC_GROWTH_DEVIATION_MAX", 0.25),
        "mean_offset_max": _float("GTC_MEAN_OFFSET_MAX", 2.0),
        "variance_deviation_max": _float("GTC_VARIANCE_DEVIATION_MAX", 0.15),
        "poisson_tv_max": _float("GTC_POISSON_TV_MAX", 0.05),
        "chi_square_alpha": _float("GTC_CHI_SQUARE_ALPHA", 1e-3),
    }

    ASYMPTOTIC_GRID = _grid("GTC_ASYMPTOTIC_GRID", (50, 100, 200, 300))
    MOMENT_GRID = _grid("GTC_MOMENT_GRID", (50, 100, 200, 300))
    DISTRIBUTION_GRID = _grid("GTC_DISTRIBUTION_GRID", (50, 100, 200, 300))
    LIMIT_GRID = _grid("GTC_LIMIT_GRID", (40, 80, 120))
    OTC_GRID = _grid("GTC_OTC_GRID", (100, 200, 400, 800))
    SANDWICH_TREND_GRID = _grid("GTC_SANDWICH_TREND_GRID", (50, 100, 200))
    FAST_SANDWICH_MAX_N = _int("GTC_FAST_SANDWICH_MAX_N", 50)
    FULL_SANDWICH_MAX_N = _int("GTC_FULL_SANDWICH_MAX_N", 300)
    DIRECT_CHECK_MAX_N = _int("GTC_DIRECT_CHECK_MAX_N", 7)

    SAMPLER_CHECK_DRAWS = _int("GTC_SAMPLER_CHECK_DRAWS", 1_000_000)
    FAST_SAMPLER_DRAWS = _int("GTC_FAST_SAMPLER_DRAWS", 20_000)

    @classmethod
    def tolerance_keys(cls) -> Tuple[str, ...]:
        """Names accepted by `--tolerance key=value` overrides."""
        return tuple(cls.TOLERANCES)


class DevelopmentConfig(Config):
    DEBUG = True
    ENV = "development"


class TestingConfig(Config):
    TESTING = True
    DEBUG = True
    ENV = "testing"

    # In-process cache so tests never touch the user's table cache.
    CACHE_TYPE = "SimpleCache"

    SAMPLER_CHECK_DRAWS = 20_000
    FAST_SAMPLER_DRAWS = 5_000


class ProductionConfig(Config):
    DEBUG = False
    ENV = "production"


config = {
    "development": DevelopmentConfig,
    "production": ProductionConfig,
    "testing": TestingConfig,
    "default": DevelopmentConfig,
}
