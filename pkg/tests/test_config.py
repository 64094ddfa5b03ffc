from gtcnet import create_app
from gtcnet.config import Config, TestingConfig


def test_testing_config(app):
    assert app.config["TESTING"]
    assert app.config["CACHE_TYPE"] == "SimpleCache"
    assert app.config["ENV"] == "testing"


def test_config_class_is_accepted():
    app = create_app(TestingConfig)
    assert app.config["TESTING"]


def test_tolerance_keys():
    assert set(Config.tolerance_keys()) == {
        "growth_deviation_max", "mean_offset_max", "variance_deviation_max", "poisson_tv_max", "chi_square_alpha",
    }


def test_commands_are_registered(app):
    assert {"count", "table", "verify", "sample", "report", "corpus", "cache-clear"} <= set(app.cli.commands)
    assert all(getattr(c.callback, "handles_domain_errors", False) for c in app.cli.commands.values())
