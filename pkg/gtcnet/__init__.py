# gtcnet/__init__.py
from __future__ import annotations

import logging
import os
from typing import Optional, Type, Union

from flask import Flask

from gtcnet.config import Config, config
from gtcnet.extensions import configure_extensions

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s [%(levelname)s] %(name)s: %(message)s"
)

logger = logging.getLogger(__name__)

__version__ = "1.0.0"


def _configure_app(app: Flask, config_name: Optional[Union[str, Type[Config]]]):
    if isinstance(config_name, type):
        config_class = config_name
        config_name = getattr(config_class, "ENV", "custom")
    else:
        if not config_name:
            config_name = os.getenv("FLASK_ENV", "development")
        config_class = config.get(config_name, config["default"])

    app.config.from_object(config_class)
    app.config.from_prefixed_env()

    os.makedirs(app.instance_path, exist_ok=True)
    app.config["ENV"] = config_name


def create_app(config_name: Optional[Union[str, Type[Config]]] = None) -> Flask:
    """Application factory: the config, cache and command host of the CLI."""
    app = Flask(__name__, instance_relative_config=True)

    # ✅ Config FIRST (before extensions)
    _configure_app(app, config_name)
    configure_extensions(app)

    from gtcnet.cli import register_commands
    from gtcnet.middleware import register_error_handlers

    register_commands(app)
    register_error_handlers(app)

    logger.info("✅ gtcnet app created (%s)", app.config["ENV"])
    return app
