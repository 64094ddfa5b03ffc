import logging
import os

from flask_caching import Cache

logger = logging.getLogger(__name__)

# Computed count tables live here (see gtcnet/tables.py).
cache = Cache()


def configure_extensions(app):
    """Initialize the table cache, falling back to an in-process cache."""
    try:
        if app.config.get("CACHE_TYPE") == "FileSystemCache":
            os.makedirs(app.config["CACHE_DIR"], exist_ok=True)
        cache.init_app(app)
        logger.info("✅ Table cache initialized (%s)", app.config.get("CACHE_TYPE"))
    except Exception as e:
        cache.init_app(app, config={"CACHE_TYPE": "SimpleCache"})
        logger.warning(f"⚠️ Table cache unavailable ({e}) → using in-process cache")
