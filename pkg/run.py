import os
import sys

from dotenv import load_dotenv
from flask.cli import FlaskGroup

# Load environment variables from .env file
load_dotenv()

sys.path.append(os.path.abspath(os.path.dirname(__file__)))

from gtcnet import create_app  # noqa: E402


def _create_app():
    return create_app(os.getenv("FLASK_ENV", "development"))


cli = FlaskGroup(create_app=_create_app, add_default_commands=False,
                 help="Count, analyse and sample galled tree-child networks.")


if __name__ == "__main__":
    cli()
