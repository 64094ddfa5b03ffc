# gtcnet/middleware.py
"""Error boundary for the command layer.

Exit codes: 0 success, 1 verification or consistency failure, 2 usage
error. Every failure also prints a JSON error payload on stdout.
"""
import functools
import logging
import traceback

import click

from gtcnet.exceptions import (
    CapExceededError, GtcError, InternalConsistencyError, NetworkValidationError, NewickSyntaxError,
    VerificationError,
)
from gtcnet.utils import dumps, error_response

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

USAGE_ERRORS = (CapExceededError, NewickSyntaxError, NetworkValidationError)


def _payload(error: Exception) -> dict:
    if isinstance(error, GtcError):
        details = error.to_dict()
        payload = error_response(str(error), kind=details.pop("error"))
        details.pop("message", None)
        payload.update(details)
        return payload
    return error_response(str(error), kind="usage_error")


def handles_domain_errors(f):
    """Map domain exceptions raised inside a command to exit codes."""

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except click.exceptions.Exit:
            raise
        except click.ClickException:
            raise
        except USAGE_ERRORS as e:
            logger.warning(f"Usage error: {e}")
            click.echo(dumps(_payload(e)))
            raise click.UsageError(str(e))
        except VerificationError as e:
            logger.warning(f"Verification failed: {e}")
            click.echo(dumps(_payload(e)))
            raise click.exceptions.Exit(EXIT_FAILURE)
        except InternalConsistencyError as e:
            logger.error(f"Internal consistency failure: {e}")
            logger.error(f"Traceback: {traceback.format_exc()}")
            click.echo(dumps(_payload(e)))
            raise click.exceptions.Exit(EXIT_FAILURE)
        except GtcError as e:
            logger.error(f"Unexpected {type(e).__name__}: {e}")
            click.echo(dumps(_payload(e)))
            raise click.exceptions.Exit(EXIT_FAILURE)
        except ValueError as e:
            click.echo(dumps(_payload(e)))
            raise click.UsageError(str(e))

    wrapper.handles_domain_errors = True
    return wrapper


def register_error_handlers(app):
    """Wrap every registered command's callback with the error boundary."""
    for command in app.cli.commands.values():
        if command.callback is not None and not getattr(command.callback, "handles_domain_errors", False):
            command.callback = handles_domain_errors(command.callback)
    logger.info("✅ Error handlers registered successfully")
