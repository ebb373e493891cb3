""" Logging setup shared by the CLI and the dashboard. """
import logging

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: str | int = "WARNING"):
    """
    Configure the root logger with a single stream handler.

    :param level: Level name or number.
    """
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)


def verbosity_to_level(verbose: int, default: str) -> int | str:
    """Map a count of -v flags onto a logging level."""
    if verbose >= 2:
        return logging.DEBUG
    if verbose == 1:
        return logging.INFO
    return default
