"""The ``cornerlens`` logger.

Numerical modules report grid sizes, brackets and extrapolation choices at
DEBUG and accuracy problems that do not invalidate a result at WARNING. The
CLI logs one INFO line per artifact it writes.
"""

from __future__ import annotations

import logging
import sys
from typing import Literal, Union

LogLevel = Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
HandlerSpec = Union[list[tuple[logging.Handler, Union[str, None]]], logging.Handler, None]

DEFAULT_FORMAT = "%(levelname)s - %(name)s - %(message)s"

logger = logging.getLogger("cornerlens")


def _stdout_handler() -> logging.Handler:
    return logging.StreamHandler(sys.stdout)


def _formatted(handlers: HandlerSpec) -> list[tuple[logging.Handler, str]]:
    """Pair every handler with its format; a missing handler list means stdout."""
    if handlers is None or (isinstance(handlers, list) and not handlers):
        return [(_stdout_handler(), DEFAULT_FORMAT)]
    if isinstance(handlers, logging.Handler):
        return [(handlers, DEFAULT_FORMAT)]
    return [(handler, fmt or DEFAULT_FORMAT) for handler, fmt in handlers]


def configure_logging(level: LogLevel = "INFO", *, handlers: HandlerSpec = None) -> None:
    """Replace the handlers of the ``cornerlens`` logger and set its level.

    Args:
        level: Threshold of the package logger; ``corner-lens --log-level``
            passes its value here.
        handlers: None for stdout, a single handler, or a list of
            ``(handler, format)`` pairs where a None format means
            ``DEFAULT_FORMAT``.

    Example:
        ```python
        import logging
        from cornerlens import configure_logging

        configure_logging("DEBUG", handlers=[(logging.FileHandler("run.log"), "%(asctime)s %(message)s")])
        ```
    """
    logger.handlers.clear()
    logger.setLevel(getattr(logging, level))
    for handler, fmt in _formatted(handlers):
        handler.setFormatter(logging.Formatter(fmt))
        logger.addHandler(handler)


configure_logging()
