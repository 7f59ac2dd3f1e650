import logging
import os

PACKAGE_LOGGER_PREFIX = "ramsey_echo"
LEVEL_ENV_VAR = "RAMSEY_ECHO_LOG_LEVEL"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _default_level() -> int:
    """Resolve the default level from the environment, falling back to INFO."""
    name = os.environ.get(LEVEL_ENV_VAR, "INFO").upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.INFO


def get_logger(name: str) -> logging.Logger:
    """
    Configures and returns a logger with the specified name.

    The logger gets a single console handler writing to stderr with a
    timestamped format. Its level is INFO unless the RAMSEY_ECHO_LOG_LEVEL
    environment variable names another one. Messages are not propagated to
    the root logger, so repeated calls never duplicate output.

    Args:
        name (str): The name of the logger to be created or retrieved.

    Returns:
        logging.Logger: A logger instance configured with the specified name.
    """
    level = _default_level()
    logger = logging.getLogger(name)

    logger.handlers.clear()
    logger.setLevel(level)
    logger.propagate = False

    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)
    console_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(console_handler)

    return logger


def set_level(level: int) -> None:
    """
    Re-level every logger of the package and its handlers.

    Args:
        level: A logging level such as logging.DEBUG
    """
    for name, candidate in logging.root.manager.loggerDict.items():
        if not name.startswith(PACKAGE_LOGGER_PREFIX) or not isinstance(candidate, logging.Logger):
            continue
        candidate.setLevel(level)
        for handler in candidate.handlers:
            handler.setLevel(level)
