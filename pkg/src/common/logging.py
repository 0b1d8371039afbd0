import sys
import logging
from typing import Optional, Union

from src.common.config import config

def setup_logging(
    name: str = "src",
    level: Union[int, str, None] = None,
    log_file: Optional[str] = None,
) -> logging.Logger:
    """
    Setup standard logging configuration.

    Module loggers are created with ``logging.getLogger(__name__)`` and live
    under the ``src`` hierarchy, so configuring ``src`` covers all of them.

    Args:
        name: Logger name
        level: Logging level (default: config.LOG_LEVEL)
        log_file: Optional path to write logs to file

    Returns:
        Configured Logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(level if level is not None else config.LOG_LEVEL)

    # Prevent adding duplicate handlers if function is called multiple times
    if logger.handlers:
        if log_file and not any(isinstance(h, logging.FileHandler) for h in logger.handlers):
            logger.addHandler(_file_handler(log_file))
        return logger

    formatter = logging.Formatter(
        fmt="%(asctime)s | %(levelname)-8s | %(name)s | %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S"
    )

    # Console Handler
    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    # File Handler (Optional)
    if log_file:
        logger.addHandler(_file_handler(log_file))

    return logger


def _file_handler(log_file: str) -> logging.FileHandler:
    handler = logging.FileHandler(log_file, encoding='utf-8')
    handler.setFormatter(logging.Formatter(
        fmt="%(asctime)s | %(levelname)-8s | %(name)s | %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S"
    ))
    return handler

# Create default logger
logger = logging.getLogger("src")
