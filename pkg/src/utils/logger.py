"""
Logging utilities for the adaptive-regret toolkit
"""

import logging
import os
from pathlib import Path
from datetime import datetime
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler

_console = Console(stderr=True)


def _level_from_env(default: int) -> int:
    name = os.getenv('ADAREGRET_LOG_LEVEL')
    if not name:
        return default
    resolved = logging.getLevelName(name.upper())
    return resolved if isinstance(resolved, int) else default


def setup_logger(name: str, level: int = logging.INFO,
                 log_dir: Optional[str] = None, log_to_console: bool = True) -> logging.Logger:
    """
    Set up a logger with a rich console handler and an optional file handler

    Args:
        name: Logger name (usually __name__)
        level: Logging level, overridden by ADAREGRET_LOG_LEVEL
        log_dir: Directory for the daily log file; ADAREGRET_LOG_DIR when None
        log_to_console: Whether to log to the console

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    level = _level_from_env(level)
    logger.setLevel(level)

    # Avoid adding multiple handlers
    if logger.handlers:
        return logger

    if log_to_console:
        console_handler = RichHandler(console=_console, show_path=False, rich_tracebacks=True)
        console_handler.setLevel(level)
        console_handler.setFormatter(logging.Formatter('%(name)s | %(message)s'))
        logger.addHandler(console_handler)

    log_dir = log_dir or os.getenv('ADAREGRET_LOG_DIR')
    if log_dir:
        directory = Path(log_dir)
        directory.mkdir(parents=True, exist_ok=True)
        log_file = directory / f"adaregret_{datetime.now().strftime('%Y%m%d')}.log"

        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(level)
        file_handler.setFormatter(logging.Formatter(
            '%(asctime)s | %(name)s | %(levelname)-8s | %(filename)s:%(lineno)d | %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        ))
        logger.addHandler(file_handler)

    logger.propagate = False
    return logger
