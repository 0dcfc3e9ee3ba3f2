"""
Logging for tilde-ck.

Two dated rotating files (everything at the configured level, and errors
only) plus a console handler on stderr. Reports are written to stdout, so
nothing logged here can end up inside a report.
"""

import logging
import sys
from datetime import datetime
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

CONSOLE_HANDLER = "tilde-ck-console"

FILE_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)s | %(funcName)s:%(lineno)d | %(message)s"
CONSOLE_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)s | %(message)s"

# third-party loggers kept quiet below WARNING
QUIET_LIBRARIES = ("networkx", "sympy")


def _level(name: str) -> int:
    level = logging.getLevelName(name.upper())
    if not isinstance(level, int):
        raise ValueError(f"Unknown log level: {name}")
    return level


def _rotating_handler(path: Path, level: int, max_bytes: int, backup_count: int) -> RotatingFileHandler:
    handler = RotatingFileHandler(path, maxBytes=max_bytes, backupCount=backup_count, encoding="utf-8")
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(fmt=FILE_FORMAT, datefmt="%Y-%m-%d %H:%M:%S"))
    return handler


class LoggerSetup:
    """Installs the toolkit's handlers on the root logger once per process."""

    _initialized = False

    @classmethod
    def setup(
        cls,
        log_dir: str = "logs",
        log_level: str = "INFO",
        console_level: str = "WARNING",
        max_bytes: int = 10 * 1024 * 1024,
        backup_count: int = 5,
    ) -> None:
        """
        Attach the file and console handlers.

        Args:
            log_dir: Directory for the dated log files
            log_level: Level of the main log file
            console_level: Level of the stderr handler
            max_bytes: Size at which a log file rotates
            backup_count: Rotated files kept per log
        """
        if cls._initialized:
            return

        directory = Path(log_dir)
        directory.mkdir(parents=True, exist_ok=True)
        stamp = datetime.now().strftime("%Y%m%d")

        root = logging.getLogger()
        root.setLevel(logging.DEBUG)
        root.handlers.clear()
        root.addHandler(
            _rotating_handler(directory / f"tilde_ck_{stamp}.log", _level(log_level), max_bytes, backup_count)
        )
        root.addHandler(
            _rotating_handler(directory / f"errors_{stamp}.log", logging.ERROR, max_bytes, backup_count)
        )

        console = logging.StreamHandler(sys.stderr)
        console.set_name(CONSOLE_HANDLER)
        console.setLevel(_level(console_level))
        console.setFormatter(logging.Formatter(fmt=CONSOLE_FORMAT, datefmt="%H:%M:%S"))
        root.addHandler(console)

        for library in QUIET_LIBRARIES:
            logging.getLogger(library).setLevel(logging.WARNING)

        cls._initialized = True
        logging.getLogger(__name__).info(
            f"Logging to {directory.absolute()} (file={log_level}, console={console_level})"
        )

    @classmethod
    def reset(cls) -> None:
        """Close and detach every root handler so the next setup starts clean."""
        root = logging.getLogger()
        for handler in list(root.handlers):
            handler.close()
            root.removeHandler(handler)
        cls._initialized = False

    @classmethod
    def get_logger(cls, name: str) -> logging.Logger:
        if not cls._initialized:
            setup_logging()
        return logging.getLogger(name)


def get_logger(name: str) -> logging.Logger:
    """Module logger; sets up logging from the settings on first use."""
    return LoggerSetup.get_logger(name)


def setup_logging(
    log_dir: Optional[str] = None,
    log_level: Optional[str] = None,
    console_level: Optional[str] = None,
) -> None:
    """
    Set up logging from the settings, with per-call overrides.

    Args:
        log_dir: Overrides ``TILDE_CK_LOG_DIR``
        log_level: Overrides ``TILDE_CK_LOG_LEVEL``
        console_level: Overrides ``TILDE_CK_CONSOLE_LOG_LEVEL``
    """
    from src.config import get_settings

    settings = get_settings()
    LoggerSetup.setup(
        log_dir=log_dir or settings.log_dir,
        log_level=log_level or settings.log_level,
        console_level=console_level or settings.console_log_level,
        max_bytes=settings.log_max_bytes,
        backup_count=settings.log_backup_count,
    )


def set_console_level(level: str) -> None:
    """Change the stderr handler's level after setup (the ``--log-level`` flag)."""
    for handler in logging.getLogger().handlers:
        if handler.get_name() == CONSOLE_HANDLER:
            handler.setLevel(_level(level))
