"""
Application logger: one stdout logger named after IDENT_APP_NAME.
Every helper returns the stamped message it logged.
"""
from typing import Any
import datetime
import logging
import sys

from identsuite.config.config import Config

settings = Config()

LOG_FORMAT = '%(name)s-%(levelname)s - %(message)s'
STAMP_FORMAT = '%Y-%m-%d %H:%M:%S'


def log_config() -> logging.Logger:
    """ Stdout logger, DEBUG level when IDENT_DEBUG=1 """
    logger = logging.getLogger(settings.APP_NAME)
    logger.propagate = False
    logger.setLevel(logging.DEBUG if settings.DEBUG else logging.INFO)
    if not logger.handlers:
        handler = logging.StreamHandler(sys.stdout)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)
    return logger


app_logs = log_config()


def app_stamp() -> str:
    return f"{settings.APP_NAME}|{settings.APP_VERSION}"


def formatted_message(message: Any) -> str:
    """ [app|version] YYYY-mm-dd HH:MM:SS | message """
    now = datetime.datetime.now().strftime(STAMP_FORMAT)
    return f"[{app_stamp()}] {now} | {message}"


def _log(level: int, message: Any) -> str:
    stamped = formatted_message(message)
    app_logs.log(level, "%s", stamped)
    return stamped


def log_debug(message: Any) -> str:
    return _log(logging.DEBUG, message)


def log_info(message: Any) -> str:
    return _log(logging.INFO, message)


def log_warning(message: Any) -> str:
    return _log(logging.WARNING, message)


def log_error(message: Any) -> str:
    return _log(logging.ERROR, message)
