"""
Configuration manager
"""
# C0103 | Disable "name doesn't conform to naming rules..." (snake_case)
# pylint: disable=C0103
# R0902 | Disable "too-many-instance-attributes"
# pylint: disable=R0902
# R0903 | Disable "too-few-public-methods"
# pylint: disable=R0903

from typing import Any, Optional
import os
import logging
import datetime


def formatted_log_message(message: str) -> str:
    """ Returns a formatted message with app name and date/time """
    return f"[{os.environ.get('IDENT_APP_NAME', 'identsuite')}]" + \
        f" {datetime.datetime.now().strftime('%Y-%m-%d %H:%M:%S')}" + \
        f" | {message}"


def get_config_logger() -> logging.Logger:
    """
    Get the logger object.
    """
    return logging.getLogger(os.environ.get('IDENT_APP_NAME', 'identsuite'))


def config_log_error(message: str) -> None:
    """
    Log a message to the console.
    """
    get_config_logger().error("%s", formatted_log_message(message))


def env_float(var_name: str, def_value: float) -> float:
    """
    Read a float environment variable, falling back to def_value
    when it's missing or malformed.
    """
    raw = os.environ.get(var_name)
    if raw is None or raw.strip() == '':
        return def_value
    try:
        return float(raw)
    except ValueError:
        config_log_error(
            f'ERROR [C-E010] | {var_name}={raw!r} is not a number,' +
            f' using {def_value}')
    return def_value


class Config():
    """ Configuration class, to have the most used App variables """
    def __init__(self, overrides: Optional[dict] = None) -> None:

        # Values passed explicitly (e.g. from the CLI) take precedence
        # over the environment variables
        self.overrides = overrides or {}

        # App general configuration

        self.DEBUG = self.get_env('IDENT_DEBUG', '0') == '1'

        self.APP_NAME = self.get_env('IDENT_APP_NAME', 'identsuite')
        self.APP_VERSION = self.get_env('IDENT_VERSION', 'N/A')

        self.OUT_DIR = self.get_env('IDENT_OUT_DIR', './output')
        self.TEMP_DIR = self.get_env('TEMP_DIR', '/tmp')
        self.WORKERS = int(self.get_env('IDENT_WORKERS', '1'))

        # Numerical gates

        self.COND_WARN = self.get_float('IDENT_COND_WARN', 200.0)
        self.COND_CAP = self.get_float('IDENT_COND_CAP', 1e8)
        self.DET_FLOOR = self.get_float('IDENT_DET_FLOOR', 1e-12)
        self.SSIGN_EPSILON = self.get_float('IDENT_SSIGN_EPSILON', 1e-2)

    def get_env(self, var_name: str, def_value: Any = None) -> Any:
        """
        Get value of a config variable. If it's in the overrides,
        get from there, if not, get from os.environ.
        """
        if var_name in self.overrides:
            return self.overrides[var_name]
        return os.environ.get(var_name, def_value)

    def get_float(self, var_name: str, def_value: float) -> float:
        """
        Get a numeric config variable.
        """
        if var_name in self.overrides:
            return float(self.overrides[var_name])
        return env_float(var_name, def_value)

    def debug_vars(self) -> str:
        """
        Show all defined config variables.
        """
        return (
            'Config.debug_vars:\n\n' +
            f'DEBUG = {self.DEBUG}\n' +
            f'APP_NAME = {self.APP_NAME}\n' +
            f'APP_VERSION = {self.APP_VERSION}\n' +
            f'OUT_DIR = {self.OUT_DIR}\n' +
            f'WORKERS = {self.WORKERS}\n' +
            f'COND_WARN = {self.COND_WARN}\n' +
            f'COND_CAP = {self.COND_CAP}\n' +
            f'DET_FLOOR = {self.DET_FLOOR}\n' +
            f'SSIGN_EPSILON = {self.SSIGN_EPSILON}\n' +
            '\n'
        )
