"""
Resultsets: the dicts handed to the CLI and written into bundles.
"""
from typing import Any, Optional
import sys
import traceback

from identsuite.util.app_logger import log_error
from identsuite.util.exceptions import IdentSuiteError

UNEXPECTED_ERROR_CODE = 'IS-E999'
STACK_LIMIT = 25


def get_default_resultset() -> dict:
    """ {'error': False, 'error_message': None, 'error_code': None,
    'resultset': {}} """
    return {
        'error': False,
        'error_message': None,
        'error_code': None,
        'resultset': {},
    }


def error_resultset(error_message: str, message_code: str = '') -> dict:
    """ Failed resultset, the code appended to the message as [CODE] """
    result = get_default_resultset()
    result.update({
        'error': True,
        'error_code': message_code or None,
        'error_message': f"{error_message} [{message_code}]"
        if message_code else error_message,
    })
    return result


def exception_resultset(err: BaseException) -> dict:
    """
    Error resultset of an exception. identsuite errors keep their own
    code; anything else is logged with its stack trace as IS-E999.
    """
    if isinstance(err, IdentSuiteError):
        return error_resultset(err.msg, err.message_code)
    return error_resultset(get_standard_base_exception_msg(err, ''),
                           UNEXPECTED_ERROR_CODE)


def get_standard_base_exception_msg(err: Any,
                                    message_code: Optional[str] = 'NO_E_CODE'
                                    ) -> str:
    suffix = f" [{message_code}]" if message_code else ''
    response = f"Unexpected Error: {err}, {type(err)}{suffix}"
    log_error(response)
    log_error(format_stacktrace())
    return response


def format_stacktrace() -> str:
    """ Caller frames plus the exception being handled """
    frames = traceback.format_stack(limit=STACK_LIMIT)[:-2]
    handled = traceback.format_exception(*sys.exc_info())[1:]
    return "".join(["Traceback (most recent call last):\n"] + frames +
                   handled)
