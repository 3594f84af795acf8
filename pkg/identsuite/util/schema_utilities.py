"""
Schema utilities
"""
from logging import Logger
from marshmallow import Schema, ValidationError

from identsuite.constants.const_tables import get_constant
from identsuite.util.exceptions import ConfigInvalid


def schema_verification(
    json_body: dict,
    schema_validator: Schema,
    app_logger: Logger,
) -> dict:
    """
    Validate the input data against the provided schema.

    Args:
        json_body (dict): The input data to be validated.
        schema (Schema): The schema to validate input data.
        app_logger (Logger): The logger to log validation errors.

    Returns:
        dict: The validated data.

    Raises:
        ConfigInvalid: the input data does not conform to the schema.
            The marshmallow messages are the exception payload.
    """
    try:
        return schema_validator.load(json_body)
    except ValidationError as error:
        app_logger.error(f'Schema error: {error.messages}')
        raise ConfigInvalid(
            f'{get_constant("ERROR_MESSAGES", "CONFIG_SCHEMA")}:'
            f' {error.messages}', payload=error.messages) from error
