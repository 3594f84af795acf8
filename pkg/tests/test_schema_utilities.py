"""
Marshmallow schema verification
"""
import logging

import pytest
from marshmallow import Schema, fields

from identsuite.util.exceptions import ConfigInvalid
from identsuite.util.schema_utilities import schema_verification


class PointSchema(Schema):
    x = fields.Float(required=True)


def test_schema_verification_returns_the_loaded_data():
    data = schema_verification({"x": "1.5"}, PointSchema(),
                               logging.getLogger('test'))
    assert data == {"x": 1.5}


def test_schema_verification_raises_with_the_messages():
    with pytest.raises(ConfigInvalid) as err:
        schema_verification({"y": 1}, PointSchema(),
                            logging.getLogger('test'))
    assert "x" in err.value.payload
    assert "y" in err.value.payload
