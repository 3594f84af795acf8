"""
Constant tables (dict) loaded from general_constants.json
"""
from typing import Any, Optional
import json
import os

CONSTANTS_FILE = os.path.join(os.path.dirname(__file__),
                              'general_constants.json')


def get_all_constants() -> dict:
    with open(CONSTANTS_FILE, encoding="utf-8") as json_file:
        return json.load(json_file)


def get_constant(const_name: str, entry_name: Optional[str] = None,
                 def_value: Any = None) -> Any:
    """
    Entry entry_name of the table const_name, def_value when the entry is
    missing. Without entry_name the whole table is returned.

    Raises:
        KeyError: unknown table.
    """
    table = constants[const_name]
    if not entry_name:
        return table
    return table.get(entry_name, def_value)


constants = get_all_constants()
