"""
Schemas for sweep configuration files and JSON mode reports.

Configuration files are checked against JSON Schema documents stored next to
this module; mode reports are described by the pydantic models in
mode_report.
"""

import json
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List

from core.errors import ConfigError

SCHEMAS_DIR = Path(__file__).resolve().parent


def get_schema_path(schema_name: str) -> Path:
    """Path of the JSON Schema document named schema_name (no extension)."""
    return SCHEMAS_DIR / f"{schema_name}.json"


def available_schemas() -> List[str]:
    """Names of the JSON Schema documents shipped with the package."""
    return sorted(path.stem for path in SCHEMAS_DIR.glob("*.json"))


@lru_cache(maxsize=None)
def _read_schema(schema_name: str) -> str:
    schema_path = get_schema_path(schema_name)
    if not schema_path.is_file():
        raise ConfigError(f"Unknown schema '{schema_name}', available: {', '.join(available_schemas())}")
    return schema_path.read_text(encoding="utf-8")


def load_schema(schema_name: str) -> Dict[str, Any]:
    """Load a JSON Schema document.

    Args:
        schema_name: Name of the schema file without extension

    Returns:
        A fresh dictionary, safe for the caller to modify

    Raises:
        ConfigError: if no such schema exists
    """
    return json.loads(_read_schema(schema_name))
