"""
YAML validation for sweep configuration files.

Documents are checked with a compiled Draft 7 validator; every violation is
reported with its location, e.g. ``thresholds/zeta: 1.5 is greater than or
equal to the maximum of 1``.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import jsonschema
import yaml

from utils.schemas import load_schema

logger = logging.getLogger(__name__)

ValidationResult = Tuple[bool, Optional[str]]


class ConfigValidator:
    """Validator for YAML sweep configuration files."""

    def __init__(self, schema_name: str = "sweep_config_schema"):
        """Initialize the validator with a schema.

        Args:
            schema_name: Name of the schema file without extension
        """
        self.schema = load_schema(schema_name)
        jsonschema.Draft7Validator.check_schema(self.schema)
        self._validator = jsonschema.Draft7Validator(self.schema)

    def errors(self, data: Optional[Dict[str, Any]]) -> List[str]:
        """All schema violations of a parsed document, ordered by location.

        An empty document (None) is treated as an empty mapping.
        """
        found = sorted(self._validator.iter_errors({} if data is None else data),
                       key=lambda e: [str(p) for p in e.absolute_path])
        messages = []
        for error in found:
            location = "/".join(str(p) for p in error.absolute_path)
            messages.append(f"{location}: {error.message}" if location else error.message)
        return messages

    def validate_dict(self, data: Optional[Dict[str, Any]]) -> ValidationResult:
        """Validate a parsed document.

        Returns:
            Tuple of (is_valid, error_message); the message joins all violations
        """
        messages = self.errors(data)
        if messages:
            return False, "Validation error: " + "; ".join(messages)
        return True, None

    def validate_yaml_string(self, yaml_string: str) -> ValidationResult:
        """Validate YAML text.

        Returns:
            Tuple of (is_valid, error_message)
        """
        try:
            data = yaml.safe_load(yaml_string)
        except yaml.YAMLError as e:
            return False, f"Invalid YAML: {e}"
        return self.validate_dict(data)

    def validate_yaml_file(self, yaml_file_path: Union[str, Path]) -> ValidationResult:
        """Validate a YAML file.

        Returns:
            Tuple of (is_valid, error_message); a missing or unreadable file
            is reported rather than raised
        """
        path = Path(yaml_file_path)
        try:
            text = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            return False, f"File not found: {path}"
        except OSError as e:
            return False, f"Cannot read {path}: {e}"
        is_valid, error = self.validate_yaml_string(text)
        if not is_valid:
            logger.debug(f"{path} rejected: {error}")
        return is_valid, error

    @staticmethod
    def generate_example_config() -> Dict[str, Any]:
        """Example configuration covering every section with its defaults."""
        return {
            "version": "1.0",
            "grid": {
                "N": [2048],
                "xi": [0.5, 1.0, 3.0, 6.0, 12.0],
                "N_b": [8, 16, 32, 64, 128, 256],
                "block_start": [0]
            },
            "output": {
                "out_dir": "results",
                "emit": ["csv", "svg"]
            },
            "thresholds": {
                "regime_factor_I": 4.0,
                "zeta": 0.45,
                "lambda_switch": 1e-6,
                "unentangled_excess": 1e-12,
                "mapping_kappa_min": 1e-8
            },
            "numerics": {
                "correlation_method": "auto",
                "direct_max_n": 4096,
                "dense_complement_max": 4096
            },
            "windows": {
                "weak_z_max": 0.3,
                "strong_nc_factor": 4.0
            },
            "workers": 2
        }

    def save_example_config(self, output_path: Union[str, Path]) -> None:
        """Write the example configuration as YAML, parent directories included."""
        example = self.generate_example_config()
        is_valid, error = self.validate_dict(example)
        if not is_valid:
            raise ValueError(f"Example configuration does not match its schema: {error}")
        path = Path(output_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            yaml.safe_dump(example, f, default_flow_style=False, sort_keys=False)


def validate_config_file(yaml_file_path: Union[str, Path]) -> ValidationResult:
    """Validate a YAML configuration file with the sweep schema."""
    return ConfigValidator().validate_yaml_file(yaml_file_path)


def generate_example_config_file(output_path: Union[str, Path]) -> None:
    """Write the example sweep configuration to output_path."""
    ConfigValidator().save_example_config(output_path)
