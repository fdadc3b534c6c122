"""
Sweep configuration and numerical thresholds.

This module provides dataclasses mirroring the sweep configuration schema,
each with a from_dict constructor that fills in defaults for missing keys.
"""

from enum import Enum
from typing import Dict, Any, List, Optional, Union
from dataclasses import dataclass, field, replace
from pathlib import Path
import logging

import yaml

from core.errors import ConfigError
from utils.config_validator import ConfigValidator

logger = logging.getLogger(__name__)


class CorrelationMethod(Enum):
    """Evaluation strategies for the finite chain cosine sums."""
    DIRECT = "direct"
    FFT = "fft"
    AUTO = "auto"


class EmitFormat(Enum):
    """Output formats the CLI can emit."""
    CSV = "csv"
    JSON = "json"
    SVG = "svg"


DEFAULT_XI_GRID = [0.1, 0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 10.0, 12.0]
DEFAULT_NB_GRID = [8, 16, 32, 64, 128, 256]


@dataclass
class Thresholds:
    """Tolerances and regime conventions used by the numerical core."""
    regime_factor_I: float = 4.0
    zeta: float = 0.45
    lambda_switch: float = 1e-6
    clamp_tolerance: float = 1e-10
    unentangled_excess: float = 1e-12
    mapping_kappa_min: float = 1e-8
    degeneracy_gap: float = 1e-12
    tie_tolerance: float = 1e-9
    hyp_tolerance: float = 1e-12
    hyp_term_budget: int = 1_000_000
    z2_log_branch: float = 0.99

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Thresholds':
        """Create Thresholds from dictionary."""
        defaults = cls()
        return cls(**{
            name: type(getattr(defaults, name))(data.get(name, getattr(defaults, name)))
            for name in defaults.__dataclass_fields__
        })


@dataclass
class NumericsSettings:
    """Evaluation strategy settings."""
    correlation_method: CorrelationMethod = CorrelationMethod.AUTO
    direct_max_n: int = 4096
    dense_complement_max: int = 4096

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'NumericsSettings':
        """Create NumericsSettings from dictionary."""
        method = data.get('correlation_method', 'auto')
        try:
            method = CorrelationMethod(method)
        except ValueError:
            logger.warning(f"Unknown correlation method '{method}', using 'auto'")
            method = CorrelationMethod.AUTO

        return cls(
            correlation_method=method,
            direct_max_n=int(data.get('direct_max_n', 4096)),
            dense_complement_max=int(data.get('dense_complement_max', 4096))
        )


@dataclass
class ValidityWindows:
    """Where the single oscillator branch formulas are trusted."""
    weak_z_max: float = 0.3
    strong_nc_factor: float = 4.0

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ValidityWindows':
        """Create ValidityWindows from dictionary."""
        return cls(
            weak_z_max=float(data.get('weak_z_max', 0.3)),
            strong_nc_factor=float(data.get('strong_nc_factor', 4.0))
        )


@dataclass
class OutputSettings:
    """Where and how results are written."""
    out_dir: str = "results"
    emit: List[EmitFormat] = field(default_factory=lambda: [EmitFormat.CSV])

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'OutputSettings':
        """Create OutputSettings from dictionary."""
        emit = []
        for item in data.get('emit', ['csv']):
            try:
                emit.append(EmitFormat(item))
            except ValueError:
                logger.warning(f"Ignoring unknown emit format '{item}'")
        return cls(out_dir=str(data.get('out_dir', 'results')), emit=emit or [EmitFormat.CSV])

    def wants(self, fmt: EmitFormat) -> bool:
        return fmt in self.emit


@dataclass
class SweepGrid:
    """Parameter grid for sweeps. alpha, when given, replaces xi."""
    N: List[int] = field(default_factory=lambda: [2048])
    xi: List[float] = field(default_factory=lambda: list(DEFAULT_XI_GRID))
    alpha: Optional[List[float]] = None
    N_b: List[int] = field(default_factory=lambda: list(DEFAULT_NB_GRID))
    block_start: List[int] = field(default_factory=lambda: [0])

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SweepGrid':
        """Create SweepGrid from dictionary."""
        alpha = data.get('alpha')
        return cls(
            N=[int(n) for n in data.get('N', [2048])],
            xi=[float(x) for x in data.get('xi', DEFAULT_XI_GRID)],
            alpha=[float(a) for a in alpha] if alpha is not None else None,
            N_b=[int(n) for n in data.get('N_b', DEFAULT_NB_GRID)],
            block_start=[int(s) for s in data.get('block_start', [0])]
        )


@dataclass
class SweepConfig:
    """Complete sweep configuration."""
    version: str = "1.0"
    grid: SweepGrid = field(default_factory=SweepGrid)
    output: OutputSettings = field(default_factory=OutputSettings)
    thresholds: Thresholds = field(default_factory=Thresholds)
    numerics: NumericsSettings = field(default_factory=NumericsSettings)
    windows: ValidityWindows = field(default_factory=ValidityWindows)
    workers: int = 1

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SweepConfig':
        """Create SweepConfig from a validated dictionary."""
        return cls(
            version=str(data.get('version', '1.0')),
            grid=SweepGrid.from_dict(data.get('grid', {})),
            output=OutputSettings.from_dict(data.get('output', {})),
            thresholds=Thresholds.from_dict(data.get('thresholds', {})),
            numerics=NumericsSettings.from_dict(data.get('numerics', {})),
            windows=ValidityWindows.from_dict(data.get('windows', {})),
            workers=int(data.get('workers', 1))
        )

    @classmethod
    def load(cls, path: Optional[Union[str, Path]] = None) -> 'SweepConfig':
        """Load and validate a YAML configuration file.

        Args:
            path: YAML file, or None for the built-in defaults

        Returns:
            The parsed configuration

        Raises:
            ConfigError: if the file is missing, malformed or fails validation
        """
        if path is None:
            return cls()
        is_valid, error = ConfigValidator().validate_yaml_file(path)
        if not is_valid:
            raise ConfigError(f"{path}: {error}")
        with open(path, 'r') as f:
            data = yaml.safe_load(f) or {}
        config = cls.from_dict(data)
        config.check()
        return config

    def check(self) -> None:
        """Verify cross-field constraints the schema cannot express."""
        grid = self.grid
        if not grid.N or not grid.N_b or not (grid.alpha or grid.xi):
            raise ConfigError("Sweep grids must be non-empty")
        if any(n < 2 for n in grid.N):
            raise ConfigError("Chain sizes must be at least 2")
        if any(2 * nb > min(grid.N) for nb in grid.N_b):
            raise ConfigError("Block sizes must not exceed half of the smallest chain")
        if grid.alpha is not None and any(not 0.0 < a < 1.0 for a in grid.alpha):
            raise ConfigError("alpha values must lie in (0, 1)")
        if any(x <= 0.0 for x in grid.xi):
            raise ConfigError("xi values must be positive")
        if not 0.0 < self.thresholds.zeta < 1.0:
            raise ConfigError("zeta must lie in (0, 1)")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    def with_overrides(self, **overrides: Any) -> 'SweepConfig':
        """Return a copy with command-line values replacing file values.

        Recognized keys: N, xi, alpha, N_b, block_start, out_dir, emit, zeta,
        workers. None values are ignored.
        """
        grid = self.grid
        output = self.output
        thresholds = self.thresholds
        workers = self.workers
        for key, value in overrides.items():
            if value is None:
                continue
            if key in ('N', 'N_b', 'block_start'):
                grid = replace(grid, **{key: [int(v) for v in value]})
            elif key == 'xi':
                grid = replace(grid, xi=[float(v) for v in value], alpha=None)
            elif key == 'alpha':
                grid = replace(grid, alpha=[float(v) for v in value])
            elif key == 'out_dir':
                output = replace(output, out_dir=str(value))
            elif key == 'emit':
                output = OutputSettings.from_dict({'out_dir': output.out_dir, 'emit': list(value)})
            elif key == 'zeta':
                thresholds = replace(thresholds, zeta=float(value))
            elif key == 'workers':
                workers = int(value)
            else:
                raise ConfigError(f"Unknown override '{key}'")
        config = replace(self, grid=grid, output=output, thresholds=thresholds, workers=workers)
        config.check()
        return config

    def couplings(self) -> List[Dict[str, float]]:
        """Grid couplings as keyword dictionaries for ChainSpec constructors."""
        if self.grid.alpha is not None:
            return [{'alpha': a} for a in self.grid.alpha]
        return [{'xi': x} for x in self.grid.xi]
