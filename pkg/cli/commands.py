"""
Row-producing implementations of the command line subcommands.

Each cmd_* function is pure: it takes parsed parameters and returns the rows
(or report) that the typer layer writes and displays.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np

from core.analytics import quantize_residual, single_osc_entropy, single_osc_validity
from core.chain_model import (build_correlations, classify_regime, g_infinite, h_infinite,
                              regime_scales, single_site_lambda)
from core.continuum import correspondence_check
from core.entanglement import (analyze_block, beta_of_excess, entropy_of_excess, fit_line,
                               report_to_dict)
from core.errors import DomainError
from core.gaussian_core import demodulate
from core.interfaces import (BlockPartition, ChainSpec, ContinuumSpec, CorrelationTable,
                             EntanglementReport, FitResult, ResidualModel)
from utils.output import read_csv_columns
from utils.sweep_config import NumericsSettings, SweepConfig, Thresholds

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

CORRELATIONS_HEADER = ["l", "g_N", "h_N", "g_inf", "h_inf"]
ENTROPY_SWEEP_HEADER = ["xi", "N_b", "total", "E_mode1", "E_mode2", "E_mode3", "E_mode4", "regime"]
SCALING_HEADER = ["N_b", "m", "m_over_Nb", "lnE_over_Nb", "beta_over_Nb", "f_predicted"]
REGIME_MAP_HEADER = ["xi", "N_b", "total", "E_mode1", "l_c"]
SINGLE_SITE_HEADER = ["xi", "N_t", "N_c", "regime", "lambda", "entropy", "entropy_branch", "window"]
CONTINUUM_HEADER = ["x", "N", "g_discrete", "g_cont", "rel_err", "h_discrete", "h_cont", "rel_err_h"]

Row = List[Union[float, int, str]]


def run_pool(func: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """Apply func to every item with a bounded thread pool, results in input order."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(func, item) for item in items]
        return [future.result() for future in futures]


def make_spec(N: int, coupling: Dict[str, float]) -> ChainSpec:
    """ChainSpec from a {'xi': ...} or {'alpha': ...} coupling."""
    if 'alpha' in coupling:
        return ChainSpec.from_alpha(N, coupling['alpha'])
    return ChainSpec.from_xi(N, coupling['xi'])


@dataclass(frozen=True)
class _SweepPoint:
    table: CorrelationTable
    N_b: int
    block_start: int


def _tables(config: SweepConfig, sizes: Sequence[int]) -> List[CorrelationTable]:
    specs = [make_spec(N, coupling) for N in sizes for coupling in config.couplings()]
    return run_pool(lambda spec: build_correlations(spec, config.numerics), specs, config.workers)


def _analyze(config: SweepConfig) -> Callable[[_SweepPoint], EntanglementReport]:
    def analyze(point: _SweepPoint) -> EntanglementReport:
        report = analyze_block(point.table, BlockPartition(point.block_start, point.N_b),
                               config.thresholds, config.numerics)
        logger.info(f"N={point.table.N} xi={point.table.spec.xi:.6g} N_b={point.N_b}: total={report.total:.10g}")
        return report
    return analyze


def cmd_correlations(spec: ChainSpec, l_max: int, numerics: Optional[NumericsSettings] = None,
                     thresholds: Optional[Thresholds] = None) -> List[Row]:
    """Rows (l, g_N, h_N, g_inf, h_inf) for l = 0..l_max."""
    if not 0 <= l_max <= spec.N // 2:
        raise DomainError(f"l_max must lie in [0, N/2] for N={spec.N}, got {l_max}")
    table = build_correlations(spec, numerics)
    rows = []
    for l in range(l_max + 1):
        rows.append([l, float(table.g[l]), float(table.h[l]),
                     g_infinite(l, spec, thresholds), h_infinite(l, spec, thresholds)])
    return rows


def cmd_entropy_sweep(config: SweepConfig) -> Dict[int, List[Row]]:
    """Total and leading mode entanglement over the (N, coupling, N_b) grid.

    Returns:
        Rows (xi, N_b, total, E_mode1..E_mode4, regime) keyed by chain size
    """
    grid = config.grid
    result: Dict[int, List[Row]] = {}
    for N in grid.N:
        points = [_SweepPoint(table, N_b, grid.block_start[0])
                  for table in _tables(config, [N]) for N_b in grid.N_b]
        reports = run_pool(_analyze(config), points, config.workers)
        result[N] = [[report.spec.xi, report.partition.N_b, report.total,
                      *report.mode_entropies(4), report.regime.value] for report in reports]
    return result


def cmd_fit_slope(csv_path: Union[str, Path], x_col: str = "N_b", y_col: str = "total",
                  log_x: bool = True) -> FitResult:
    """Least squares line through two columns of a CSV file, ln of x by default."""
    columns = read_csv_columns(csv_path)
    for name in (x_col, y_col):
        if name not in columns:
            raise DomainError(f"Column '{name}' not found in {csv_path}")
    x = np.array([float(v) for v in columns[x_col]])
    y = np.array([float(v) for v in columns[y_col]])
    if log_x:
        if np.any(x <= 0.0):
            raise DomainError(f"Column '{x_col}' has non-positive values")
        x = np.log(x)
    return fit_line(x, y)


def cmd_modes(spec: ChainSpec, partition: BlockPartition, top_k: int,
              thresholds: Optional[Thresholds] = None,
              numerics: Optional[NumericsSettings] = None) -> Tuple[Dict[str, Any], List[List[float]]]:
    """Mode report of one block limited to the top_k modes.

    Returns:
        Tuple of (report dictionary, demodulated u_A of each kept mode)
    """
    if top_k < 1:
        raise DomainError(f"top_k must be positive, got {top_k}")
    table = build_correlations(spec, numerics)
    report = analyze_block(table, partition, thresholds, numerics)
    data = report_to_dict(report)
    data["modes"] = data["modes"][:top_k]
    shapes = [demodulate(mode.u_A).tolist() for mode in report.modes[:top_k]]
    return data, shapes


def cmd_scaling(config: SweepConfig) -> List[Row]:
    """Residual mode entanglement in scaled variables, with the quantization prediction.

    Uses the first chain size and coupling of the grid and every block size.
    Every mode m >= 2 with a positive excess appears, including those below
    the entanglement floor; their depth is carried by beta_over_Nb, which the
    prediction -(pi^2/2) f matches as -beta/N_b.
    """
    N = config.grid.N[0]
    table = _tables(replace_couplings(config), [N])[0]
    points = [_SweepPoint(table, N_b, config.grid.block_start[0]) for N_b in config.grid.N_b]
    reports = run_pool(_analyze(config), points, config.workers)
    rows: List[Row] = []
    for report in reports:
        N_b = report.partition.N_b
        model = ResidualModel(N_b=N_b, zeta=config.thresholds.zeta)
        for m, mode in enumerate(report.modes, start=1):
            if m < 2 or mode.excess <= 0.0:
                continue
            beta = beta_of_excess(mode.excess)
            entropy = entropy_of_excess(mode.excess)
            ln_entropy = math.log(entropy) if entropy > 0.0 else -beta
            predicted = quantize_residual(m, model)
            rows.append([N_b, m, m / N_b, ln_entropy / N_b, beta / N_b, predicted.f])
    return rows


def replace_couplings(config: SweepConfig) -> SweepConfig:
    """Copy of the config reduced to its first coupling."""
    coupling = config.couplings()[0]
    key = 'alpha' if 'alpha' in coupling else 'xi'
    return config.with_overrides(**{key: [coupling[key]]})


def cmd_regime_map(config: SweepConfig) -> List[Row]:
    """Rows (xi, N_b, total, E_mode1, l_c) over the coupling and block size grid."""
    N = config.grid.N[0]
    tables = _tables(config, [N])
    points = [_SweepPoint(table, N_b, config.grid.block_start[0])
              for table in tables for N_b in config.grid.N_b]
    reports = run_pool(_analyze(config), points, config.workers)
    return [[report.spec.xi, report.partition.N_b, report.total, report.mode_entropies(1)[0],
             regime_scales(report.spec).l_c] for report in reports]


def cmd_single_site(config: SweepConfig) -> List[Row]:
    """Single site entanglement against the regime branch formulas."""
    rows: List[Row] = []
    N = config.grid.N[0]
    for table in _tables(config, [N]):
        spec = table.spec
        scales = regime_scales(spec)
        lam, excess = single_site_lambda(table)
        window = single_osc_validity(spec, config.windows, config.thresholds)
        rows.append([
            spec.xi, scales.N_t, scales.N_c,
            classify_regime(spec, config.thresholds).value,
            lam, entropy_of_excess(excess),
            single_osc_entropy(spec, config.thresholds),
            window.value if window is not None else "none",
        ])
    return rows


def cmd_continuum_check(cont: ContinuumSpec, positions: Sequence[float], sizes: Sequence[int],
                        numerics: Optional[NumericsSettings] = None) -> List[Row]:
    """Rows comparing the rescaled chain correlators with the field, per position and size."""
    rows: List[Row] = []
    for x in positions:
        report = correspondence_check(cont, x, sizes, numerics)
        for r in report.rows:
            rows.append([r.x, r.N, r.g_discrete, r.g_cont, r.rel_err, r.h_discrete, r.h_cont, r.rel_err_h])
    return rows
