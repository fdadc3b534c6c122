"""
Writers for the CSV, JSON and SVG outputs of the command line tools.

CSV reals are printed with 17 significant digits. SVG figures are drawn from
the same rows that feed the CSV files and carry no timestamps, so repeated
runs produce identical bytes.
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from utils.schemas.mode_report import ModeReportModel  # noqa: E402

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# Fixed hash salt keeps matplotlib's SVG element ids stable between runs.
matplotlib.rcParams['svg.hashsalt'] = 'chain-entanglement'
_SVG_METADATA = {'Date': None}


def format_value(value: Any) -> str:
    """CSV cell text for one value."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return format(value, '.17g')
    if value is None:
        return ''
    return str(value)


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write rows under a fixed header.

    Args:
        path: Output file, parent directories are created
        header: Column names
        rows: Row values in header order

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"Row has {len(row)} values for {len(header)} columns")
            writer.writerow([format_value(v) for v in row])
            count += 1
    logger.info(f"Wrote {count} rows to {path}")
    return path


def read_csv_columns(path: PathLike) -> Dict[str, List[str]]:
    """Read a CSV file into a mapping of column name to raw cell values."""
    with open(path, 'r', newline='', encoding='utf-8') as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            return {}
        columns: Dict[str, List[str]] = {name: [] for name in reader.fieldnames}
        for record in reader:
            for name in reader.fieldnames:
                columns[name].append(record[name])
    return columns


def write_json(path: PathLike, report: Dict[str, Any]) -> Path:
    """Validate a mode report against ModeReportModel and write it."""
    model = ModeReportModel.model_validate(report)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = model.model_dump(mode='json', by_alias=True)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(json.dumps(payload, indent=2))
        f.write('\n')
    logger.info(f"Wrote mode report to {path}")
    return path


def _save(fig, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format='svg', metadata=_SVG_METADATA)
    plt.close(fig)
    logger.info(f"Wrote figure {path}")
    return path


def plot_correlations(path: PathLike, rows: Sequence[Sequence[float]], xi: float) -> Path:
    """Finite and infinite chain correlators versus separation.

    rows are (l, g_N, h_N, g_inf, h_inf).
    """
    data = np.asarray(rows, dtype=float)
    fig, (ax_g, ax_h) = plt.subplots(1, 2, figsize=(9, 4))
    ax_g.plot(data[:, 0], data[:, 1], 'o', ms=3, label='finite N')
    ax_g.plot(data[:, 0], data[:, 3], '-', label='infinite chain')
    ax_g.set_xlabel('l')
    ax_g.set_ylabel('g_l')
    ax_h.plot(data[1:, 0], np.abs(data[1:, 2]), 'o', ms=3, label='finite N')
    ax_h.plot(data[1:, 0], np.abs(data[1:, 4]), '-', label='infinite chain')
    ax_h.set_xlabel('l')
    ax_h.set_ylabel('|h_l|')
    ax_h.set_yscale('log')
    for ax in (ax_g, ax_h):
        ax.legend()
    fig.suptitle(f'Vacuum correlations, xi = {xi:g}')
    fig.tight_layout()
    return _save(fig, path)


def plot_modes(path: PathLike, report: Dict[str, Any], top_k: int,
               demodulated: Optional[Sequence[Sequence[float]]] = None) -> Path:
    """Mode functions u_A and participation of the leading modes of a report."""
    modes = report['modes'][:top_k]
    fig, (ax_u, ax_p) = plt.subplots(1, 2, figsize=(10, 4))
    for index, mode in enumerate(modes, start=1):
        sites = np.arange(len(mode['u_A']))
        shape = demodulated[index - 1] if demodulated is not None else mode['u_A']
        ax_u.plot(sites, shape, marker='.', label=f"m={index} ({'+' if mode['parity'] > 0 else '-'})")
        ax_p.plot(sites, mode['participation_A'], marker='.', label=f"m={index}")
    ax_u.set_xlabel('site')
    ax_u.set_ylabel('demodulated u' if demodulated is not None else 'u')
    ax_p.set_xlabel('site')
    ax_p.set_ylabel('participation')
    ax_u.legend(fontsize='small')
    ax_p.legend(fontsize='small')
    fig.tight_layout()
    return _save(fig, path)


def plot_regime_map(path: PathLike, rows: Sequence[Sequence[float]]) -> Path:
    """Level curves of total entanglement over (xi, ln N_b), with l_c(xi) overlaid.

    rows are (xi, N_b, total, E_mode1, l_c) on a full rectangular grid.
    """
    data = np.asarray(rows, dtype=float)
    xis = np.unique(data[:, 0])
    sizes = np.unique(data[:, 1])
    total = np.full((sizes.size, xis.size), np.nan)
    first = np.full((sizes.size, xis.size), np.nan)
    for row in data:
        i = np.searchsorted(sizes, row[1])
        j = np.searchsorted(xis, row[0])
        total[i, j] = row[2]
        first[i, j] = row[3]
    fig, ax = plt.subplots(figsize=(6, 5))
    log_sizes = np.log(sizes)
    if xis.size > 1 and sizes.size > 1:
        filled = ax.contourf(xis, log_sizes, total, levels=12)
        fig.colorbar(filled, ax=ax, label='total entanglement')
        ax.contour(xis, log_sizes, first, levels=6, colors='k', linewidths=0.5)
    lc = np.array([data[data[:, 0] == xi][0, 4] for xi in xis])
    ax.plot(xis, np.log(lc), 'w:', label='l_c')
    ax.set_ylim(log_sizes.min(), log_sizes.max())
    ax.set_xlabel('xi')
    ax.set_ylabel('ln N_b')
    ax.legend(loc='lower right')
    fig.tight_layout()
    return _save(fig, path)


def plot_scaling(path: PathLike, rows: Sequence[Sequence[float]]) -> Path:
    """Scaled residual depth -beta/N_b against m/N_b, one series per N_b.

    rows are (N_b, m, m_over_Nb, lnE_over_Nb, beta_over_Nb, f_predicted).
    """
    data = np.asarray(rows, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for size in np.unique(data[:, 0]):
        series = data[data[:, 0] == size]
        ax.plot(series[:, 2], -series[:, 4], 'o', ms=3, label=f'N_b={int(size)}')
    order = np.argsort(data[:, 2])
    ax.plot(data[order, 2], -0.5 * np.pi ** 2 * data[order, 5], 'k-', label='prediction')
    ax.set_xlabel('m / N_b')
    ax.set_ylabel('-beta_m / N_b')
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)
