#!/usr/bin/env python
import logging
import math
from pathlib import Path
from typing import Any, Callable, List, Optional

import typer
from rich.console import Console
from rich.table import Table
from rich import box

from cli.commands import (CONTINUUM_HEADER, CORRELATIONS_HEADER, ENTROPY_SWEEP_HEADER,
                          REGIME_MAP_HEADER, SCALING_HEADER, SINGLE_SITE_HEADER,
                          cmd_continuum_check, cmd_correlations, cmd_entropy_sweep, cmd_fit_slope,
                          cmd_modes, cmd_regime_map, cmd_scaling, cmd_single_site, make_spec)
from core.errors import ChainError, ConfigError, DomainError, NumericalStageError
from core.interfaces import BlockPartition, ContinuumSpec
from utils.config_validator import generate_example_config_file
from utils.output import (plot_correlations, plot_modes, plot_regime_map, plot_scaling, write_csv,
                          write_json)
from utils.sweep_config import EmitFormat, SweepConfig

app = typer.Typer(help="Chain entanglement CLI - vacuum entanglement of harmonic chains")
console = Console()
err_console = Console(stderr=True)

logger = logging.getLogger(__name__)

# bad configuration, arguments outside their domain
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def parse_list(text: Optional[str], cast: Callable[[str], Any]) -> Optional[List[Any]]:
    """Parse a comma separated option value; None stays None."""
    if text is None:
        return None
    try:
        return [cast(item.strip()) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise ConfigError(f"Cannot parse '{text}': {e}")


def load_config(config_path: Optional[Path], n: Optional[str] = None, xi: Optional[str] = None,
                alpha: Optional[str] = None, nb: Optional[str] = None, out_dir: Optional[str] = None,
                emit: Optional[str] = None, zeta: Optional[float] = None,
                workers: Optional[int] = None, block_start: Optional[int] = None) -> SweepConfig:
    """Load the YAML config (or defaults) and apply command-line overrides."""
    if xi is not None and alpha is not None:
        raise ConfigError("--xi and --alpha are mutually exclusive")
    config = SweepConfig.load(config_path)
    return config.with_overrides(
        N=parse_list(n, int),
        xi=parse_list(xi, float),
        alpha=parse_list(alpha, float),
        N_b=parse_list(nb, int),
        block_start=[block_start] if block_start is not None else None,
        out_dir=out_dir,
        emit=parse_list(emit, str),
        zeta=zeta,
        workers=workers,
    )


def run_guarded(action: Callable[[], None]) -> None:
    """Run a command body, mapping failures to exit codes."""
    try:
        action()
    except (ConfigError, DomainError) as e:
        err_console.print(f"[bold red]Error:[/bold red] {e}")
        raise typer.Exit(EXIT_CONFIG)
    except NumericalStageError as e:
        err_console.print(f"[bold red]Error:[/bold red] stage={e.stage}: {e.message}")
        raise typer.Exit(EXIT_NUMERIC)
    except ChainError as e:
        err_console.print(f"[bold red]Error:[/bold red] {e}")
        raise typer.Exit(EXIT_NUMERIC)


def show_rows(title: str, header: List[str], rows: List[list], limit: int = 20) -> None:
    """Print the first rows of a result as a rich table."""
    table = Table(title=title, box=box.ROUNDED)
    for name in header:
        table.add_column(name, justify="right")
    for row in rows[:limit]:
        table.add_row(*[f"{v:.6g}" if isinstance(v, float) else str(v) for v in row])
    console.print(table)
    if len(rows) > limit:
        console.print(f"[dim]... {len(rows) - limit} more rows[/dim]")


@app.callback()
def main(
    log_level: str = typer.Option("WARNING", "--log-level", help="Logging level (DEBUG, INFO, WARNING, ERROR)")
):
    """Vacuum entanglement of harmonic chains: correlations, Williamson modes, entropies."""
    level = getattr(logging, log_level.upper(), None)
    if not isinstance(level, int):
        err_console.print(f"[bold red]Error:[/bold red] unknown log level '{log_level}'")
        raise typer.Exit(EXIT_CONFIG)
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s: %(message)s")


@app.command("correlations")
def correlations(
    n: int = typer.Option(256, "--n", help="Chain size"),
    xi: Optional[float] = typer.Option(None, "--xi", help="Hyperbolic coupling angle"),
    alpha: Optional[float] = typer.Option(None, "--alpha", help="Coupling alpha (exclusive with --xi)"),
    l_max: int = typer.Option(32, "--l-max", help="Largest separation"),
    config_path: Optional[Path] = typer.Option(None, "--config", help="YAML sweep configuration"),
    out_dir: Optional[str] = typer.Option(None, "--out-dir", help="Output directory"),
    emit: Optional[str] = typer.Option(None, "--emit", help="Comma separated formats: csv,json,svg"),
):
    """Finite and infinite chain correlation functions."""
    def action():
        config = load_config(config_path, n=str(n), xi=None if xi is None else str(xi),
                             alpha=None if alpha is None else str(alpha), nb="1",
                             out_dir=out_dir, emit=emit)
        spec = make_spec(n, config.couplings()[0])
        rows = cmd_correlations(spec, l_max, config.numerics, config.thresholds)
        out = Path(config.output.out_dir)
        write_csv(out / "correlations.csv", CORRELATIONS_HEADER, rows)
        if config.output.wants(EmitFormat.SVG):
            plot_correlations(out / "correlations.svg", rows, spec.xi)
        show_rows(f"Correlations N={n} xi={spec.xi:.6g}", CORRELATIONS_HEADER, rows)
    run_guarded(action)


@app.command("entropy-sweep")
def entropy_sweep(
    config_path: Optional[Path] = typer.Option(None, "--config", help="YAML sweep configuration"),
    n: Optional[str] = typer.Option(None, "--n", help="Comma separated chain sizes"),
    xi: Optional[str] = typer.Option(None, "--xi", help="Comma separated xi values"),
    alpha: Optional[str] = typer.Option(None, "--alpha", help="Comma separated alpha values"),
    nb: Optional[str] = typer.Option(None, "--nb", help="Comma separated block sizes"),
    out_dir: Optional[str] = typer.Option(None, "--out-dir", help="Output directory"),
    emit: Optional[str] = typer.Option(None, "--emit", help="Comma separated formats: csv,json,svg"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Worker threads"),
):
    """Total and per-mode entanglement over a (xi, N_b) grid."""
    def action():
        config = load_config(config_path, n=n, xi=xi, alpha=alpha, nb=nb, out_dir=out_dir,
                             emit=emit, workers=workers)
        for N, rows in cmd_entropy_sweep(config).items():
            write_csv(Path(config.output.out_dir) / f"entropy_sweep_N{N}.csv", ENTROPY_SWEEP_HEADER, rows)
            show_rows(f"Entropy sweep N={N}", ENTROPY_SWEEP_HEADER, rows)
    run_guarded(action)


@app.command("modes")
def modes(
    n: int = typer.Option(256, "--n", help="Chain size"),
    xi: Optional[float] = typer.Option(None, "--xi", help="Hyperbolic coupling angle"),
    alpha: Optional[float] = typer.Option(None, "--alpha", help="Coupling alpha (exclusive with --xi)"),
    nb: int = typer.Option(16, "--nb", help="Block size"),
    block_start: int = typer.Option(0, "--block-start", help="First site of the block"),
    top_k: int = typer.Option(6, "--top-k", help="Number of modes to report"),
    config_path: Optional[Path] = typer.Option(None, "--config", help="YAML sweep configuration"),
    out_dir: Optional[str] = typer.Option(None, "--out-dir", help="Output directory"),
    emit: Optional[str] = typer.Option("json", "--emit", help="Comma separated formats: csv,json,svg"),
):
    """Williamson modes of one block as a JSON report and optional SVG."""
    def action():
        config = load_config(config_path, n=str(n), xi=None if xi is None else str(xi),
                             alpha=None if alpha is None else str(alpha), nb=str(nb),
                             out_dir=out_dir, emit=emit)
        spec = make_spec(n, config.couplings()[0])
        report, shapes = cmd_modes(spec, BlockPartition(block_start, nb), top_k,
                                   config.thresholds, config.numerics)
        out = Path(config.output.out_dir)
        if config.output.wants(EmitFormat.JSON):
            write_json(out / "modes.json", report)
        if config.output.wants(EmitFormat.SVG):
            plot_modes(out / "modes.svg", report, top_k, shapes)
        header = ["m", "lambda", "entropy", "parity", "turning_point"]
        rows = [[m, mode["lambda"], mode["entropy"], mode["parity"], mode["turning_point"]]
                for m, mode in enumerate(report["modes"], start=1)]
        show_rows(f"Modes N={n} N_b={nb} total={report['total']:.6g}", header, rows)
    run_guarded(action)


@app.command("scaling")
def scaling(
    config_path: Optional[Path] = typer.Option(None, "--config", help="YAML sweep configuration"),
    n: Optional[str] = typer.Option(None, "--n", help="Chain size"),
    xi: Optional[str] = typer.Option(None, "--xi", help="Hyperbolic coupling angle"),
    alpha: Optional[str] = typer.Option(None, "--alpha", help="Coupling alpha"),
    nb: Optional[str] = typer.Option(None, "--nb", help="Comma separated block sizes"),
    zeta: Optional[float] = typer.Option(None, "--zeta", help="Turning point constant"),
    out_dir: Optional[str] = typer.Option(None, "--out-dir", help="Output directory"),
    emit: Optional[str] = typer.Option(None, "--emit", help="Comma separated formats: csv,json,svg"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Worker threads"),
):
    """Residual mode scaling collapse with the quantization prediction."""
    def action():
        # a lone run without a config file uses the strong coupling preset
        if config_path is None:
            defaults = {"n": "1024", "xi": "10", "nb": "16,32,64"}
        else:
            defaults = {}
        config = load_config(
            config_path,
            n=n or defaults.get("n"),
            xi=xi or (None if alpha else defaults.get("xi")),
            alpha=alpha,
            nb=nb or defaults.get("nb"),
            zeta=zeta, out_dir=out_dir, emit=emit, workers=workers,
        )
        rows = cmd_scaling(config)
        out = Path(config.output.out_dir)
        write_csv(out / "scaling.csv", SCALING_HEADER, rows)
        if config.output.wants(EmitFormat.SVG) and rows:
            plot_scaling(out / "scaling.svg", rows)
        show_rows("Residual mode scaling", SCALING_HEADER, rows)
    run_guarded(action)


@app.command("regime-map")
def regime_map(
    config_path: Optional[Path] = typer.Option(None, "--config", help="YAML sweep configuration"),
    n: Optional[str] = typer.Option(None, "--n", help="Chain size"),
    xi: Optional[str] = typer.Option(None, "--xi", help="Comma separated xi values"),
    alpha: Optional[str] = typer.Option(None, "--alpha", help="Comma separated alpha values"),
    nb: Optional[str] = typer.Option(None, "--nb", help="Comma separated block sizes"),
    out_dir: Optional[str] = typer.Option(None, "--out-dir", help="Output directory"),
    emit: Optional[str] = typer.Option(None, "--emit", help="Comma separated formats: csv,json,svg"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Worker threads"),
):
    """Total entanglement over the (xi, N_b) plane with level curves."""
    def action():
        config = load_config(config_path, n=n, xi=xi, alpha=alpha, nb=nb, out_dir=out_dir,
                             emit=emit, workers=workers)
        rows = cmd_regime_map(config)
        out = Path(config.output.out_dir)
        write_csv(out / "regime_map.csv", REGIME_MAP_HEADER, rows)
        if config.output.wants(EmitFormat.SVG):
            plot_regime_map(out / "regime_map.svg", rows)
        show_rows("Regime map", REGIME_MAP_HEADER, rows)
    run_guarded(action)


@app.command("single-site")
def single_site(
    config_path: Optional[Path] = typer.Option(None, "--config", help="YAML sweep configuration"),
    n: Optional[str] = typer.Option(None, "--n", help="Chain size"),
    xi: Optional[str] = typer.Option(None, "--xi", help="Comma separated xi values"),
    alpha: Optional[str] = typer.Option(None, "--alpha", help="Comma separated alpha values"),
    out_dir: Optional[str] = typer.Option(None, "--out-dir", help="Output directory"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Worker threads"),
):
    """Single site entanglement against the three regime formulas."""
    def action():
        config = load_config(config_path, n=n, xi=xi, alpha=alpha, nb="1", out_dir=out_dir,
                             workers=workers)
        rows = cmd_single_site(config)
        write_csv(Path(config.output.out_dir) / "single_site.csv", SINGLE_SITE_HEADER, rows)
        show_rows(f"Single site N={config.grid.N[0]}", SINGLE_SITE_HEADER, rows)
    run_guarded(action)


@app.command("fit-slope")
def fit_slope(
    csv_path: Path = typer.Argument(..., help="CSV file produced by entropy-sweep"),
    x_col: str = typer.Option("N_b", "--x-col", help="Column used as abscissa"),
    y_col: str = typer.Option("total", "--y-col", help="Column used as ordinate"),
    linear_x: bool = typer.Option(False, "--linear-x", help="Fit against x instead of ln x"),
):
    """Least squares slope of a column against the log of another."""
    def action():
        if not csv_path.exists():
            raise ConfigError(f"File not found: {csv_path}")
        result = cmd_fit_slope(csv_path, x_col, y_col, log_x=not linear_x)
        table = Table(title=f"Fit of {y_col} against {'' if linear_x else 'ln '}{x_col}", box=box.ROUNDED)
        table.add_column("Quantity", style="cyan")
        table.add_column("Value", justify="right")
        table.add_row("slope", format(result.slope, ".17g"))
        table.add_row("intercept", format(result.intercept, ".17g"))
        table.add_row("residual_rms", format(result.residual_rms, ".3g"))
        table.add_row("points_used", str(result.points_used))
        console.print(table)
    run_guarded(action)


@app.command("continuum-check")
def continuum_check(
    mu: float = typer.Option(1.0, "--mu", help="Field mass"),
    circumference: float = typer.Option(10.0, "--L", help="Circle circumference"),
    x: str = typer.Option("0.3125,1.25,2.5", "--x", help="Comma separated grid-aligned positions"),
    n: str = typer.Option("256,512,1024", "--n", help="Comma separated chain sizes"),
    out_dir: str = typer.Option("results", "--out-dir", help="Output directory"),
):
    """Lattice to continuum correlator convergence."""
    def action():
        sizes = parse_list(n, int)
        positions = parse_list(x, float)
        if not sizes or not positions:
            raise ConfigError("Positions and sizes must be non-empty")
        if math.isinf(circumference):
            raise ConfigError("The correspondence check needs a finite circumference")
        cont = ContinuumSpec(mu=mu, L=circumference, N=sizes[0])
        rows = cmd_continuum_check(cont, positions, sizes)
        write_csv(Path(out_dir) / "continuum_check.csv", CONTINUUM_HEADER, rows)
        show_rows("Continuum correspondence", CONTINUUM_HEADER, rows)
    run_guarded(action)


@app.command("init-config")
def init_config(
    path: Path = typer.Argument(Path("sweep.yaml"), help="Where to write the example configuration"),
):
    """Write an example YAML sweep configuration."""
    generate_example_config_file(path)
    console.print(f"✅ Example configuration written to [bold green]{path}[/bold green]")


if __name__ == "__main__":
    app()
