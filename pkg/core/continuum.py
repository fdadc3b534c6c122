"""
Massive free scalar field correlators and their lattice correspondence.

On the line the vacuum correlators are g(x) = K_0(mu|x|)/(2 pi) and
h(x) = -(mu/(2 pi |x|)) K_1(mu|x|). A circle of circumference L is handled
by summing periodic images. A chain of N sites reproduces the circle after
discretize(), with g(x) ~ g_n/sqrt(2) and h(x) ~ sqrt(2) (N/L)^2 h_n.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.special import k0, k1

from core.chain_model import EULER_GAMMA, build_correlations, regime_scales
from core.errors import ConvergenceError, DomainError
from core.interfaces import ChainSpec, ContinuumSpec
from utils.sweep_config import NumericsSettings

logger = logging.getLogger(__name__)

# Image sums stop once the next pair of images is below this fraction of the total.
IMAGE_TOLERANCE = 1e-16
MAX_IMAGES = 10_000
GRID_ALIGNMENT_TOLERANCE = 1e-9


def _check_position(x: float, mu: float) -> float:
    if not mu > 0.0:
        raise DomainError(f"Mass must be positive, got {mu}")
    r = abs(float(x))
    if r == 0.0:
        raise DomainError("Continuum correlators are singular at x = 0")
    return r


def g_cont(x: float, mu: float) -> float:
    """Position correlator K_0(mu|x|)/(2 pi) on the infinite line."""
    r = _check_position(x, mu)
    return float(k0(mu * r)) / (2.0 * math.pi)


def h_cont(x: float, mu: float) -> float:
    """Momentum correlator -(mu/(2 pi |x|)) K_1(mu|x|) on the infinite line."""
    r = _check_position(x, mu)
    return -mu * float(k1(mu * r)) / (2.0 * math.pi * r)


def g_cont_log_asymptote(x: float, mu: float) -> float:
    """Short distance form -(1/2 pi)[ln(mu|x|/2) + gamma]."""
    r = _check_position(x, mu)
    return -(math.log(0.5 * mu * r) + EULER_GAMMA) / (2.0 * math.pi)


def h_cont_exp_asymptote(x: float, mu: float) -> float:
    """Long distance form -sqrt(mu/(8 pi |x|^3)) exp(-mu|x|)."""
    r = _check_position(x, mu)
    return -math.sqrt(mu / (8.0 * math.pi * r ** 3)) * math.exp(-mu * r)


def g_cont_quadrature(x: float, mu: float) -> float:
    """g(x) from its Fourier integral (1/2 pi) int_0^inf cos(k x)/sqrt(k^2 + mu^2) dk."""
    r = _check_position(x, mu)
    value, error = quad(lambda k: 1.0 / math.sqrt(k * k + mu * mu), 0.0, np.inf,
                        weight="cos", wvar=r, limlst=200)
    logger.debug(f"Fourier quadrature at x={r}: {value:.15g} (error {error:.2e})")
    return value / (2.0 * math.pi)


def _image_sum(correlator, x: float, mu: float, L: float) -> float:
    if math.isinf(L):
        return correlator(x, mu)
    if not L > 0.0:
        raise DomainError(f"Circumference must be positive, got {L}")
    # reduce to the fundamental cell (-L/2, L/2]
    x = float(x) - L * math.floor(float(x) / L + 0.5)
    terms = [correlator(x, mu)]
    for n in range(1, MAX_IMAGES):
        pair = correlator(x + n * L, mu) + correlator(x - n * L, mu)
        terms.append(pair)
        if abs(pair) <= IMAGE_TOLERANCE * abs(math.fsum(terms)):
            return math.fsum(terms)
    raise ConvergenceError(f"Image sum did not converge for mu L = {mu * L}")


def g_cont_periodic(x: float, mu: float, L: float) -> float:
    """Position correlator on a circle of circumference L."""
    return _image_sum(g_cont, x, mu, L)


def h_cont_periodic(x: float, mu: float, L: float) -> float:
    """Momentum correlator on a circle of circumference L."""
    return _image_sum(h_cont, x, mu, L)


def discretize(cont: ContinuumSpec) -> Tuple[ChainSpec, float, float]:
    """Chain whose vacuum reproduces the field on the circle.

    Lambda = sqrt(2 (N/L)^2 + mu^2) and 1 - alpha = (mu/Lambda)^2.

    Returns:
        Tuple of (ChainSpec, Lambda, E_0) with E_0 = Lambda
    """
    if math.isinf(cont.L):
        raise DomainError("Discretization needs a finite circumference")
    density = cont.N / cont.L
    scale = math.sqrt(2.0 * density * density + cont.mu * cont.mu)
    one_minus_alpha = (cont.mu / scale) ** 2
    spec = ChainSpec.from_one_minus_alpha(cont.N, one_minus_alpha)
    return spec, scale, scale


def lattice_index(cont: ContinuumSpec, x: float) -> int:
    """Site index round((x + L/2) N/L) of a position on the circle."""
    if math.isinf(cont.L):
        raise DomainError("Lattice index needs a finite circumference")
    return int(round((x + 0.5 * cont.L) * cont.N / cont.L))


def lattice_separation(cont: ContinuumSpec, x: float) -> int:
    """Correlation index of position x, counted from the site at x = 0.

    Raises:
        DomainError: if x is not a multiple of the lattice spacing
    """
    steps = x * cont.N / cont.L
    if abs(steps - round(steps)) > GRID_ALIGNMENT_TOLERANCE * max(1.0, abs(steps)):
        raise DomainError(f"x={x} is not aligned with the lattice of N={cont.N} sites")
    return abs(lattice_index(cont, x) - lattice_index(cont, 0.0)) % cont.N


def correlation_scale_ratio(cont: ContinuumSpec) -> float:
    """Chain correlation length in units of the field's 1/mu, l_c mu L/N."""
    spec, _, _ = discretize(cont)
    return regime_scales(spec).l_c * cont.mu * cont.L / cont.N


@dataclass(frozen=True)
class CorrespondenceRow:
    x: float
    N: int
    g_discrete: float
    g_cont: float
    rel_err: float
    h_discrete: float
    h_cont: float
    rel_err_h: float


@dataclass(frozen=True)
class CorrespondenceReport:
    """Lattice versus continuum comparison across chain sizes.

    order_g and order_h are the fitted exponents p in err ~ N^-p, nan with
    fewer than two sizes.
    """
    rows: List[CorrespondenceRow] = field(default_factory=list)
    order_g: float = math.nan
    order_h: float = math.nan

    def errors_decrease(self) -> bool:
        g_err = [row.rel_err for row in self.rows]
        h_err = [row.rel_err_h for row in self.rows]
        return all(b < a for a, b in zip(g_err, g_err[1:])) and all(b < a for a, b in zip(h_err, h_err[1:]))


def _order(sizes: Sequence[int], errors: Sequence[float]) -> float:
    errors = np.asarray(errors, dtype=float)
    if len(sizes) < 2 or np.any(errors <= 0.0):
        return math.nan
    slope, _ = np.polyfit(np.log(np.asarray(sizes, dtype=float)), np.log(errors), 1)
    return float(-slope)


def correspondence_check(cont: ContinuumSpec, x: float, sizes: Optional[Sequence[int]] = None,
                         numerics: Optional[NumericsSettings] = None) -> CorrespondenceReport:
    """Compare rescaled chain correlators with the field on the circle.

    Args:
        cont: Field parameters; cont.N is used when sizes is omitted
        x: Position, aligned with the lattice for every size
        sizes: Chain sizes to compare, increasing
        numerics: Correlation table strategy

    Returns:
        CorrespondenceReport with one row per size
    """
    sizes = list(sizes) if sizes is not None else [cont.N]
    g_ref = g_cont_periodic(x, cont.mu, cont.L)
    h_ref = h_cont_periodic(x, cont.mu, cont.L)
    rows = []
    for N in sizes:
        sized = cont.with_size(N)
        n = lattice_separation(sized, x)
        spec, _, _ = discretize(sized)
        table = build_correlations(spec, numerics)
        g_disc = table.g[n] / math.sqrt(2.0)
        h_disc = math.sqrt(2.0) * (N / cont.L) ** 2 * table.h[n]
        rows.append(CorrespondenceRow(
            x=float(x),
            N=N,
            g_discrete=float(g_disc),
            g_cont=g_ref,
            rel_err=abs(g_disc - g_ref) / abs(g_ref),
            h_discrete=float(h_disc),
            h_cont=h_ref,
            rel_err_h=abs(h_disc - h_ref) / abs(h_ref),
        ))
        logger.debug(f"Correspondence N={N} n={n}: g err {rows[-1].rel_err:.3e}, h err {rows[-1].rel_err_h:.3e}")
    return CorrespondenceReport(
        rows=rows,
        order_g=_order(sizes, [row.rel_err for row in rows]),
        order_h=_order(sizes, [row.rel_err_h for row in rows]),
    )
