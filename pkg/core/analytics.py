"""
Closed-form approximations for the single oscillator, the weak coupling
spectrum, the collective mode and the residual-mode continuum model.

These are used to validate the numerical decomposition in gaussian_core and
to produce the predicted curves written next to the numerical sweeps.
"""

import logging
import math
from typing import Optional, Tuple, Union

import numpy as np
from scipy.integrate import quad
from scipy.optimize import bisect, brentq
from scipy.special import digamma

from core.chain_model import EULER_GAMMA, build_correlations, classify_regime, regime_scales
from core.entanglement import thermal_entropy
from core.errors import ConvergenceError, DomainError
from core.interfaces import ChainSpec, CorrelationTable, Regime, ResidualModel, ScalingPoint
from utils.sweep_config import Thresholds, ValidityWindows

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# Root finding tolerance on f for the residual mode quantization.
QUANTIZATION_XTOL = 1e-13
# Below this |x - y| the residual kernel uses its diagonal limit.
KERNEL_DIAGONAL = 1e-6
PLANE_WAVE_CUTOFF = 40.0


# --- single oscillator -------------------------------------------------------

def single_osc_lambda(spec: ChainSpec, regime: Regime) -> float:
    """Symplectic eigenvalue of a single site in the given regime.

    I: 1/2 + z^2/8, II: (1/pi) sqrt(ln 4 N_t), III: sqrt(N_t/(2 pi N)).
    """
    scales = regime_scales(spec)
    if regime == Regime.I:
        return 0.5 + spec.z * spec.z / 8.0
    if regime == Regime.II:
        return math.sqrt(math.log(4.0 * scales.N_t)) / math.pi
    return math.sqrt(scales.N_t / (2.0 * math.pi * spec.N))


def single_osc_entropy_branch(spec: ChainSpec, regime: Regime) -> float:
    """Single site entanglement from the formula of an explicit regime."""
    if regime == Regime.I:
        x = spec.z * spec.z / 8.0
        return x * (1.0 - math.log(x))
    scales = regime_scales(spec)
    if regime == Regime.II:
        return 1.0 + 0.5 * math.log(math.log(4.0 * scales.N_t) / math.pi ** 2)
    return 1.0 + 0.5 * math.log(scales.N_t / (2.0 * math.pi * spec.N))


def single_osc_entropy(spec: ChainSpec, thresholds: Optional[Thresholds] = None) -> float:
    """Single site entanglement with the branch chosen by classify_regime."""
    return single_osc_entropy_branch(spec, classify_regime(spec, thresholds))


def single_osc_validity(spec: ChainSpec, windows: Optional[ValidityWindows] = None,
                        thresholds: Optional[Thresholds] = None) -> Optional[Regime]:
    """Regime whose branch formula is trusted for this chain, if any."""
    windows = windows or ValidityWindows()
    scales = regime_scales(spec)
    if spec.z <= windows.weak_z_max:
        return Regime.I
    if scales.N_c >= windows.strong_nc_factor * spec.N:
        return Regime.III
    if classify_regime(spec, thresholds) == Regime.II and scales.N_t <= spec.N:
        return Regime.II
    return None


def single_osc_crossover_xi(N: int) -> float:
    """Coupling at which the II and III branch formulas give the same entropy."""
    def difference(xi: float) -> float:
        N_t = regime_scales(ChainSpec.from_xi(N, xi)).N_t
        return N_t / (2.0 * math.pi * N) - math.log(4.0 * N_t) / math.pi ** 2

    low, high = 0.5, 1.0
    while difference(high) <= 0.0:
        low, high = high, 2.0 * high
        if high > 64.0:
            raise ConvergenceError(f"No II/III crossover found for N={N}")
    return float(brentq(difference, low, high, xtol=1e-12))


# --- weak coupling -----------------------------------------------------------

def weak_mode_depth(m: int) -> int:
    """Depth of mode m from the block edge: m/2 for even m, (m+1)/2 for odd m."""
    if m < 1:
        raise DomainError(f"Mode number must be positive, got {m}")
    return m // 2 if m % 2 == 0 else (m + 1) // 2


def weak_mode_excess(d_m: int, z: float) -> float:
    """Leading order lambda - 1/2 = (z/4)^(2(2 d_m - 1))."""
    if d_m < 1:
        raise DomainError(f"Mode depth must be positive, got {d_m}")
    if not 0.0 <= z < 1.0:
        raise DomainError(f"z must lie in [0, 1), got {z}")
    return (z / 4.0) ** (2 * (2 * d_m - 1))


def weak_mode_lambda(d_m: int, z: float) -> float:
    return 0.5 + weak_mode_excess(d_m, z)


def weak_mode_entropy(d_m: int, z: float) -> float:
    """(z/4)^(2(2d-1)) [1 - 2(2d-1) ln(z/4)], zero at z = 0."""
    x = weak_mode_excess(d_m, z)
    if x == 0.0:
        return 0.0
    return x * (1.0 - 2.0 * (2 * d_m - 1) * math.log(z / 4.0))


def wedge_kappa2(d_m: int, N_b: int, table: CorrelationTable, parity: int) -> float:
    """kappa^2 of the localized ansatz, -[h_Nb +- h_(2d-1)][g_Nb +- g_(2d-1)]."""
    if parity not in (1, -1):
        raise DomainError(f"Parity must be +1 or -1, got {parity}")
    if not 1 <= d_m <= (N_b + 1) // 2:
        raise DomainError(f"Depth {d_m} is outside a block of {N_b} sites")
    if 2 * N_b > table.N:
        raise DomainError(f"Block size {N_b} exceeds half the chain (N={table.N})")
    near = 2 * d_m - 1
    h_term = table.h[N_b] + parity * table.h[near]
    g_term = table.g[N_b] + parity * table.g[near]
    return -h_term * g_term


def wedge_lambda(d_m: int, N_b: int, table: CorrelationTable, parity: int) -> float:
    """Symplectic eigenvalue sqrt(1/4 + kappa^2) from the localized ansatz."""
    kappa2 = wedge_kappa2(d_m, N_b, table, parity)
    return math.sqrt(max(0.25 + kappa2, 0.0))


# --- collective mode ---------------------------------------------------------

def collective_h_chi(N_b: int) -> float:
    """Momentum correlation of the uniform block mode in the strong limit.

    h_chi = [psi(N_b + 1/2) + ln 4 + gamma] / (sqrt(2) N_b pi)
    """
    if N_b < 1:
        raise DomainError(f"Block size must be positive, got {N_b}")
    return (digamma(N_b + 0.5) + math.log(4.0) + EULER_GAMMA) / (math.sqrt(2.0) * N_b * math.pi)


def collective_h_chi_large(N_b: int) -> float:
    """Large block form ln(4 N_b)/(sqrt(2) N_b pi)."""
    if N_b < 1:
        raise DomainError(f"Block size must be positive, got {N_b}")
    return math.log(4.0 * N_b) / (math.sqrt(2.0) * N_b * math.pi)


def collective_lambda(N_b: int, g_0: float) -> float:
    """Collective mode eigenvalue sqrt(N_b g_0 h_chi)."""
    return math.sqrt(N_b * g_0 * collective_h_chi(N_b))


def collective_lambda_from_block(table: CorrelationTable, N_b: int) -> float:
    """Collective mode eigenvalue sqrt(g_chi h_chi) with g_chi = chi^T G_A chi.

    chi is the normalized uniform vector on the block.
    """
    if 2 * N_b > table.N:
        raise DomainError(f"Block size {N_b} exceeds half the chain (N={table.N})")
    # sum over i, j of g_|i-j| = N_b g_0 + 2 sum_l (N_b - l) g_l
    l = np.arange(1, N_b)
    g_chi = (N_b * table.g[0] + 2.0 * math.fsum((N_b - l) * table.g[1:N_b])) / N_b
    return math.sqrt(g_chi * collective_h_chi(N_b))


def collective_entropy_asymptotic(spec: ChainSpec, N_b: int,
                                  thresholds: Optional[Thresholds] = None) -> float:
    """Leading strong coupling entanglement of the collective mode.

    (1/2) ln ln N_b + (1/2) ln ln N_t in regime II, and
    (1/2) ln ln N_b + (1/2) ln(N_t/N) in regime III.
    """
    if N_b < 3:
        raise DomainError(f"Collective asymptote needs N_b >= 3, got {N_b}")
    regime = classify_regime(spec, thresholds)
    if regime == Regime.I:
        raise DomainError("Collective mode asymptote applies to regimes II and III only")
    N_t = regime_scales(spec).N_t
    base = 0.5 * math.log(math.log(N_b))
    if regime == Regime.II:
        return base + 0.5 * math.log(math.log(N_t))
    return base + 0.5 * math.log(N_t / spec.N)


# --- residual modes ----------------------------------------------------------

def kappa_of_omega(omega: float) -> float:
    """kappa = 1/(2 sinh(pi omega))."""
    if not omega > 0.0:
        raise DomainError(f"omega must be positive, got {omega}")
    return 0.5 / math.sinh(math.pi * omega)


def lambda_of_omega(omega: float) -> float:
    """lambda = (1/2) coth(pi omega)."""
    if not omega > 0.0:
        raise DomainError(f"omega must be positive, got {omega}")
    return 0.5 / math.tanh(math.pi * omega)


def quantization_function(f: float, zeta: float) -> float:
    """1 - s + (f/2) ln((1+s)/(1-s)) with s = sqrt(1 - zeta f).

    Concave on (0, 1/zeta]: it rises from 0 at f -> 0+ to a maximum above 1
    and falls back to exactly 1 at f = 1/zeta. Every level mu in (0, 1) is
    therefore reached exactly once, below the maximum.
    """
    if not 0.0 < f <= 1.0 / zeta:
        raise DomainError(f"f must lie in (0, 1/zeta], got {f}")
    zf = zeta * f
    s = math.sqrt(max(1.0 - zf, 0.0))
    # 1 - s = zeta f/(1 + s); (1+s)/(1-s) = (1+s)^2/(zeta f)
    return zf / (1.0 + s) + 0.5 * f * (2.0 * math.log1p(s) - math.log(zf))


def quantize_residual(m: int, model: ResidualModel) -> ScalingPoint:
    """Scaled frequency of residual mode m from the quantization condition.

    For mu < 1 the root of F(f) = mu, F being quantization_function, is
    bisected on (0, 1/zeta]. The bracket holds because
    F(0+) = 0 < mu while F(1/zeta) = 1 > mu, and the root is unique since F
    exceeds 1 between its maximum and 1/zeta. The last mode, mu = 1, takes
    the endpoint f = 1/zeta where the turning point closes.

    Args:
        m: Mode number, 2 <= m <= N_b
        model: Block size and turning point constant

    Returns:
        ScalingPoint with f, omega = pi N_b f/4, the predicted ln E/N_b and
        the turning point (1/2) sqrt(1 - zeta f)
    """
    if not 2 <= m <= model.N_b:
        raise DomainError(f"Mode number must satisfy 2 <= m <= N_b={model.N_b}, got {m}")
    mu = m / model.N_b
    f_max = 1.0 / model.zeta
    if mu >= 1.0:
        f = f_max
    else:
        f = bisect(lambda t: quantization_function(t, model.zeta) - mu,
                   1e-300, f_max, xtol=QUANTIZATION_XTOL, maxiter=400)
    omega = math.pi * model.N_b * f / 4.0
    return ScalingPoint(
        mu_scaled=mu,
        f=float(f),
        omega=omega,
        ln_E_over_Nb=-0.5 * math.pi ** 2 * f,
        turning_point=0.5 * math.sqrt(max(1.0 - model.zeta * f, 0.0)),
    )


def residual_scaling_prediction(m: int, N_b: int, zeta: float = 0.45) -> float:
    """Predicted depth -beta_m/N_b = -2 pi omega/N_b = -(pi^2/2) f(m/N_b).

    This is the leading part of ln(E_m)/N_b; the two differ by ln(1 + beta_m)/N_b.
    """
    return quantize_residual(m, ResidualModel(N_b=N_b, zeta=zeta)).ln_E_over_Nb


def small_mu_f(mu: float) -> float:
    """Small mu solution of f ln f = -2 mu on (0, 1/e)."""
    if not 0.0 < mu <= 0.5 / math.e:
        raise DomainError(f"Small mu branch needs 0 < mu <= 1/(2e), got {mu}")
    if mu == 0.5 / math.e:
        return 1.0 / math.e
    return float(brentq(lambda f: f * math.log(f) + 2.0 * mu, 1e-300, 1.0 / math.e, xtol=1e-15))


def outer_mode_omega(m: int, N_b: int) -> float:
    """Linear outer mode spectrum omega_m = m pi/(2 ln N_b)."""
    if m < 1 or N_b < 2:
        raise DomainError(f"Need m >= 1 and N_b >= 2, got m={m}, N_b={N_b}")
    return m * math.pi / (2.0 * math.log(N_b))


def outer_mode_omega_implicit(m: int, N_b: int) -> float:
    """Solve omega = m pi / (2 ln N_b [1 - ln omega / ln N_b]) for the low root."""
    if m < 1 or N_b < 2:
        raise DomainError(f"Need m >= 1 and N_b >= 2, got m={m}, N_b={N_b}")
    log_nb = math.log(N_b)
    peak = N_b / math.e

    def residual(omega: float) -> float:
        return 2.0 * omega * (log_nb - math.log(omega)) - m * math.pi

    if residual(peak) <= 0.0:
        raise DomainError(f"Mode m={m} has no outer frequency for N_b={N_b}")
    return float(brentq(residual, 1e-300, peak, xtol=1e-14))


def outer_mode_entropy_estimate(m: int, N_b: int) -> float:
    """Entanglement estimate -ln(pi^2 m / ln N_b) of an outer residual mode."""
    if m < 1 or N_b < 2:
        raise DomainError(f"Need m >= 1 and N_b >= 2, got m={m}, N_b={N_b}")
    return -math.log(math.pi ** 2 * m / math.log(N_b))


def asymptotic_residual_entropy(N_b: int) -> float:
    """Leading residual mode entanglement (1/3) ln N_b."""
    if N_b < 1:
        raise DomainError(f"Block size must be positive, got {N_b}")
    return math.log(N_b) / 3.0


def residual_entropy_by_quadrature(N_b: int) -> float:
    """(ln N_b/pi^2) times the integral of the thermal entropy over beta."""
    if N_b < 1:
        raise DomainError(f"Block size must be positive, got {N_b}")
    value, error = quad(lambda b: thermal_entropy(b) if b > 0.0 else 0.0, 0.0, np.inf,
                        epsabs=1e-13, epsrel=1e-12, limit=200)
    logger.debug(f"Thermal entropy integral {value:.15g} (error {error:.2e})")
    return math.log(N_b) / math.pi ** 2 * value


# --- continuum kernel --------------------------------------------------------

def log_coordinate(x: ArrayLike) -> ArrayLike:
    """u = ln((1 + 2x)/(1 - 2x)), mapping (-1/2, 1/2) onto the real line."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) >= 0.5):
        raise DomainError("Scaled positions must satisfy |x| < 1/2")
    result = np.log1p(2.0 * x) - np.log1p(-2.0 * x)
    return float(result) if result.ndim == 0 else result


def continuum_kernel(x: ArrayLike, y: ArrayLike, spec: ChainSpec, N_b: int,
                     g0: Optional[float] = None) -> Tuple[ArrayLike, ArrayLike, ArrayLike]:
    """Scaled kernel pieces (Gamma_CS, Gamma_CA, Gamma_R) of the residual eigenproblem.

    N_b^-1 Gamma(x, y) approximates sum over the complement of g_(k-i) h_(k-j)
    for block positions x = i/N_b and y = j/N_b measured from the centre.

    Args:
        x, y: Scaled positions, |x|, |y| < 1/2; arrays broadcast
        spec: Chain specification, used for g0 when not given
        N_b: Block size
        g0: On-site position correlation; taken from the finite chain if omitted
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(np.abs(x) >= 0.5) or np.any(np.abs(y) >= 0.5):
        raise DomainError("Scaled positions must satisfy |x|, |y| < 1/2")
    if g0 is None:
        g0 = float(build_correlations(spec).g[0])
    x, y = np.broadcast_arrays(x, y)
    qx = 0.25 - x * x
    qy = 0.25 - y * y
    u = np.log1p(2.0 * x) - np.log1p(-2.0 * x)
    v = np.log1p(2.0 * y) - np.log1p(-2.0 * y)

    gamma_cs = -math.sqrt(2.0) / (4.0 * math.pi * qy) * (
        g0 - np.log(N_b * np.sqrt(qx)) / (math.sqrt(2.0) * math.pi))
    gamma_ca = x / (4.0 * math.pi ** 2 * qx) * v

    delta = x - y
    diagonal = np.abs(delta) < KERNEL_DIAGONAL
    safe = np.where(diagonal, 1.0, delta)
    gamma_r = np.where(diagonal,
                       1.0 / (math.pi ** 2 * (1.0 - 4.0 * x * x)),
                       (u - v) / (4.0 * math.pi ** 2 * safe))

    if gamma_r.ndim == 0:
        return float(gamma_cs), float(gamma_ca), float(gamma_r)
    return gamma_cs, gamma_ca, gamma_r


def transformed_kernel(u: ArrayLike, v: ArrayLike) -> ArrayLike:
    """Residual kernel in log coordinates, (u - v)/(8 pi^2 tanh((u - v)/2))."""
    d = np.asarray(u, dtype=float) - np.asarray(v, dtype=float)
    small = np.abs(d) < 1e-8
    safe = np.where(small, 1.0, d)
    result = np.where(small, 1.0 / (4.0 * math.pi ** 2), safe / (8.0 * math.pi ** 2 * np.tanh(0.5 * safe)))
    return float(result) if result.ndim == 0 else result


def plane_wave_residual(omega: float, cutoff: float = PLANE_WAVE_CUTOFF) -> float:
    """Eigenvalue of the transformed kernel on cos(omega u), which should equal -kappa^2.

    The kernel grows like |t|/(8 pi^2); that part integrates to -2/omega^2 in
    the distributional sense and is added analytically. The remainder
    2|t|/(e^|t| - 1) is integrated numerically over [-cutoff, cutoff].
    """
    if not omega > 0.0:
        raise DomainError(f"omega must be positive, got {omega}")

    def bose(t: float) -> float:
        return 1.0 if t == 0.0 else t / math.expm1(t)

    half, _ = quad(bose, 0.0, cutoff, weight="cos", wvar=omega, limit=400,
                   epsabs=1e-14, epsrel=1e-12)
    return (4.0 * half - 2.0 / omega ** 2) / (8.0 * math.pi ** 2)


def residual_mode_function(x: ArrayLike, omega: float, parity: int) -> ArrayLike:
    """Continuum residual mode cos or sin of omega ln((1+2x)/(1-2x)), over (1 - 4x^2)."""
    if parity not in (1, -1):
        raise DomainError(f"Parity must be +1 or -1, got {parity}")
    x = np.asarray(x, dtype=float)
    phase = omega * np.asarray(log_coordinate(x))
    wave = np.cos(phase) if parity == 1 else np.sin(phase)
    result = wave / (1.0 - 4.0 * x * x)
    return float(result) if result.ndim == 0 else result
