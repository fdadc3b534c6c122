"""
Chain parameterization and vacuum correlation functions.

The chain Hamiltonian is H = (E_0/2) sum_i [p_i^2 + q_i^2 - alpha q_i q_{i+1}]
on a ring of N sites. Its ground state correlations are the cosine sums

    g_l = (1/2N) sum_k cos(l theta_k) / nu(theta_k)
    h_l = (1/2N) sum_k nu(theta_k) cos(l theta_k)

with nu(theta) = sqrt(1 - alpha cos theta). This module evaluates them for a
finite ring, in closed hypergeometric form for the infinite chain, and in the
weak and strong coupling asymptotic forms.
"""

import logging
import math
from typing import Optional, Tuple, Union

import numpy as np
from scipy.special import digamma, gammaln, gammasgn

from core.errors import ConvergenceError, DomainError
from core.interfaces import ChainSpec, CorrelationTable, Regime, RegimeScales
from utils.sweep_config import CorrelationMethod, NumericsSettings, Thresholds

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
EULER_GAMMA = float(np.euler_gamma)

# Rows of the direct cosine sum evaluated per block.
_DIRECT_CHUNK = 256
# Terms evaluated per vectorized step of a hypergeometric series.
_SERIES_CHUNK = 2048


def dispersion(theta: Union[float, np.ndarray], alpha: float,
               one_minus_alpha: Optional[float] = None) -> Union[float, np.ndarray]:
    """Chain dispersion nu(theta) = sqrt(1 - alpha cos theta).

    Evaluated as sqrt((1 - alpha) + 2 alpha sin^2(theta/2)) so the theta ~ 0
    modes keep their significant digits.

    Args:
        theta: Wave angle(s) in [0, 2 pi)
        alpha: Coupling in (0, 1)
        one_minus_alpha: Precomputed 1 - alpha; derived from alpha if omitted

    Returns:
        nu(theta), scalar or array matching theta
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    oma = (1.0 - alpha) if one_minus_alpha is None else one_minus_alpha
    s = np.sin(np.asarray(theta, dtype=float) / 2.0)
    result = np.sqrt(oma + 2.0 * alpha * s * s)
    return float(result) if np.ndim(result) == 0 else result


def _mode_dispersion(spec: ChainSpec) -> np.ndarray:
    k = np.arange(spec.N)
    s = np.sin(np.pi * k / spec.N)
    return np.sqrt(spec.one_minus_alpha + 2.0 * spec.alpha * s * s)


def _mirror(half: np.ndarray, N: int) -> np.ndarray:
    """Extend values for l = 0..N//2 to the full ring using f_l = f_{N-l}."""
    full = np.empty(N)
    top = N // 2
    full[:top + 1] = half[:top + 1]
    full[top + 1:] = half[1:N - top][::-1]
    return full


def _direct_sums(nu: np.ndarray, N: int) -> Tuple[np.ndarray, np.ndarray]:
    top = N // 2
    k = np.arange(N)
    inv_nu = 1.0 / nu
    g_half = np.empty(top + 1)
    h_half = np.empty(top + 1)
    for start in range(0, top + 1, _DIRECT_CHUNK):
        l = np.arange(start, min(start + _DIRECT_CHUNK, top + 1))
        # exact integer phase reduction keeps the cosine arguments in [0, 2 pi)
        phase = np.cos(2.0 * np.pi * (np.outer(l, k) % N) / N)
        g_half[l] = phase @ inv_nu
        h_half[l] = phase @ nu
    return g_half / (2.0 * N), h_half / (2.0 * N)


def _fft_sums(nu: np.ndarray, N: int) -> Tuple[np.ndarray, np.ndarray]:
    g_half = np.fft.rfft(1.0 / nu).real / (2.0 * N)
    h_half = np.fft.rfft(nu).real / (2.0 * N)
    return g_half, h_half


def build_correlations(spec: ChainSpec, numerics: Optional[NumericsSettings] = None) -> CorrelationTable:
    """Vacuum correlation table of a finite ring.

    Args:
        spec: Chain specification with N >= 2
        numerics: Evaluation strategy; the direct O(N^2) sum is used up to
            direct_max_n sites when the method is "auto"

    Returns:
        CorrelationTable with g and h of length N
    """
    if spec.N < 2:
        raise DomainError(f"Correlation table needs N >= 2, got {spec.N}")
    numerics = numerics or NumericsSettings()
    method = numerics.correlation_method
    if method == CorrelationMethod.AUTO:
        method = CorrelationMethod.DIRECT if spec.N <= numerics.direct_max_n else CorrelationMethod.FFT

    nu = _mode_dispersion(spec)
    if method == CorrelationMethod.DIRECT:
        g_half, h_half = _direct_sums(nu, spec.N)
    else:
        g_half, h_half = _fft_sums(nu, spec.N)

    table = CorrelationTable(spec=spec, g=_mirror(g_half, spec.N), h=_mirror(h_half, spec.N))
    logger.debug(f"Built {method.value} correlation table N={spec.N} xi={spec.xi:.6g} g0={table.g[0]:.6g}")
    return table


def circulant_purity_defect(table: CorrelationTable) -> float:
    """Largest entrywise deviation of circ(g) circ(h) from I/4."""
    product = np.fft.ifft(np.fft.fft(table.g) * np.fft.fft(table.h)).real
    target = np.zeros(table.N)
    target[0] = 0.25
    return float(np.max(np.abs(product - target)))


def _pochhammer_log_series(a: float, b: float, y: float, tolerance: float, budget: int) -> float:
    """Logarithmic connection series for 2F1(a, b; a+b; 1-y), without the Gamma prefactor."""
    total = 0.0
    coeff = 1.0
    log_y = math.log(y)
    for n in range(budget):
        bracket = 2.0 * digamma(n + 1.0) - digamma(a + n) - digamma(b + n) - log_y
        term = coeff * bracket
        total += term
        if n > 0 and abs(term) <= tolerance * abs(total):
            return total
        coeff *= (a + n) * (b + n) / ((n + 1.0) ** 2) * y
    raise ConvergenceError(f"Logarithmic 2F1 series did not converge in {budget} terms (a={a}, b={b}, 1-x={y})")


def _power_series(a: float, b: float, c: float, x: float, one_minus_x: float,
                  tolerance: float, budget: int) -> float:
    total = 0.0
    term = 1.0
    algebraic = one_minus_x <= 0.0 or x > 1.0 - 1e-3
    for start in range(0, budget, _SERIES_CHUNK):
        n = np.arange(start, min(start + _SERIES_CHUNK, budget), dtype=float)
        ratios = (a + n) * (b + n) / ((c + n) * (n + 1.0)) * x
        terms = term * np.concatenate(([1.0], np.cumprod(ratios[:-1])))
        partial = math.fsum(terms)
        total += partial
        last = terms[-1] * ratios[-1]
        term = last
        if not np.isfinite(total):
            break
        # geometric tail bound away from x = 1, algebraic n |t_n| bound near it
        if algebraic:
            tail = abs(last) * (n[-1] + 1.0)
        else:
            tail = abs(last) / one_minus_x
        if tail <= tolerance * max(1.0, abs(total)):
            return total
        if last == 0.0:
            return total
    raise ConvergenceError(f"2F1 power series did not converge in {budget} terms (a={a}, b={b}, c={c}, x={x})")


def hypergeometric_2f1(a: float, b: float, c: float, x: float, one_minus_x: Optional[float] = None,
                       thresholds: Optional[Thresholds] = None) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; x) for 0 <= x < 1.

    The power series is used up to x = z2_log_branch. Above it the
    logarithmic connection formula in 1 - x handles the c = a + b case; other
    cases fall back to the power series with an algebraic tail bound.

    Args:
        a, b, c: Parameters, c not a non-positive integer
        x: Argument
        one_minus_x: Precomputed 1 - x, used near x = 1
        thresholds: Tolerance, term budget and branch point

    Returns:
        The function value
    """
    thresholds = thresholds or Thresholds()
    if not 0.0 <= x < 1.0:
        raise DomainError(f"2F1 argument must lie in [0, 1), got {x}")
    y = (1.0 - x) if one_minus_x is None else one_minus_x
    tol = thresholds.hyp_tolerance
    budget = thresholds.hyp_term_budget
    if x <= thresholds.z2_log_branch:
        return _power_series(a, b, c, x, y, tol, budget)
    if abs(c - a - b) < 1e-14 and a > 0.0 and b > 0.0:
        prefactor = gammasgn(c) * math.exp(gammaln(c) - gammaln(a) - gammaln(b))
        return prefactor * _pochhammer_log_series(a, b, y, tol, budget)
    return _power_series(a, b, c, x, y, tol, budget)


def hyp2f1_log_leading(l: int, one_minus_z2: float) -> float:
    """Leading logarithmic asymptote of 2F1(1/2, l+1/2; l+1; z^2) as z -> 1."""
    prefactor = math.exp(gammaln(l + 1.0) - gammaln(0.5) - gammaln(l + 0.5))
    return -prefactor * (math.log(one_minus_z2 / 4.0) + digamma(l + 0.5) + EULER_GAMMA)


def _check_separation(l: int) -> int:
    if int(l) != l or l < 0:
        raise DomainError(f"Separation must be a non-negative integer, got {l}")
    return int(l)


def g_infinite(l: int, spec: ChainSpec, thresholds: Optional[Thresholds] = None) -> float:
    """Infinite chain g_l = (z^l / 2 mu) C(l-1/2, l) 2F1(1/2, l+1/2; l+1; z^2)."""
    l = _check_separation(l)
    z2 = spec.z * spec.z
    binom = math.exp(gammaln(l + 0.5) - gammaln(l + 1.0) - gammaln(0.5))
    series = hypergeometric_2f1(0.5, l + 0.5, l + 1.0, z2, spec.one_minus_z_squared, thresholds)
    return spec.z ** l / (2.0 * spec.mu_aux) * binom * series


def h_infinite(l: int, spec: ChainSpec, thresholds: Optional[Thresholds] = None) -> float:
    """Infinite chain h_l = (mu z^l / 2) C(l-3/2, l) 2F1(-1/2, l-1/2; l+1; z^2).

    Near z = 1 the series converges only algebraically; there h_l is obtained
    from g through nu = (1 - alpha cos theta)/nu, i.e.
    h_l = g_l - (alpha/2)(g_{l+1} + g_{|l-1|}).
    """
    l = _check_separation(l)
    thresholds = thresholds or Thresholds()
    z2 = spec.z * spec.z
    if z2 > thresholds.z2_log_branch:
        g_mid = g_infinite(l, spec, thresholds)
        g_up = g_infinite(l + 1, spec, thresholds)
        g_down = g_infinite(abs(l - 1), spec, thresholds)
        neighbours = g_up + g_down
        return (g_mid - 0.5 * neighbours) + 0.5 * spec.one_minus_alpha * neighbours
    if l == 0:
        binom = 1.0
    else:
        # Gamma(-1/2) = -2 sqrt(pi)
        binom = -math.exp(gammaln(l - 0.5) - gammaln(l + 1.0)) / (2.0 * math.sqrt(math.pi))
    series = hypergeometric_2f1(-0.5, l - 0.5, l + 1.0, z2, spec.one_minus_z_squared, thresholds)
    return spec.mu_aux * spec.z ** l / 2.0 * binom * series


def h_strong_limit(l: int) -> float:
    """The alpha -> 1 limit of h_l, independent of alpha."""
    l = _check_separation(l)
    return -(SQRT2 / math.pi) / (4.0 * l * l - 1.0)


def g_weak_asymptotic(l: int, spec: ChainSpec) -> float:
    """Weak coupling, large l form l^(-1/2) z^l / (2 sqrt(pi))."""
    if l < 1:
        raise DomainError(f"Asymptotic form needs l >= 1, got {l}")
    return l ** -0.5 * spec.z ** l / (2.0 * math.sqrt(math.pi))


def h_weak_asymptotic(l: int, spec: ChainSpec) -> float:
    """Weak coupling, large l form -l^(-3/2) z^l / (4 sqrt(pi))."""
    if l < 1:
        raise DomainError(f"Asymptotic form needs l >= 1, got {l}")
    return -l ** -1.5 * spec.z ** l / (4.0 * math.sqrt(math.pi))


def g_strong_asymptotic(l: float, spec: ChainSpec) -> float:
    """Strong coupling form -(1/(sqrt(2) pi)) ln(((1 - z)/2) l).

    Only meaningful while the logarithm's argument stays at or below one,
    i.e. for separations up to about twice the correlation length.
    """
    if l < 1:
        raise DomainError(f"Strong coupling form needs l >= 1, got {l}")
    argument = 0.5 * spec.one_minus_z * l
    if argument > 1.0 * (1.0 + 1e-12):
        raise DomainError(f"Separation l={l} lies beyond the strong coupling range 2/(1-z)")
    return -math.log(argument) / (SQRT2 * math.pi)


def finite_size_g_correction(spec: ChainSpec) -> float:
    """The theta = 0 term 1/(2N sqrt(1 - alpha)) = N_t/(2 sqrt(2) N)."""
    return 1.0 / (2.0 * spec.N * math.sqrt(spec.one_minus_alpha))


def regime_scales(spec: ChainSpec) -> RegimeScales:
    """Correlation length l_c, transitional scale N_t and critical size N_c."""
    l_c = -1.0 / math.log1p(-spec.one_minus_z)
    N_t = math.sqrt(2.0 / spec.one_minus_alpha)
    N_c = N_t / math.log(N_t) if N_t > math.e else N_t
    return RegimeScales(l_c=l_c, N_t=N_t, N_c=N_c)


def balance_critical_size(spec: ChainSpec) -> float:
    """Chain size where the finite-size term matches the strong coupling correlation.

    Solving 1/(2N sqrt(1-alpha)) = -(1/(sqrt(2) pi)) ln((1-z)/2) for N gives
    pi N_t / (2 ln(2/(1-z))), which reduces to (pi/2) N_t/ln N_t near alpha = 1.
    """
    N_t = math.sqrt(2.0 / spec.one_minus_alpha)
    return math.pi * N_t / (2.0 * math.log(2.0 / spec.one_minus_z))


def classify_regime(spec: ChainSpec, thresholds: Optional[Thresholds] = None) -> Regime:
    """Regime label: I for N > factor * N_t, III for N_c > N, II otherwise."""
    thresholds = thresholds or Thresholds()
    scales = regime_scales(spec)
    if spec.N > thresholds.regime_factor_I * scales.N_t:
        return Regime.I
    if scales.N_c > spec.N:
        return Regime.III
    return Regime.II


def single_site_kappa2(table: CorrelationTable) -> float:
    """kappa^2 = g_0 h_0 - 1/4 for a single site, as the cancellation free sum -sum_{l>0} g_l h_l."""
    return max(-math.fsum(table.g[1:] * table.h[1:]), 0.0)


def single_site_lambda(table: CorrelationTable) -> Tuple[float, float]:
    """Symplectic eigenvalue of a single site and its excess over 1/2.

    Returns:
        Tuple of (lambda, lambda - 1/2)
    """
    kappa2 = single_site_kappa2(table)
    lam = math.sqrt(table.g[0] * table.h[0])
    return lam, kappa2 / (math.sqrt(0.25 + kappa2) + 0.5)


def single_site_partner(table: CorrelationTable) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Complement partner of a single-site block.

    Returns:
        Tuple of (u_B, v_B, participation) over sites l = 1..N-1, with
        v_B(l) = g_l / kappa and u_B(l) = -h_l / kappa
    """
    kappa = math.sqrt(single_site_kappa2(table))
    if kappa == 0.0:
        raise DomainError("Single site is not entangled with the rest of the chain")
    v_B = table.g[1:] / kappa
    u_B = -table.h[1:] / kappa
    return u_B, v_B, u_B * v_B


def participation_decay_slope(table: CorrelationTable, l_min: int, l_max: int,
                              remove_exponential: bool = False) -> float:
    """Log-log slope of the single-site partner participation over l_min..l_max.

    Args:
        table: Correlation table
        l_min, l_max: Inclusive separation range, 1 <= l_min < l_max <= N/2
        remove_exponential: Divide out z^(2l) before fitting (weak coupling)

    Returns:
        Fitted exponent of l
    """
    if not 1 <= l_min < l_max <= table.N // 2:
        raise DomainError(f"Invalid separation range [{l_min}, {l_max}] for N={table.N}")
    _, _, participation = single_site_partner(table)
    l = np.arange(l_min, l_max + 1)
    values = participation[l - 1]
    log_values = np.log(values)
    if remove_exponential:
        log_values = log_values - 2.0 * l * math.log(table.spec.z)
    slope, _ = np.polyfit(np.log(l), log_values, 1)
    return float(slope)
