"""
Entropies of Williamson modes and block entanglement reports.

A mode with symplectic eigenvalue lambda contributes the von Neumann entropy
S = (lambda + 1/2) ln(lambda + 1/2) - (lambda - 1/2) ln(lambda - 1/2). The
functions here take the excess x = lambda - 1/2 wherever possible, since
lambda itself rounds to 1/2 long before the entropy becomes negligible.
"""

import logging
import math
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError
from scipy.special import xlogy

from core.chain_model import classify_regime
from core.errors import DomainError, NumericalStageError
from core.gaussian_core import (complement_spectrum, extract_block, map_modes, participation,
                                turning_point, williamson_modes)
from core.interfaces import (BlockPartition, CorrelationTable, EntanglementReport, FitResult,
                             ModePair)
from utils.sweep_config import NumericsSettings, Thresholds

logger = logging.getLogger(__name__)

# lambda below 1/2 by more than this is rejected rather than clamped
LAMBDA_FLOOR_TOLERANCE = 1e-9
SMALL_EXCESS_SWITCH = 0.01
LARGE_LAMBDA_SWITCH = 50.0
LARGE_BETA = 50.0


def entropy_of_excess(x: float) -> float:
    """Mode entropy as a function of x = lambda - 1/2.

    S = (1 + x) ln(1 + x) - x ln x, exactly 0 at x = 0.
    """
    if x < -LAMBDA_FLOOR_TOLERANCE:
        raise DomainError(f"Symplectic eigenvalue excess {x} lies below zero")
    if x <= 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf
    return float((1.0 + x) * math.log1p(x) - xlogy(x, x))


def entropy_of_lambda(lam: float) -> float:
    """Von Neumann entropy of a mode with symplectic eigenvalue lam >= 1/2."""
    if lam < 0.5 - LAMBDA_FLOOR_TOLERANCE:
        raise DomainError(f"Symplectic eigenvalue {lam} lies below 1/2")
    return entropy_of_excess(max(lam - 0.5, 0.0))


def beta_of_excess(x: float) -> float:
    """Boltzmann factor ln((lambda + 1/2)/(lambda - 1/2)) from the excess; inf at x = 0."""
    if x < -LAMBDA_FLOOR_TOLERANCE:
        raise DomainError(f"Symplectic eigenvalue excess {x} lies below zero")
    if x <= 0.0:
        return math.inf
    return math.log1p(1.0 / x)


def beta_of_lambda(lam: float) -> float:
    """Boltzmann factor of a mode: lambda = (1/2) coth(beta/2)."""
    if lam < 0.5 - LAMBDA_FLOOR_TOLERANCE:
        raise DomainError(f"Symplectic eigenvalue {lam} lies below 1/2")
    return beta_of_excess(lam - 0.5)


def lambda_of_beta(beta: float) -> float:
    """Symplectic eigenvalue (1/2) coth(beta/2)."""
    if not beta > 0.0:
        raise DomainError(f"beta must be positive, got {beta}")
    if math.isinf(beta):
        return 0.5
    return 0.5 / math.tanh(0.5 * beta)


def excess_of_beta(beta: float) -> float:
    """lambda - 1/2 = 1/(e^beta - 1), without cancellation."""
    if not beta > 0.0:
        raise DomainError(f"beta must be positive, got {beta}")
    if math.isinf(beta):
        return 0.0
    if beta > LARGE_BETA:
        return math.exp(-beta)
    return 1.0 / math.expm1(beta)


def thermal_entropy(beta: float) -> float:
    """Entropy of a thermal oscillator, beta/(e^beta - 1) - ln(1 - e^-beta)."""
    if not beta > 0.0:
        raise DomainError(f"beta must be positive, got {beta}")
    if math.isinf(beta):
        return 0.0
    if beta > LARGE_BETA:
        # e^-beta corrections lie below double precision
        return (beta + 1.0) * math.exp(-beta)
    if beta > math.log(2.0):
        log_term = math.log1p(-math.exp(-beta))
    else:
        log_term = math.log(-math.expm1(-beta))
    return beta / math.expm1(beta) - log_term


def entropy_expansions(lam: float) -> float:
    """Entropy through its small-excess and large-lambda expansions.

    (lambda - 1/2)(1 - ln(lambda - 1/2)) below an excess of 0.01,
    1 + ln(lambda) above lambda = 50, the exact form in between.
    """
    if lam < 0.5 - LAMBDA_FLOOR_TOLERANCE:
        raise DomainError(f"Symplectic eigenvalue {lam} lies below 1/2")
    x = lam - 0.5
    if x <= 0.0:
        return 0.0
    if x < SMALL_EXCESS_SWITCH:
        return x * (1.0 - math.log(x))
    if lam > LARGE_LAMBDA_SWITCH:
        return 1.0 + math.log(lam)
    return entropy_of_excess(x)


def _stage_failure(stage: str, error: Exception) -> NumericalStageError:
    return NumericalStageError(stage, str(error) or type(error).__name__, error)


def analyze_block(table: CorrelationTable, part: BlockPartition,
                  thresholds: Optional[Thresholds] = None,
                  numerics: Optional[NumericsSettings] = None) -> EntanglementReport:
    """Modewise entanglement analysis of one block.

    Runs extraction, the Williamson decomposition, the mapping of every
    entangled mode onto the complement and the entropy of each mode.

    Args:
        table: Correlation table of the chain
        part: Block to analyze
        thresholds: Numerical thresholds, defaults if omitted
        numerics: Evaluation strategy, defaults if omitted

    Returns:
        EntanglementReport with modes in decreasing order of entanglement

    Raises:
        DomainError: if the partition is invalid for the chain
        NumericalStageError: if a stage fails numerically
    """
    thresholds = thresholds or Thresholds()
    cov = extract_block(table, part)
    try:
        raw_modes = williamson_modes(cov, thresholds, numerics)
    except (LinAlgError, ArithmeticError) as e:
        raise _stage_failure("williamson_modes", e)

    modes: List[ModePair] = []
    unmapped = 0
    for mode in raw_modes:
        entangled = mode.excess >= thresholds.unentangled_excess
        u_B = v_B = None
        if entangled:
            if mode.kappa > thresholds.mapping_kappa_min:
                try:
                    u_B, v_B = map_modes(cov, mode, thresholds)
                except (LinAlgError, ArithmeticError) as e:
                    raise _stage_failure("map_modes", e)
            else:
                unmapped += 1
        try:
            entropy = entropy_of_excess(mode.excess) if entangled else 0.0
            beta = beta_of_excess(mode.excess) if entangled else math.inf
        except DomainError as e:
            raise _stage_failure("entropy", e)
        weights = participation(mode.u, mode.v)
        modes.append(ModePair(
            lam=mode.lam,
            kappa=mode.kappa,
            excess=mode.excess,
            u_A=mode.u,
            v_A=mode.v,
            parity=mode.parity,
            participation_A=weights,
            turning_point=turning_point(weights),
            entropy=entropy,
            beta=beta,
            u_B=u_B,
            v_B=v_B,
            entangled=entangled,
            degenerate=mode.degenerate,
        ))
    if unmapped:
        logger.warning(f"{unmapped} entangled modes left unmapped for N_b={part.N_b}")

    total = math.fsum(mode.entropy for mode in modes)
    report = EntanglementReport(
        spec=table.spec,
        partition=part,
        modes=modes,
        total=total,
        regime=classify_regime(table.spec, thresholds),
        per_mode_beta=[mode.beta for mode in modes if mode.entangled],
    )
    logger.debug(f"Block N_b={part.N_b} at {part.block_start}: total={total:.12g} "
                 f"entangled={len(report.per_mode_beta)}")
    return report


def complement_total(table: CorrelationTable, part: BlockPartition,
                     thresholds: Optional[Thresholds] = None,
                     numerics: Optional[NumericsSettings] = None) -> float:
    """Entanglement entropy computed from the complement's spectrum."""
    thresholds = thresholds or Thresholds()
    cov = extract_block(table, part)
    try:
        spectrum = complement_spectrum(cov, thresholds, numerics)
    except (LinAlgError, ArithmeticError) as e:
        raise _stage_failure("symplectic_spectrum", e)
    return math.fsum(entropy_of_excess(x) for x in spectrum.excesses
                     if x >= thresholds.unentangled_excess)


def _vector(values: Optional[np.ndarray]) -> Optional[List[float]]:
    return None if values is None else [float(v) for v in values]


def report_to_dict(report: EntanglementReport) -> Dict[str, Any]:
    """Plain dictionary form of a report, modes kept in spectral order.

    Infinite beta values become None.
    """
    modes = []
    for mode in report.modes:
        modes.append({
            "lambda": mode.lam,
            "kappa": mode.kappa,
            "excess": mode.excess,
            "parity": mode.parity,
            "entropy": mode.entropy,
            "beta": None if math.isinf(mode.beta) else mode.beta,
            "turning_point": mode.turning_point,
            "entangled": mode.entangled,
            "degenerate": mode.degenerate,
            "u_A": _vector(mode.u_A),
            "v_A": _vector(mode.v_A),
            "u_B": _vector(mode.u_B),
            "v_B": _vector(mode.v_B),
            "participation_A": _vector(mode.participation_A),
        })
    return {
        "spec": report.spec.to_dict(),
        "partition": report.partition.to_dict(),
        "regime": report.regime.value,
        "modes": modes,
        "total": report.total,
    }


def fit_line(x: Sequence[float], y: Sequence[float]) -> FitResult:
    """Least squares line y = slope * x + intercept."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DomainError(f"Fit columns differ in length: {x.size} vs {y.size}")
    if x.size < 3:
        raise DomainError(f"A fit needs at least 3 points, got {x.size}")
    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    return FitResult(
        slope=float(slope),
        intercept=float(intercept),
        residual_rms=float(np.sqrt(np.mean(residuals ** 2))),
        points_used=int(x.size),
    )


def fit_log_slope(N_b_values: Sequence[int], totals: Sequence[float]) -> FitResult:
    """Fit totals = slope * ln(N_b) + intercept."""
    N_b_values = np.asarray(N_b_values, dtype=float)
    if np.any(N_b_values <= 0):
        raise DomainError("Block sizes must be positive")
    return fit_line(np.log(N_b_values), totals)
