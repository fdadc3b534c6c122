"""
Block covariance extraction and modewise (Williamson) decomposition.

For a block A of the ring with position correlations G_A and momentum
correlations H_A, the symplectic eigenvalues are the square roots of the
eigenvalues of H_A G_A. Each parity sector of the block (reflection about its
centre) is treated separately. With G_s = L L^T, the symmetric matrix
L^T H_s L carries lambda^2, and the cross matrix M = L^{-1} G_AB R_H, with
H_B = R_H R_H^T, carries kappa^2 = lambda^2 - 1/4 as its squared singular
values without the cancellation against 1/4.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import (LinAlgError, cholesky, eigh, eigvalsh, matmul_toeplitz, solve_triangular,
                          svd, toeplitz)

from core.errors import DomainError, NumericalStageError, UnmappedModeError
from core.interfaces import (BlockCovariance, BlockPartition, CorrelationTable,
                             SymplecticSpectrum)
from utils.sweep_config import NumericsSettings, Thresholds

logger = logging.getLogger(__name__)

EVEN = 1
ODD = -1

EPS = float(np.finfo(float).eps)
ROUNDING_FACTOR = 8.0
# lambda^2 - 1/4 below SWITCH_MARGIN rounding tolerances comes from kappa^2
SWITCH_MARGIN = 10.0


@dataclass(frozen=True, eq=False)
class ParitySector:
    """Block matrices restricted to one reflection parity.

    basis has the block sites as rows and the sector's orthonormal
    symmetric or antisymmetric combinations as columns.
    """
    parity: int
    basis: np.ndarray
    G: np.ndarray
    H: np.ndarray
    G_AB: np.ndarray
    H_AB: np.ndarray

    @property
    def size(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True, eq=False)
class WilliamsonMode:
    """A block mode: H_A G_A u = lambda^2 u, v = G_A u / lambda, u . v = 1."""
    lam: float
    kappa: float
    excess: float
    u: np.ndarray
    v: np.ndarray
    parity: int
    degenerate: bool = False


@dataclass(frozen=True, eq=False)
class _SectorSolution:
    sector: ParitySector
    chol: np.ndarray
    lambdas: np.ndarray
    kappas: np.ndarray
    excesses: np.ndarray
    vectors: np.ndarray


def extract_block(table: CorrelationTable, part: BlockPartition) -> BlockCovariance:
    """Block and cross correlation matrices for a contiguous block.

    Args:
        table: Correlation table of the ring
        part: Block position and size, N_b <= N/2

    Returns:
        BlockCovariance with (G_A)_ij = g_|i-j| and (G_AB)_ij = g_(b_j - a_i mod N)
    """
    N = table.N
    part.validate(N)
    N_b = part.N_b
    sites_A = (part.block_start + np.arange(N_b)) % N
    sites_B = (part.block_start + N_b + np.arange(N - N_b)) % N
    separation = (sites_B[np.newaxis, :] - sites_A[:, np.newaxis]) % N
    return BlockCovariance(
        partition=part,
        N=N,
        G_A=toeplitz(table.g[:N_b]),
        H_A=toeplitz(table.h[:N_b]),
        G_AB=table.g[separation],
        H_AB=table.h[separation],
        g_B=table.g[:N - N_b],
        h_B=table.h[:N - N_b],
    )


def _reflection_basis(N_b: int) -> Tuple[np.ndarray, np.ndarray]:
    half = N_b // 2
    even = np.zeros((N_b, half + N_b % 2))
    odd = np.zeros((N_b, half))
    scale = 1.0 / math.sqrt(2.0)
    for k in range(half):
        mirror = N_b - 1 - k
        even[k, k] = even[mirror, k] = scale
        odd[k, k] = scale
        odd[mirror, k] = -scale
    if N_b % 2:
        even[half, half] = 1.0
    return even, odd


def parity_sectors(cov: BlockCovariance) -> Tuple[ParitySector, ParitySector]:
    """Split the block into reflection-even and reflection-odd sectors.

    Columns are ordered from the block edge inwards.

    Returns:
        Tuple of (even sector, odd sector)
    """
    sectors = []
    for parity, basis in zip((EVEN, ODD), _reflection_basis(cov.N_b)):
        sectors.append(ParitySector(
            parity=parity,
            basis=basis,
            G=basis.T @ cov.G_A @ basis,
            H=basis.T @ cov.H_A @ basis,
            G_AB=basis.T @ cov.G_AB,
            H_AB=basis.T @ cov.H_AB,
        ))
    logger.debug(f"Parity sectors for N_b={cov.N_b}: even={sectors[0].size} odd={sectors[1].size}")
    return sectors[0], sectors[1]


def _complement_factor(cov: BlockCovariance, numerics: NumericsSettings) -> Optional[np.ndarray]:
    """Cholesky factor of H_B, or None when the complement is too large to factor densely."""
    if cov.N_B > numerics.dense_complement_max:
        return None
    try:
        return cholesky(cov.H_B(), lower=True)
    except LinAlgError as e:
        raise NumericalStageError("cross_spectrum", "complement momentum matrix is not positive definite", e)


def _rounding_tolerance(sector: ParitySector, scale: float) -> float:
    """Attainable accuracy of eigenvalues of magnitude scale computed through G_s.

    Rounding in L^T H_s L grows with the condition number of the sector's
    position block, which is large once the correlation length is long.
    """
    g_values = eigvalsh(sector.G)
    cond = g_values[-1] / g_values[0] if g_values[0] > 0.0 else math.inf
    return ROUNDING_FACTOR * EPS * cond * max(1.0, scale)


def _cross_factor(sector: ParitySector, chol: np.ndarray, cov: BlockCovariance,
                  r_h: Optional[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """Squared singular values (descending) and left vectors of L^{-1} G_AB R_H."""
    p = solve_triangular(chol, sector.G_AB, lower=True)
    if r_h is not None:
        m = p @ r_h
        rows, cols = m.shape
        # a complement smaller than the sector leaves rows - cols null directions
        left, sigma, _ = svd(m, full_matrices=rows > cols)
        kappa2 = np.zeros(rows)
        kappa2[:sigma.size] = sigma * sigma
        return kappa2, left
    # P H_B P^T through a Toeplitz product when H_B is not formed
    h_b = np.asarray(cov.h_B)
    s = p @ matmul_toeplitz((h_b, h_b), p.T)
    s = 0.5 * (s + s.T)
    values, vectors = eigh(s)
    order = np.argsort(values)[::-1]
    values = values[order]
    floor = -max(1e-12 * max(1.0, abs(values[0])), _rounding_tolerance(sector, abs(values[0])))
    if values[-1] < floor:
        raise NumericalStageError("cross_spectrum", f"negative cross eigenvalue {values[-1]:.3e}")
    return np.clip(values, 0.0, None), vectors[:, order]


def _solve_sector(sector: ParitySector, cov: BlockCovariance, r_h: Optional[np.ndarray],
                  thresholds: Thresholds) -> _SectorSolution:
    n = sector.size
    if n == 0:
        empty = np.zeros(0)
        return _SectorSolution(sector, np.zeros((0, 0)), empty, empty, empty, np.zeros((0, 0)))
    try:
        chol = cholesky(sector.G, lower=True)
    except LinAlgError as e:
        raise NumericalStageError("symplectic_spectrum", "position correlation block is not positive definite", e)

    sym = chol.T @ sector.H @ chol
    sym_values, sym_vectors = eigh(0.5 * (sym + sym.T))
    sym_values = sym_values[::-1]
    sym_vectors = sym_vectors[:, ::-1]
    # values below 1/4 within rounding are taken from the cross factor instead
    tolerance = _rounding_tolerance(sector, abs(sym_values[0]))
    if sym_values[-1] < 0.25 - max(thresholds.clamp_tolerance, tolerance):
        raise NumericalStageError("symplectic_spectrum",
                                  f"eigenvalue {sym_values[-1]:.6e} of H_A G_A lies below 1/4 "
                                  f"beyond rounding tolerance {tolerance:.3e}")
    switch = max(thresholds.lambda_switch, SWITCH_MARGIN * tolerance)

    kappa2, cross_vectors = _cross_factor(sector, chol, cov, r_h)
    lambdas = np.empty(n)
    kappas = np.empty(n)
    excesses = np.empty(n)
    vectors = np.empty((n, n))
    for i in range(n):
        if sym_values[i] - 0.25 < switch:
            k2 = kappa2[i]
            lam = math.sqrt(0.25 + k2)
            excess = k2 / (lam + 0.5)
            vectors[:, i] = cross_vectors[:, i]
        else:
            lam = math.sqrt(sym_values[i])
            k2 = sym_values[i] - 0.25
            excess = lam - 0.5
            vectors[:, i] = sym_vectors[:, i]
        lambdas[i] = lam
        kappas[i] = math.sqrt(k2)
        excesses[i] = excess
    return _SectorSolution(sector, chol, lambdas, kappas, excesses, vectors)


def _decompose(cov: BlockCovariance, thresholds: Optional[Thresholds],
               numerics: Optional[NumericsSettings]) -> List[_SectorSolution]:
    thresholds = thresholds or Thresholds()
    numerics = numerics or NumericsSettings()
    r_h = _complement_factor(cov, numerics)
    return [_solve_sector(sector, cov, r_h, thresholds) for sector in parity_sectors(cov)]


def _ordered(excesses: np.ndarray, parities: np.ndarray, tie_tolerance: float) -> List[int]:
    """Indices by descending excess; near ties put the even mode first."""
    order = list(np.argsort(-excesses, kind="stable"))
    swapped = True
    while swapped:
        swapped = False
        for i in range(len(order) - 1):
            a, b = order[i], order[i + 1]
            if parities[a] == ODD and parities[b] == EVEN:
                scale = max(excesses[a], excesses[b])
                if abs(excesses[a] - excesses[b]) <= tie_tolerance * scale:
                    order[i], order[i + 1] = b, a
                    swapped = True
    return order


def _merge(solutions: List[_SectorSolution], thresholds: Thresholds):
    lambdas = np.concatenate([s.lambdas for s in solutions])
    excesses = np.concatenate([s.excesses for s in solutions])
    parities = np.concatenate([np.full(s.sector.size, s.sector.parity) for s in solutions])
    order = _ordered(excesses, parities, thresholds.tie_tolerance)
    return lambdas, excesses, parities, order


def symplectic_spectrum(cov: BlockCovariance, thresholds: Optional[Thresholds] = None,
                        numerics: Optional[NumericsSettings] = None) -> SymplecticSpectrum:
    """Symplectic eigenvalues of the block, descending, with their parities."""
    thresholds = thresholds or Thresholds()
    lambdas, excesses, parities, order = _merge(_decompose(cov, thresholds, numerics), thresholds)
    return SymplecticSpectrum(
        lambdas=np.maximum(lambdas[order], 0.5),
        parities=parities[order].astype(int),
        excesses=excesses[order],
    )


def complement_spectrum(cov: BlockCovariance, thresholds: Optional[Thresholds] = None,
                        numerics: Optional[NumericsSettings] = None) -> SymplecticSpectrum:
    """Symplectic spectrum of the complement of the block."""
    return symplectic_spectrum(cov.swapped(), thresholds, numerics)


def cross_spectrum(cov: BlockCovariance, numerics: Optional[NumericsSettings] = None) -> np.ndarray:
    """Eigenvalues kappa^2 of -H_AB G_AB^T in descending order."""
    numerics = numerics or NumericsSettings()
    r_h = _complement_factor(cov, numerics)
    values = []
    for sector in parity_sectors(cov):
        if sector.size == 0:
            continue
        try:
            chol = cholesky(sector.G, lower=True)
        except LinAlgError as e:
            raise NumericalStageError("cross_spectrum", "position correlation block is not positive definite", e)
        kappa2, _ = _cross_factor(sector, chol, cov, r_h)
        values.append(kappa2)
    return np.sort(np.concatenate(values))[::-1]


def williamson_modes(cov: BlockCovariance, thresholds: Optional[Thresholds] = None,
                     numerics: Optional[NumericsSettings] = None) -> List[WilliamsonMode]:
    """Williamson modes of the block ordered by decreasing symplectic eigenvalue.

    Each mode satisfies H_A G_A u = lambda^2 u, v = G_A u / lambda and
    u . v = 1, with the largest magnitude entry of u positive. Modes whose
    excesses coincide within the degeneracy gap inside one sector are flagged.
    """
    thresholds = thresholds or Thresholds()
    solutions = _decompose(cov, thresholds, numerics)
    modes: List[WilliamsonMode] = []
    for solution in solutions:
        sector = solution.sector
        flags = np.zeros(sector.size, dtype=bool)
        for i in range(sector.size - 1):
            a, b = solution.excesses[i], solution.excesses[i + 1]
            if b > thresholds.unentangled_excess and abs(a - b) <= thresholds.degeneracy_gap * a:
                flags[i] = flags[i + 1] = True
        if flags.any():
            logger.warning(f"Near-degenerate modes in parity {sector.parity:+d} sector of N_b={cov.N_b}")
        for i in range(sector.size):
            lam = float(solution.lambdas[i])
            w = solution.vectors[:, i]
            root = math.sqrt(lam)
            u = sector.basis @ (root * solve_triangular(solution.chol.T, w, lower=False))
            v = sector.basis @ (solution.chol @ w / root)
            if u[np.argmax(np.abs(u))] < 0.0:
                u, v = -u, -v
            modes.append(WilliamsonMode(
                lam=lam,
                kappa=float(solution.kappas[i]),
                excess=float(solution.excesses[i]),
                u=u,
                v=v,
                parity=sector.parity,
                degenerate=bool(flags[i]),
            ))
    excesses = np.array([m.excess for m in modes])
    parities = np.array([m.parity for m in modes])
    return [modes[i] for i in _ordered(excesses, parities, thresholds.tie_tolerance)]


def map_modes(cov: BlockCovariance, mode: WilliamsonMode,
              thresholds: Optional[Thresholds] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Partner of a block mode in the complement.

    Returns:
        Tuple of (u_B, v_B) with v_B = G_AB^T u_A / kappa and u_B = -H_AB^T v_A / kappa

    Raises:
        UnmappedModeError: if kappa does not exceed the mapping threshold
    """
    thresholds = thresholds or Thresholds()
    if not mode.kappa > thresholds.mapping_kappa_min:
        raise UnmappedModeError(f"kappa={mode.kappa:.3e} is below the mapping threshold")
    v_B = cov.G_AB.T @ mode.u / mode.kappa
    u_B = -(cov.H_AB.T @ mode.v) / mode.kappa
    return u_B, v_B


def participation(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Mode participation function P_i = u_i v_i."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise DomainError(f"Mode vectors differ in shape: {u.shape} vs {v.shape}")
    return u * v


def turning_point(weights: np.ndarray) -> float:
    """Distance from the block centre of the participation maximum.

    Several maxima resolve to the one closest to the centre.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.size == 0:
        raise DomainError("Participation function is empty")
    centre = 0.5 * (weights.size - 1)
    peak = weights.max()
    candidates = np.flatnonzero(np.isclose(weights, peak, rtol=1e-12, atol=0.0))
    offsets = np.abs(candidates - centre)
    return float(offsets.min())


def demodulate(u: np.ndarray) -> np.ndarray:
    """Multiply entry i (from the block start) by (-1)^i."""
    u = np.asarray(u, dtype=float)
    signs = np.where(np.arange(u.size) % 2 == 0, 1.0, -1.0)
    return u * signs


def weak_mode_ansatz(N_b: int, depth: int, parity: int) -> np.ndarray:
    """Localized weak coupling mode on the two sites at the given depth from the edges."""
    if not 1 <= depth <= (N_b + 1) // 2:
        raise DomainError(f"Depth {depth} is outside a block of {N_b} sites")
    u = np.zeros(N_b)
    left, right = depth - 1, N_b - depth
    if left == right:
        if parity != EVEN:
            raise DomainError("The central site of an odd block only supports even modes")
        u[left] = 1.0
        return u
    u[left] = 1.0 / math.sqrt(2.0)
    u[right] = parity / math.sqrt(2.0)
    return u
