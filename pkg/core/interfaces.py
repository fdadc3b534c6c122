"""
Shared domain types for the harmonic chain entanglement toolkit.

All records are immutable once built. Arrays stored inside them are marked
read-only so tables and covariance blocks can be shared across worker threads.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from scipy.linalg import toeplitz

from core.errors import DomainError


class Regime(str, Enum):
    """Correlation/entanglement regimes of a finite chain."""
    I = "I"        # short ranged, N well above N_t
    II = "II"      # logarithmic, N_c < N <= 4 N_t
    III = "III"    # collective dominated, N below N_c


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class ChainSpec:
    """Circular chain of N oscillators with nearest neighbour coupling.

    The hyperbolic angle xi is the primary parameter: z = tanh(xi) and
    alpha = tanh(2 xi). The complements 1 - alpha and 1 - z are computed from
    exponentials of xi and never by subtraction.
    """
    N: int
    xi: float
    alpha: float
    z: float
    mu_aux: float
    one_minus_alpha: float
    one_minus_z: float

    @classmethod
    def from_xi(cls, N: int, xi: float) -> 'ChainSpec':
        """Build a chain specification from the hyperbolic angle."""
        if int(N) != N or N < 1:
            raise DomainError(f"Chain size must be a positive integer, got {N}")
        if not (xi > 0.0 and math.isfinite(xi)):
            raise DomainError(f"xi must be positive and finite, got {xi}")
        e2 = math.exp(-2.0 * xi)
        e4 = e2 * e2
        z = math.tanh(xi)
        return cls(
            N=int(N),
            xi=float(xi),
            alpha=math.tanh(2.0 * xi),
            z=z,
            mu_aux=1.0 / math.sqrt(1.0 + z * z),
            one_minus_alpha=2.0 * e4 / (1.0 + e4),
            one_minus_z=2.0 * e2 / (1.0 + e2),
        )

    @classmethod
    def from_alpha(cls, N: int, alpha: float) -> 'ChainSpec':
        """Build a chain specification from the coupling alpha in (0, 1)."""
        if not 0.0 < alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
        return cls.from_xi(N, 0.5 * math.atanh(alpha))

    @classmethod
    def from_z(cls, N: int, z: float) -> 'ChainSpec':
        """Build a chain specification from z in (0, 1)."""
        if not 0.0 < z < 1.0:
            raise DomainError(f"z must lie in (0, 1), got {z}")
        return cls.from_xi(N, math.atanh(z))

    @classmethod
    def from_one_minus_alpha(cls, N: int, one_minus_alpha: float) -> 'ChainSpec':
        """Build a chain specification from 1 - alpha without losing precision near alpha = 1."""
        if not 0.0 < one_minus_alpha < 1.0:
            raise DomainError(f"1 - alpha must lie in (0, 1), got {one_minus_alpha}")
        # 1 - alpha = 2e/(1+e) with e = exp(-4 xi)
        e4 = one_minus_alpha / (2.0 - one_minus_alpha)
        return cls.from_xi(N, -0.25 * math.log(e4))

    @property
    def one_minus_z_squared(self) -> float:
        """1 - z^2 = sech^2(xi), cancellation free."""
        e2 = math.exp(-2.0 * self.xi)
        return 4.0 * e2 / ((1.0 + e2) ** 2)

    def with_size(self, N: int) -> 'ChainSpec':
        """Same coupling on a chain of a different size."""
        return ChainSpec.from_xi(N, self.xi)

    def to_dict(self) -> Dict[str, Any]:
        """Convert the specification to a plain dictionary."""
        return {
            "N": self.N,
            "xi": self.xi,
            "alpha": self.alpha,
            "z": self.z,
            "mu_aux": self.mu_aux,
            "one_minus_alpha": self.one_minus_alpha,
            "one_minus_z": self.one_minus_z,
        }


@dataclass(frozen=True)
class RegimeScales:
    """Length scales separating the three regimes."""
    l_c: float
    N_t: float
    N_c: float


@dataclass(frozen=True, eq=False)
class CorrelationTable:
    """Vacuum two-point functions g_l = <q_0 q_l> and h_l = <p_0 p_l>."""
    spec: ChainSpec
    g: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "g", _frozen(self.g))
        object.__setattr__(self, "h", _frozen(self.h))
        if self.g.shape != (self.spec.N,) or self.h.shape != (self.spec.N,):
            raise DomainError(f"Correlation arrays must have length N={self.spec.N}")

    @property
    def N(self) -> int:
        return self.spec.N


@dataclass(frozen=True)
class BlockPartition:
    """A contiguous block of N_b sites starting at block_start on the ring.

    complement is True for the view where the block plays the role of the
    rest of the chain; size limits only apply to the primary side.
    """
    block_start: int
    N_b: int
    complement: bool = False

    def validate(self, N: int) -> None:
        """Check the partition against a chain of N sites."""
        if int(self.N_b) != self.N_b or self.N_b < 1:
            raise DomainError(f"Block size must be a positive integer, got {self.N_b}")
        if not self.complement and 2 * self.N_b > N:
            raise DomainError(f"Block size {self.N_b} exceeds half the chain (N={N})")
        if self.complement and self.N_b >= N:
            raise DomainError(f"Complement of size {self.N_b} leaves no block in N={N}")

    def to_dict(self) -> Dict[str, Any]:
        return {"block_start": self.block_start, "N_b": self.N_b}


@dataclass(frozen=True, eq=False)
class BlockCovariance:
    """Local and cross correlation matrices for one bipartition.

    G_A, H_A are the block matrices, G_AB, H_AB the block/complement cross
    matrices. The complement's own matrices are Toeplitz and kept as their
    first columns g_B, h_B.
    """
    partition: BlockPartition
    N: int
    G_A: np.ndarray
    H_A: np.ndarray
    G_AB: np.ndarray
    H_AB: np.ndarray
    g_B: np.ndarray
    h_B: np.ndarray

    def __post_init__(self):
        for name in ("G_A", "H_A", "G_AB", "H_AB", "g_B", "h_B"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def N_b(self) -> int:
        return self.G_A.shape[0]

    @property
    def N_B(self) -> int:
        return self.G_AB.shape[1]

    def G_B(self) -> np.ndarray:
        return toeplitz(self.g_B)

    def H_B(self) -> np.ndarray:
        return toeplitz(self.h_B)

    def swapped(self) -> 'BlockCovariance':
        """The same bipartition seen from the complement."""
        part = self.partition
        return BlockCovariance(
            partition=BlockPartition(
                block_start=(part.block_start + part.N_b) % self.N,
                N_b=self.N - part.N_b,
                complement=not part.complement,
            ),
            N=self.N,
            G_A=self.G_B(),
            H_A=self.H_B(),
            G_AB=self.G_AB.T,
            H_AB=self.H_AB.T,
            g_B=self.G_A[:, 0],
            h_B=self.H_A[:, 0],
        )


@dataclass(frozen=True)
class SymplecticSpectrum:
    """Symplectic eigenvalues in descending order.

    excesses holds lambda - 1/2 computed without cancellation; lambdas alone
    cannot resolve values closer to 1/2 than machine precision.
    """
    lambdas: np.ndarray
    parities: np.ndarray
    excesses: np.ndarray

    def __len__(self) -> int:
        return len(self.lambdas)


@dataclass(eq=False)
class ModePair:
    """One Williamson mode of the block together with its complement partner."""
    lam: float
    kappa: float
    excess: float
    u_A: np.ndarray
    v_A: np.ndarray
    parity: int
    participation_A: np.ndarray
    turning_point: float
    entropy: float
    beta: float
    u_B: Optional[np.ndarray] = None
    v_B: Optional[np.ndarray] = None
    entangled: bool = True
    degenerate: bool = False

    @property
    def mapped(self) -> bool:
        return self.u_B is not None


@dataclass
class EntanglementReport:
    """Full modewise entanglement analysis of one block."""
    spec: ChainSpec
    partition: BlockPartition
    modes: List[ModePair]
    total: float
    regime: Regime
    per_mode_beta: List[float] = field(default_factory=list)

    def mode_entropies(self, count: Optional[int] = None) -> List[float]:
        """Entropies of the leading modes, zero padded to count."""
        values = [mode.entropy for mode in self.modes]
        if count is None:
            return values
        return (values + [0.0] * count)[:count]


@dataclass(frozen=True)
class ResidualModel:
    """Continuum model of the residual Williamson modes."""
    N_b: int
    zeta: float = 0.45

    def __post_init__(self):
        if not 0.0 < self.zeta < 1.0:
            raise DomainError(f"zeta must lie in (0, 1), got {self.zeta}")
        if self.N_b < 2:
            raise DomainError(f"Residual model needs N_b >= 2, got {self.N_b}")


@dataclass(frozen=True)
class ScalingPoint:
    """Quantized residual mode in scaled variables."""
    mu_scaled: float
    f: float
    omega: float
    ln_E_over_Nb: float
    turning_point: float


@dataclass(frozen=True)
class ContinuumSpec:
    """Massive free field on a circle of circumference L, sampled by N sites."""
    mu: float
    L: float = math.inf
    N: int = 1024

    def __post_init__(self):
        if not self.mu > 0.0:
            raise DomainError(f"Mass must be positive, got {self.mu}")
        if not self.L > 0.0:
            raise DomainError(f"Circumference must be positive, got {self.L}")
        if int(self.N) != self.N or self.N < 2:
            raise DomainError(f"Lattice size must be an integer >= 2, got {self.N}")

    @property
    def spacing(self) -> float:
        if math.isinf(self.L):
            raise DomainError("Lattice spacing is undefined for an infinite circumference")
        return self.L / self.N

    def with_size(self, N: int) -> 'ContinuumSpec':
        return ContinuumSpec(mu=self.mu, L=self.L, N=N)


@dataclass(frozen=True)
class FitResult:
    """Least squares straight line fit."""
    slope: float
    intercept: float
    residual_rms: float
    points_used: int

    def __post_init__(self):
        if self.points_used < 3:
            raise DomainError(f"A fit needs at least 3 points, got {self.points_used}")
