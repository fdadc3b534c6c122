"""Shared dense oracles for the chain tests.

Everything here is built from the full 2N x 2N description of the chain and
is only meant for small N.
"""

import numpy as np
from scipy.linalg import block_diag, eigh


def potential_matrix(N: int, alpha: float) -> np.ndarray:
    """V with V_ii = 1 and -alpha/2 added for each ring neighbour."""
    V = np.eye(N)
    for i in range(N):
        V[i, (i + 1) % N] += -alpha / 2.0
        V[(i + 1) % N, i] += -alpha / 2.0
    return V


def dense_vacuum(N: int, alpha: float):
    """Ground state correlations G = V^(-1/2)/2 and H = V^(1/2)/2."""
    values, vectors = eigh(potential_matrix(N, alpha))
    root = np.sqrt(values)
    G = 0.5 * (vectors / root) @ vectors.T
    H = 0.5 * (vectors * root) @ vectors.T
    return G, H


def block_sites(N: int, start: int, size: int) -> np.ndarray:
    return (start + np.arange(size)) % N


def williamson_oracle(G: np.ndarray, H: np.ndarray, sites) -> np.ndarray:
    """Symplectic eigenvalues of the reduced state on sites, descending.

    Uses the moduli of the eigenvalues of i J M with M = diag(G_A, H_A).
    """
    sites = np.asarray(sites)
    n = sites.size
    M = block_diag(G[np.ix_(sites, sites)], H[np.ix_(sites, sites)])
    J = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
    values = np.abs(np.linalg.eigvals(1j * J @ M))
    return np.sort(values)[::-1][::2]


def reflection(vector: np.ndarray) -> np.ndarray:
    return np.asarray(vector)[::-1]
