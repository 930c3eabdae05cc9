"""State diagnostics: purity, coherence, energy, trace distance."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch
from .operators import DensityMatrix, HermitianOperator, SpectralDecomposition, to_energy_basis

__all__ = ["purity", "coherence_l1", "energy_expectation", "trace_distance"]


def _matrix(state) -> np.ndarray:
    if isinstance(state, DensityMatrix):
        return state.matrix
    return np.asarray(state, dtype=complex)


def purity(state) -> float:
    """Tr(rho^2): 1 for pure states, 1/d for the maximally mixed state."""
    rho = _matrix(state)
    return float(np.sum(np.abs(rho) ** 2).real)


def coherence_l1(state, decomposition: SpectralDecomposition) -> float:
    """Sum of off-diagonal magnitudes in the energy basis.

    This is the quantity the averaged evolution damps entry by entry, so it is
    the natural decoherence readout.
    """
    rho = to_energy_basis(_matrix(state), decomposition)
    off = np.abs(rho) - np.diag(np.abs(np.diag(rho)))
    return float(np.sum(off))


def energy_expectation(state, hamiltonian) -> float:
    """Tr(rho H); constant in time exactly when populations do not decay."""
    rho = _matrix(state)
    h = hamiltonian.matrix if isinstance(hamiltonian, HermitianOperator) else np.asarray(
        hamiltonian, dtype=complex
    )
    if rho.shape != h.shape:
        raise DimensionMismatch(
            f"state dimension {rho.shape} != operator dimension {h.shape}"
        )
    return float(np.trace(rho @ h).real)


def trace_distance(state_a, state_b) -> float:
    """Half the sum of absolute eigenvalues of the difference; in [0, 1]."""
    a = _matrix(state_a)
    b = _matrix(state_b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    eigvals = np.linalg.eigvalsh(a - b)
    return float(0.5 * np.sum(np.abs(eigvals)))
