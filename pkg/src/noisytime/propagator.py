"""Closed-form averaged evolution.

Averaging the random unitary over noise realizations acts entry by entry in
the energy basis: entry (k, l) picks up the deterministic phase of the level
gap and the damping factor exp(-lambda(t; theta_k, theta_l) / 2).  This module
evaluates that map directly, plus the global-noise special case and the
generic weighted time average.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.integrate import quad

from .errors import (
    DimensionMismatch,
    DissipativeTraceLoss,
    GridMismatch,
    QuadratureFailure,
    WeightsNotNormalized,
)
from .noise import QUAD_REL_TOL, LambdaKernel, NoiseModel, SigmaTimePreset
from .operators import DensityMatrix, SpectralDecomposition, from_energy_basis, to_energy_basis
from .results import EvolutionResult

__all__ = [
    "averaged_state",
    "averaged_trajectory",
    "averaged_state_global",
    "time_averaged_state",
    "semigroup_defect",
]


def _state_matrix(state) -> np.ndarray:
    if isinstance(state, DensityMatrix):
        return state.matrix
    arr = np.asarray(state, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"expected a square state matrix, got shape {arr.shape}")
    return arr


def _element_factors(
    decomposition: SpectralDecomposition, model: NoiseModel, t: float
) -> np.ndarray:
    """Per-entry factor exp(-it dh) * exp(-lambda/2) expanded to matrix indices."""
    levels = decomposition.levels
    kernel = LambdaKernel(model, levels)
    lam = kernel.lambda_matrix(t)
    h = np.asarray(model.drift_h(levels), dtype=float)
    phases = np.exp(-1j * t * (h[:, None] - h[None, :]))
    factors = phases * np.exp(-0.5 * lam)
    idx = decomposition.level_index
    return factors[np.ix_(idx, idx)]


def _wrap_output(matrix: np.ndarray, dissipative: bool) -> DensityMatrix:
    if dissipative:
        return DensityMatrix.unchecked(matrix)
    return DensityMatrix(matrix)


def averaged_state(
    decomposition: SpectralDecomposition, model: NoiseModel, rho0, t: float
) -> DensityMatrix:
    """Noise-averaged state at time t.

    In the energy basis each entry is multiplied by the gap phase and by
    exp(-lambda/2).  The result is Hermitian by symmetry of lambda and keeps
    unit trace whenever lambda vanishes on the diagonal; a direct damping
    table with nonzero diagonal loses trace, which is reported as a
    DissipativeTraceLoss warning rather than renormalized away.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    rho = _state_matrix(rho0)
    if rho.shape[0] != decomposition.dim:
        raise DimensionMismatch(
            f"state dimension {rho.shape[0]} != decomposition dimension {decomposition.dim}"
        )
    dissipative = model.is_dissipative
    if dissipative:
        warnings.warn(
            "damping table has a nonzero diagonal: populations decay and the "
            "trace of the averaged state falls below one",
            DissipativeTraceLoss,
            stacklevel=2,
        )
    rho_e = to_energy_basis(rho, decomposition)
    out = from_energy_basis(_element_factors(decomposition, model, t) * rho_e, decomposition)
    return _wrap_output(out, dissipative)


def averaged_trajectory(
    decomposition: SpectralDecomposition, model: NoiseModel, rho0, grid
) -> EvolutionResult:
    """Noise-averaged states on a whole grid, provenance "analytic"."""
    grid_arr = np.asarray(grid, dtype=float).reshape(-1)
    if grid_arr.size == 0 or np.any(grid_arr < 0) or np.any(np.diff(grid_arr) <= 0):
        raise GridMismatch("grid must be nonempty, nonnegative, strictly increasing")
    rho = _state_matrix(rho0)
    if rho.shape[0] != decomposition.dim:
        raise DimensionMismatch(
            f"state dimension {rho.shape[0]} != decomposition dimension {decomposition.dim}"
        )
    if model.is_dissipative:
        warnings.warn(
            "damping table has a nonzero diagonal: populations decay and the "
            "trace of the averaged state falls below one",
            DissipativeTraceLoss,
            stacklevel=2,
        )
    rho_e = to_energy_basis(rho, decomposition)
    states = np.empty((grid_arr.size, decomposition.dim, decomposition.dim), dtype=complex)
    for k, t in enumerate(grid_arr):
        factors = _element_factors(decomposition, model, float(t))
        states[k] = from_energy_basis(factors * rho_e, decomposition)
    return EvolutionResult(grid_arr, states, "analytic")


def _integrated_square(profile: SigmaTimePreset, t: float) -> float:
    """Integral of profile(s)^2 over [0, t]."""
    if t == 0.0:
        return 0.0
    if profile.is_constant:
        return profile.value**2 * t
    points = [b for b in profile.breakpoints if 0.0 < b < t]
    out = quad(
        lambda s: float(profile(s)) ** 2,
        0.0,
        t,
        epsabs=1e-14,
        epsrel=QUAD_REL_TOL,
        limit=200,
        points=points or None,
        full_output=True,
    )
    if len(out) > 3:
        raise QuadratureFailure(f"quadrature did not converge: {out[3]}")
    return float(out[0])


def averaged_state_global(
    decomposition: SpectralDecomposition, sigma_profile, rho0, t: float
) -> DensityMatrix:
    """Averaged state for one global noise amplitude shared by all levels.

    ``sigma_profile`` is either a strength gamma (amplitude sqrt(gamma), so
    the accumulated variance is gamma * t) or a SigmaTimePreset giving the
    amplitude itself.  Entry (k, l) is damped by
    exp(-accumulated_variance * (theta_k - theta_l)^2 / 2) on top of the gap
    phase; equivalent to :func:`averaged_state` with identity drift, linear
    level amplitude, and uniform correlation.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if isinstance(sigma_profile, SigmaTimePreset):
        accumulated = _integrated_square(sigma_profile, t)
    else:
        gamma = float(sigma_profile)
        if gamma < 0:
            raise ValueError("gamma must be >= 0")
        accumulated = gamma * t
    rho = _state_matrix(rho0)
    if rho.shape[0] != decomposition.dim:
        raise DimensionMismatch(
            f"state dimension {rho.shape[0]} != decomposition dimension {decomposition.dim}"
        )
    theta = decomposition.column_levels()
    gaps = theta[:, None] - theta[None, :]
    factors = np.exp(-1j * t * gaps) * np.exp(-0.5 * accumulated * gaps**2)
    rho_e = to_energy_basis(rho, decomposition)
    return DensityMatrix(from_energy_basis(factors * rho_e, decomposition))


def time_averaged_state(grid, states, weights) -> DensityMatrix:
    """Weighted time average of a state trajectory.

    ``weights`` are probability-density values on the grid; they must be
    nonnegative and integrate to one (trapezoid rule) within 1e-8.  A single
    grid point gets quadrature weight one, so a point mass is expressed as the
    one-point grid with weight 1.
    """
    grid_arr = np.asarray(grid, dtype=float).reshape(-1)
    w = np.asarray(weights, dtype=float).reshape(-1)
    if isinstance(states, (list, tuple)):
        stack = np.stack([_state_matrix(s) for s in states])
    else:
        stack = np.asarray(states, dtype=complex)
    if stack.ndim != 3 or stack.shape[0] != grid_arr.size or w.size != grid_arr.size:
        raise DimensionMismatch(
            f"grid ({grid_arr.size}), states ({stack.shape}), weights ({w.size}) disagree"
        )
    if np.any(w < 0):
        raise WeightsNotNormalized(f"weights must be >= 0, min is {float(np.min(w)):.3e}")
    if grid_arr.size == 1:
        quadrature = np.ones(1)
    else:
        if np.any(np.diff(grid_arr) <= 0):
            raise GridMismatch("grid must be strictly increasing")
        dt = np.diff(grid_arr)
        quadrature = np.zeros_like(grid_arr)
        quadrature[:-1] += 0.5 * dt
        quadrature[1:] += 0.5 * dt
    mass = quadrature * w
    total = float(np.sum(mass))
    if abs(total - 1.0) > 1e-8:
        raise WeightsNotNormalized(f"weights integrate to {total!r}, expected 1 within 1e-8")
    # Renormalize the discrete masses: keeps the result an exact convex
    # combination despite the 1e-8 slack.
    averaged = np.einsum("k,kij->ij", mass / total, stack)
    return DensityMatrix(averaged)


def semigroup_defect(
    decomposition: SpectralDecomposition, model: NoiseModel, rho0, t: float, s: float
) -> float:
    """Max entrywise gap between evolving by t+s and composing s then t.

    Zero (to roundoff) exactly when the kernels are time-independent; a
    sigma_time step inside (0, t+s) makes it strictly positive, witnessing
    non-Markovian evolution.
    """
    if t < 0 or s < 0:
        raise ValueError("t and s must be >= 0")
    joint = averaged_state(decomposition, model, rho0, t + s).matrix
    inner = averaged_state(decomposition, model, rho0, s)
    composed = averaged_state(decomposition, model, inner, t).matrix
    return float(np.max(np.abs(joint - composed)))
