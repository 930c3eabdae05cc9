"""Random-unitary ensemble sampling and statistical comparison.

Each trajectory draws correlated phase paths chi_t(theta), forms the random
unitary sum_k exp(-i chi_t(theta_k)) P_k, and conjugates the initial state.
The ensemble mean and per-entry variance are accumulated chunk by chunk with
a numerically stable pairwise merge; chunk boundaries depend only on array
shapes, so the result is byte-identical whether chunks are processed by one
worker or many.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import GridMismatch
from .noise import NoiseModel, _chi_chunk, correlation_matrix, psd_sqrt
from .operators import DensityMatrix, SpectralDecomposition, to_energy_basis
from .results import EvolutionResult

__all__ = [
    "EnsembleResult",
    "ComparisonReport",
    "run_ensemble",
    "compare_to_analytic",
    "unitary_from_phases",
]

# Upper bound on chunk * grid * dim * dim elements held at once; the chunk
# size must be a function of shapes only, never of worker count, so that
# accumulation order (and therefore float output) is reproducible.
CHUNK_ELEMENT_BUDGET = 4_000_000
MAX_CHUNK = 256

Z_MAX = 4.0
Z_TAIL = 3.0
TAIL_FRACTION = 0.05
# Deviations below this with zero standard error count as exact agreement.
ZERO_STDERR_SLACK = 1e-12


def _chunk_size(num_points: int, dim: int) -> int:
    per_traj = max(1, num_points * dim * dim)
    return max(1, min(MAX_CHUNK, CHUNK_ELEMENT_BUDGET // per_traj))


@dataclass(frozen=True)
class EnsembleResult:
    """Monte Carlo mean trajectory with per-entry standard errors.

    ``mean[k]`` estimates the averaged state at ``grid[k]`` in the
    computational basis; ``stderr_re``/``stderr_im`` are standard errors of
    the mean for the real and imaginary parts of each entry.
    """

    grid: np.ndarray
    mean: np.ndarray
    stderr_re: np.ndarray
    stderr_im: np.ndarray
    n_traj: int
    seed: int

    @property
    def dim(self) -> int:
        return self.mean.shape[1]

    def as_result(self) -> EvolutionResult:
        return EvolutionResult(self.grid, self.mean, "montecarlo")


def unitary_from_phases(decomposition: SpectralDecomposition, chi) -> np.ndarray:
    """Materialize sum_k exp(-i chi[k]) P_k for one set of level phases."""
    chi_arr = np.asarray(chi, dtype=float).reshape(-1)
    if chi_arr.shape[0] != decomposition.num_levels:
        raise GridMismatch(
            f"need one phase per distinct level ({decomposition.num_levels}), got {chi_arr.shape[0]}"
        )
    phases = np.exp(-1j * chi_arr)
    return np.einsum("k,kij->ij", phases, decomposition.projectors)


def _merge_stats(a, b):
    """Combine two (count, mean, m2_re, m2_im) accumulators."""
    n_a, mean_a, m2re_a, m2im_a = a
    n_b, mean_b, m2re_b, m2im_b = b
    n = n_a + n_b
    delta = mean_b - mean_a
    mean = mean_a + delta * (n_b / n)
    scale = n_a * n_b / n
    m2_re = m2re_a + m2re_b + delta.real**2 * scale
    m2_im = m2im_a + m2im_b + delta.imag**2 * scale
    return n, mean, m2_re, m2_im


def run_ensemble(
    decomposition: SpectralDecomposition,
    model: NoiseModel,
    rho0,
    grid,
    n_traj: int,
    seed: int,
    n_workers: int = 1,
) -> EnsembleResult:
    """Sample the random-unitary ensemble and accumulate mean and variance.

    Deterministic for fixed (seed, n_traj, grid): every trajectory has its own
    counter-based substream and the chunked accumulation order is fixed, so
    ``n_workers`` changes the wall time but not a single output bit.
    """
    if model.direct_lambda is not None:
        raise ValueError("a direct damping table has no Brownian realization to sample")
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    grid_arr = np.asarray(grid, dtype=float).reshape(-1)
    if grid_arr.size < 1 or grid_arr[0] != 0.0:
        raise GridMismatch("grid must start at 0")
    if np.any(np.diff(grid_arr) <= 0):
        raise GridMismatch("grid must be strictly increasing")
    if isinstance(rho0, DensityMatrix):
        rho = rho0
    else:
        rho = DensityMatrix(rho0)
    if rho.dim != decomposition.dim:
        raise GridMismatch(
            f"state dimension {rho.dim} != decomposition dimension {decomposition.dim}"
        )

    levels = np.asarray(decomposition.levels, dtype=float)
    dt = np.diff(grid_arr)
    factor = psd_sqrt(correlation_matrix(model, levels))
    rho0_e = to_energy_basis(rho.matrix, decomposition)
    vectors = decomposition.eigenvectors
    vectors_h = vectors.conj().T
    idx = decomposition.level_index
    num_points, dim = grid_arr.size, decomposition.dim

    def chunk_stats(start: int, count: int):
        chi = _chi_chunk(model, levels, grid_arr, dt, factor, seed, start, count)
        cols = np.exp(-1j * chi)[:, :, idx]
        states_e = (cols[:, :, :, None] * cols.conj()[:, :, None, :]) * rho0_e[None, None]
        states = vectors[None, None] @ states_e @ vectors_h[None, None]
        mean = states.mean(axis=0)
        dev = states - mean[None]
        m2_re = np.sum(dev.real**2, axis=0)
        m2_im = np.sum(dev.imag**2, axis=0)
        return count, mean, m2_re, m2_im

    chunk = _chunk_size(num_points, dim)
    bounds = [(s, min(chunk, n_traj - s)) for s in range(0, n_traj, chunk)]
    if n_workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            futures = [pool.submit(chunk_stats, s, c) for s, c in bounds]
            partials = [f.result() for f in futures]
    else:
        partials = [chunk_stats(s, c) for s, c in bounds]

    # Merge in fixed chunk order; the tree shape of the reduction is part of
    # the determinism contract, so keep it a plain left fold.
    total = partials[0]
    for part in partials[1:]:
        total = _merge_stats(total, part)
    n, mean, m2_re, m2_im = total
    denom = max(n - 1, 1)
    stderr_re = np.sqrt(m2_re / denom / n)
    stderr_im = np.sqrt(m2_im / denom / n)
    for arr in (grid_arr, mean, stderr_re, stderr_im):
        arr.setflags(write=False)
    return EnsembleResult(
        grid=grid_arr,
        mean=mean,
        stderr_re=stderr_re,
        stderr_im=stderr_im,
        n_traj=n,
        seed=seed,
    )


@dataclass(frozen=True)
class ComparisonReport:
    """Entrywise z-score comparison of an ensemble mean to a reference.

    ``passed`` is None when the ensemble is too small to estimate standard
    errors (fewer than two trajectories).
    """

    grid: np.ndarray
    max_abs_difference: np.ndarray
    max_z_per_time: np.ndarray
    max_z: float
    frac_above_tail: float
    n_traj: int
    passed: Optional[bool]

    def to_dict(self) -> dict:
        report = {
            "n_traj": self.n_traj,
            "max_z": self.max_z,
            "frac_above_3": self.frac_above_tail,
            "thresholds": {"max_z": Z_MAX, "tail_z": Z_TAIL, "tail_fraction": TAIL_FRACTION},
            "per_time": [
                {
                    "t": float(t),
                    "max_abs_difference": float(d),
                    "max_z": float(z),
                }
                for t, d, z in zip(self.grid, self.max_abs_difference, self.max_z_per_time)
            ],
        }
        if self.passed is not None:
            report["pass"] = self.passed
        return report


def _reference_states(ensemble: EnsembleResult, analytic) -> np.ndarray:
    if isinstance(analytic, EvolutionResult):
        if not np.array_equal(analytic.grid, ensemble.grid):
            raise GridMismatch("analytic reference evaluated on a different grid")
        return analytic.states
    if isinstance(analytic, (list, tuple)):
        stack = np.stack(
            [s.matrix if isinstance(s, DensityMatrix) else np.asarray(s, complex) for s in analytic]
        )
    else:
        stack = np.asarray(analytic, dtype=complex)
    if stack.shape != ensemble.mean.shape:
        raise GridMismatch(
            f"reference shape {stack.shape} does not match ensemble {ensemble.mean.shape}"
        )
    return stack


def compare_to_analytic(ensemble: EnsembleResult, analytic) -> ComparisonReport:
    """z-test of the ensemble mean against a reference trajectory.

    Per entry and per real/imag component, z = |deviation| / stderr.
    Deviations at or below 1e-12 count as z = 0 outright: entries that are
    deterministic under the model (frozen populations, the t = 0 point) have
    rounding-level standard errors, and dividing one rounding error by
    another would report huge z for perfect agreement.  A deviation above
    the slack over zero standard error counts as infinite.  PASS means
    max z <= 4 and at most 5% of components above z = 3.
    """
    reference = _reference_states(ensemble, analytic)
    dev_re = np.abs(ensemble.mean.real - reference.real)
    dev_im = np.abs(ensemble.mean.imag - reference.imag)

    def z_of(dev, stderr):
        z = np.zeros_like(dev)
        genuine = dev > ZERO_STDERR_SLACK
        positive = stderr > 0
        ratio = genuine & positive
        z[ratio] = dev[ratio] / stderr[ratio]
        z[genuine & ~positive] = np.inf
        return z

    z_re = z_of(dev_re, ensemble.stderr_re)
    z_im = z_of(dev_im, ensemble.stderr_im)
    z_all = np.stack([z_re, z_im], axis=-1)
    max_abs = np.maximum(dev_re, dev_im).reshape(ensemble.grid.size, -1).max(axis=1)
    max_z_per_time = z_all.reshape(ensemble.grid.size, -1).max(axis=1)
    max_z = float(np.max(z_all))
    frac = float(np.mean(z_all > Z_TAIL))
    passed: Optional[bool]
    if ensemble.n_traj < 2:
        passed = None
    else:
        passed = bool(max_z <= Z_MAX and frac <= TAIL_FRACTION)
    return ComparisonReport(
        grid=ensemble.grid,
        max_abs_difference=max_abs,
        max_z_per_time=max_z_per_time,
        max_z=max_z,
        frac_above_tail=frac,
        n_traj=ensemble.n_traj,
        passed=passed,
    )
