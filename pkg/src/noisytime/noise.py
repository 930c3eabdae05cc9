"""Stochastic model of the randomized evolution time.

A :class:`NoiseModel` bundles closed preset families for the drift h(theta),
the level and time parts of the diffusion amplitude sigma(t; theta) =
sigma_time(t) * sigma_theta(theta), and the level-to-level correlation
g(theta, theta') of the driving Brownian motions.  From these it derives

    eta(t; a, b)    variance rate of the phase difference chi_t(a) - chi_t(b)
    lambda(t; a, b) accumulated variance, integral of eta from 0 to t

which control the damping factor exp(-lambda/2) of each coherence.  The module
also samples the correlated Brownian field and the chi paths themselves, and
checks the even/odd moment identities of the phase difference empirically.

Presets are deliberately closed families (no arbitrary callables): configs stay
serializable and every lambda is either closed-form or a one-dimensional
quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .errors import (
    ConfigError,
    DimensionMismatch,
    GridMismatch,
    KernelAsymmetric,
    KernelNotPSD,
    QuadratureFailure,
)

__all__ = [
    "DriftPreset",
    "SigmaThetaPreset",
    "SigmaTimePreset",
    "CorrelationPreset",
    "DirectDampingPreset",
    "NoiseModel",
    "LambdaKernel",
    "BrownianFieldSample",
    "ChiPaths",
    "MomentRow",
    "dephasing_model",
    "correlated_model",
    "direct_damping_model",
    "eta",
    "lambda_pair",
    "correlation_matrix",
    "psd_sqrt",
    "sample_brownian_field",
    "sample_chi_paths",
    "sample_phase_differences",
    "moment_report",
]

# Below this, a correlation matrix is treated as genuinely indefinite rather
# than noisy-PSD; between this and zero, eigenvalues are clipped.
PSD_EIG_FLOOR = -1e-8
PSD_CLIP = -1e-12

QUAD_REL_TOL = 1e-10


def _as_float_tuple(values, path: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, f"expected a list of numbers, got {values!r}") from exc


def _poly_eval(coeffs: tuple[float, ...], x):
    # Ascending-order coefficients: coeffs[k] multiplies x**k.
    return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), coeffs)


@dataclass(frozen=True)
class DriftPreset:
    """Deterministic drift h(theta) of the phase SDE.

    Kinds: ``identity`` (h = theta), ``affine`` (a*theta + b),
    ``polynomial`` (ascending coefficients).
    """

    kind: str
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("identity", "affine", "polynomial"):
            raise ConfigError("drift_h.kind", f"unknown kind {self.kind!r}")
        if self.kind == "affine" and len(self.params) != 2:
            raise ConfigError("drift_h", "affine drift needs exactly (a, b)")
        if self.kind == "polynomial" and len(self.params) == 0:
            raise ConfigError("drift_h", "polynomial drift needs coefficients")

    @classmethod
    def identity(cls) -> "DriftPreset":
        return cls("identity")

    @classmethod
    def affine(cls, a: float, b: float) -> "DriftPreset":
        return cls("affine", (float(a), float(b)))

    @classmethod
    def polynomial(cls, coeffs) -> "DriftPreset":
        return cls("polynomial", _as_float_tuple(coeffs, "drift_h.coeffs"))

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.kind == "identity":
            return theta + 0.0
        if self.kind == "affine":
            a, b = self.params
            return a * theta + b
        return _poly_eval(self.params, theta)

    def to_config(self) -> dict:
        if self.kind == "identity":
            return {"kind": "identity"}
        if self.kind == "affine":
            return {"kind": "affine", "a": self.params[0], "b": self.params[1]}
        return {"kind": "polynomial", "coeffs": list(self.params)}

    @staticmethod
    def from_config(data: dict, path: str = "noise.drift_h") -> "DriftPreset":
        kind = _config_kind(data, path)
        if kind == "identity":
            return DriftPreset.identity()
        if kind == "affine":
            return DriftPreset.affine(
                _config_number(data, "a", path), _config_number(data, "b", path)
            )
        if kind == "polynomial":
            return DriftPreset.polynomial(
                _as_float_tuple(data.get("coeffs", ()), f"{path}.coeffs")
            )
        raise ConfigError(f"{path}.kind", f"unknown kind {kind!r}")


@dataclass(frozen=True)
class SigmaThetaPreset:
    """Level part of the diffusion amplitude.

    Kinds: ``constant`` (c), ``linear`` (c*theta), ``polynomial``.  Noise
    strength lives here: a strength gamma is expressed as a sqrt(gamma)
    coefficient (see :func:`dephasing_model`).
    """

    kind: str
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("constant", "linear", "polynomial"):
            raise ConfigError("sigma_theta.kind", f"unknown kind {self.kind!r}")
        if self.kind in ("constant", "linear") and len(self.params) != 1:
            raise ConfigError("sigma_theta", f"{self.kind} needs exactly one coefficient")
        if self.kind == "polynomial" and len(self.params) == 0:
            raise ConfigError("sigma_theta", "polynomial needs coefficients")

    @classmethod
    def constant(cls, c: float) -> "SigmaThetaPreset":
        return cls("constant", (float(c),))

    @classmethod
    def linear(cls, c: float) -> "SigmaThetaPreset":
        return cls("linear", (float(c),))

    @classmethod
    def polynomial(cls, coeffs) -> "SigmaThetaPreset":
        return cls("polynomial", _as_float_tuple(coeffs, "sigma_theta.coeffs"))

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.kind == "constant":
            return np.full_like(theta, self.params[0])
        if self.kind == "linear":
            return self.params[0] * theta
        return _poly_eval(self.params, theta)

    def scaled(self, factor: float) -> "SigmaThetaPreset":
        """Same shape with every coefficient multiplied by ``factor``."""
        return SigmaThetaPreset(self.kind, tuple(factor * p for p in self.params))

    def to_config(self) -> dict:
        if self.kind == "polynomial":
            return {"kind": "polynomial", "coeffs": list(self.params)}
        return {"kind": self.kind, "coefficient": self.params[0]}

    @staticmethod
    def from_config(data: dict, path: str = "noise.sigma_theta") -> "SigmaThetaPreset":
        kind = _config_kind(data, path)
        if kind in ("constant", "linear"):
            return SigmaThetaPreset(kind, (_config_number(data, "coefficient", path),))
        if kind == "polynomial":
            return SigmaThetaPreset.polynomial(
                _as_float_tuple(data.get("coeffs", ()), f"{path}.coeffs")
            )
        raise ConfigError(f"{path}.kind", f"unknown kind {kind!r}")


@dataclass(frozen=True)
class SigmaTimePreset:
    """Time part of the diffusion amplitude, nonnegative.

    Kinds: ``constant`` (value, default 1) and ``piecewise_constant``
    (breakpoints strictly increasing, one more value than breakpoints;
    values[i] applies on [breakpoints[i-1], breakpoints[i]) ).
    """

    kind: str
    value: float = 1.0
    breakpoints: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind == "constant":
            if self.value < 0:
                raise ConfigError("sigma_time.value", "must be >= 0")
        elif self.kind == "piecewise_constant":
            if len(self.values) != len(self.breakpoints) + 1:
                raise ConfigError(
                    "sigma_time", "piecewise_constant needs len(values) == len(breakpoints) + 1"
                )
            if any(v < 0 for v in self.values):
                raise ConfigError("sigma_time.values", "must all be >= 0")
            if any(b2 <= b1 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:])):
                raise ConfigError("sigma_time.breakpoints", "must be strictly increasing")
        else:
            raise ConfigError("sigma_time.kind", f"unknown kind {self.kind!r}")

    @classmethod
    def constant(cls, value: float = 1.0) -> "SigmaTimePreset":
        return cls("constant", value=float(value))

    @classmethod
    def piecewise_constant(cls, breakpoints, values) -> "SigmaTimePreset":
        return cls(
            "piecewise_constant",
            breakpoints=_as_float_tuple(breakpoints, "sigma_time.breakpoints"),
            values=_as_float_tuple(values, "sigma_time.values"),
        )

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.full_like(t, self.value)
        idx = np.searchsorted(np.asarray(self.breakpoints), t, side="right")
        return np.asarray(self.values, dtype=float)[idx]

    def to_config(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        return {
            "kind": "piecewise_constant",
            "breakpoints": list(self.breakpoints),
            "values": list(self.values),
        }

    @staticmethod
    def from_config(data: dict, path: str = "noise.sigma_time") -> "SigmaTimePreset":
        kind = _config_kind(data, path)
        if kind == "constant":
            return SigmaTimePreset.constant(float(data.get("value", 1.0)))
        if kind == "piecewise_constant":
            return SigmaTimePreset.piecewise_constant(
                data.get("breakpoints", ()), data.get("values", ())
            )
        raise ConfigError(f"{path}.kind", f"unknown kind {kind!r}")


@dataclass(frozen=True)
class CorrelationPreset:
    """Correlation g(theta, theta') between level Brownian motions.

    Kinds: ``uniform`` (g = 1, one shared motion), ``gaussian`` with scale tau
    (exp(-tau^2 (theta-theta')^2)), ``exponential`` with length ell
    (exp(-|theta-theta'| / ell)).  All three satisfy g(theta, theta) = 1,
    symmetry, and |g| <= 1, and yield positive semidefinite matrices.
    """

    kind: str
    tau: float = 0.0
    length: float = 1.0

    def __post_init__(self):
        if self.kind not in ("uniform", "gaussian", "exponential"):
            raise ConfigError("correlation_g.kind", f"unknown kind {self.kind!r}")
        if self.kind == "gaussian" and self.tau < 0:
            raise ConfigError("correlation_g.tau", "must be >= 0")
        if self.kind == "exponential" and self.length <= 0:
            raise ConfigError("correlation_g.length", "must be > 0")

    @classmethod
    def uniform(cls) -> "CorrelationPreset":
        return cls("uniform")

    @classmethod
    def gaussian(cls, tau: float) -> "CorrelationPreset":
        return cls("gaussian", tau=float(tau))

    @classmethod
    def exponential(cls, length: float) -> "CorrelationPreset":
        return cls("exponential", length=float(length))

    def __call__(self, theta, theta_prime):
        theta = np.asarray(theta, dtype=float)
        theta_prime = np.asarray(theta_prime, dtype=float)
        if self.kind == "uniform":
            return np.ones(np.broadcast_shapes(theta.shape, theta_prime.shape))
        diff = theta - theta_prime
        if self.kind == "gaussian":
            return np.exp(-(self.tau**2) * diff**2)
        return np.exp(-np.abs(diff) / self.length)

    def to_config(self) -> dict:
        if self.kind == "uniform":
            return {"kind": "uniform"}
        if self.kind == "gaussian":
            return {"kind": "gaussian", "tau": self.tau}
        return {"kind": "exponential", "length": self.length}

    @staticmethod
    def from_config(data: dict, path: str = "noise.correlation_g") -> "CorrelationPreset":
        kind = _config_kind(data, path)
        if kind == "uniform":
            return CorrelationPreset.uniform()
        if kind == "gaussian":
            return CorrelationPreset.gaussian(_config_number(data, "tau", path))
        if kind == "exponential":
            return CorrelationPreset.exponential(_config_number(data, "length", path))
        raise ConfigError(f"{path}.kind", f"unknown kind {kind!r}")


@dataclass(frozen=True)
class DirectDampingPreset:
    """Explicit damping-rate table, bypassing the Brownian construction.

    ``separable_linear`` means lambda(t; theta_i, theta_j) = t * table[i, j]
    over the tabulated distinct levels.  A nonzero diagonal makes populations
    decay (dissipative branch); no Brownian field realizes that, so models
    carrying this preset cannot be sampled, only propagated and integrated.
    """

    levels: tuple[float, ...]
    table: np.ndarray
    kind: str = "separable_linear"

    def __init__(self, levels, table, kind: str = "separable_linear"):
        if kind != "separable_linear":
            raise ConfigError("direct_lambda.kind", f"unknown kind {kind!r}")
        levels = _as_float_tuple(levels, "direct_lambda.levels")
        arr = np.asarray(table, dtype=float)
        m = len(levels)
        if arr.shape != (m, m):
            raise DimensionMismatch(
                f"direct damping table shape {arr.shape} does not match {m} levels"
            )
        asym = float(np.max(np.abs(arr - arr.T))) if m else 0.0
        if asym > 1e-12:
            raise KernelAsymmetric(f"damping table asymmetric by {asym:.3e}")
        arr = 0.5 * (arr + arr.T)
        if m and float(np.min(np.diag(arr))) < 0:
            raise ConfigError("direct_lambda.table", "diagonal rates must be >= 0")
        arr.setflags(write=False)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "table", arr)
        object.__setattr__(self, "kind", kind)

    def _index_of(self, theta: float) -> int:
        lv = np.asarray(self.levels)
        hit = np.nonzero(np.isclose(lv, theta, rtol=0.0, atol=1e-9))[0]
        if hit.size == 0:
            raise DimensionMismatch(f"level {theta!r} is not tabulated in direct_lambda")
        return int(hit[0])

    def rate_at(self, theta: float, theta_prime: float) -> float:
        return float(self.table[self._index_of(theta), self._index_of(theta_prime)])

    def lambda_at(self, t: float, theta: float, theta_prime: float) -> float:
        return t * self.rate_at(theta, theta_prime)

    def has_dissipation(self) -> bool:
        return bool(np.any(np.diag(self.table) > 0.0))

    def to_config(self) -> dict:
        return {
            "kind": self.kind,
            "levels": list(self.levels),
            "table": [[float(v) for v in row] for row in self.table],
        }

    @staticmethod
    def from_config(data: dict, path: str = "noise.direct_lambda") -> "DirectDampingPreset":
        kind = data.get("kind", "separable_linear")
        if "levels" not in data or "table" not in data:
            raise ConfigError(path, "needs 'levels' and 'table'")
        return DirectDampingPreset(data["levels"], data["table"], kind=kind)


def _config_kind(data, path: str) -> str:
    if not isinstance(data, dict) or "kind" not in data:
        raise ConfigError(path, "expected a mapping with a 'kind' field")
    return str(data["kind"])


def _config_number(data: dict, key: str, path: str) -> float:
    if key not in data:
        raise ConfigError(f"{path}.{key}", "missing")
    try:
        return float(data[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}.{key}", f"expected a number, got {data[key]!r}") from exc


@dataclass(frozen=True)
class NoiseModel:
    """Full stochastic model: drift, diffusion amplitude, correlation, strength.

    ``gamma`` records the declared noise strength; the sigma presets carry it
    numerically (a dephasing model of strength gamma uses sigma_theta =
    linear(sqrt(gamma))).  Kernel evaluation therefore never multiplies by
    gamma again; generator builders take gamma as an explicit argument.
    """

    drift_h: DriftPreset = field(default_factory=DriftPreset.identity)
    sigma_theta: SigmaThetaPreset = field(default_factory=lambda: SigmaThetaPreset.linear(1.0))
    sigma_time: SigmaTimePreset = field(default_factory=SigmaTimePreset.constant)
    correlation_g: CorrelationPreset = field(default_factory=CorrelationPreset.uniform)
    gamma: float = 1.0
    direct_lambda: Optional[DirectDampingPreset] = None

    def __post_init__(self):
        if self.gamma < 0:
            raise ConfigError("noise.gamma", "must be >= 0")

    def sigma(self, t, theta):
        """Diffusion amplitude sigma(t; theta) = sigma_time(t) * sigma_theta(theta)."""
        return self.sigma_time(t) * self.sigma_theta(theta)

    @property
    def is_dissipative(self) -> bool:
        """True when the direct table damps populations (nonzero diagonal)."""
        return self.direct_lambda is not None and self.direct_lambda.has_dissipation()

    def to_config(self) -> dict:
        cfg = {
            "drift_h": self.drift_h.to_config(),
            "sigma_theta": self.sigma_theta.to_config(),
            "sigma_time": self.sigma_time.to_config(),
            "correlation_g": self.correlation_g.to_config(),
            "gamma": self.gamma,
        }
        if self.direct_lambda is not None:
            cfg["direct_lambda"] = self.direct_lambda.to_config()
        return cfg

    @staticmethod
    def from_config(data: dict, path: str = "noise") -> "NoiseModel":
        if not isinstance(data, dict):
            raise ConfigError(path, "expected a mapping")
        known = {
            "drift_h",
            "sigma_theta",
            "sigma_time",
            "correlation_g",
            "gamma",
            "direct_lambda",
        }
        for key in data:
            if key not in known:
                raise ConfigError(f"{path}.{key}", "unknown field")
        gamma = float(data.get("gamma", 1.0))
        if "sigma_theta" in data:
            sigma_theta = SigmaThetaPreset.from_config(data["sigma_theta"], f"{path}.sigma_theta")
        else:
            # Strength shorthand: omitting sigma_theta means linear(sqrt(gamma)).
            sigma_theta = SigmaThetaPreset.linear(math.sqrt(gamma))
        drift = (
            DriftPreset.from_config(data["drift_h"], f"{path}.drift_h")
            if "drift_h" in data
            else DriftPreset.identity()
        )
        sigma_time = (
            SigmaTimePreset.from_config(data["sigma_time"], f"{path}.sigma_time")
            if "sigma_time" in data
            else SigmaTimePreset.constant()
        )
        correlation = (
            CorrelationPreset.from_config(data["correlation_g"], f"{path}.correlation_g")
            if "correlation_g" in data
            else CorrelationPreset.uniform()
        )
        direct = (
            DirectDampingPreset.from_config(data["direct_lambda"], f"{path}.direct_lambda")
            if "direct_lambda" in data
            else None
        )
        return NoiseModel(
            drift_h=drift,
            sigma_theta=sigma_theta,
            sigma_time=sigma_time,
            correlation_g=correlation,
            gamma=gamma,
            direct_lambda=direct,
        )


def dephasing_model(gamma: float) -> NoiseModel:
    """Uniform correlation, sigma(t; theta) = sqrt(gamma) * theta."""
    return NoiseModel(
        sigma_theta=SigmaThetaPreset.linear(math.sqrt(gamma)),
        correlation_g=CorrelationPreset.uniform(),
        gamma=gamma,
    )


def correlated_model(gamma: float, tau: float) -> NoiseModel:
    """Gaussian correlation of scale tau, sigma(t; theta) = sqrt(gamma) * theta."""
    return NoiseModel(
        sigma_theta=SigmaThetaPreset.linear(math.sqrt(gamma)),
        correlation_g=CorrelationPreset.gaussian(tau),
        gamma=gamma,
    )


def direct_damping_model(levels, table, drift: Optional[DriftPreset] = None) -> NoiseModel:
    """Model defined by an explicit damping-rate table (no Brownian field)."""
    return NoiseModel(
        drift_h=drift if drift is not None else DriftPreset.identity(),
        sigma_theta=SigmaThetaPreset.constant(0.0),
        gamma=0.0,
        direct_lambda=DirectDampingPreset(levels, table),
    )


def eta(model: NoiseModel, t: float, theta: float, theta_prime: float) -> float:
    """Variance rate of the phase difference between two levels.

    eta = sigma(t;a)^2 g(a,a) + sigma(t;b)^2 g(b,b) - 2 sigma(t;a) sigma(t;b) g(a,b).
    Nonnegative for |g| <= 1; clamped at zero against roundoff.  For a direct
    damping table this returns the tabulated rate instead.
    """
    if model.direct_lambda is not None:
        return model.direct_lambda.rate_at(theta, theta_prime)
    s_a = float(model.sigma(t, theta))
    s_b = float(model.sigma(t, theta_prime))
    g = model.correlation_g
    value = (
        s_a * s_a * float(g(theta, theta))
        + s_b * s_b * float(g(theta_prime, theta_prime))
        - 2.0 * s_a * s_b * float(g(theta, theta_prime))
    )
    return max(value, 0.0)


def lambda_pair(model: NoiseModel, t: float, theta: float, theta_prime: float) -> float:
    """Accumulated variance: integral of eta over [0, t].

    Closed form t * eta(0) when sigma_time is constant; otherwise adaptive
    quadrature to relative tolerance 1e-10 with the sigma_time breakpoints
    passed as known discontinuities.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if model.direct_lambda is not None:
        return model.direct_lambda.lambda_at(t, theta, theta_prime)
    if t == 0.0:
        return 0.0
    if model.sigma_time.is_constant:
        return t * eta(model, 0.0, theta, theta_prime)
    points = [b for b in model.sigma_time.breakpoints if 0.0 < b < t]
    out = quad(
        lambda s: eta(model, s, theta, theta_prime),
        0.0,
        t,
        epsabs=1e-14,
        epsrel=QUAD_REL_TOL,
        limit=200,
        points=points or None,
        full_output=True,
    )
    value, abserr = out[0], out[1]
    if len(out) > 3:
        raise QuadratureFailure(f"quadrature did not converge: {out[3]}")
    if abserr > max(QUAD_REL_TOL * abs(value), 1e-12):
        raise QuadratureFailure(
            f"quadrature error {abserr:.3e} above tolerance for value {value:.6e}"
        )
    return float(value)


@dataclass(frozen=True)
class LambdaKernel:
    """Damping and variance-rate kernels bound to a set of distinct levels.

    ``lambda_matrix(t)`` and ``eta_matrix(t)`` return symmetric (m, m) arrays;
    the diagonal vanishes for any Brownian-constructed model and equals the
    tabulated population-decay rates for a direct damping table.
    """

    model: NoiseModel
    levels: np.ndarray

    def __init__(self, model: NoiseModel, levels):
        lv = np.asarray(levels, dtype=float).reshape(-1)
        lv.setflags(write=False)
        object.__setattr__(self, "model", model)
        object.__setattr__(self, "levels", lv)

    @property
    def num_levels(self) -> int:
        return self.levels.shape[0]

    def eta_at(self, t: float, i: int, j: int) -> float:
        return eta(self.model, t, float(self.levels[i]), float(self.levels[j]))

    def lambda_at(self, t: float, i: int, j: int) -> float:
        return lambda_pair(self.model, t, float(self.levels[i]), float(self.levels[j]))

    def _pair_matrix(self, evaluate) -> np.ndarray:
        m = self.num_levels
        out = np.zeros((m, m))
        for i in range(m):
            for j in range(i, m):
                value = evaluate(i, j)
                out[i, j] = value
                out[j, i] = value
        return out

    def eta_matrix(self, t: float) -> np.ndarray:
        return self._pair_matrix(lambda i, j: self.eta_at(t, i, j))

    def lambda_matrix(self, t: float) -> np.ndarray:
        return self._pair_matrix(lambda i, j: self.lambda_at(t, i, j))


def correlation_matrix(model: NoiseModel, levels) -> np.ndarray:
    """Correlation matrix G[i, j] = g(theta_i, theta_j) over distinct levels."""
    lv = np.asarray(levels, dtype=float).reshape(-1)
    return np.asarray(model.correlation_g(lv[:, None], lv[None, :]), dtype=float)


def psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    """Factor L with L L^T equal to the given PSD matrix.

    Eigendecomposition with clipping, not Cholesky: a uniform correlation is
    rank one and Cholesky would fail.  Eigenvalues in [-1e-12, 0) are clipped
    to zero; anything below -1e-8 raises KernelNotPSD.  Rows are rescaled so
    the marginal variances match the diagonal exactly after clipping.
    """
    arr = np.asarray(matrix, dtype=float)
    eigvals, eigvecs = np.linalg.eigh(0.5 * (arr + arr.T))
    if eigvals[0] < PSD_EIG_FLOOR:
        raise KernelNotPSD(float(eigvals[0]))
    clipped = np.clip(eigvals, 0.0, None)
    factor = eigvecs * np.sqrt(clipped)[None, :]
    row_var = np.sum(factor**2, axis=1)
    target = np.diag(arr)
    scale = np.ones_like(row_var)
    positive = row_var > 0
    scale[positive] = np.sqrt(target[positive] / row_var[positive])
    return factor * scale[:, None]


@dataclass(frozen=True)
class BrownianFieldSample:
    """Correlated Brownian increments for one trajectory.

    ``increments[step, level]`` is Gaussian with covariance
    g(theta_i, theta_j) * dt[step] across levels, independent across steps.
    """

    seed: int
    trajectory: int
    grid: np.ndarray
    increments: np.ndarray


@dataclass(frozen=True)
class ChiPaths:
    """Accumulated phases chi_t(theta) per trajectory on a grid; chi_0 = 0."""

    seed: int
    grid: np.ndarray
    levels: np.ndarray
    paths: np.ndarray  # (n_traj, len(grid), len(levels))


def _check_grid(grid) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(grid, dtype=float).reshape(-1)
    if arr.size < 2:
        raise GridMismatch("grid needs at least two points")
    dt = np.diff(arr)
    if np.any(dt <= 0):
        raise GridMismatch("grid must be strictly increasing")
    return arr, dt


def _substream(seed: int, trajectory: int) -> np.random.Generator:
    # Counter-based substream: (master seed, trajectory index) is the whole
    # key, so parallel and serial runs draw identical numbers.
    key = np.array([seed, trajectory], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _increments_for(
    factor: np.ndarray, sqrt_dt: np.ndarray, seed: int, trajectory: int
) -> np.ndarray:
    rng = _substream(seed, trajectory)
    z = rng.standard_normal((sqrt_dt.shape[0], factor.shape[1]))
    return (z @ factor.T) * sqrt_dt[:, None]


def sample_brownian_field(
    model: NoiseModel, levels, grid, seed: int, n_traj: int
) -> list[BrownianFieldSample]:
    """Draw correlated Brownian increments for each trajectory.

    Each trajectory uses its own counter-based substream keyed by
    (seed, trajectory index), so results do not depend on execution order.
    """
    if model.direct_lambda is not None:
        raise ValueError("a direct damping table has no Brownian realization to sample")
    lv = np.asarray(levels, dtype=float).reshape(-1)
    grid_arr, dt = _check_grid(grid)
    factor = psd_sqrt(correlation_matrix(model, lv))
    sqrt_dt = np.sqrt(dt)
    grid_arr.setflags(write=False)
    samples = []
    for j in range(n_traj):
        inc = _increments_for(factor, sqrt_dt, seed, j)
        inc.setflags(write=False)
        samples.append(
            BrownianFieldSample(seed=seed, trajectory=j, grid=grid_arr, increments=inc)
        )
    return samples


def _chi_chunk(
    model: NoiseModel,
    lv: np.ndarray,
    grid_arr: np.ndarray,
    dt: np.ndarray,
    factor: np.ndarray,
    seed: int,
    start: int,
    count: int,
    include_drift: bool = True,
) -> np.ndarray:
    """Chi paths for trajectories [start, start+count), shape (count, T, m)."""
    sqrt_dt = np.sqrt(dt)
    # sigma evaluated at the left endpoint of each step; exact for constant
    # sigma_time and for piecewise-constant grids aligned with breakpoints.
    time_part = np.asarray(model.sigma_time(grid_arr[:-1]), dtype=float)
    level_part = np.asarray(model.sigma_theta(lv), dtype=float)
    amp = time_part[:, None] * level_part[None, :]
    drift = (
        np.asarray(model.drift_h(lv), dtype=float)[None, :] * dt[:, None]
        if include_drift
        else 0.0
    )
    steps = np.empty((count, dt.shape[0], lv.shape[0]))
    for k in range(count):
        db = _increments_for(factor, sqrt_dt, seed, start + k)
        steps[k] = drift + amp * db
    paths = np.zeros((count, grid_arr.shape[0], lv.shape[0]))
    np.cumsum(steps, axis=1, out=paths[:, 1:, :])
    return paths


def sample_chi_paths(
    model: NoiseModel, levels, grid, seed: int, n_traj: int
) -> ChiPaths:
    """Euler-Maruyama paths of the phase SDE, exact in distribution here.

    The presets make drift and diffusion independent of chi, so each step adds
    an exactly Gaussian increment; there is no discretization bias for
    constant sigma_time, and none for piecewise sigma_time when the grid
    contains the breakpoints.
    """
    if model.direct_lambda is not None:
        raise ValueError("a direct damping table has no Brownian realization to sample")
    lv = np.asarray(levels, dtype=float).reshape(-1)
    grid_arr, dt = _check_grid(grid)
    factor = psd_sqrt(correlation_matrix(model, lv))
    paths = _chi_chunk(model, lv, grid_arr, dt, factor, seed, 0, n_traj)
    grid_arr.setflags(write=False)
    lv.setflags(write=False)
    paths.setflags(write=False)
    return ChiPaths(seed=seed, grid=grid_arr, levels=lv, paths=paths)


def _moment_grid(model: NoiseModel, t: float, n_steps: int) -> np.ndarray:
    base = np.linspace(0.0, t, n_steps + 1)
    if model.sigma_time.is_constant:
        return base
    inside = [b for b in model.sigma_time.breakpoints if 0.0 < b < t]
    return np.union1d(base, np.asarray(inside, dtype=float))


def sample_phase_differences(
    model: NoiseModel,
    t: float,
    theta: float,
    theta_prime: float,
    n_traj: int,
    seed: int,
    n_steps: int = 256,
) -> np.ndarray:
    """Samples of the driftless phase difference X_t between two levels.

    X_t is the stochastic integral of sigma dB at theta minus the same at
    theta_prime; its distribution is exactly N(0, lambda(t)).
    """
    if model.direct_lambda is not None:
        raise ValueError("a direct damping table has no Brownian realization to sample")
    if t <= 0:
        return np.zeros(n_traj)
    if theta == theta_prime:
        # One level twice: the shared Brownian motion cancels identically.
        return np.zeros(n_traj)
    lv = np.array([theta, theta_prime], dtype=float)
    grid_arr = _moment_grid(model, t, n_steps)
    dt = np.diff(grid_arr)
    factor = psd_sqrt(correlation_matrix(model, lv))
    out = np.empty(n_traj)
    chunk = 4096
    for start in range(0, n_traj, chunk):
        count = min(chunk, n_traj - start)
        paths = _chi_chunk(
            model, lv, grid_arr, dt, factor, seed, start, count, include_drift=False
        )
        out[start : start + count] = paths[:, -1, 0] - paths[:, -1, 1]
    return out


@dataclass(frozen=True)
class MomentRow:
    """One moment comparison: E[X^order] empirical vs predicted."""

    order: int
    empirical: float
    predicted: float
    stderr: float


def predicted_moment(order: int, lam: float) -> float:
    """Gaussian moments of X ~ N(0, lambda): odd vanish, even are
    (2n)! / (2^n n!) * lambda^n for order 2n."""
    if order < 0:
        raise ValueError("order must be >= 0")
    if order % 2 == 1:
        return 0.0
    n = order // 2
    return math.factorial(2 * n) / (2**n * math.factorial(n)) * lam**n


def moment_report(
    model: NoiseModel,
    t: float,
    theta: float,
    theta_prime: float,
    n_traj: int,
    seed: int,
    max_order: int = 6,
    n_steps: int = 256,
) -> list[MomentRow]:
    """Empirical moments of the phase difference against the Gaussian values.

    Returns rows for orders 2..max_order.  Standard errors are the sample
    standard deviation of X^order over sqrt(n_traj).
    """
    if n_traj < 2:
        raise ValueError("n_traj must be >= 2 for standard errors")
    if max_order < 2:
        raise ValueError("max_order must be >= 2")
    lam = lambda_pair(model, t, theta, theta_prime)
    x = sample_phase_differences(model, t, theta, theta_prime, n_traj, seed, n_steps)
    rows = []
    for order in range(2, max_order + 1):
        powers = x**order
        empirical = float(np.mean(powers))
        variance = float(np.var(powers, ddof=1))
        rows.append(
            MomentRow(
                order=order,
                empirical=empirical,
                predicted=predicted_moment(order, lam),
                stderr=math.sqrt(variance / n_traj),
            )
        )
    return rows
