"""Gaussian process regression over mixed categorical/continuous inputs.

Continuous coordinates are normalized to [0, 1] per dimension before kernel
evaluation; targets are expected to be normalized rewards, so the prior mean
is zero. Hyperparameters are fitted by multi-start derivative-free
maximization of the log marginal likelihood.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

from . import kernels
from .circuit import NumericalError

MATERN_NU = 2.5
JITTER_START = 1e-8  # times signal_variance
JITTER_CAP = 1e-2  # times signal_variance
REFIT_MIN_POINTS = 5
DEFAULT_FIT_STARTS = 3
FIT_MAXITER = 80


@dataclass(frozen=True)
class MixedSpace:
    """Arity of each categorical slot plus the continuous box."""

    arities: tuple[int, ...]
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        if not self.arities or any(k < 2 for k in self.arities):
            raise ValueError("need at least one categorical slot with arity >= 2")
        if len(self.lower) != len(self.upper) or not self.lower:
            raise ValueError("lower/upper bounds must be non-empty and equal length")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("each lower bound must be below its upper bound")

    @property
    def d_h(self) -> int:
        return len(self.arities)

    @property
    def d_x(self) -> int:
        return len(self.lower)

    def normalize(self, x: np.ndarray) -> np.ndarray:
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        return (np.asarray(x, float) - lo) / (hi - lo)

    def validate(self, z: "MixedInput"):
        if len(z.categorical) != self.d_h or len(z.continuous) != self.d_x:
            raise ValueError("input dimensions do not match the space")
        for c, k in zip(z.categorical, self.arities):
            if not 0 <= c < k:
                raise ValueError(f"categorical value {c} outside arity {k}")
        for x, lo, hi in zip(z.continuous, self.lower, self.upper):
            if not lo <= x <= hi:
                raise ValueError(f"continuous value {x} outside [{lo}, {hi}]")


@dataclass(frozen=True)
class MixedInput:
    categorical: tuple[int, ...]
    continuous: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "categorical", tuple(int(c) for c in self.categorical))
        object.__setattr__(self, "continuous", tuple(float(x) for x in self.continuous))


@dataclass(frozen=True)
class KernelParams:
    lengthscales: tuple[float, ...]
    signal_variance: float = 1.0
    categorical_variance: float = 1.0
    mix_weight: float = 0.5
    noise_variance: float = 0.01
    matern_nu: float = MATERN_NU  # fixed, not fitted

    def __post_init__(self):
        object.__setattr__(self, "lengthscales", tuple(float(v) for v in self.lengthscales))
        if any(v <= 0.0 for v in self.lengthscales):
            raise ValueError("lengthscales must be positive")
        if self.signal_variance <= 0.0 or self.categorical_variance <= 0.0:
            raise ValueError("variances must be positive")
        if not 0.0 <= self.mix_weight <= 1.0:
            raise ValueError("mix_weight must lie in [0, 1]")
        if self.noise_variance < 0.0:
            raise ValueError("noise_variance must be non-negative")
        if self.matern_nu != MATERN_NU:
            raise ValueError("matern_nu is fixed at 2.5")

    @classmethod
    def defaults(cls, d_x: int) -> "KernelParams":
        return cls(lengthscales=(0.5,) * d_x)


@dataclass(frozen=True)
class HyperBounds:
    lengthscale: tuple[float, float] = (0.01, 10.0)
    signal_variance: tuple[float, float] = (0.01, 100.0)
    categorical_variance: tuple[float, float] = (0.01, 100.0)
    noise_variance: tuple[float, float] = (1e-6, 1.0)


DEFAULT_BOUNDS = HyperBounds()


@dataclass(frozen=True)
class GpPosterior:
    mean: float
    variance: float  # clamped at 0 after round-off


class GpDataset:
    """Accumulates mixed inputs and scalar targets; exposes array views."""

    def __init__(self, space: MixedSpace):
        self.space = space
        self.inputs: list[MixedInput] = []
        self.targets: list[float] = []
        self._arrays = None

    def __len__(self) -> int:
        return len(self.inputs)

    def append(self, z: MixedInput, y: float):
        self.space.validate(z)
        self.inputs.append(z)
        self.targets.append(float(y))
        self._arrays = None

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(h_float, x_normalized, y); cached until the next append."""
        if self._arrays is None:
            n = len(self.inputs)
            h = np.array([z.categorical for z in self.inputs], dtype=np.float64).reshape(n, self.space.d_h)
            x = np.array([z.continuous for z in self.inputs], dtype=np.float64).reshape(n, self.space.d_x)
            y = np.asarray(self.targets, dtype=np.float64)
            self._arrays = (h, self.space.normalize(x) if n else x, y)
        return self._arrays


def mixed_kernel(z: MixedInput, z_other: MixedInput, params: KernelParams, space: MixedSpace) -> float:
    """Kernel value for one input pair: (1-w)(k_h + k_x) + w * k_h * k_x."""
    k_h = kernels.overlap_kernel(z.categorical, z_other.categorical, params.categorical_variance)
    r = kernels.scaled_distance(
        space.normalize(np.asarray(z.continuous)),
        space.normalize(np.asarray(z_other.continuous)),
        params.lengthscales,
    )
    k_x = kernels.matern52(r, 1.0, params.signal_variance)
    w = params.mix_weight
    return (1.0 - w) * (k_h + k_x) + w * k_h * k_x


def prior_variance(params: KernelParams) -> float:
    """k(z, z): identical categoricals and zero continuous distance."""
    w = params.mix_weight
    kh = params.categorical_variance
    kx = params.signal_variance
    return (1.0 - w) * (kh + kx) + w * kh * kx


class GpModel:
    """Posterior over a fixed dataset snapshot with fixed hyperparameters.

    The Gram factorization is cached, so repeated predictions (acquisition
    probes, refinement steps) cost one cross-matrix plus triangular solves.
    """

    def __init__(self, data: GpDataset, params: KernelParams):
        if len(params.lengthscales) != data.space.d_x:
            raise ValueError("lengthscale count must match the continuous dimension")
        self.space = data.space
        self.params = params
        self._h, self._x, self._y = data.arrays()
        self._n = len(data)
        self._chol = None
        self._alpha = None
        self.jitter_used = 0.0
        self.log_marginal = 0.0
        if self._n:
            gram = self._cross(self._h, self._x, self._h, self._x)
            gram[np.diag_indices_from(gram)] += params.noise_variance
            self._chol, self.jitter_used = _factor_spd(gram, params.signal_variance)
            self._alpha = cho_solve((self._chol, True), self._y, check_finite=False)
            half_logdet = float(np.sum(np.log(np.diag(self._chol))))
            self.log_marginal = float(
                -0.5 * self._y @ self._alpha - half_logdet - 0.5 * self._n * math.log(2.0 * math.pi)
            )

    def _cross(self, ha, xa, hb, xb) -> np.ndarray:
        p = self.params
        return kernels.cross_matrix(
            xa, ha, xb, hb,
            np.asarray(p.lengthscales), p.signal_variance, p.categorical_variance, p.mix_weight,
        )

    def predict(self, h: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and variance for raw-unit queries (rows)."""
        h = np.asarray(h, dtype=np.float64)
        xn = self.space.normalize(np.asarray(x, dtype=np.float64))
        k_ss = prior_variance(self.params)
        if not self._n:
            m = len(h)
            return np.zeros(m), np.full(m, k_ss)
        k_star = self._cross(self._h, self._x, h, xn)  # (n, m)
        mean = k_star.T @ self._alpha
        v = solve_triangular(self._chol, k_star, lower=True, check_finite=False)
        var = np.maximum(k_ss - np.einsum("ij,ij->j", v, v), 0.0)
        return mean, var

    def predict_one(self, z: MixedInput) -> GpPosterior:
        self.space.validate(z)
        mean, var = self.predict(
            np.asarray([z.categorical], dtype=np.float64),
            np.asarray([z.continuous], dtype=np.float64),
        )
        return GpPosterior(float(mean[0]), float(var[0]))


def _factor_spd(gram: np.ndarray, signal_variance: float) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor with an escalating jitter ladder."""
    jitter = JITTER_START * signal_variance
    cap = JITTER_CAP * signal_variance
    eye = np.eye(len(gram))
    while True:
        try:
            return cholesky(gram + jitter * eye, lower=True, check_finite=False), jitter
        except LinAlgError:
            jitter *= 10.0
            if jitter > cap:
                raise NumericalError(
                    f"Gram matrix not positive definite up to jitter {cap:.1e}"
                ) from None


def gp_posterior(data: GpDataset, params: KernelParams, query: MixedInput) -> GpPosterior:
    """Zero-mean GP predictive distribution at one query point."""
    return GpModel(data, params).predict_one(query)


def log_marginal_likelihood(data: GpDataset, params: KernelParams) -> float:
    """-1/2 y'K^-1 y - 1/2 log|K| - n/2 log 2pi with K = gram + noise."""
    if not len(data):
        return 0.0
    return GpModel(data, params).log_marginal


def fit_hyperparams(
    data: GpDataset,
    bounds: HyperBounds = DEFAULT_BOUNDS,
    budget: int = DEFAULT_FIT_STARTS,
    rng: np.random.Generator | None = None,
    warm_start: KernelParams | None = None,
) -> KernelParams:
    """Maximize the log marginal likelihood from ``budget`` starts.

    Derivative-free (Nelder-Mead in log space, within bounds). The returned
    parameters score at least as well as every start point; if every
    evaluation fails the defaults are returned.
    """
    if len(data) < 2:
        raise ValueError("need at least 2 observations to fit hyperparameters")
    rng = rng or np.random.default_rng(0)
    d_x = data.space.d_x
    defaults = KernelParams.defaults(d_x)

    log_bounds = np.log(
        [bounds.lengthscale] * d_x
        + [bounds.signal_variance, bounds.categorical_variance, bounds.noise_variance]
    )

    def to_params(theta: np.ndarray) -> KernelParams:
        v = np.exp(np.clip(theta, log_bounds[:, 0], log_bounds[:, 1]))
        return replace(
            defaults,
            lengthscales=tuple(v[:d_x]),
            signal_variance=float(v[d_x]),
            categorical_variance=float(v[d_x + 1]),
            noise_variance=float(v[d_x + 2]),
        )

    def to_theta(p: KernelParams) -> np.ndarray:
        vals = list(p.lengthscales) + [p.signal_variance, p.categorical_variance, p.noise_variance]
        return np.clip(np.log(vals), log_bounds[:, 0], log_bounds[:, 1])

    def negative_lml(theta: np.ndarray) -> float:
        try:
            return -log_marginal_likelihood(data, to_params(theta))
        except (NumericalError, FloatingPointError):
            return 1e12

    starts = [to_theta(defaults)]
    if warm_start is not None:
        starts.append(to_theta(warm_start))
    while len(starts) < budget:
        starts.append(rng.uniform(log_bounds[:, 0], log_bounds[:, 1]))
    starts = starts[:budget] if budget >= 1 else starts[:1]

    best_theta, best_score = None, math.inf
    for theta0 in starts:
        score0 = negative_lml(theta0)
        if score0 < best_score:
            best_theta, best_score = theta0, score0
        res = minimize(
            negative_lml,
            theta0,
            method="Nelder-Mead",
            bounds=log_bounds,
            options={"maxiter": FIT_MAXITER, "xatol": 1e-3, "fatol": 1e-6},
        )
        if res.fun < best_score:
            best_theta, best_score = res.x, res.fun
    if best_theta is None or best_score >= 1e12:
        return defaults
    return to_params(best_theta)
