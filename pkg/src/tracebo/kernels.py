"""Mixed categorical/continuous kernel: Matern-5/2 over the box, category
overlap over the discrete slots, combined as a weighted sum-plus-product.

The cross-matrix inner loop has a compiled backend (built from
``_ckernels.pyx``) and a numpy fallback; whichever is available is selected at
import, overridable with ``TRACEBO_KERNEL_BACKEND=pure|compiled``.
"""

from __future__ import annotations

import math
import os

import numpy as np

from . import _kernels_np

try:
    from . import _ckernels
except ImportError:
    _ckernels = None


def _select_backend():
    choice = os.environ.get("TRACEBO_KERNEL_BACKEND", "auto")
    if choice == "pure":
        return _kernels_np, "pure"
    if choice == "compiled":
        if _ckernels is None:
            raise ImportError("compiled kernel backend requested but not built")
        return _ckernels, "compiled"
    if _ckernels is not None:
        return _ckernels, "compiled"
    return _kernels_np, "pure"


_impl, BACKEND = _select_backend()


def backend_name() -> str:
    return BACKEND


def matern52(distance, lengthscale: float = 1.0, signal_variance: float = 1.0):
    """Matern covariance with smoothness 5/2 at the given distance(s)."""
    r = np.asarray(distance, dtype=float)
    if np.any(r < 0.0):
        raise ValueError("distance must be non-negative")
    if lengthscale <= 0.0 or signal_variance <= 0.0:
        raise ValueError("lengthscale and signal_variance must be positive")
    s = math.sqrt(5.0) * r / lengthscale
    value = signal_variance * (1.0 + s + s * s / 3.0) * np.exp(-s)
    return float(value) if np.isscalar(distance) else value


def overlap_kernel(h, h_other, categorical_variance: float = 1.0) -> float:
    """Fraction of matching categorical slots, scaled by the variance."""
    a = np.asarray(h)
    b = np.asarray(h_other)
    if a.shape != b.shape:
        raise ValueError(f"categorical vectors differ in length: {a.shape} vs {b.shape}")
    if categorical_variance <= 0.0:
        raise ValueError("categorical_variance must be positive")
    return categorical_variance * float(np.mean(a == b))


def scaled_distance(x, x_other, lengthscales) -> float:
    """Euclidean distance after dividing each coordinate by its lengthscale."""
    d = (np.asarray(x, float) - np.asarray(x_other, float)) / np.asarray(lengthscales, float)
    return float(np.sqrt(np.dot(d, d)))


def cross_matrix(
    xa: np.ndarray,
    ha: np.ndarray,
    xb: np.ndarray,
    hb: np.ndarray,
    lengthscales: np.ndarray,
    signal_variance: float,
    categorical_variance: float,
    mix_weight: float,
) -> np.ndarray:
    """Kernel matrix between two mixed input sets (continuous part normalized).

    Categorical codes must be float64 arrays (exact small integers); this is
    the shared dtype contract of both backends.
    """
    return _impl.cross_matrix(
        np.ascontiguousarray(xa, dtype=np.float64),
        np.ascontiguousarray(ha, dtype=np.float64),
        np.ascontiguousarray(xb, dtype=np.float64),
        np.ascontiguousarray(hb, dtype=np.float64),
        np.ascontiguousarray(lengthscales, dtype=np.float64),
        float(signal_variance),
        float(categorical_variance),
        float(mix_weight),
    )
