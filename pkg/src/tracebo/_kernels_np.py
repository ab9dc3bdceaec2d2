"""Pure-numpy mixed-kernel cross matrix (fallback backend).

Continuous coordinates arrive already normalized to [0, 1]; categorical codes
arrive as float64 (exact small integers) so both backends share one dtype
contract.
"""

from __future__ import annotations

import numpy as np

SQRT5 = np.sqrt(5.0)


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
    """Mixed kernel values between two input sets, shape (len(a), len(b))."""
    diff = (xa[:, None, :] - xb[None, :, :]) / lengthscales
    r = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    s5r = SQRT5 * r
    kx = signal_variance * (1.0 + s5r + (5.0 / 3.0) * r * r) * np.exp(-s5r)
    kh = categorical_variance * (ha[:, None, :] == hb[None, :, :]).mean(axis=2)
    return (1.0 - mix_weight) * (kh + kx) + mix_weight * (kh * kx)
