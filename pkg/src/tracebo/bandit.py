"""EXP3 adversarial bandits and reward normalization.

One agent per categorical slot; every agent receives the same squashed
normalized reward each round, applied only to its selected arm with the usual
importance weighting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_GAMMA = 0.1
WEIGHT_RENORM_THRESHOLD = 1e6


class DegenerateInitError(ValueError):
    """Initialization voltages had zero spread; re-draw the init points."""


@dataclass
class Exp3Agent:
    arm_count: int
    gamma: float = DEFAULT_GAMMA
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.arm_count < 2:
            raise ValueError("need at least 2 arms")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")
        if self.weights is None:
            self.weights = np.ones(self.arm_count)
        else:
            self.weights = np.asarray(self.weights, dtype=float).copy()
            if len(self.weights) != self.arm_count:
                raise ValueError("weight count must equal arm_count")
        if not np.all(np.isfinite(self.weights)) or np.any(self.weights <= 0.0):
            raise ValueError("weights must be positive and finite")

    def probabilities(self) -> np.ndarray:
        """Exploration-mixed distribution: (1-gamma) w/sum(w) + gamma/K."""
        total = self.weights.sum()
        return (1.0 - self.gamma) * self.weights / total + self.gamma / self.arm_count

    def select(self, rng: np.random.Generator) -> int:
        """Sample an arm; deterministic given the generator's stream state."""
        u = rng.random()
        cumulative = np.cumsum(self.probabilities())
        return min(int(np.searchsorted(cumulative, u, side="right")), self.arm_count - 1)

    def update(self, arm: int, unit_reward: float):
        """Importance-weighted multiplicative update of the selected arm only."""
        if not 0.0 <= unit_reward <= 1.0:
            raise ValueError(f"unit reward {unit_reward} outside [0, 1]")
        p = self.probabilities()[arm]
        self.weights[arm] *= math.exp(self.gamma * (unit_reward / p) / self.arm_count)
        top = self.weights.max()
        if top > WEIGHT_RENORM_THRESHOLD:
            # dividing by a power of two keeps the probabilities bit-identical
            self.weights /= 2.0 ** math.floor(math.log2(top))


@dataclass(frozen=True)
class RewardNormalizer:
    """Z-scores voltages against the initialization sample statistics."""

    mean: float
    std: float

    def __post_init__(self):
        if self.std <= 0.0:
            raise DegenerateInitError(
                "initialization voltages have zero spread; re-draw the init points"
            )

    @classmethod
    def from_samples(cls, volts) -> "RewardNormalizer":
        v = np.asarray(volts, dtype=float)
        if len(v) < 2:
            raise ValueError("need at least 2 samples")
        return cls(float(v.mean()), float(v.std()))  # population (divide-by-n) std

    def normalize(self, volts: float) -> float:
        return (volts - self.mean) / self.std


def squash_to_unit(normalized_reward: float) -> float:
    """Affine map of the +/-3 sigma band onto [0, 1], clamped outside it."""
    return min(1.0, max(0.0, (normalized_reward + 3.0) / 6.0))
