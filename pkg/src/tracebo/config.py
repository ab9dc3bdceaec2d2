"""Experiment and optimizer configuration."""

from __future__ import annotations

from dataclasses import dataclass, field

from .geometry import WORKSPACE_H, WORKSPACE_W

SOURCE_VOLTS = 30.0
LOAD_OHMS = 45.0
OBSTACLE_OHMS = 5.0


@dataclass(frozen=True)
class OptimizerConfig:
    n_init: int = 5
    n_iter: int = 40
    kappa: float = 2.0  # UCB exploration weight
    acquisition_samples: int = 1000
    acquisition_refinements: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.n_init < 2:
            raise ValueError("n_init must be >= 2")
        if self.n_iter < 1:
            raise ValueError("n_iter must be >= 1")
        if self.kappa < 0.0:
            raise ValueError("kappa must be >= 0")
        if self.acquisition_samples < 1:
            raise ValueError("acquisition_samples must be >= 1")
        if self.acquisition_refinements < 1:
            raise ValueError("acquisition_refinements must be >= 1")


@dataclass(frozen=True)
class ExperimentSpec:
    """Electrical constants and optimization budget for one experiment."""

    name: str
    source_volts: float = SOURCE_VOLTS
    load_ohms: float = LOAD_OHMS
    obstacle_ohms: float | None = None  # shunt to ground when the pattern contacts the obstacle
    workspace: tuple[float, float] = (WORKSPACE_W, WORKSPACE_H)
    config: OptimizerConfig = field(default_factory=OptimizerConfig)

    def __post_init__(self):
        if self.obstacle_ohms is not None and self.obstacle_ohms <= 0.0:
            raise ValueError("obstacle_ohms must be positive when present")
        if self.source_volts <= 0.0 or self.load_ohms <= 0.0:
            raise ValueError("source_volts and load_ohms must be positive")

    @property
    def has_obstacle(self) -> bool:
        return self.obstacle_ohms is not None


def baseline_experiment(seed: int = 0, n_init: int = 5, n_iter: int = 40) -> ExperimentSpec:
    return ExperimentSpec(
        name="baseline",
        config=OptimizerConfig(n_init=n_init, n_iter=n_iter, seed=seed),
    )


def obstacle_experiment(seed: int = 0, n_init: int = 10, n_iter: int = 30) -> ExperimentSpec:
    return ExperimentSpec(
        name="obstacle",
        obstacle_ohms=OBSTACLE_OHMS,
        config=OptimizerConfig(n_init=n_init, n_iter=n_iter, seed=seed),
    )
