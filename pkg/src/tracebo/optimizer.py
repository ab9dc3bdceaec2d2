"""Mixed-variable optimization loop: bandit-selected categories, GP-UCB over
the continuous box, shared observations.

Each round the per-slot EXP3 agents draw the categorical values, the upper
confidence bound of the GP posterior is maximized over the continuous box with
the categories held fixed (uniform probes plus coordinate-descent refinement),
and the observed objective value updates the GP, the agents, and the history.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bandit import Exp3Agent, RewardNormalizer, squash_to_unit
from .config import OptimizerConfig
from .gp import (
    GpDataset,
    GpModel,
    GpPosterior,
    KernelParams,
    MixedInput,
    MixedSpace,
    REFIT_MIN_POINTS,
    fit_hyperparams,
    log_marginal_likelihood,
)

REFINE_STEP_START = 10.0  # mm
REFINE_STEP_STOP = 1e-3  # mm


def ucb(posterior: GpPosterior, kappa: float) -> float:
    """Upper confidence bound: mean + kappa * posterior standard deviation."""
    return posterior.mean + kappa * np.sqrt(max(posterior.variance, 0.0))


@dataclass(frozen=True)
class TrialRecord:
    iteration: int
    input: MixedInput
    voltage: float
    normalized_reward: float
    best_so_far: float
    probabilities: tuple[tuple[float, ...], ...]  # per slot, at selection time


@dataclass(frozen=True)
class FitLogEntry:
    n_points: int
    default_lml: float
    fitted_lml: float


class MixedVariableOptimizer:
    """Sequential optimizer state; one logical owner mutates it."""

    def __init__(self, space: MixedSpace, config: OptimizerConfig):
        self.space = space
        self.config = config
        self.rng = np.random.default_rng(config.seed)
        self.agents = [Exp3Agent(k) for k in space.arities]
        self.dataset = GpDataset(space)
        self.params = KernelParams.defaults(space.d_x)
        self.model = GpModel(self.dataset, self.params)
        self.normalizer: RewardNormalizer | None = None
        self.records: list[TrialRecord] = []
        self.fit_log: list[FitLogEntry] = []
        self._pending_arms: list[int] | None = None
        self._pending_probs: tuple[tuple[float, ...], ...] | None = None

    # -- initialization ----------------------------------------------------

    def draw_initial_inputs(self) -> list[MixedInput]:
        """Uniform random mixed inputs for the initialization phase."""
        out = []
        for _ in range(self.config.n_init):
            cats = self.rng.integers(0, self.space.arities)
            conts = self.rng.uniform(self.space.lower, self.space.upper)
            out.append(MixedInput(tuple(int(c) for c in cats), tuple(conts)))
        return out

    def initialize(self, inputs: list[MixedInput], voltages: list[float]):
        """Seed the normalizer and GP with evaluated init points.

        Init points train the GP and the normalizer but never update the
        bandits (their arms were not selected by the agents).
        """
        self.normalizer = RewardNormalizer.from_samples(voltages)
        for z, v in zip(inputs, voltages):
            self._record(z, v)

    # -- one round ----------------------------------------------------------

    def suggest(self) -> MixedInput:
        """Bandit-drawn categories, then UCB-maximizing offsets in the box."""
        self._pending_probs = tuple(tuple(a.probabilities()) for a in self.agents)
        arms = [a.select(self.rng) for a in self.agents]
        self._pending_arms = arms
        offsets = self._maximize_acquisition(arms)
        return MixedInput(tuple(arms), tuple(offsets))

    def observe(self, z: MixedInput, voltage: float):
        """Record an evaluated suggestion; update agents, GP, and history."""
        if self.normalizer is None:
            raise RuntimeError("observe() before initialize()")
        if self._pending_arms is not None:
            reward = squash_to_unit(self.normalizer.normalize(voltage))
            for agent, arm in zip(self.agents, self._pending_arms):
                agent.update(arm, reward)
        self._record(z, voltage)
        self._pending_arms = None
        self._pending_probs = None

    def _record(self, z: MixedInput, voltage: float):
        self.dataset.append(z, self.normalizer.normalize(voltage))
        if len(self.dataset) >= REFIT_MIN_POINTS:
            fitted = fit_hyperparams(self.dataset, rng=self.rng, warm_start=self.params)
            self.fit_log.append(
                FitLogEntry(
                    len(self.dataset),
                    log_marginal_likelihood(self.dataset, KernelParams.defaults(self.space.d_x)),
                    log_marginal_likelihood(self.dataset, fitted),
                )
            )
            self.params = fitted
        self.model = GpModel(self.dataset, self.params)
        probs = self._pending_probs or tuple(tuple(a.probabilities()) for a in self.agents)
        best = max(voltage, self.records[-1].best_so_far) if self.records else voltage
        self.records.append(
            TrialRecord(
                iteration=len(self.records),
                input=z,
                voltage=voltage,
                normalized_reward=self.normalizer.normalize(voltage),
                best_so_far=best,
                probabilities=probs,
            )
        )

    # -- acquisition --------------------------------------------------------

    def _acquisition(self, arms: list[int], xs: np.ndarray) -> np.ndarray:
        h = np.tile(np.asarray(arms, dtype=np.float64), (len(xs), 1))
        mean, var = self.model.predict(h, xs)
        return mean + self.config.kappa * np.sqrt(var)

    def _maximize_acquisition(self, arms: list[int]) -> np.ndarray:
        """Uniform probes, then coordinate descent on the top probes.

        Step sizes halve from 10 mm down to 1e-3 mm; ties resolve to the
        lowest-ranked probe so the result is deterministic.
        """
        cfg = self.config
        lo = np.asarray(self.space.lower)
        hi = np.asarray(self.space.upper)
        probes = self.rng.uniform(lo, hi, (cfg.acquisition_samples, self.space.d_x))
        scores = self._acquisition(arms, probes)
        top = np.argsort(-scores, kind="stable")[: cfg.acquisition_refinements]
        points = probes[top].copy()
        values = scores[top].copy()
        n_top = len(points)

        step = REFINE_STEP_START
        while step >= REFINE_STEP_STOP:
            for c in range(self.space.d_x):
                plus = points.copy()
                plus[:, c] = np.clip(plus[:, c] + step, lo[c], hi[c])
                minus = points.copy()
                minus[:, c] = np.clip(minus[:, c] - step, lo[c], hi[c])
                cand = self._acquisition(arms, np.vstack([plus, minus]))
                v_plus, v_minus = cand[:n_top], cand[n_top:]
                take_plus = (v_plus >= v_minus) & (v_plus > values)
                take_minus = (v_minus > v_plus) & (v_minus > values)
                points[take_plus] = plus[take_plus]
                values[take_plus] = v_plus[take_plus]
                points[take_minus] = minus[take_minus]
                values[take_minus] = v_minus[take_minus]
            step /= 2.0
        return points[int(np.argmax(values))]


def run_with_state(objective, config: OptimizerConfig, space: MixedSpace):
    """Full optimization returning (records, optimizer-with-diagnostics)."""
    opt = MixedVariableOptimizer(space, config)
    inputs = opt.draw_initial_inputs()
    voltages = [float(objective(z)) for z in inputs]
    opt.initialize(inputs, voltages)
    for _ in range(config.n_iter):
        z = opt.suggest()
        opt.observe(z, float(objective(z)))
    return opt.records, opt


def run(objective, config: OptimizerConfig, space: MixedSpace) -> list[TrialRecord]:
    """Init draws plus n_iter suggest/observe rounds; n_init + n_iter records.

    Fully deterministic given the seed; best_so_far is non-decreasing.
    """
    return run_with_state(objective, config, space)[0]
