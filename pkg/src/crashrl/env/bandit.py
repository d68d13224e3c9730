"""One-step quadratic bandit used as a convergence diagnostic for the agents.

A single fixed observation, a single step per episode, and reward
1 - (a - optimum)^2 on the accident-score component only. The optimal eval
action is a = optimum, which makes convergence trivially checkable.
"""

from __future__ import annotations

import numpy as np

from .mdp import DualAction, Observation, StepResult


class QuadraticBandit:
    """Drop-in environment with the same reset/step surface as AccidentEnv."""

    def __init__(self, optimum: float = 0.7, obs_dim: int = 1) -> None:
        if not 0.0 <= optimum <= 1.0:
            raise ValueError(f"optimum must be in [0, 1], got {optimum}")
        self.optimum = optimum
        self.obs_dim = obs_dim
        self._obs: Observation | None = None
        self._done = False

    def reset(self) -> Observation:
        self._obs = Observation(np.zeros(self.obs_dim), 0)
        self._done = False
        return self._obs

    @property
    def observation(self) -> Observation:
        if self._obs is None:
            raise RuntimeError("environment must be reset before use")
        return self._obs

    @property
    def done(self) -> bool:
        return self._done

    def step(self, action: DualAction) -> StepResult:
        if self._obs is None or self._done:
            raise RuntimeError("reset the bandit before stepping")
        reward = 1.0 - (action.a - self.optimum) ** 2
        self._done = True
        next_obs = Observation(np.zeros(self.obs_dim), 1)
        return StepResult(next_obs, reward, 0.0, True)
