"""Environment configuration for the accident-anticipation MDP."""

from __future__ import annotations

from dataclasses import dataclass

FIXATION_WINDOWS = ("after_accident", "before_accident")


@dataclass(frozen=True)
class EnvConfig:
    """Knobs for episode generation, the attention pipeline, and rewards.

    fixation_window selects when the fixation reward (and fixation MSE) is
    active: "after_accident" follows the printed indicator t > t_a;
    "before_accident" uses t <= t_a instead.
    """

    a_0: float = 0.5
    eta: float = 0.08
    rho: float = 0.5
    sigma_f: float = 0.15
    stack: int = 4
    grid_h: int = 16
    grid_w: int = 16
    pool_h: int = 8
    pool_w: int = 8
    episode_len: int = 100
    accident_prob: float = 0.5
    t_a_frac_lo: float = 0.6
    t_a_frac_hi: float = 0.9
    fps: float = 10.0
    fixation_window: str = "after_accident"

    def __post_init__(self):
        if not 0.0 < self.a_0 < 1.0:
            raise ValueError(f"a_0 must be in (0, 1), got {self.a_0}")
        if self.eta <= 0.0:
            raise ValueError(f"eta must be > 0, got {self.eta}")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must be in [0, 1], got {self.rho}")
        if self.sigma_f <= 0.0:
            raise ValueError(f"sigma_f must be > 0, got {self.sigma_f}")
        if self.stack < 1:
            raise ValueError(f"stack must be >= 1, got {self.stack}")
        if min(self.grid_h, self.grid_w, self.pool_h, self.pool_w) < 1:
            raise ValueError("grid and pool dimensions must be >= 1")
        if self.grid_h % self.pool_h or self.grid_w % self.pool_w:
            raise ValueError(
                f"pool dims ({self.pool_h}x{self.pool_w}) must divide "
                f"grid dims ({self.grid_h}x{self.grid_w})"
            )
        if self.episode_len < 2:
            raise ValueError(f"episode_len must be >= 2, got {self.episode_len}")
        if not 0.0 <= self.accident_prob <= 1.0:
            raise ValueError(f"accident_prob must be in [0, 1], got {self.accident_prob}")
        if not 0.0 < self.t_a_frac_lo < self.t_a_frac_hi < 1.0:
            raise ValueError("t_a range must satisfy 0 < lo < hi < 1")
        if self.fps <= 0.0:
            raise ValueError(f"fps must be > 0, got {self.fps}")
        if self.fixation_window not in FIXATION_WINDOWS:
            raise ValueError(
                f"fixation_window must be one of {FIXATION_WINDOWS}, "
                f"got {self.fixation_window!r}"
            )

    @property
    def obs_dim(self) -> int:
        """Length of one observation: pooled grid stacked over the last frames."""
        return self.stack * self.pool_h * self.pool_w
