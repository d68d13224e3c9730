"""Agent hyperparameters shared by all four algorithms."""

from __future__ import annotations

from dataclasses import dataclass

ALGOS = ("ddpg", "td3", "sac", "darc")


@dataclass(frozen=True)
class AgentConfig:
    algo: str = "darc"
    gamma: float = 0.99
    tau: float = 0.005
    nu: float = 0.005
    policy_delay: int = 2
    exploration_noise: float = 0.1
    target_noise: float = 0.2
    noise_clip: float = 0.5
    sac_alpha: float = 0.2
    batch_size: int = 256
    warmup_steps: int = 1000
    buffer_capacity: int = 100_000
    hidden_dims: tuple[int, ...] = (64, 64)
    actor_lr: float = 3e-4
    critic_lr: float = 3e-4
    reward_weight_accident: float = 1.0
    reward_weight_fixation: float = 1.0

    def __post_init__(self):
        if self.algo not in ALGOS:
            raise ValueError(f"algo must be one of {ALGOS}, got {self.algo!r}")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma}")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError(f"tau must be in (0, 1], got {self.tau}")
        if self.nu < 0.0:
            raise ValueError(f"nu must be >= 0, got {self.nu}")
        for name in ("policy_delay", "batch_size", "buffer_capacity"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.warmup_steps < 0:
            raise ValueError(f"warmup_steps must be >= 0, got {self.warmup_steps}")
        for name in ("exploration_noise", "target_noise", "noise_clip"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.sac_alpha < 0.0:
            raise ValueError(f"sac_alpha must be >= 0, got {self.sac_alpha}")
        for name in ("actor_lr", "critic_lr"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("reward_weight_accident", "reward_weight_fixation"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        object.__setattr__(self, "hidden_dims", tuple(int(d) for d in self.hidden_dims))
