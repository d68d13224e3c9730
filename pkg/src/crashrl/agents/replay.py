"""FIFO experience replay with seeded uniform sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ACTION_DIM = 3


@dataclass(frozen=True)
class Transition:
    """One off-policy sample: (s, a, r, s', done) with the flattened dual action."""

    s: np.ndarray
    action: np.ndarray
    r: float
    s_next: np.ndarray
    done: bool

    def __post_init__(self):
        s = np.ascontiguousarray(self.s, dtype=np.float64).reshape(-1)
        s_next = np.ascontiguousarray(self.s_next, dtype=np.float64).reshape(-1)
        action = np.ascontiguousarray(self.action, dtype=np.float64).reshape(-1)
        if s.shape != s_next.shape:
            raise ValueError("state and next-state feature lengths must match")
        if action.size != ACTION_DIM:
            raise ValueError(f"action must have {ACTION_DIM} components")
        if np.any(action < 0.0) or np.any(action > 1.0):
            raise ValueError("action components must lie in [0, 1]")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "action", action)
        object.__setattr__(self, "s_next", s_next)


@dataclass(frozen=True)
class Batch:
    """Column-stacked transitions; r and done are [n, 1] for broadcasting."""

    s: np.ndarray
    action: np.ndarray
    r: np.ndarray
    s_next: np.ndarray
    done: np.ndarray

    def __len__(self) -> int:
        return self.s.shape[0]


class ReplayBuffer:
    """Ring buffer: FIFO eviction when full, uniform sampling with replacement."""

    def __init__(self, capacity: int = 100_000, seed: int = 0) -> None:
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._rng = np.random.default_rng(seed)
        self._s: np.ndarray | None = None
        self._a = np.empty((capacity, ACTION_DIM))
        self._r = np.empty(capacity)
        self._s2: np.ndarray | None = None
        self._d = np.empty(capacity)
        self._size = 0
        self._head = 0

    def __len__(self) -> int:
        return self._size

    def push(self, tr: Transition) -> None:
        if self._s is None:
            dim = tr.s.size
            self._s = np.empty((self.capacity, dim))
            self._s2 = np.empty((self.capacity, dim))
        elif tr.s.size != self._s.shape[1]:
            raise ValueError(
                f"transition feature length {tr.s.size} does not match "
                f"buffer width {self._s.shape[1]}"
            )
        i = self._head
        self._s[i] = tr.s
        self._a[i] = tr.action
        self._r[i] = tr.r
        self._s2[i] = tr.s_next
        self._d[i] = 1.0 if tr.done else 0.0
        self._head = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, n: int) -> Batch:
        if self._size == 0:
            raise ValueError("cannot sample from an empty buffer")
        if not 1 <= n <= self._size:
            raise ValueError(f"sample size must be in [1, {self._size}], got {n}")
        idx = self._rng.integers(0, self._size, size=n)
        return Batch(
            self._s[idx],
            self._a[idx],
            self._r[idx].reshape(-1, 1),
            self._s2[idx],
            self._d[idx].reshape(-1, 1),
        )
