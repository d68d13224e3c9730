"""Adam optimization and Polyak target-network tracking."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import ParamSet, Tensor


@dataclass
class AdamState:
    """First/second-moment estimates and hyperparameters for one ParamSet."""

    m: ParamSet
    v: ParamSet
    t: int
    alpha: float
    beta1: float
    beta2: float
    eps: float


def init_adam(
    params: ParamSet,
    alpha: float = 3e-4,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> AdamState:
    if not (alpha > 0 and 0 <= beta1 < 1 and 0 <= beta2 < 1 and eps > 0):
        raise ValueError("invalid Adam hyperparameters")
    return AdamState(params.zeros_like(), params.zeros_like(), 0, alpha, beta1, beta2, eps)


def adam_step(params: ParamSet, grads: ParamSet, state: AdamState) -> tuple[ParamSet, AdamState]:
    """One bias-corrected Adam update; returns new params and state."""
    if not params.same_shapes(grads) or not params.same_shapes(state.m):
        raise ValueError("parameter, gradient, and state shapes must match")
    t = state.t + 1
    new_params, new_m, new_v = [], [], []
    for name, theta in params:
        g = grads[name].array
        m = state.beta1 * state.m[name].array + (1.0 - state.beta1) * g
        v = state.beta2 * state.v[name].array + (1.0 - state.beta2) * (g * g)
        m_hat = m / (1.0 - state.beta1**t)
        v_hat = v / (1.0 - state.beta2**t)
        updated = theta.array - state.alpha * m_hat / (np.sqrt(v_hat) + state.eps)
        new_params.append((name, Tensor(updated)))
        new_m.append((name, Tensor(m)))
        new_v.append((name, Tensor(v)))
    new_state = AdamState(
        ParamSet(new_m), ParamSet(new_v), t, state.alpha, state.beta1, state.beta2, state.eps
    )
    return ParamSet(new_params), new_state


def soft_update(target: ParamSet, online: ParamSet, tau: float) -> ParamSet:
    """Polyak tracking: target' = tau * online + (1 - tau) * target."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must be in [0, 1], got {tau}")
    if not target.same_shapes(online):
        raise ValueError("target and online parameter shapes must match")
    return ParamSet(
        (name, Tensor(tau * online[name].array + (1.0 - tau) * t.array))
        for name, t in target
    )
