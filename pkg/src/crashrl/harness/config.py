"""Run configuration: defaults, JSON config files, and flag overrides.

Precedence is flags > file > defaults. Config files are JSON objects whose
top-level keys mirror RunConfig fields, with nested "env" and "agent"
objects mirroring EnvConfig and AgentConfig. Unknown keys anywhere are
rejected by name.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass

from ..agents.config import AgentConfig
from ..env.config import EnvConfig


class ConfigError(ValueError):
    """Invalid, unknown, or out-of-range configuration input."""


@dataclass(frozen=True)
class RunConfig:
    """One batch experiment: algorithm, seeds, schedule, env and agent knobs."""

    algo: str = "darc"
    seeds: tuple[int, ...] = (0,)
    epochs: int = 30
    episodes_per_epoch: int = 40
    eval_episodes: int = 100
    env: EnvConfig = dataclasses.field(default_factory=EnvConfig)
    agent: AgentConfig = dataclasses.field(default_factory=AgentConfig)
    data_dir: str | None = None
    out_dir: str = "runs"

    def __post_init__(self):
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if not self.seeds:
            raise ConfigError("seeds: must be nonempty")
        if any(s < 0 for s in self.seeds):
            raise ConfigError(f"seeds: must be >= 0, got {list(self.seeds)}")
        if self.epochs < 1:
            raise ConfigError(f"epochs: must be >= 1, got {self.epochs}")
        if self.episodes_per_epoch < 1:
            raise ConfigError(
                f"episodes_per_epoch: must be >= 1, got {self.episodes_per_epoch}"
            )
        if self.eval_episodes < 1:
            raise ConfigError(f"eval_episodes: must be >= 1, got {self.eval_episodes}")
        if self.agent.algo != self.algo:
            raise ConfigError(
                f"algo: run-level {self.algo!r} conflicts with agent.algo "
                f"{self.agent.algo!r}"
            )


def _field_names(cls) -> set[str]:
    return {f.name for f in dataclasses.fields(cls)}


def _build_section(cls, values: dict, section: str):
    unknown = sorted(set(values) - _field_names(cls))
    if unknown:
        raise ConfigError(f"{section}: unknown keys {unknown}")
    try:
        return cls(**values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{section}: {exc}") from exc


def load_config_file(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return data


def build_run_config(
    file_values: dict | None = None, overrides: dict | None = None
) -> RunConfig:
    """Merge defaults, a parsed config file, and flag overrides (highest wins).

    Both inputs use the same nested layout: top-level RunConfig keys plus
    "env" and "agent" objects.
    """
    merged: dict = {}
    for source in (file_values or {}), (overrides or {}):
        for key, value in source.items():
            if key in ("env", "agent"):
                if not isinstance(value, dict):
                    raise ConfigError(f"{key}: expected an object of settings")
                section = dict(merged.get(key, {}))
                section.update(value)
                merged[key] = section
            else:
                merged[key] = value

    unknown = sorted(set(merged) - _field_names(RunConfig))
    if unknown:
        raise ConfigError(f"unknown configuration keys {unknown}")

    env_values = merged.pop("env", {})
    agent_values = dict(merged.pop("agent", {}))
    # Lists arrive from JSON; dataclasses want tuples.
    if "seeds" in merged and isinstance(merged["seeds"], list):
        merged["seeds"] = tuple(merged["seeds"])
    if "hidden_dims" in agent_values and isinstance(agent_values["hidden_dims"], list):
        agent_values["hidden_dims"] = tuple(agent_values["hidden_dims"])
    # The run-level algorithm drives the agent unless the agent section
    # explicitly (and consistently) names one too.
    algo = merged.get("algo", RunConfig.algo)
    agent_values.setdefault("algo", algo)

    env_cfg = _build_section(EnvConfig, env_values, "env")
    agent_cfg = _build_section(AgentConfig, agent_values, "agent")
    return _build_section(
        RunConfig, {**merged, "env": env_cfg, "agent": agent_cfg}, "run"
    )


def config_as_dict(cfg: RunConfig) -> dict:
    data = dataclasses.asdict(cfg)
    data["seeds"] = list(cfg.seeds)
    data["agent"]["hidden_dims"] = list(cfg.agent.hidden_dims)
    return data


def write_config_snapshot(cfg: RunConfig, out_dir) -> str:
    """Echo the fully resolved configuration into the output directory."""
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "config.json")
    with open(path, "w", encoding="utf-8") as f:
        json.dump(config_as_dict(cfg), f, sort_keys=True, indent=2)
        f.write("\n")
    return path
