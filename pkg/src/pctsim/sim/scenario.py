"""Scenario definition and JSON (de)serialization.

A scenario is everything a run needs to be reproducible: population size,
horizon, contact intensity, diagnosis rate, adoption and loss parameters,
the protocol under test, any adversaries, and the master seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Optional

from ..protocol.spec import ProtocolId, instantiate
from ..protocol.state import TracingConfig
from ..adversary.model import AdversaryConfig, AdversaryKind, AttackId


class ScenarioError(ValueError):
    """Malformed or infeasible scenario."""


@dataclass(frozen=True)
class Scenario:
    num_users: int
    num_days: int
    new_patients_per_day: int
    contacts_per_user_per_day: float
    adoption_rate: float = 1.0
    loss_prob: float = 0.0
    protocol: str = ProtocolId.SENT_USER_BASIC.value
    adversaries: tuple[AdversaryConfig, ...] = ()
    rng_seed: int = 0
    group_kind: str = "toy"
    num_cells: int = 16
    first_diagnosis_day: int = 1
    # Session duration mixture: weights for sub-threshold, medium, long.
    duration_mix: tuple[float, float, float] = (0.2, 0.4, 0.4)
    repeat_prob: float = 0.15
    far_fraction: float = 0.1
    user_device_cap: Optional[int] = None
    # Mutually-consenting pairs that exchange seeds and drop each other's
    # beacons instead of storing and reporting them.
    household_pairs: tuple[tuple[int, int], ...] = ()
    config: TracingConfig = field(default_factory=TracingConfig)

    def __post_init__(self):
        if self.num_users < 2:
            raise ScenarioError("need at least two users")
        if self.contacts_per_user_per_day >= self.num_users:
            raise ScenarioError("contacts per day must be below the population size")
        if not 0.0 <= self.adoption_rate <= 1.0:
            raise ScenarioError("adoption rate out of [0, 1]")
        if not 0.0 <= self.loss_prob < 1.0:
            raise ScenarioError("loss probability out of [0, 1)")
        if self.new_patients_per_day > self.num_users:
            raise ScenarioError("cannot diagnose more users per day than exist")
        try:
            instantiate(self.protocol)  # rejects unknown protocol names early
        except ValueError as exc:
            raise ScenarioError(str(exc)) from None

    @property
    def protocol_id(self) -> ProtocolId:
        return ProtocolId(self.protocol)


def _adversary_to_dict(adv: AdversaryConfig) -> dict:
    return {
        "kind": adv.kind.value,
        "sniffer_cells": list(adv.sniffer_cells),
        "colluders": list(adv.colluders),
        "attack": adv.attack.value if adv.attack else None,
    }


def _adversary_from_dict(data: dict) -> AdversaryConfig:
    return AdversaryConfig(
        kind=AdversaryKind(data["kind"]),
        sniffer_cells=tuple(data.get("sniffer_cells", ())),
        colluders=tuple(data.get("colluders", ())),
        attack=AttackId(data["attack"]) if data.get("attack") else None,
    )


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    data = asdict(scenario)
    data["adversaries"] = [_adversary_to_dict(a) for a in scenario.adversaries]
    data["config"] = asdict(scenario.config)
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def load_scenario(path: str | Path, overrides: dict | None = None) -> Scenario:
    """Load a scenario JSON; raises ScenarioError with context on bad input."""
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario parse error at line {exc.lineno} col {exc.colno}: {exc.msg}")
    if not isinstance(raw, dict):
        raise ScenarioError("scenario file must hold a JSON object")
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})
    try:
        adversaries = tuple(_adversary_from_dict(a) for a in raw.pop("adversaries", []))
        cfg = TracingConfig(**raw.pop("config", {}))
        known = {
            f: raw[f]
            for f in (
                "num_users",
                "num_days",
                "new_patients_per_day",
                "contacts_per_user_per_day",
                "adoption_rate",
                "loss_prob",
                "protocol",
                "rng_seed",
                "group_kind",
                "num_cells",
                "first_diagnosis_day",
                "repeat_prob",
                "far_fraction",
                "user_device_cap",
            )
            if f in raw
        }
        if "duration_mix" in raw:
            known["duration_mix"] = tuple(raw["duration_mix"])
        if "household_pairs" in raw:
            known["household_pairs"] = tuple(tuple(p) for p in raw["household_pairs"])
        return Scenario(adversaries=adversaries, config=cfg, **known)
    except (TypeError, KeyError, ValueError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"bad scenario field: {exc}") from None
