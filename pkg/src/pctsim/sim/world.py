"""Ground-truth world generation and the brute-force exposure oracle.

The world is a flat list of encounter sessions (who, when, how long, how
close, where) plus a diagnosis schedule. The oracle derives exposures by a
naive scan over encounters and patients using the same proximity, session,
window, and aggregation constants the protocols are configured with; it
never touches protocol state, which is what makes it a valid independent
reference for every matching path.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field
from pathlib import Path

from ..crypto.prf import prf, encode_u32
from ..protocol.state import SLOTS_PER_DAY, SLOT_MINUTES, TracingConfig, slot_day, window_days
from .scenario import Scenario


@dataclass(frozen=True, slots=True)
class Encounter:
    """One session between two users, starting on a slot boundary."""

    a: int
    b: int
    slot: int
    minutes: int
    distance: float
    cell: int

    @property
    def day(self) -> int:
        return self.slot // SLOTS_PER_DAY


@dataclass
class WorldTrace:
    num_users: int
    num_days: int
    num_cells: int
    encounters: tuple[Encounter, ...]
    diagnoses: tuple[tuple[int, int], ...]  # (user, day), at most one per user

    def diagnosis_day(self) -> dict[int, int]:
        return dict(self.diagnoses)

    def by_day(self) -> dict[int, list[Encounter]]:
        days: dict[int, list[Encounter]] = {}
        for enc in self.encounters:
            days.setdefault(enc.day, []).append(enc)
        return days


@dataclass
class GroundTruthExposures:
    """Per-user exposure truth, computed solely from the world trace."""

    minutes_by_pair: dict[tuple[int, int], int] = field(default_factory=dict)
    risk: dict[int, int] = field(default_factory=dict)
    exposed: set[int] = field(default_factory=set)

    def pairs_for(self, user: int) -> list[tuple[int, int]]:
        return sorted(
            (patient, mins)
            for (u, patient), mins in self.minutes_by_pair.items()
            if u == user
        )


def _draw_duration(rng: random.Random, mix: tuple[float, float, float], cfg: TracingConfig) -> int:
    roll = rng.random()
    if roll < mix[0]:
        return rng.randint(1, cfg.min_session_minutes - 1) if cfg.min_session_minutes > 1 else 1
    if roll < mix[0] + mix[1]:
        return rng.randint(cfg.min_session_minutes, cfg.exposure_minutes - 1)
    return rng.randint(cfg.exposure_minutes, 2 * cfg.exposure_minutes)


def generate_world(scenario: Scenario) -> WorldTrace:
    """Draw a world: meetups with the configured contact mean, a duration
    mixture spanning sub-threshold, medium, and long sessions with
    intermittent repeats, and a diagnosis schedule of P users per day.

    Deterministic in the scenario seed; diagnosed users drop out of the
    encounter pool from the day after their diagnosis.
    """
    cfg = scenario.config
    rng = random.Random(
        int.from_bytes(prf(b"world", encode_u32(scenario.rng_seed & 0xFFFFFFFF)), "big")
    )
    diagnoses: list[tuple[int, int]] = []
    never_diagnosed = list(range(scenario.num_users))
    rng.shuffle(never_diagnosed)
    for day in range(scenario.first_diagnosis_day, scenario.num_days):
        for _ in range(scenario.new_patients_per_day):
            if not never_diagnosed:
                break
            diagnoses.append((never_diagnosed.pop(), day))
    diag_day = dict(diagnoses)

    encounters: list[Encounter] = []
    max_session = 2 * cfg.exposure_minutes
    max_start = SLOTS_PER_DAY - 1 - (max_session - 1) // SLOT_MINUTES
    for day in range(scenario.num_days):
        active = [u for u in range(scenario.num_users) if diag_day.get(u, scenario.num_days) >= day]
        if len(active) < 2:
            break
        total_sessions = round(len(active) * scenario.contacts_per_user_per_day / 2)
        taken: dict[tuple[int, int], set[int]] = {}
        prev_pair: tuple[int, int] | None = None
        for _ in range(total_sessions):
            if prev_pair is not None and rng.random() < scenario.repeat_prob:
                a, b = prev_pair
            else:
                a, b = rng.sample(active, 2)
            pair = (min(a, b), max(a, b))
            minutes = _draw_duration(rng, scenario.duration_mix, cfg)
            span = (minutes + SLOT_MINUTES - 1) // SLOT_MINUTES
            used = taken.setdefault(pair, set())
            start = None
            for _attempt in range(20):
                cand = day * SLOTS_PER_DAY + rng.randint(0, max_start)
                slots = set(range(cand, cand + span))
                if not slots & used:
                    start = cand
                    used |= slots
                    break
            if start is None:
                continue
            far = rng.random() < scenario.far_fraction
            distance = (
                round(rng.uniform(cfg.proximity_meters + 0.5, 10.0), 2)
                if far
                else round(rng.uniform(0.3, cfg.proximity_meters), 2)
            )
            cell = rng.randrange(scenario.num_cells)
            encounters.append(Encounter(pair[0], pair[1], start, minutes, distance, cell))
            prev_pair = pair

    encounters.sort(key=lambda e: (e.slot, e.a, e.b))
    return WorldTrace(
        num_users=scenario.num_users,
        num_days=scenario.num_days,
        num_cells=scenario.num_cells,
        encounters=tuple(encounters),
        diagnoses=tuple(sorted(diagnoses, key=lambda d: (d[1], d[0]))),
    )


def scripted_world(
    num_users: int,
    num_days: int,
    encounters: list[tuple[int, int, int, int, float, int]],
    diagnoses: list[tuple[int, int]],
    num_cells: int = 16,
) -> WorldTrace:
    """Build a world from explicit (a, b, slot, minutes, distance, cell) rows."""
    encs = tuple(
        Encounter(a, b, slot, minutes, distance, cell)
        for a, b, slot, minutes, distance, cell in sorted(encounters, key=lambda e: (e[2], e[0]))
    )
    return WorldTrace(
        num_users=num_users,
        num_days=num_days,
        num_cells=num_cells,
        encounters=encs,
        diagnoses=tuple(sorted(diagnoses, key=lambda d: (d[1], d[0]))),
    )


def ground_truth_oracle(world: WorldTrace, cfg: TracingConfig | None = None) -> GroundTruthExposures:
    """Naive O(encounters x patients) exposure scan.

    An encounter contributes when it qualifies (close enough, long enough)
    and falls inside the patient's reporting window; contributions
    aggregate per user across beacons, sessions, and patients. Users who
    are themselves diagnosed within the horizon are excluded from the
    exposed set, mirroring how a diagnosed account stops being notified.
    """
    cfg = cfg or TracingConfig()
    diag = world.diagnosis_day()
    truth = GroundTruthExposures()
    for enc in world.encounters:
        if enc.distance > cfg.proximity_meters:
            continue
        if enc.minutes < cfg.min_session_minutes:
            continue
        for victim, patient in ((enc.a, enc.b), (enc.b, enc.a)):
            if patient not in diag or victim in diag:
                continue
            if slot_day(enc.slot) not in window_days(diag[patient], cfg):
                continue
            key = (victim, patient)
            truth.minutes_by_pair[key] = truth.minutes_by_pair.get(key, 0) + enc.minutes
    for (victim, _patient), mins in truth.minutes_by_pair.items():
        truth.risk[victim] = truth.risk.get(victim, 0) + mins
    truth.exposed = {u for u, r in truth.risk.items() if r >= cfg.exposure_minutes}
    return truth


def world_to_csv(world: WorldTrace, path: str | Path) -> None:
    """One row per encounter, plus a trailing diagnosis section."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_a", "user_b", "slot", "day", "minutes", "distance_m", "cell"])
        for e in world.encounters:
            writer.writerow([e.a, e.b, e.slot, e.day, e.minutes, e.distance, e.cell])
        writer.writerow([])
        writer.writerow(["diagnosed_user", "day"])
        for user, day in world.diagnoses:
            writer.writerow([user, day])
