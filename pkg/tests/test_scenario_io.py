"""Scenario JSON round trips and validation, plus world CSV export."""

import pytest

from pctsim.adversary import AdversaryConfig, AdversaryKind, AttackId
from pctsim.sim import (
    Scenario,
    ScenarioError,
    generate_world,
    load_scenario,
    save_scenario,
    scripted_world,
    world_to_csv,
)


def test_round_trip(tmp_path):
    scenario = Scenario(
        num_users=30,
        num_days=5,
        new_patients_per_day=1,
        contacts_per_user_per_day=4,
        adoption_rate=0.8,
        loss_prob=0.05,
        protocol="received-server",
        adversaries=(
            AdversaryConfig(
                kind=AdversaryKind.SERVER_PSV, sniffer_cells=(0, 1), attack=None
            ),
        ),
        rng_seed=9,
        household_pairs=((2, 3),),
    )
    path = tmp_path / "s.json"
    save_scenario(scenario, path)
    assert load_scenario(path) == scenario


def test_overrides(tmp_path):
    save_scenario(
        Scenario(num_users=10, num_days=3, new_patients_per_day=1,
                 contacts_per_user_per_day=2, protocol="sent-user-basic", rng_seed=1),
        tmp_path / "s.json",
    )
    loaded = load_scenario(tmp_path / "s.json", overrides={"protocol": "agreed-user", "rng_seed": 5})
    assert loaded.protocol == "agreed-user" and loaded.rng_seed == 5


def test_unknown_protocol_rejected_before_simulation():
    with pytest.raises(ScenarioError):
        Scenario(num_users=10, num_days=3, new_patients_per_day=1,
                 contacts_per_user_per_day=2, protocol="nope", rng_seed=1)


def test_infeasible_contact_rate_rejected():
    with pytest.raises(ScenarioError):
        Scenario(num_users=5, num_days=3, new_patients_per_day=1,
                 contacts_per_user_per_day=5, protocol="sent-user-basic", rng_seed=1)


def test_parse_error_reports_position(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"num_users": 5,,}')
    with pytest.raises(ScenarioError) as err:
        load_scenario(bad)
    assert "line" in str(err.value)


def test_surveillance_config_needs_cells():
    with pytest.raises(ValueError):
        AdversaryConfig(kind=AdversaryKind.SERVER_PSV, sniffer_cells=())
    with pytest.raises(ValueError):
        AdversaryConfig(kind=AdversaryKind.SERVER_ALONE, sniffer_cells=(1,))


def test_world_csv_rows(tmp_path):
    world = scripted_world(3, 2, [(0, 1, 5, 10, 1.0, 0), (1, 2, 9, 3, 2.0, 1)], [(2, 1)])
    path = tmp_path / "w.csv"
    world_to_csv(world, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0].startswith("user_a")
    assert lines[1] == "0,1,5,0,10,1.0,0"
    assert lines[-1] == "2,1"


def test_duration_mixture_present():
    scenario = Scenario(
        num_users=60, num_days=6, new_patients_per_day=0,
        contacts_per_user_per_day=8, protocol="sent-user-basic", rng_seed=4,
        first_diagnosis_day=6,
    )
    world = generate_world(scenario)
    cfg = scenario.config
    short = sum(1 for e in world.encounters if e.minutes < cfg.min_session_minutes)
    medium = sum(
        1 for e in world.encounters if cfg.min_session_minutes <= e.minutes < cfg.exposure_minutes
    )
    long = sum(1 for e in world.encounters if e.minutes >= cfg.exposure_minutes)
    total = len(world.encounters)
    assert short and medium and long
    assert abs(short / total - 0.2) < 0.05
    assert abs(medium / total - 0.4) < 0.05
    assert abs(long / total - 0.4) < 0.05
