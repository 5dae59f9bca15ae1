"""False-exposure attacks: per-cell outcomes and the rate-limit defenses."""

import pytest

from pctsim.adversary import AttackId, AttackPlan, run_attack, server_rate_limit
from pctsim.adversary.attacks import attack_world_and_plan
from pctsim.protocol import ALL_PROTOCOLS, ProtocolId
from pctsim.protocol.state import RateLimitConfig
from pctsim.sim import Scenario, run, scripted_world


def test_high_power_broadcast_fools_sent_reports():
    outcome = run_attack("sent-user-basic", AttackId.HIGH_POWER_BROADCAST)
    assert outcome.false_exposures > 0
    assert not outcome.rate_limit_applicable


def test_drive_by_eavesdrop_cannot_touch_agreed_tokens():
    # The targets never received the eavesdropper's beacons, so no agreed
    # token exists on their side.
    outcome = run_attack("agreed-server-sdh", AttackId.DRIVE_BY_EAVESDROP)
    assert outcome.false_exposures == 0


def test_drive_by_eavesdrop_floods_received_reports_but_is_flagged():
    outcome = run_attack("received-server", AttackId.DRIVE_BY_EAVESDROP)
    assert outcome.false_exposures > 0
    assert outcome.rate_limit_applicable and outcome.attacker_flagged


@pytest.mark.parametrize("protocol", [p.value for p in ALL_PROTOCOLS])
def test_tunneling_beats_every_protocol(protocol):
    outcome = run_attack(protocol, AttackId.TUNNELING)
    assert outcome.false_exposures > 0


def test_forwarding_is_one_directional():
    # One-way relays fool sent and received reports but cannot complete an
    # agreed-token exchange.
    assert run_attack("sent-server", AttackId.FORWARDING).false_exposures > 0
    assert run_attack("received-user-basic", AttackId.FORWARDING).false_exposures > 0
    assert run_attack("agreed-user", AttackId.FORWARDING).false_exposures == 0


def test_same_beacon_flagged_under_received_server():
    outcome = run_attack("received-server", AttackId.SAME_BEACON)
    assert outcome.false_exposures > 0
    assert outcome.attacker_flagged


def test_pooling_shares_receptions_across_colluders():
    for protocol in ("received-user-basic", "agreed-server-sdh"):
        outcome = run_attack(protocol, AttackId.POOLING)
        assert outcome.false_exposures > 0, protocol


def test_resource_exhaustion_flags_oversize_everywhere():
    # Junk-stuffed reports create no exposures but trip the size check in
    # every design, including fixed-size sent reports.
    for protocol in ("sent-user-basic", "sent-server", "received-server", "agreed-server-sdh"):
        world, plan = attack_world_and_plan(AttackId.RESOURCE_EXHAUSTION, 0)
        scenario = Scenario(
            num_users=world.num_users,
            num_days=world.num_days,
            new_patients_per_day=0,
            contacts_per_user_per_day=1,
            protocol=protocol,
            rng_seed=0,
            group_kind="toy",
        )
        result = run(scenario, world=world, attack=plan)
        assert result.exposed - result.oracle.exposed == frozenset(), protocol
        finding = server_rate_limit(result.server, RateLimitConfig(per_report_size_cap=40))
        assert 10 in finding.oversize, protocol


def test_honest_patient_not_flagged():
    world = scripted_world(4, 6, [(0, 1, d * 144 + 5, 20, 1.0, 0) for d in range(6)], [(0, 4)])
    scenario = Scenario(
        num_users=4, num_days=6, new_patients_per_day=0,
        contacts_per_user_per_day=1, protocol="agreed-server-sdh", rng_seed=0,
    )
    result = run(scenario, world=world)
    finding = server_rate_limit(result.server, RateLimitConfig(50, 4096, 30))
    assert finding.applicable
    assert finding.flagged == set() and finding.oversize == set()


def test_rate_limit_not_applicable_for_sent_user():
    outcome = run_attack("sent-user-basic", AttackId.HIGH_POWER_BROADCAST)
    assert not outcome.rate_limit_applicable
    assert not outcome.attacker_flagged


def test_conservation_without_attack():
    # No attack: the detected set never exceeds ground truth.
    for protocol in ("sent-user-basic", "received-server", "agreed-interactive"):
        scenario = Scenario(
            num_users=20, num_days=8, new_patients_per_day=1,
            contacts_per_user_per_day=4, protocol=protocol, rng_seed=3,
        )
        result = run(scenario)
        assert result.exposed - frozenset(result.oracle.exposed) == frozenset()


def _tunnel_world(users_per_cell=20, days=4):
    encounters = []
    for day in range(days):
        base = day * 144 + 10
        for cell in (0, 1):
            members = [cell * users_per_cell + i for i in range(users_per_cell)]
            # A chain of meetups keeps everyone present and broadcasting.
            for i in range(0, users_per_cell - 1, 2):
                encounters.append((members[i], members[i + 1], base, 20, 1.0, cell))
    # The future patient sits mid-pack so a capped device has no reason to
    # have kept that particular relayed stream.
    diagnoses = [(11, days - 1)]
    return scripted_world(2 * users_per_cell, days, encounters, diagnoses, num_cells=2)


def test_user_side_rate_limit_reduces_tunneling():
    world = _tunnel_world()
    plan = AttackPlan(attack=AttackId.TUNNELING, cells=(0, 1))
    base = dict(
        num_users=world.num_users, num_days=world.num_days, new_patients_per_day=0,
        contacts_per_user_per_day=1, protocol="sent-user-basic", rng_seed=0,
    )
    undefended = run(Scenario(**base), world=world, attack=plan)
    defended = run(Scenario(**base, user_device_cap=5), world=world, attack=plan)
    false_undefended = len(undefended.exposed - undefended.oracle.exposed)
    false_defended = len(defended.exposed - defended.oracle.exposed)
    assert false_defended < false_undefended
    assert sum(u.suppressed_receptions for u in defended.users.values()) > 0


def test_pooling_with_many_streams_triggers_suppression():
    # One colluder device races through 100 identities; a device cap of 30
    # suppresses the excess streams.
    colluders = tuple(range(2, 102))
    encounters = [(0, 2, d * 144 + 10, 20, 1.0, 0) for d in range(4)]
    world = scripted_world(102, 4, encounters, [(2, 3)], num_cells=2)
    plan = AttackPlan(attack=AttackId.POOLING, attacker_ids=colluders)
    scenario = Scenario(
        num_users=102, num_days=4, new_patients_per_day=0,
        contacts_per_user_per_day=1, protocol="sent-user-basic", rng_seed=0,
        user_device_cap=30,
    )
    result = run(scenario, world=world, attack=plan)
    assert result.users[0].suppressed_receptions > 0


def test_scenario_declared_attack_matches_explicit_plan():
    # An attack declared on a scenario adversary runs exactly like the
    # equivalent explicit plan.
    from pctsim.adversary import AdversaryConfig, AdversaryKind

    world = _tunnel_world()
    base = dict(
        num_users=world.num_users, num_days=world.num_days, new_patients_per_day=0,
        contacts_per_user_per_day=1, protocol="sent-user-basic", rng_seed=0,
    )
    explicit = run(
        Scenario(**base), world=world, attack=AttackPlan(attack=AttackId.TUNNELING, cells=(0, 1))
    )
    declared = run(
        Scenario(
            **base,
            adversaries=(
                AdversaryConfig(
                    kind=AdversaryKind.USER_ASV,
                    sniffer_cells=(0, 1),
                    attack=AttackId.TUNNELING,
                ),
            ),
        ),
        world=world,
    )
    assert declared.exposed == explicit.exposed
    assert len(declared.exposed - declared.oracle.exposed) > 0


def test_dense_honest_crowd_stays_under_cap():
    # Twenty users in one room: nineteen distinct streams, below a cap of 30.
    members = list(range(20))
    encounters = []
    for i in members:
        for j in members[i + 1 :]:
            encounters.append((i, j, 10, 20, 1.0, 0))
    world = scripted_world(20, 2, encounters, [], num_cells=1)
    scenario = Scenario(
        num_users=20, num_days=2, new_patients_per_day=0,
        contacts_per_user_per_day=19, protocol="sent-user-basic", rng_seed=0,
        user_device_cap=30,
    )
    result = run(scenario, world=world)
    assert all(u.suppressed_receptions == 0 for u in result.users.values())
