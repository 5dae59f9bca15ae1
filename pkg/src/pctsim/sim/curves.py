"""Detection-rate curves: adoption squared and per-direction loss.

Detection requires both encounter parties to run the system, so at
adoption rate p an exposure is caught with probability about p squared.
Loss affects the designs asymmetrically: sent- and received-report
matching needs one radio direction to succeed, agreed tokens need both,
so at per-direction loss q the per-encounter detection rates sit near
(1-q) and (1-q)^2 respectively.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..protocol.spec import ReportKind, instantiate
from .scenario import Scenario
from .engine import run
from .world import ground_truth_oracle, scripted_world


@dataclass
class AdoptionPoint:
    adoption: float
    detected: int
    oracle: int
    rate: float
    reference: float  # the p^2 prediction


def detection_rate_vs_adoption(
    scenario: Scenario, p_values: list[float], world=None
) -> list[AdoptionPoint]:
    """Empirical per-event detection fraction against the p^2 reference.

    The world (hence the oracle) is held fixed across points; only the
    adoption draw changes. The detection law is about individual exposure
    events, so the default world gives every user at most one exposure
    event (disjoint contact/carrier pairs plus the scenario's horizon);
    the exposed-user fraction then measures event detection directly.
    Exposure events must be plentiful; a thousand or more keeps the
    estimate inside a few percent.
    """
    if world is None:
        world = metcalfe_world(max(1000, scenario.num_users // 2))
    oracle = ground_truth_oracle(world, scenario.config)
    base = replace(
        scenario, num_users=world.num_users, num_days=world.num_days, new_patients_per_day=0
    )
    points = []
    for p in p_values:
        result = run(replace(base, adoption_rate=p), world=world)
        detected = len(result.exposed & frozenset(oracle.exposed))
        total = len(oracle.exposed)
        points.append(
            AdoptionPoint(
                adoption=p,
                detected=detected,
                oracle=total,
                rate=detected / total if total else 0.0,
                reference=p * p,
            )
        )
    return points


def metcalfe_world(num_pairs: int = 1100):
    """One long exposure event per contact/carrier pair, q- and p-clean."""
    return _pairs_world(num_pairs)


def _pairs_world(num_pairs: int, session_minutes: int = 20):
    """Disjoint carrier/contact pairs, one long session each, carriers
    diagnosed afterwards: every oracle exposure is exactly one encounter,
    so the detected fraction is the per-encounter detection rate."""
    encounters = []
    diagnoses = []
    for i in range(num_pairs):
        contact, carrier = 2 * i, 2 * i + 1
        slot = (i % 3) * 144 + 10 + (i % 100)
        encounters.append((contact, carrier, slot, session_minutes, 1.0, i % 8))
        diagnoses.append((carrier, 4))
    return scripted_world(2 * num_pairs, 6, encounters, diagnoses, num_cells=8)


def loss_detection_rates(
    protocols: list[str], loss_prob: float, num_pairs: int = 1200, seed: int = 7
) -> dict[str, float]:
    """Per-encounter detection rate under per-direction loss, by protocol."""
    world = _pairs_world(num_pairs)
    rates = {}
    for protocol in protocols:
        scenario = Scenario(
            num_users=world.num_users,
            num_days=world.num_days,
            new_patients_per_day=0,
            contacts_per_user_per_day=1,
            loss_prob=loss_prob,
            protocol=protocol,
            rng_seed=seed,
            group_kind="toy",
        )
        result = run(scenario, world=world)
        oracle = result.oracle
        detected = len(result.exposed & frozenset(oracle.exposed))
        rates[protocol] = detected / len(oracle.exposed)
    return rates


def expected_loss_rate(protocol: str, loss_prob: float) -> float:
    spec = instantiate(protocol)
    keep = 1.0 - loss_prob
    return keep * keep if spec.report_kind is ReportKind.AGREED else keep
