"""Scorecard assembly: run the privacy and resiliency suites, derive the
design-flaw flags, and diff everything against the expected matrices.

The privacy suite runs each protocol over a fixed surveillance world
(rotating triads under full sniffer coverage, three staggered diagnoses,
one advanced-user adversary) and turns the leakage-oracle metrics into
three-valued cells. The resiliency suite runs every attack against every
protocol. Flags combine both with the cost-formula shapes. The expected
matrices ship as JSON data; a nonzero diff is a failing result.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..protocol.spec import ALL_PROTOCOLS, Matcher, ProtocolId, ReportKind, instantiate
from ..adversary.model import AdversaryConfig, AdversaryKind, AttackId
from ..adversary.attacks import run_attack
from ..adversary.leakage import (
    build_view,
    leak_exposure_status,
    leak_exposure_time,
    leak_interactions,
    leak_movement_traces,
    leak_patient_traces_user_psv,
    patient_trace_via_received_reports,
)
from ..sim.scenario import Scenario
from ..sim.engine import run
from ..sim.world import scripted_world
from .cells import LEAKS, PARTIAL, PROTECTED, RATE_LIMITED, ROBUST, VULNERABLE
from .costs import download_scales_with_patients

PRIVACY_COLUMNS = (
    "exposure_status",
    "patient_identity",
    "movement_all_server_psv",
    "movement_all_server_asv",
    "movement_patients_user_psv",
    "interactions_patient_patient",
    "interactions_patient_user",
    "interactions_user_user",
    "interactions_user_user_noexp",
)

ATTACK_COLUMNS = tuple(
    a.value
    for a in (
        AttackId.DRIVE_BY_EAVESDROP,
        AttackId.HIGH_POWER_BROADCAST,
        AttackId.HIGH_POWER_DEVICE,
        AttackId.SAME_BEACON,
        AttackId.POOLING,
        AttackId.FORWARDING,
        AttackId.TUNNELING,
    )
)

FLAW_NAMES = ("DF1", "DF2a", "DF2b", "DF2c", "DF3", "DF4", "DF5a", "DF5b")

ADVERSARY_USER = 11
_LEAK_CELLS = (0, 1, 2, 3)


class ExpectedMatrixError(ValueError):
    """Malformed or unloadable expected-matrix file."""


def surveillance_world():
    """Rotating-triad world: twelve users, four cells, eight days.

    Triads meet for twenty minutes daily (all three pairwise sessions in
    one slot), membership rotating by one position per day; users 0, 1, 2
    are diagnosed on days 4, 5, 6 and idle afterwards. Triads guarantee a
    third co-present broadcaster for every pair, which is what upload
    intersection needs to see a pair at all.
    """
    num_users, days = 12, 8
    encounters = []
    diagnoses = [(0, 4), (1, 5), (2, 6)]
    diag = dict(diagnoses)
    for day in range(days):
        order = [u for u in range(num_users) if diag.get(u, days) >= day]
        order = order[day % len(order):] + order[: day % len(order)]
        for t in range(len(order) // 3):
            triad = order[3 * t : 3 * t + 3]
            slot = day * 144 + 10
            for i in range(3):
                for j in range(i + 1, 3):
                    encounters.append((triad[i], triad[j], slot, 20, 1.0, t))
    return scripted_world(num_users, days, encounters, diagnoses, num_cells=4)


def _leak_scenario(protocol: str, kinds: tuple[AdversaryKind, ...], seed: int) -> Scenario:
    return Scenario(
        num_users=12,
        num_days=8,
        new_patients_per_day=0,
        contacts_per_user_per_day=2,
        protocol=protocol,
        adversaries=tuple(
            AdversaryConfig(kind=k, sniffer_cells=_LEAK_CELLS if k.surveils else ())
            for k in kinds
        ),
        rng_seed=seed,
        group_kind="toy",
        num_cells=4,
    )


def _cell(fraction: float) -> str:
    return LEAKS if fraction >= 0.99 else PROTECTED


def _pair_cell(precision_recall: tuple[float, float]) -> str:
    precision, recall = precision_recall
    return LEAKS if recall >= 0.99 and precision >= 0.99 else PROTECTED


@dataclass
class PrivacyFindings:
    cells: dict[str, str]
    received_report_trace: float
    probe_queries: int
    run_pointer: str
    metrics: dict[str, float] = field(default_factory=dict)


def build_privacy_cells(protocol: str, seed: int = 0) -> PrivacyFindings:
    """One protocol's privacy row, computed from two surveillance runs
    (passive-only and active) over the fixed triad world."""
    spec = instantiate(protocol)
    world = surveillance_world()
    psv = run(
        _leak_scenario(protocol, (AdversaryKind.SERVER_PSV, AdversaryKind.USER_PSV), seed),
        world=world,
    )
    asv = run(_leak_scenario(protocol, (AdversaryKind.SERVER_ASV,), seed), world=world)

    server_alone = build_view(psv, AdversaryConfig(kind=AdversaryKind.SERVER_ALONE))
    server_psv = build_view(
        psv, AdversaryConfig(kind=AdversaryKind.SERVER_PSV, sniffer_cells=_LEAK_CELLS)
    )
    server_asv = build_view(
        asv, AdversaryConfig(kind=AdversaryKind.SERVER_ASV, sniffer_cells=_LEAK_CELLS)
    )
    user_psv = build_view(
        psv,
        AdversaryConfig(kind=AdversaryKind.USER_PSV, sniffer_cells=_LEAK_CELLS),
        adversary_user=ADVERSARY_USER,
    )
    advanced = build_view(
        psv, AdversaryConfig(kind=AdversaryKind.ADVANCED_USER), adversary_user=ADVERSARY_USER
    )

    status = leak_exposure_status(psv, server_alone, spec)
    time_frac, queries = leak_exposure_time(psv, advanced, spec)
    if time_frac >= 0.99:
        identity = PARTIAL if queries > 0 else LEAKS
    else:
        identity = PROTECTED
    interactions = leak_interactions(psv, server_alone, spec)

    mt_psv = leak_movement_traces(psv, server_psv, spec)
    mt_asv = leak_movement_traces(asv, server_asv, spec)
    mt_pat = leak_patient_traces_user_psv(psv, user_psv, spec)
    cells = {
        "exposure_status": _cell(status),
        "patient_identity": identity,
        "movement_all_server_psv": _cell(mt_psv),
        "movement_all_server_asv": _cell(mt_asv),
        "movement_patients_user_psv": _cell(mt_pat),
        "interactions_patient_patient": _pair_cell(interactions.get("pp", (0.0, 0.0))),
        "interactions_patient_user": _pair_cell(interactions.get("pu", (0.0, 0.0))),
        "interactions_user_user": _pair_cell(interactions.get("uu_exposed", (0.0, 0.0))),
        "interactions_user_user_noexp": _pair_cell(interactions.get("uu_noexp", (0.0, 0.0))),
    }
    metrics = {
        "server-alone/exposure_status_fraction": status,
        "advanced-user/exposure_slots_recovered": time_frac,
        "advanced-user/probe_queries": float(queries),
        "server-psv/trace_link_fraction": mt_psv,
        "server-asv/trace_link_fraction": mt_asv,
        "user-psv/patient_trace_link_fraction": mt_pat,
        "server-psv/patient_trace_via_reports": patient_trace_via_received_reports(
            psv, server_psv, spec
        ),
    }
    for key, (precision, recall) in sorted(interactions.items()):
        metrics[f"server-alone/interaction_{key}_precision"] = precision
        metrics[f"server-alone/interaction_{key}_recall"] = recall
    return PrivacyFindings(
        cells=cells,
        received_report_trace=metrics["server-psv/patient_trace_via_reports"],
        probe_queries=queries,
        run_pointer=f"surveillance-world seed={seed}",
        metrics=metrics,
    )


def build_resiliency_cells(protocol: str, seed: int = 0) -> tuple[dict[str, str], list]:
    """One protocol's attack row: run each attack, classify the outcome."""
    cells: dict[str, str] = {}
    outcomes = []
    for name in ATTACK_COLUMNS:
        attack = AttackId(name)
        outcome = run_attack(protocol, attack, seed)
        outcomes.append(outcome)
        if outcome.false_exposures == 0:
            cells[name] = ROBUST
        elif (
            outcome.rate_limit_applicable
            and attack.super_patient
            and outcome.attacker_flagged
        ):
            cells[name] = RATE_LIMITED
        else:
            cells[name] = VULNERABLE
    return cells, outcomes


def utility_cells(protocol: str) -> dict[str, str]:
    """Informational utility columns (not part of the acceptance diff)."""
    spec = instantiate(protocol)
    ura = spec.matcher is Matcher.SERVER or spec.id in (
        ProtocolId.AGREED_INTERACTIVE,
        ProtocolId.RECEIVED_INTERACTIVE,
    )
    if spec.matcher is Matcher.SERVER or spec.id is ProtocolId.AGREED_INTERACTIVE:
        taa = "full"
    elif spec.report_kind is ReportKind.SENT or spec.id is ProtocolId.RECEIVED_INTERACTIVE:
        taa = "none"
    else:
        taa = "partial"
    return {"user_risk_awareness": "yes" if ura else "no", "transmission_awareness": taa}


def flaw_flags(
    privacy: PrivacyFindings, resiliency: dict[str, str], protocol: str
) -> dict[str, str]:
    """Design-flaw flags derived from the computed cells.

    DF2b combines server-trace leakage with the plaintext received-report
    channel; DF5a comes from the download formula scaling linearly in the
    patient rate; DF5b marks reliance on heavyweight interactive
    cryptography, a static attribute of the design.
    """
    spec = instantiate(protocol)
    cells = privacy.cells
    flags: dict[str, str] = {}
    if cells["interactions_user_user_noexp"] == LEAKS:
        flags["DF1"] = "flagged"
    if cells["movement_all_server_psv"] == LEAKS:
        flags["DF2a"] = "flagged"
    if cells["movement_all_server_psv"] == LEAKS or privacy.received_report_trace >= 0.99:
        flags["DF2b"] = "flagged"
    if cells["movement_all_server_asv"] == LEAKS:
        flags["DF2c"] = "flagged"
    if cells["patient_identity"] == LEAKS:
        flags["DF3"] = "flagged"
    elif cells["patient_identity"] == PARTIAL:
        flags["DF3"] = "partial"
    if VULNERABLE in (
        resiliency[AttackId.DRIVE_BY_EAVESDROP.value],
        resiliency[AttackId.HIGH_POWER_BROADCAST.value],
    ):
        flags["DF4"] = "flagged"
    if download_scales_with_patients(protocol):
        flags["DF5a"] = "flagged"
    if spec.id in (
        ProtocolId.SENT_INTERACTIVE,
        ProtocolId.RECEIVED_INTERACTIVE,
        ProtocolId.AGREED_USER,
    ):
        flags["DF5b"] = "flagged"
    return flags


@dataclass
class Scorecard:
    privacy: dict[str, dict[str, str]] = field(default_factory=dict)
    resiliency: dict[str, dict[str, str]] = field(default_factory=dict)
    flaws: dict[str, dict[str, str]] = field(default_factory=dict)
    utility: dict[str, dict[str, str]] = field(default_factory=dict)
    pointers: dict[str, str] = field(default_factory=dict)
    probe_queries: dict[str, int] = field(default_factory=dict)
    leakage_metrics: dict[str, dict[str, float]] = field(default_factory=dict)
    attack_outcomes: dict[str, list] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "privacy": self.privacy,
            "resiliency": self.resiliency,
            "flaws": self.flaws,
            "utility": self.utility,
        }


def build_scorecard(protocols=None, seed: int = 0, progress=None) -> Scorecard:
    card = Scorecard()
    for pid in protocols or [p.value for p in ALL_PROTOCOLS]:
        if progress:
            progress(pid)
        findings = build_privacy_cells(pid, seed)
        res, outcomes = build_resiliency_cells(pid, seed)
        card.privacy[pid] = findings.cells
        card.resiliency[pid] = res
        card.flaws[pid] = flaw_flags(findings, res, pid)
        card.utility[pid] = utility_cells(pid)
        card.pointers[pid] = findings.run_pointer
        card.probe_queries[pid] = findings.probe_queries
        card.leakage_metrics[pid] = findings.metrics
        card.attack_outcomes[pid] = outcomes
    return card


# ---------------------------------------------------------------------------
# Expected matrices and diffing


def load_expected(path: str | Path | None = None) -> dict:
    """Load the expected matrices, from a directory or the packaged data."""
    names = ("privacy.json", "resiliency.json", "flaws.json")
    out = {}
    for name in names:
        try:
            if path is None:
                text = resources.files("pctsim.analysis").joinpath("expected", name).read_text()
            else:
                text = (Path(path) / name).read_text()
        except (FileNotFoundError, OSError) as exc:
            raise ExpectedMatrixError(f"cannot read expected matrix {name}: {exc}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ExpectedMatrixError(f"malformed expected matrix {name}: {exc}") from None
        out[name.split(".")[0]] = data
    _validate_expected(out)
    return out


def _validate_expected(expected: dict) -> None:
    known = {p.value for p in ALL_PROTOCOLS}
    for section in ("privacy", "resiliency", "flaws"):
        rows = expected.get(section, {}).get("rows", {})
        for name in rows:
            if name not in known:
                raise ExpectedMatrixError(f"unknown protocol {name!r} in {section} matrix")
        missing = known - set(rows)
        if missing:
            raise ExpectedMatrixError(f"{section} matrix missing rows: {sorted(missing)}")


@dataclass(frozen=True)
class DiffEntry:
    section: str
    protocol: str
    cell: str
    computed: str
    expected: str


def scorecard_diff(card: Scorecard, expected: dict, only=None) -> list[DiffEntry]:
    """Exact cell-level comparison; empty means full reproduction."""
    diffs: list[DiffEntry] = []
    protocols = only or sorted(card.privacy)
    for pid in protocols:
        for col in PRIVACY_COLUMNS:
            got = card.privacy[pid][col]
            want = expected["privacy"]["rows"][pid][col]
            if got != want:
                diffs.append(DiffEntry("privacy", pid, col, got, want))
        for col in ATTACK_COLUMNS:
            got = card.resiliency[pid][col]
            want = expected["resiliency"]["rows"][pid][col]
            if got != want:
                diffs.append(DiffEntry("resiliency", pid, col, got, want))
        got_flags = card.flaws[pid]
        want_flags = expected["flaws"]["rows"][pid]
        for flag in FLAW_NAMES:
            g = got_flags.get(flag, "absent")
            w = want_flags.get(flag, "absent")
            if g != w:
                diffs.append(DiffEntry("flaws", pid, flag, g, w))
    return diffs
