"""Report emission: CSV files, an aligned text table, and figures.

Every run or scorecard invocation lands in an output directory as
delimited files plus rendered PNG figures of the same data. CSV bytes are
a pure function of the inputs (rows are sorted); figures are rendered with
the Agg backend so no display is needed.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from ..protocol.spec import ALL_PROTOCOLS
from .scorecard import ATTACK_COLUMNS, FLAW_NAMES, PRIVACY_COLUMNS, Scorecard, DiffEntry

_CELL_COLORS = {
    "leaks": "#d62728",
    "partial": "#ff9f40",
    "protected": "#2ca02c",
    "vulnerable": "#d62728",
    "rate_limited": "#ff9f40",
    "robust": "#2ca02c",
}


def write_run_csvs(result, out_dir: str | Path) -> list[Path]:
    """risks.csv, ledger.csv, and worldtrace.csv for one simulation run."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    path = out / "risks.csv"
    oracle = result.oracle
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["user", "detected_minutes", "oracle_minutes", "detected_exposed", "oracle_exposed", "diagnosed_day"])
        diag = result.world.diagnosis_day()
        for uid in sorted(result.risks):
            w.writerow(
                [
                    uid,
                    result.risks[uid],
                    oracle.risk.get(uid, 0),
                    int(uid in result.exposed),
                    int(uid in oracle.exposed),
                    diag.get(uid, ""),
                ]
            )
    written.append(path)

    path = out / "ledger.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["day", "key", "units"])
        for day in sorted(result.counters.per_day):
            for key in sorted(result.counters.per_day[day]):
                w.writerow([day, key, result.counters.per_day[day][key]])
    written.append(path)

    from ..sim.world import world_to_csv

    path = out / "worldtrace.csv"
    world_to_csv(result.world, path)
    written.append(path)
    return written


def write_run_adversary_csvs(result, out_dir: str | Path) -> list[Path]:
    """Leakage and attack outcome CSVs for a run that declared adversaries."""
    from ..adversary.leakage import (
        build_view,
        leak_exposure_status,
        leak_interactions,
        leak_movement_traces,
        leak_patient_traces_user_psv,
    )
    from ..adversary.ratelimit import server_rate_limit
    from ..protocol.spec import instantiate

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    spec = instantiate(result.protocol)
    written = []

    rows = []
    for adv in result.scenario.adversaries:
        view = build_view(result, adv)
        name = adv.kind.value
        rows.append((name, "trace_link_fraction", leak_movement_traces(result, view, spec)))
        if adv.kind.server_side:
            rows.append((name, "exposure_status_fraction", leak_exposure_status(result, view, spec)))
            for key, (precision, recall) in sorted(leak_interactions(result, view, spec).items()):
                rows.append((name, f"interaction_{key}_precision", precision))
                rows.append((name, f"interaction_{key}_recall", recall))
        else:
            rows.append(
                (name, "patient_trace_link_fraction", leak_patient_traces_user_psv(result, view, spec))
            )
    if rows:
        path = out / "leakage.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["protocol", "adversary", "metric", "value"])
            for name, metric, value in rows:
                w.writerow([result.protocol.value, name, metric, f"{value:.6f}"])
        written.append(path)

    attacks = [a for a in result.scenario.adversaries if a.attack is not None]
    if attacks:
        finding = server_rate_limit(result.server)
        false = sorted(result.exposed - frozenset(result.oracle.exposed))
        path = out / "attacks.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(
                ["protocol", "attack", "false_exposures", "rate_limit_applicable", "flagged_patients"]
            )
            for adv in attacks:
                w.writerow(
                    [
                        result.protocol.value,
                        adv.attack.value,
                        len(false),
                        int(finding.applicable),
                        ";".join(str(u) for u in sorted(finding.flagged)),
                    ]
                )
        written.append(path)
    return written


def render_run_figure(result, out_dir: str | Path) -> Path:
    """Detected-versus-oracle risk scatter for the run."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    oracle = result.oracle
    users = sorted(result.risks)
    detected = [result.risks[u] for u in users]
    truth = [oracle.risk.get(u, 0) for u in users]
    fig, ax = plt.subplots(figsize=(5.5, 5))
    lim = max(max(detected, default=1), max(truth, default=1), 1)
    ax.plot([0, lim], [0, lim], color="#999999", lw=1, ls="--", zorder=1)
    ax.scatter(truth, detected, s=14, alpha=0.6, zorder=2)
    ax.set_xlabel("ground-truth exposure minutes")
    ax.set_ylabel("detected exposure minutes")
    ax.set_title(f"{result.protocol.value}: detection vs ground truth")
    fig.tight_layout()
    path = out / "risk_comparison.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def write_scorecard_csv(card: Scorecard, diffs: list[DiffEntry], out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    diff_keys = {(d.section, d.protocol, d.cell) for d in diffs}
    path = out / "scorecard.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["section", "protocol", "cell", "value", "matches_expected", "run_pointer"])
        for pid in sorted(card.privacy):
            for col in PRIVACY_COLUMNS:
                w.writerow(
                    [
                        "privacy",
                        pid,
                        col,
                        card.privacy[pid][col],
                        int(("privacy", pid, col) not in diff_keys),
                        card.pointers.get(pid, ""),
                    ]
                )
            for col in ATTACK_COLUMNS:
                w.writerow(
                    [
                        "resiliency",
                        pid,
                        col,
                        card.resiliency[pid][col],
                        int(("resiliency", pid, col) not in diff_keys),
                        f"attack-world:{col}",
                    ]
                )
            for flag in FLAW_NAMES:
                w.writerow(
                    [
                        "flaws",
                        pid,
                        flag,
                        card.flaws[pid].get(flag, "absent"),
                        int(("flaws", pid, flag) not in diff_keys),
                        "derived",
                    ]
                )
            for col, value in sorted(card.utility[pid].items()):
                w.writerow(["utility", pid, col, value, "", "informational"])
    return path


def write_leakage_csv(card: Scorecard, out_dir: str | Path) -> Path:
    """One row per (protocol, adversary, metric): the raw oracle outputs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "leakage.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["protocol", "adversary", "metric", "value"])
        for pid in sorted(card.leakage_metrics):
            for key in sorted(card.leakage_metrics[pid]):
                adversary, metric = key.split("/", 1)
                w.writerow([pid, adversary, metric, f"{card.leakage_metrics[pid][key]:.6f}"])
    return path


def write_attacks_csv(card: Scorecard, out_dir: str | Path) -> Path:
    """One row per (protocol, attack) outcome."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "attacks.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["protocol", "attack", "false_exposures", "rate_limit_applicable", "attacker_flagged", "cell"]
        )
        for pid in sorted(card.attack_outcomes):
            for outcome in card.attack_outcomes[pid]:
                w.writerow(
                    [
                        pid,
                        outcome.attack,
                        outcome.false_exposures,
                        int(outcome.rate_limit_applicable),
                        int(outcome.attacker_flagged),
                        card.resiliency[pid][outcome.attack],
                    ]
                )
    return path


def write_diff_csv(diffs: list[DiffEntry], out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "scorecard_diff.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["section", "protocol", "cell", "computed", "expected"])
        for d in sorted(diffs, key=lambda d: (d.section, d.protocol, d.cell)):
            w.writerow([d.section, d.protocol, d.cell, d.computed, d.expected])
    return path


_ABBREV = {
    "leaks": "LEAK",
    "partial": "part",
    "protected": "ok",
    "vulnerable": "VULN",
    "rate_limited": "rlim",
    "robust": "ok",
}


def scorecard_table(card: Scorecard) -> str:
    """Human-readable aligned table of all computed cells."""
    headers = ["protocol"] + [c.replace("interactions_", "ir_").replace("movement_", "mt_") for c in PRIVACY_COLUMNS]
    headers += [c.replace("high-power", "hp") for c in ATTACK_COLUMNS] + ["flaws"]
    rows = []
    for pid in (p.value for p in ALL_PROTOCOLS):
        if pid not in card.privacy:
            continue
        row = [pid]
        row += [_ABBREV[card.privacy[pid][c]] for c in PRIVACY_COLUMNS]
        row += [_ABBREV[card.resiliency[pid][c]] for c in ATTACK_COLUMNS]
        flagged = [
            f + ("*" if v == "partial" else "")
            for f, v in sorted(card.flaws[pid].items())
        ]
        row.append(",".join(flagged) or "-")
        rows.append(row)
    widths = [max(len(str(r[i])) for r in [headers] + rows) for i in range(len(headers))]
    lines = ["  ".join(str(h).ljust(w) for h, w in zip(headers, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(str(v).ljust(w) for v, w in zip(row, widths)))
    return "\n".join(lines)


def render_scorecard_figure(card: Scorecard, out_dir: str | Path) -> Path:
    """Matrix heatmap of privacy and resiliency cells."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    protocols = [p.value for p in ALL_PROTOCOLS if p.value in card.privacy]
    columns = list(PRIVACY_COLUMNS) + list(ATTACK_COLUMNS)
    fig, ax = plt.subplots(figsize=(0.62 * len(columns) + 3.2, 0.42 * len(protocols) + 2.2))
    for y, pid in enumerate(protocols):
        for x, col in enumerate(columns):
            value = (
                card.privacy[pid][col] if col in PRIVACY_COLUMNS else card.resiliency[pid][col]
            )
            ax.add_patch(
                plt.Rectangle((x, y), 1, 1, color=_CELL_COLORS[value], ec="white", lw=1.5)
            )
    ax.set_xlim(0, len(columns))
    ax.set_ylim(len(protocols), 0)
    ax.set_xticks([x + 0.5 for x in range(len(columns))])
    ax.set_xticklabels(
        [c.replace("interactions_", "ir_").replace("movement_", "mt_") for c in columns],
        rotation=60,
        ha="right",
        fontsize=7,
    )
    ax.set_yticks([y + 0.5 for y in range(len(protocols))])
    ax.set_yticklabels(protocols, fontsize=8)
    ax.set_title("privacy and resiliency cells (green ok, orange partial/rate-limited, red leak/vulnerable)", fontsize=8)
    fig.tight_layout()
    path = out / "scorecard.png"
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def write_adoption_outputs(points, out_dir: str | Path) -> list[Path]:
    """Curve CSV plus figure with the analytic p^2 reference."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "adoption_curve.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["adoption", "detected", "oracle_events", "rate", "p_squared"])
        for pt in points:
            w.writerow([pt.adoption, pt.detected, pt.oracle, f"{pt.rate:.6f}", f"{pt.reference:.6f}"])
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    xs = [pt.adoption for pt in points]
    ax.plot(xs, [pt.rate for pt in points], "o-", label="measured detection rate")
    grid = [i / 100 for i in range(0, 101, 2)]
    ax.plot(grid, [p * p for p in grid], "--", color="#555555", label="p^2 reference")
    ax.set_xlabel("adoption rate p")
    ax.set_ylabel("fraction of exposure events detected")
    ax.legend()
    ax.set_title("detection rate vs adoption")
    fig.tight_layout()
    png_path = out / "adoption_curve.png"
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return [csv_path, png_path]
