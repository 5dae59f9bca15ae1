"""Command-line interface: exit codes, outputs, and byte determinism."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from pctsim.cli import main
from pctsim.sim import Scenario, save_scenario


@pytest.fixture()
def scenario_file(tmp_path):
    path = tmp_path / "scenario.json"
    save_scenario(
        Scenario(
            num_users=16,
            num_days=6,
            new_patients_per_day=1,
            contacts_per_user_per_day=3,
            protocol="agreed-server-sdh",
            rng_seed=7,
        ),
        path,
    )
    return path


def test_run_writes_reports_and_exits_zero(scenario_file, tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["run", "--scenario", str(scenario_file), "--out", str(out)])
    assert code == 0
    for name in ("risks.csv", "ledger.csv", "worldtrace.csv", "risk_comparison.png"):
        assert (out / name).exists(), name
    assert "exposed" in capsys.readouterr().out


def test_run_missing_scenario_exits_two(capsys):
    assert main(["run", "--scenario", "does-not-exist.json"]) == 2


def test_run_rejects_unknown_protocol_override(scenario_file, capsys):
    code = main(["run", "--scenario", str(scenario_file), "--protocol", "bogus"])
    assert code == 2


def test_run_is_byte_identical_across_processes(scenario_file, tmp_path):
    # Different hash seeds must not change any emitted CSV byte.
    outs = []
    for i, hashseed in enumerate(("1", "2")):
        out = tmp_path / f"o{i}"
        subprocess.run(
            [
                sys.executable,
                "-m",
                "pctsim.cli",
                "run",
                "--scenario",
                str(scenario_file),
                "--out",
                str(out),
                "--format",
                "csv",
            ],
            check=True,
            env={"PYTHONHASHSEED": hashseed, "PATH": "/usr/bin:/bin"},
            cwd=str(Path(__file__).resolve().parent.parent),
        )
        outs.append(out)
    for name in ("risks.csv", "ledger.csv", "worldtrace.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name


def test_run_with_adversaries_writes_leakage_and_attack_csvs(tmp_path):
    from pctsim.adversary import AdversaryConfig, AdversaryKind, AttackId

    path = tmp_path / "adv.json"
    save_scenario(
        Scenario(
            num_users=14,
            num_days=6,
            new_patients_per_day=1,
            contacts_per_user_per_day=3,
            protocol="received-server",
            rng_seed=3,
            num_cells=4,
            adversaries=(
                AdversaryConfig(kind=AdversaryKind.SERVER_PSV, sniffer_cells=(0, 1, 2, 3)),
                AdversaryConfig(
                    kind=AdversaryKind.USER_ASV,
                    sniffer_cells=(0, 1),
                    colluders=(13,),
                    attack=AttackId.DRIVE_BY_EAVESDROP,
                ),
            ),
        ),
        path,
    )
    out = tmp_path / "out"
    assert main(["run", "--scenario", str(path), "--out", str(out), "--format", "csv"]) == 0
    leakage = (out / "leakage.csv").read_text().splitlines()
    assert leakage[0] == "protocol,adversary,metric,value"
    assert any("server-psv,trace_link_fraction" in line for line in leakage)
    attacks = (out / "attacks.csv").read_text().splitlines()
    assert attacks[0].startswith("protocol,attack,false_exposures")
    assert "drive-by-eavesdrop" in attacks[1]


def test_scorecard_single_protocol_exits_zero(tmp_path, capsys):
    out = tmp_path / "card"
    code = main(["scorecard", "--only", "agreed-server-sdh", "--out", str(out)])
    assert code == 0
    assert (out / "scorecard.csv").exists()
    assert (out / "scorecard.png").exists()
    assert "matches the expected matrices" in capsys.readouterr().out


def test_scorecard_unknown_protocol_filter(capsys):
    assert main(["scorecard", "--only", "nonsense"]) == 2


def test_scorecard_corrupt_expected_dir_exits_two(tmp_path, capsys):
    (tmp_path / "privacy.json").write_text("{broken")
    (tmp_path / "resiliency.json").write_text("{}")
    (tmp_path / "flaws.json").write_text("{}")
    code = main(["scorecard", "--only", "agreed-server-sdh", "--expected", str(tmp_path)])
    assert code == 2


def test_scorecard_nonzero_diff_exits_one(tmp_path, capsys):
    from pctsim.analysis import load_expected

    expected = load_expected()
    wrong = json.loads(json.dumps(expected["privacy"]))
    wrong["rows"]["agreed-server-sdh"]["exposure_status"] = "protected"
    (tmp_path / "privacy.json").write_text(json.dumps(wrong))
    for name in ("resiliency", "flaws"):
        (tmp_path / f"{name}.json").write_text(json.dumps(expected[name]))
    code = main(
        [
            "scorecard",
            "--only",
            "agreed-server-sdh",
            "--expected",
            str(tmp_path),
            "--out",
            str(tmp_path / "out"),
            "--format",
            "csv",
        ]
    )
    assert code == 1
    diff_rows = (tmp_path / "out" / "scorecard_diff.csv").read_text().strip().splitlines()
    assert len(diff_rows) == 2  # header plus the one mismatching cell


def test_adoption_curve_outputs(tmp_path, capsys):
    out = tmp_path / "adopt"
    code = main(["adoption", "--p", "0.5,1.0", "--out", str(out)])
    assert code == 0
    assert (out / "adoption_curve.csv").exists()
    assert (out / "adoption_curve.png").exists()
