"""Scorecard assembly, expected matrices, and the diff machinery."""

import json

import pytest

from pctsim.analysis import (
    ExpectedMatrixError,
    build_privacy_cells,
    build_resiliency_cells,
    flaw_flags,
    load_expected,
    scorecard_diff,
)
from pctsim.analysis.scorecard import Scorecard, build_scorecard
from pctsim.crypto import tokens


@pytest.fixture(scope="module")
def expected():
    return load_expected()


@pytest.fixture(scope="module")
def sdh_card():
    return build_scorecard(protocols=["agreed-server-sdh"])


def test_diff_is_empty_against_itself(sdh_card, expected):
    assert scorecard_diff(sdh_card, expected, only=["agreed-server-sdh"]) == []


def test_diff_catches_a_corrupted_cell(sdh_card, expected):
    mutated = Scorecard(
        privacy={k: dict(v) for k, v in sdh_card.privacy.items()},
        resiliency={k: dict(v) for k, v in sdh_card.resiliency.items()},
        flaws={k: dict(v) for k, v in sdh_card.flaws.items()},
        utility=dict(sdh_card.utility),
    )
    mutated.privacy["agreed-server-sdh"]["interactions_patient_patient"] = "protected"
    diffs = scorecard_diff(mutated, expected, only=["agreed-server-sdh"])
    assert len(diffs) == 1
    assert diffs[0].cell == "interactions_patient_patient"


def test_dropping_the_indicator_bit_flips_user_user_cell(expected, monkeypatch):
    # Mutation check: if both parties uploaded the same digest (no
    # indicator byte), the server could match the two sides of one
    # encounter, and the user-to-user cell flips to a leak the diff
    # catches.
    original = tokens._ordered_digest
    monkeypatch.setattr(tokens, "_ordered_digest", lambda shared, indicator: original(shared, 0))
    findings = build_privacy_cells("agreed-server-sdh")
    card = Scorecard(
        privacy={"agreed-server-sdh": findings.cells},
        resiliency={"agreed-server-sdh": dict.fromkeys(
            expected["resiliency"]["columns"], "robust"
        )},
        flaws={"agreed-server-sdh": {}},
        utility={"agreed-server-sdh": {}},
    )
    diffs = scorecard_diff(card, expected, only=["agreed-server-sdh"])
    assert any(d.cell == "interactions_user_user" and d.computed == "leaks" for d in diffs)


def test_flaw_flags_for_the_strawman_rows(sdh_card):
    assert sdh_card.flaws["agreed-server-sdh"] == {"DF2c": "flagged"}


def test_flaw_monotonicity_psv_to_asv(sdh_card, expected):
    # An active adversary never clears a passive finding: every leak under
    # Psv columns stays a leak under the matching Asv column.
    for pid, cells in sdh_card.privacy.items():
        if cells["movement_all_server_psv"] == "leaks":
            assert cells["movement_all_server_asv"] == "leaks"


def test_expected_matrices_reject_unknown_protocols(tmp_path, expected):
    bad = {
        "privacy": {"rows": {**expected["privacy"]["rows"], "made-up": {}}},
    }
    (tmp_path / "privacy.json").write_text(json.dumps(bad["privacy"]))
    (tmp_path / "resiliency.json").write_text(json.dumps(expected["resiliency"]))
    (tmp_path / "flaws.json").write_text(json.dumps(expected["flaws"]))
    with pytest.raises(ExpectedMatrixError):
        load_expected(tmp_path)


def test_expected_matrices_reject_garbage(tmp_path):
    (tmp_path / "privacy.json").write_text("{not json")
    (tmp_path / "resiliency.json").write_text("{}")
    (tmp_path / "flaws.json").write_text("{}")
    with pytest.raises(ExpectedMatrixError):
        load_expected(tmp_path)


def test_missing_matrix_file_is_a_load_error(tmp_path):
    with pytest.raises(ExpectedMatrixError):
        load_expected(tmp_path)


def test_resiliency_row_values_are_three_valued(sdh_card):
    for cells in sdh_card.resiliency.values():
        assert set(cells.values()) <= {"robust", "rate_limited", "vulnerable"}
