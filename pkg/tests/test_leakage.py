"""Leakage oracles over the surveillance world: the concrete linking
procedures succeed or fail exactly where the designs say they should."""

import math

import pytest

from pctsim.adversary import AdversaryConfig, AdversaryKind, build_view
from pctsim.adversary.leakage import (
    leak_exposure_status,
    leak_exposure_time,
    leak_interactions,
    leak_movement_traces,
    leak_patient_traces_user_psv,
    patient_trace_via_received_reports,
)
from pctsim.analysis.scorecard import (
    ADVERSARY_USER,
    _LEAK_CELLS,
    _leak_scenario,
    surveillance_world,
)
from pctsim.protocol import instantiate
from pctsim.sim import run

WORLD = surveillance_world()
_RUNS = {}


def psv_run(protocol):
    key = (protocol, "psv")
    if key not in _RUNS:
        _RUNS[key] = run(
            _leak_scenario(protocol, (AdversaryKind.SERVER_PSV, AdversaryKind.USER_PSV), 0),
            world=WORLD,
        )
    return _RUNS[key]


def asv_run(protocol):
    key = (protocol, "asv")
    if key not in _RUNS:
        _RUNS[key] = run(_leak_scenario(protocol, (AdversaryKind.SERVER_ASV,), 0), world=WORLD)
    return _RUNS[key]


def view_for(result, kind, user=None):
    cells = _LEAK_CELLS if kind.surveils else ()
    return build_view(result, AdversaryConfig(kind=kind, sniffer_cells=cells), adversary_user=user)


def test_received_server_psv_links_every_user_trace():
    result = psv_run("received-server")
    view = view_for(result, AdversaryKind.SERVER_PSV)
    assert leak_movement_traces(result, view, instantiate("received-server")) == 1.0


def test_agreed_server_psv_links_nothing():
    result = psv_run("agreed-server-sdh")
    view = view_for(result, AdversaryKind.SERVER_PSV)
    assert leak_movement_traces(result, view, instantiate("agreed-server-sdh")) == 0.0


def test_agreed_server_asv_links_every_trace_in_covered_cells():
    result = asv_run("agreed-server-sdh")
    view = view_for(result, AdversaryKind.SERVER_ASV)
    assert leak_movement_traces(result, view, instantiate("agreed-server-sdh")) == 1.0


def test_sent_server_psv_links_through_uploads():
    result = psv_run("sent-server")
    view = view_for(result, AdversaryKind.SERVER_PSV)
    assert leak_movement_traces(result, view, instantiate("sent-server")) == 1.0


def test_daily_seed_chains_patient_days_for_user_psv():
    result = psv_run("sent-user-daily")
    view = view_for(result, AdversaryKind.USER_PSV, user=ADVERSARY_USER)
    assert leak_patient_traces_user_psv(result, view, instantiate("sent-user-daily")) == 1.0


def test_flat_beacon_pool_chains_nothing():
    result = psv_run("sent-user-basic")
    view = view_for(result, AdversaryKind.USER_PSV, user=ADVERSARY_USER)
    assert leak_patient_traces_user_psv(result, view, instantiate("sent-user-basic")) == 0.0


def test_plaintext_received_reports_expose_patient_traces_to_psv():
    for protocol, expect in [
        ("received-user-basic", 1.0),
        ("received-interactive", 1.0),
        ("received-user-cleverparrot", 0.0),  # randomized receipts
        ("sent-user-basic", 0.0),  # different report kind, channel closed
    ]:
        result = psv_run(protocol)
        view = view_for(result, AdversaryKind.SERVER_PSV)
        got = patient_trace_via_received_reports(result, view, instantiate(protocol))
        assert got == expect, protocol


def test_interaction_edges_sent_server_sees_everything():
    result = psv_run("sent-server")
    view = view_for(result, AdversaryKind.SERVER_ALONE)
    edges = leak_interactions(result, view, instantiate("sent-server"))
    for key in ("pp", "pu", "uu_exposed", "uu_noexp"):
        precision, recall = edges[key]
        assert precision == 1.0 and recall == 1.0, (key, edges[key])


def test_interaction_edges_agreed_server_never_links_users():
    result = psv_run("agreed-server-sdh")
    view = view_for(result, AdversaryKind.SERVER_ALONE)
    edges = leak_interactions(result, view, instantiate("agreed-server-sdh"))
    assert edges["pp"] == (1.0, 1.0)
    assert edges["pu"][1] == 1.0
    assert edges["uu_exposed"][1] == 0.0
    assert edges["uu_noexp"][1] == 0.0


def test_two_patients_reporting_one_encounter_make_one_edge():
    result = psv_run("agreed-server-sdh")
    view = view_for(result, AdversaryKind.SERVER_ALONE)
    precision, recall = leak_interactions(result, view, instantiate("agreed-server-sdh"))["pp"]
    assert recall == 1.0 and precision == 1.0


def test_randomized_receipts_hide_patient_pairs():
    result = psv_run("received-user-cleverparrot")
    view = view_for(result, AdversaryKind.SERVER_ALONE)
    edges = leak_interactions(result, view, instantiate("received-user-cleverparrot"))
    assert edges["pp"][1] == 0.0


def test_exposure_time_recovered_exactly_by_local_matching():
    for protocol in ("agreed-user", "sent-user-basic", "received-user-basic"):
        result = psv_run(protocol)
        view = view_for(result, AdversaryKind.ADVANCED_USER, user=ADVERSARY_USER)
        fraction, queries = leak_exposure_time(result, view, instantiate(protocol))
        assert fraction == 1.0 and queries == 0, protocol


def test_exposure_time_hidden_by_server_matching():
    for protocol in ("agreed-server-sdh", "sent-server", "received-server", "received-interactive"):
        result = psv_run(protocol)
        view = view_for(result, AdversaryKind.ADVANCED_USER, user=ADVERSARY_USER)
        fraction, _q = leak_exposure_time(result, view, instantiate(protocol))
        assert fraction == 0.0, protocol


@pytest.mark.parametrize("protocol", ["agreed-interactive", "sent-interactive"])
def test_subset_probe_recovers_slots_at_logarithmic_cost(protocol):
    result = psv_run(protocol)
    view = view_for(result, AdversaryKind.ADVANCED_USER, user=ADVERSARY_USER)
    fraction, queries = leak_exposure_time(result, view, instantiate(protocol))
    assert fraction == 1.0
    k = len(result.users[ADVERSARY_USER].records)
    # Adaptive splitting needs at least log2(k) rounds and never does worse
    # than querying each token alone.
    assert math.log2(max(k, 2)) <= queries <= k


def test_exposure_status_known_exactly_to_matching_servers():
    for protocol, expect in [
        ("agreed-server-sdh", 1.0),
        ("received-server", 1.0),
        ("agreed-interactive", 1.0),
        ("received-interactive", 1.0),
        ("sent-interactive", 0.0),
        ("sent-user-basic", 0.0),
    ]:
        result = psv_run(protocol)
        view = view_for(result, AdversaryKind.SERVER_ALONE)
        assert leak_exposure_status(result, view, instantiate(protocol)) == expect, protocol


def test_passive_views_hold_no_broadcast_secrets():
    result = psv_run("agreed-server-sdh")
    for kind in (AdversaryKind.SERVER_PSV, AdversaryKind.USER_PSV):
        view = view_for(result, kind)
        assert view.own_secrets == {} and view.own_beacons == {}


def test_asv_subsumes_psv_channels():
    # Whatever passive surveillance links, active surveillance links too.
    for protocol in ("sent-server", "received-server"):
        spec = instantiate(protocol)
        psv_frac = leak_movement_traces(
            psv_run(protocol), view_for(psv_run(protocol), AdversaryKind.SERVER_PSV), spec
        )
        asv_frac = leak_movement_traces(
            asv_run(protocol), view_for(asv_run(protocol), AdversaryKind.SERVER_ASV), spec
        )
        assert asv_frac >= psv_frac == 1.0
