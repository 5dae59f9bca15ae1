from .spec import ProtocolId, ReportKind, Matcher, ProtocolSpec, instantiate, ALL_PROTOCOLS
from .state import (
    TracingConfig,
    DEFAULT_CONFIG,
    EncounterRecord,
    UserState,
    ServerState,
    Report,
    ReportEntry,
    Upload,
    slot_day,
    day_slots,
    window_days,
)
from .phases import (
    beacon_bytes_for,
    beacon_for_slot,
    record_reception,
    aggregate_exposure,
    patient_report,
    user_periodic_upload,
    prune_expired_records,
)
from .matching import (
    match_round,
    publish_pool,
    sdh_match,
    desire_query,
    UserMatchOutcome,
    ServerRiskNotice,
    CardinalityOutcome,
    DesireOutcome,
    RipsiOutcome,
)
from .interactive import psi_ca_round, ri_psi_round, PsiCaServer

__all__ = [
    "ProtocolId",
    "ReportKind",
    "Matcher",
    "ProtocolSpec",
    "instantiate",
    "ALL_PROTOCOLS",
    "TracingConfig",
    "DEFAULT_CONFIG",
    "EncounterRecord",
    "UserState",
    "ServerState",
    "Report",
    "ReportEntry",
    "Upload",
    "slot_day",
    "day_slots",
    "window_days",
    "beacon_bytes_for",
    "beacon_for_slot",
    "record_reception",
    "aggregate_exposure",
    "patient_report",
    "user_periodic_upload",
    "prune_expired_records",
    "match_round",
    "publish_pool",
    "sdh_match",
    "desire_query",
    "UserMatchOutcome",
    "ServerRiskNotice",
    "CardinalityOutcome",
    "DesireOutcome",
    "RipsiOutcome",
    "psi_ca_round",
    "ri_psi_round",
    "PsiCaServer",
]
