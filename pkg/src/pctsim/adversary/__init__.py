from .model import AdversaryKind, AttackId, AdversaryConfig, AdversaryView, LeakageReport
from .ratelimit import server_rate_limit, user_rate_limit_applies, RateLimitFinding
from .leakage import (
    build_view,
    leak_movement_traces,
    leak_patient_traces_user_psv,
    leak_interactions,
    leak_exposure_time,
    leak_exposure_status,
    patient_trace_via_received_reports,
)
from .attacks import AttackPlan, run_attack, AttackOutcome

__all__ = [
    "AdversaryKind",
    "AttackId",
    "AdversaryConfig",
    "AdversaryView",
    "LeakageReport",
    "server_rate_limit",
    "user_rate_limit_applies",
    "RateLimitFinding",
    "build_view",
    "leak_movement_traces",
    "leak_patient_traces_user_psv",
    "leak_interactions",
    "leak_exposure_time",
    "leak_exposure_status",
    "patient_trace_via_received_reports",
    "AttackPlan",
    "run_attack",
    "AttackOutcome",
]
