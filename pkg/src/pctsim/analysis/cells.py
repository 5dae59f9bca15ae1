"""Three-valued cell encodings for the property matrices.

Privacy cells say whether an adversary obtains the information: leaks,
partial (obtainable but degraded or at query cost), protected. Resiliency
cells say what an attack achieves: vulnerable (false exposures, no
server-side handle), rate_limited (false exposures possible but the
server-side cap detects and bounds them), robust (no false exposures).
"""

LEAKS = "leaks"
PARTIAL = "partial"
PROTECTED = "protected"

VULNERABLE = "vulnerable"
RATE_LIMITED = "rate_limited"
ROBUST = "robust"

PRIVACY_VALUES = (LEAKS, PARTIAL, PROTECTED)
RESILIENCY_VALUES = (VULNERABLE, RATE_LIMITED, ROBUST)


def privacy_cell(fraction: float, partial: bool = False) -> str:
    if fraction >= 0.99:
        return PARTIAL if partial else LEAKS
    return PROTECTED
