"""All prompt text used for feedback generation, in one place.

Every numeric value is rendered with two decimals so that the
compliance checker's number matching is well-defined.
"""

SYSTEM_PROMPT = "You are a precise, evidence-based tennis coach."

COMPARISON_HEADING = "Optimal-range comparison:"
RAW_FEATURES_HEADING = "Raw features:"
NO_FINDINGS_LINE = "- (no reference ranges available for this stroke)"

FORMAT_RULES = (
    "Respond in exactly this format:",
    '- First line: "Overall Score: X/10" (0 = very poor, 10 = perfect).',
    "- Then a concise diagnostic summary of 2-3 sentences.",
    "- Then exactly three actionable corrections, numbered 1. 2. 3.",
    "Base every statement on the optimal-range comparison above.",
    "Do not fabricate numerical values: use only numbers that appear in this prompt.",
)


def fmt_value(value):
    """Two-decimal rendering; placeholders carry no numerals."""
    if value is None:
        return "unavailable"
    try:
        return f"{float(value):.2f}"
    except (TypeError, ValueError):
        return "unavailable"
