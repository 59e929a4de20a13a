"""Shared naming for the scalar stroke features.

Grounding, prompting, and compliance checking all refer to the same
scalar features; keeping labels/units/aliases in one table keeps their
rendered text consistent.
"""

# Fixed order used for findings and for the raw-feature prompt listing.
SCALAR_ORDER = (
    "racket_velocity_max",
    "peak_power",
    "rotation_range_deg",
    "stroke_duration_frames",
    "stroke_duration_s",
    "peak_angular_velocity",
    "impact_timing_pct",
    "kinetic_chain_timing_pct",
)

FEATURE_LABELS = {
    "racket_velocity_max": "Racket velocity",
    "peak_power": "Peak power",
    "rotation_range_deg": "Rotation range",
    "stroke_duration_frames": "Stroke duration",
    "stroke_duration_s": "Stroke duration (s)",
    "peak_angular_velocity": "Peak angular velocity",
    "impact_timing_pct": "Impact timing",
    "kinetic_chain_timing_pct": "Kinetic chain timing",
}

FEATURE_UNITS = {
    "racket_velocity_max": "m/s",
    "peak_power": "W",
    "rotation_range_deg": "deg",
    "stroke_duration_frames": "frames",
    "stroke_duration_s": "s",
    "peak_angular_velocity": "rad/s",
    "impact_timing_pct": "% of stroke",
    "kinetic_chain_timing_pct": "% of stroke",
}

# Phrases that count as a mention of the feature in free text
# (lowercase; matched as substrings of a normalized sentence).
FEATURE_ALIASES = {
    "racket_velocity_max": ("racket velocity", "racket speed"),
    "peak_power": ("peak power",),
    "rotation_range_deg": ("rotation range", "trunk rotation"),
    "stroke_duration_frames": ("stroke duration", "swing duration"),
    "stroke_duration_s": ("stroke duration", "swing duration"),
    "peak_angular_velocity": ("peak angular velocity", "angular velocity"),
    "impact_timing_pct": ("impact timing",),
    "kinetic_chain_timing_pct": ("kinetic chain timing",),
}


def feature_sort_key(name):
    """Stable ordering: the fixed scalar order first, extras alphabetical."""
    try:
        return (0, SCALAR_ORDER.index(name))
    except ValueError:
        return (1, name)
