"""Stroke-specific reference intervals and deterministic findings.

Each scalar feature of a stroke is compared against a hand-specified
optimal interval (lo, hi). Values outside the interval are reported as
relative percentage deviations:

    below: (lo - v) / (hi - lo + 1e-9) * 100
    above: (v - hi) / (hi - lo + 1e-9) * 100

where the 1e-9 guard keeps degenerate intervals finite. Missing or
non-numeric values are flagged explicitly rather than skipped.
"""

import json
from dataclasses import dataclass, field
from importlib import resources

from .errors import ConfigError
from .schema import FEATURE_LABELS, SCALAR_ORDER, feature_sort_key

DIVISION_EPS = 1e-9

_KNOWN_FEATURES = set(SCALAR_ORDER)


@dataclass
class RangeEntry:
    lo: float
    hi: float
    units: str = ""
    provenance: str = ""


@dataclass
class ReferenceTable:
    """stroke type -> feature -> interval, immutable after load."""

    strokes: dict
    warnings: list = field(default_factory=list)

    def features_for(self, stroke_type):
        entry = self.strokes.get(str(stroke_type).lower())
        if entry is None:
            return None
        return {k: entry[k] for k in sorted(entry, key=feature_sort_key)}


@dataclass
class Finding:
    """Per-feature verdict with relative deviation percentage."""

    feature: str
    value: float  # None when missing/non-numeric
    verdict: str  # OK | LOW | HIGH | MISSING
    deviation_pct: float  # 0.0 when OK, None when MISSING
    rendered: str

    def to_dict(self):
        return {
            "feature": self.feature,
            "value": self.value,
            "verdict": self.verdict,
            "deviation_pct": self.deviation_pct,
            "rendered": self.rendered,
        }


def default_table_path():
    """Path of the table bundled with the package (placeholder values)."""
    return resources.files("kinecoach.data") / "reference_ranges.json"


def load_reference_table(path=None):
    """Load a reference table, validating every interval.

    ``path=None`` loads the bundled default table. Intervals with
    lo > hi raise ConfigError; feature keys outside the scalar schema
    only produce a warning (the comparator will ignore values the
    report does not carry anyway).
    """
    if path is None:
        text = default_table_path().read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"reference table is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("reference table must be a JSON object")
    strokes = {}
    warnings = []
    for stroke, features in doc.items():
        if not isinstance(features, dict):
            raise ConfigError(f"stroke {stroke!r}: expected a feature map")
        entry = {}
        for feature, spec in features.items():
            key = feature.lower()
            if not isinstance(spec, dict) or "lo" not in spec or "hi" not in spec:
                raise ConfigError(
                    f"stroke {stroke!r}, feature {feature!r}: expected lo/hi"
                )
            lo, hi = float(spec["lo"]), float(spec["hi"])
            if lo > hi:
                raise ConfigError(
                    f"stroke {stroke!r}, feature {feature!r}: lo {lo:g} > hi {hi:g}"
                )
            if key not in _KNOWN_FEATURES:
                warnings.append(f"stroke {stroke!r}: unknown feature key {feature!r}")
            entry[key] = RangeEntry(
                lo=lo,
                hi=hi,
                units=str(spec.get("units", "")),
                provenance=str(spec.get("provenance", "")),
            )
        strokes[stroke.lower()] = entry
    return ReferenceTable(strokes=strokes, warnings=warnings)


def _label(feature):
    return FEATURE_LABELS.get(feature, feature)


def _coerce(value):
    if value is None or isinstance(value, bool):
        return None
    try:
        v = float(value)
    except (TypeError, ValueError):
        return None
    if v != v:  # NaN
        return None
    return v


def compare_to_reference(report, table, stroke_type=None):
    """Compare a report's scalars against the table; one Finding per interval.

    ``report`` may be a FeatureReport or a plain mapping of scalar
    values. When the stroke type has no table entry, every finding is a
    MISSING-range finding.
    """
    scalars = report.scalars() if hasattr(report, "scalars") else dict(report)
    if stroke_type is None:
        stroke_type = scalars.get("predicted_stroke") or "UNKNOWN"
    stroke_key = str(stroke_type).lower()
    features = table.features_for(stroke_key)
    findings = []
    if features is None:
        for feature in SCALAR_ORDER:
            findings.append(
                Finding(
                    feature=feature,
                    value=_coerce(scalars.get(feature)),
                    verdict="MISSING",
                    deviation_pct=None,
                    rendered=(
                        f"{_label(feature)} MISSING: no reference range for "
                        f"stroke '{stroke_key}'"
                    ),
                )
            )
        return findings
    for feature, entry in features.items():
        lo, hi, span = entry.lo, entry.hi, entry.hi - entry.lo + DIVISION_EPS
        value = _coerce(scalars.get(feature))
        if value is None:
            findings.append(
                Finding(
                    feature=feature,
                    value=None,
                    verdict="MISSING",
                    deviation_pct=None,
                    rendered=(
                        f"{_label(feature)} MISSING: no numeric value "
                        f"(expected optimal {lo:g}–{hi:g})"
                    ),
                )
            )
            continue
        if value < lo:
            dev = (lo - value) / span * 100.0
            verdict, direction = "LOW", "below"
        elif value > hi:
            dev = (value - hi) / span * 100.0
            verdict, direction = "HIGH", "above"
        else:
            dev = 0.0
            verdict, direction = "OK", None
        if verdict == "OK":
            rendered = f"{_label(feature)} OK: {value:.2f} vs optimal {lo:g}–{hi:g}"
        else:
            rendered = (
                f"{_label(feature)} {verdict}: {value:.2f} vs optimal "
                f"{lo:g}–{hi:g} (≈{dev:.1f}% {direction} range)"
            )
        findings.append(
            Finding(
                feature=feature,
                value=value,
                verdict=verdict,
                deviation_pct=dev,
                rendered=rendered,
            )
        )
    return findings
