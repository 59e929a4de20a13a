"""Validate feedback text against the three output constraints.

1. Format: the first non-empty line is "Overall Score: X/10" with X in
   0..10, and exactly three enumerated corrections are present.
2. Direction accuracy: every feature the text calls high/low agrees
   with the corresponding finding's verdict.
3. No fabricated numbers: every numeric token (outside the score and
   enumeration markers) appears among the prompt's numeric tokens,
   under two-decimal-tolerant matching.

Feature mentions are detected by fixed aliases plus direction keywords
inside one sentence; anything that does not match is ignored, so only
explicit contradictions fail.
"""

import re
from dataclasses import dataclass

from .feedback import normalize_number, number_tokens
from .schema import FEATURE_ALIASES

SCORE_LINE_RE = re.compile(r"^Overall Score:\s*(\d{1,2})\s*/\s*10\s*$")

_ORDERED_ITEM_RE = re.compile(r"(?:^|(?<=\s))([1-9]\d*)[.)]\s+")
_BULLET_LINE_RE = re.compile(r"^\s*[-•*]\s+")
_ENUM_MARKER_RE = re.compile(r"(?m)^\s*(?:\d+[.)]|[-•*])\s+")
_SCORE_TOKEN_RE = re.compile(r"\b\d{1,2}\s*/\s*10\b")
_SENTENCE_SPLIT_RE = re.compile(r"[.!?\n]+")
_CORRECTION_HEADING_RE = re.compile(r"correction", re.IGNORECASE)

_HIGH_WORDS = (
    "high",
    "higher",
    "excessive",
    "excessively",
    "above",
    "exceeds",
    "exceeding",
    "elevated",
    "longer",
    "too long",
    "too large",
    "too fast",
    "too much",
)
_LOW_WORDS = (
    "low",
    "lower",
    "below",
    "under",
    "insufficient",
    "reduced",
    "shortened",
    "shorter",
    "slower",
    "too short",
    "too small",
    "too slow",
    "too little",
)


def _word_res(words):
    return tuple(re.compile(r"\b" + re.escape(w) + r"\b") for w in words)


_HIGH_RES = _word_res(_HIGH_WORDS)
_LOW_RES = _word_res(_LOW_WORDS)


@dataclass
class ComplianceReport:
    has_score_line: bool
    score: int  # None when absent/invalid
    has_three_corrections: bool
    directions_consistent: bool
    fabricated_numbers: list
    passed: bool

    def to_dict(self):
        return {
            "has_score_line": self.has_score_line,
            "score": self.score,
            "has_three_corrections": self.has_three_corrections,
            "directions_consistent": self.directions_consistent,
            "fabricated_numbers": list(self.fabricated_numbers),
            "pass": self.passed,
        }


def _first_nonempty_line(text):
    for line in text.splitlines():
        if line.strip():
            return line.strip()
    return ""


def _extract_score(text):
    m = SCORE_LINE_RE.match(_first_nonempty_line(text))
    if not m:
        return False, None
    score = int(m.group(1))
    if score > 10:
        return False, None
    return True, score


def _corrections_scope(text):
    """Text after a 'correction' heading when present, else the whole text."""
    lines = text.splitlines()
    for i, line in enumerate(lines):
        if _CORRECTION_HEADING_RE.search(line):
            return "\n".join(lines[i:])
    return text


def _count_corrections(text):
    scope = _corrections_scope(text)
    ordered = [int(m.group(1)) for m in _ORDERED_ITEM_RE.finditer(scope)]
    if ordered:
        return ordered == [1, 2, 3]
    bullets = sum(1 for line in scope.splitlines() if _BULLET_LINE_RE.match(line))
    return bullets == 3


def _sentences(text):
    return [s.strip().lower() for s in _SENTENCE_SPLIT_RE.split(text) if s.strip()]


def _direction_claims(text):
    """(feature, direction) claims; sentences with mixed cues are skipped."""
    claims = []
    for sentence in _sentences(text):
        high = any(rx.search(sentence) for rx in _HIGH_RES)
        low = any(rx.search(sentence) for rx in _LOW_RES)
        if high == low:  # no cue, or contradictory cues in one sentence
            continue
        direction = "HIGH" if high else "LOW"
        for feature, aliases in FEATURE_ALIASES.items():
            if any(alias in sentence for alias in aliases):
                claims.append((feature, direction))
    return claims


def _directions_consistent(text, findings):
    verdicts = {}
    for finding in findings:
        verdicts.setdefault(finding.feature, finding.verdict)
    # aliases shared by several features (the two duration scalars):
    # a claim counts as consistent when any aliased feature agrees
    alias_groups = {}
    for feature, aliases in FEATURE_ALIASES.items():
        for alias in aliases:
            alias_groups.setdefault(alias, set()).add(feature)
    for feature, direction in _direction_claims(text):
        group = {feature}
        for alias in FEATURE_ALIASES[feature]:
            group |= alias_groups[alias]
        relevant = [verdicts[f] for f in group if verdicts.get(f) in ("HIGH", "LOW", "OK")]
        if not relevant:
            continue
        if direction not in relevant:
            return False
    return True


def _fabricated_numbers(text, bundle):
    has_score, _ = _extract_score(text)
    body = text
    if has_score:
        # drop the score line itself
        lines = body.splitlines()
        for i, line in enumerate(lines):
            if line.strip():
                del lines[i]
                break
        body = "\n".join(lines)
    body = _SCORE_TOKEN_RE.sub(" ", body)
    body = _ENUM_MARKER_RE.sub(" ", body)
    fabricated = []
    for token in number_tokens(body):
        if normalize_number(token) not in bundle.input_numbers:
            if token not in fabricated:
                fabricated.append(token)
    return fabricated


def check_feedback(text, bundle, findings):
    """Run all three constraint checks on a feedback text."""
    has_score_line, score = _extract_score(text)
    has_three = _count_corrections(text)
    consistent = _directions_consistent(text, findings)
    fabricated = _fabricated_numbers(text, bundle)
    passed = has_score_line and has_three and consistent and not fabricated
    return ComplianceReport(
        has_score_line=has_score_line,
        score=score,
        has_three_corrections=has_three,
        directions_consistent=consistent,
        fabricated_numbers=fabricated,
        passed=passed,
    )
