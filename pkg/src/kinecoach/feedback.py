"""Build deterministic coaching prompts and call a chat-completion API.

The endpoint is OpenAI-compatible; the base URL, key, and model come
from environment variables so tests can point at a mock server:

* ``KINECOACH_API_KEY``  - required for live calls
* ``KINECOACH_MODEL``    - default "gpt-4o"
* ``KINECOACH_API_BASE`` - default "https://api.openai.com/v1"

Failures never raise: a missing key, HTTP error, or timeout comes back
as a FeedbackResult with ok=False and a documented error string.
"""

import os
import re
from dataclasses import dataclass

import requests

from . import prompts
from .schema import FEATURE_UNITS

DEFAULT_MODEL = "gpt-4o"
DEFAULT_API_BASE = "https://api.openai.com/v1"
TEMPERATURE = 0.2
MAX_TOKENS = 120
REQUEST_TIMEOUT_S = 30.0

MISSING_KEY_MESSAGE = (
    "ERROR: no API key configured (set KINECOACH_API_KEY); feedback not generated."
)

# A numeric token: digits with optional sign/decimals, not glued to
# letters or further digits/dots on either side ("25", "-3.5", the "35"
# in "25-35"; not the "4" in "gpt-4o").
NUMBER_RE = re.compile(r"(?<![\w.])-?\d+(?:\.\d+)?(?![\w.])")


def number_tokens(text):
    """All numeric tokens in the text, in order of appearance."""
    return NUMBER_RE.findall(text)


def normalize_number(token):
    """Canonical form used for matching: two-decimal string."""
    return f"{float(token):.2f}"


@dataclass(frozen=True)
class PromptBundle:
    """System+user prompt pair plus the user prompt's numeric tokens."""

    system_prompt: str
    user_prompt: str
    input_numbers: frozenset  # normalized two-decimal strings


@dataclass
class FeedbackResult:
    text: str
    model: str
    temperature: float
    max_tokens: int
    ok: bool

    def to_dict(self):
        return {
            "text": self.text,
            "model": self.model,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "ok": self.ok,
        }


def resolve_stroke_label(report_like):
    """Stroke label via predicted_stroke, then classification.label, then UNKNOWN."""
    if hasattr(report_like, "predicted_stroke"):
        label = report_like.predicted_stroke
    else:
        label = report_like.get("predicted_stroke")
        if not label:
            classification = report_like.get("classification")
            if isinstance(classification, dict):
                label = classification.get("label")
    return str(label) if label else "UNKNOWN"


def _scalars(report_like):
    if hasattr(report_like, "scalars"):
        return report_like.scalars()
    return dict(report_like)


def _sample_rate(report_like, scalars):
    meta = (
        report_like.metadata
        if hasattr(report_like, "metadata")
        else report_like.get("metadata", {})
    )
    rate = meta.get("sample_rate_hz") if isinstance(meta, dict) else None
    if rate:
        return float(rate)
    frames, secs = scalars.get("stroke_duration_frames"), scalars.get("stroke_duration_s")
    if frames and secs:
        return float(frames) / float(secs)
    return None


def build_context_summary(report, findings):
    """Deterministic PromptBundle from a report and its findings.

    The user prompt lists, in order: the resolved stroke type, every
    rendered finding line under the comparison heading, a compact
    listing of the raw scalar features, and the output-format rules.
    """
    stroke = resolve_stroke_label(report)
    scalars = _scalars(report)
    fmt = prompts.fmt_value
    lines = [f"Stroke type: {stroke}", "", prompts.COMPARISON_HEADING]
    if findings:
        lines.extend(f"- {finding.rendered}" for finding in findings)
    else:
        lines.append(prompts.NO_FINDINGS_LINE)
    lines.extend(["", prompts.RAW_FEATURES_HEADING])
    lines.append(f"- Predicted stroke: {stroke}")
    lines.append(
        f"- Racket velocity ({FEATURE_UNITS['racket_velocity_max']}): "
        f"{fmt(scalars.get('racket_velocity_max'))}"
    )
    lines.append(
        f"- Peak power ({FEATURE_UNITS['peak_power']}): {fmt(scalars.get('peak_power'))}"
    )
    lines.append(
        f"- Rotation range ({FEATURE_UNITS['rotation_range_deg']}): "
        f"{fmt(scalars.get('rotation_range_deg'))}"
    )
    frames = scalars.get("stroke_duration_frames")
    secs = scalars.get("stroke_duration_s")
    rate = _sample_rate(report, scalars)
    duration = f"- Stroke duration: {fmt(frames)} frames"
    if secs is not None and rate is not None:
        duration += f" ({fmt(secs)} s at {fmt(rate)} fps)"
    lines.append(duration)
    lines.append(
        f"- Peak angular velocity ({FEATURE_UNITS['peak_angular_velocity']}): "
        f"{fmt(scalars.get('peak_angular_velocity'))}"
    )
    lines.append(
        f"- Impact timing ({FEATURE_UNITS['impact_timing_pct']}): "
        f"{fmt(scalars.get('impact_timing_pct'))}"
    )
    lines.append("")
    lines.extend(prompts.FORMAT_RULES)
    user_prompt = "\n".join(lines)
    return PromptBundle(
        system_prompt=prompts.SYSTEM_PROMPT,
        user_prompt=user_prompt,
        input_numbers=frozenset(normalize_number(t) for t in number_tokens(user_prompt)),
    )


def generate_feedback(bundle, env=None):
    """One chat-completion call; every failure mode returns a result.

    With no API key in the environment the documented error string is
    returned without any network activity.
    """
    env = os.environ if env is None else env
    model = env.get("KINECOACH_MODEL") or DEFAULT_MODEL
    base = (env.get("KINECOACH_API_BASE") or DEFAULT_API_BASE).rstrip("/")
    key = env.get("KINECOACH_API_KEY")

    def result(text, ok):
        return FeedbackResult(
            text=text, model=model, temperature=TEMPERATURE, max_tokens=MAX_TOKENS, ok=ok
        )

    if not key:
        return result(MISSING_KEY_MESSAGE, ok=False)
    payload = {
        "model": model,
        "messages": [
            {"role": "system", "content": bundle.system_prompt},
            {"role": "user", "content": bundle.user_prompt},
        ],
        "temperature": TEMPERATURE,
        "max_tokens": MAX_TOKENS,
    }
    try:
        resp = requests.post(
            f"{base}/chat/completions",
            json=payload,
            headers={"Authorization": f"Bearer {key}"},
            timeout=REQUEST_TIMEOUT_S,
        )
    except requests.Timeout:
        return result(
            f"ERROR: feedback request timed out after {REQUEST_TIMEOUT_S:.0f} s", ok=False
        )
    except requests.RequestException as exc:
        return result(f"ERROR: feedback request failed ({type(exc).__name__})", ok=False)
    if resp.status_code != 200:
        klass = "server error" if resp.status_code >= 500 else "client error"
        return result(
            f"ERROR: feedback API returned HTTP {resp.status_code} ({klass})", ok=False
        )
    try:
        text = resp.json()["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError):
        return result("ERROR: malformed feedback API response", ok=False)
    return result(text, ok=True)
