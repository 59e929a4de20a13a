"""Prompt construction determinism and the feedback call's failure modes."""

import pytest

import kinecoach.feedback as fb
from conftest import BACKHAND_SCALARS, backhand_table
from kinecoach.feedback import (
    MISSING_KEY_MESSAGE,
    PromptBundle,
    build_context_summary,
    generate_feedback,
    normalize_number,
    number_tokens,
    resolve_stroke_label,
)
from kinecoach.grounding import compare_to_reference
from kinecoach.prompts import COMPARISON_HEADING, SYSTEM_PROMPT


def backhand_bundle():
    findings = compare_to_reference(BACKHAND_SCALARS, backhand_table())
    return build_context_summary(BACKHAND_SCALARS, findings), findings


class TestNumberTokens:
    def test_range_and_decimals(self):
        assert number_tokens("optimal 25–35 (≈50.0% below)") == ["25", "35", "50.0"]

    def test_hyphen_range_not_negative(self):
        assert number_tokens("2-3 sentences") == ["2", "3"]

    def test_letter_glued_tokens_ignored(self):
        assert number_tokens("gpt-4o at 60fps") == []

    def test_true_negative(self):
        assert number_tokens("drop of -3.5 m/s") == ["-3.5"]

    def test_normalization(self):
        assert normalize_number("25") == normalize_number("25.0") == "25.00"


class TestBundle:
    def test_section_order_and_content(self):
        bundle, findings = backhand_bundle()
        text = bundle.user_prompt
        assert text.startswith("Stroke type: backhand")
        assert COMPARISON_HEADING in text
        for finding in findings:
            assert f"- {finding.rendered}" in text
        i_cmp = text.index(COMPARISON_HEADING)
        i_raw = text.index("Raw features:")
        i_rules = text.index("Respond in exactly this format:")
        assert i_cmp < i_raw < i_rules
        assert 'First line: "Overall Score: X/10"' in text
        assert "exactly three actionable corrections" in text
        assert "Do not fabricate numerical values" in text
        assert bundle.system_prompt == SYSTEM_PROMPT

    def test_duration_line_reports_frames_seconds_rate(self):
        bundle, _ = backhand_bundle()
        assert "- Stroke duration: 22.00 frames (0.37 s at 60.00 fps)" in bundle.user_prompt

    def test_deterministic(self):
        a, _ = backhand_bundle()
        b, _ = backhand_bundle()
        assert a == b

    def test_unknown_stroke_fallback(self):
        bundle = build_context_summary({"racket_velocity_max": 20.0}, [])
        assert "Stroke type: UNKNOWN" in bundle.user_prompt

    def test_classification_label_fallback(self):
        assert resolve_stroke_label({"classification": {"label": "smash"}}) == "smash"
        assert resolve_stroke_label({}) == "UNKNOWN"
        assert resolve_stroke_label({"predicted_stroke": "backhand"}) == "backhand"

    def test_input_numbers_exhaustive_over_prompt(self):
        bundle, _ = backhand_bundle()
        rescan = {normalize_number(t) for t in number_tokens(bundle.user_prompt)}
        assert bundle.input_numbers == frozenset(rescan)

    def test_missing_values_render_without_numerals(self):
        bundle = build_context_summary({"predicted_stroke": "backhand"}, [])
        assert "- Peak power (W): unavailable" in bundle.user_prompt


def _bundle():
    return PromptBundle(
        system_prompt=SYSTEM_PROMPT, user_prompt="test 1.00", input_numbers=frozenset()
    )


class TestGenerateFeedback:
    def test_missing_key_no_network(self, monkeypatch):
        def boom(*args, **kwargs):
            raise AssertionError("network call attempted without a key")

        monkeypatch.setattr(fb.requests, "post", boom)
        result = generate_feedback(_bundle(), env={})
        assert result.ok is False
        assert result.text == MISSING_KEY_MESSAGE
        assert result.model == "gpt-4o"
        assert result.temperature == 0.2 and result.max_tokens == 120

    def test_mock_success_passthrough(self, mock_chat_server):
        server = mock_chat_server(status=200, text="Overall Score: 7/10\nNice stroke.")
        env = {"KINECOACH_API_KEY": "k", "KINECOACH_API_BASE": server.base_url,
               "KINECOACH_MODEL": "test-model"}
        result = generate_feedback(_bundle(), env=env)
        assert result.ok is True
        assert result.text == "Overall Score: 7/10\nNice stroke."
        sent = server.requests[0]
        assert sent["model"] == "test-model"
        assert sent["temperature"] == 0.2
        assert sent["max_tokens"] == 120
        assert sent["messages"][0] == {"role": "system", "content": SYSTEM_PROMPT}

    def test_http_500_is_concise_error(self, mock_chat_server):
        server = mock_chat_server(status=500)
        env = {"KINECOACH_API_KEY": "k", "KINECOACH_API_BASE": server.base_url}
        result = generate_feedback(_bundle(), env=env)
        assert result.ok is False
        assert "500" in result.text and "server error" in result.text

    def test_http_404_is_client_error(self, mock_chat_server):
        server = mock_chat_server(status=404)
        env = {"KINECOACH_API_KEY": "k", "KINECOACH_API_BASE": server.base_url}
        result = generate_feedback(_bundle(), env=env)
        assert result.ok is False and "client error" in result.text

    def test_unreachable_endpoint_never_raises(self):
        env = {"KINECOACH_API_KEY": "k", "KINECOACH_API_BASE": "http://127.0.0.1:9"}
        result = generate_feedback(_bundle(), env=env)
        assert result.ok is False
        assert result.text.startswith("ERROR:")

    def test_timeout_is_reported(self, monkeypatch):
        def slow(*args, **kwargs):
            raise fb.requests.Timeout()

        monkeypatch.setattr(fb.requests, "post", slow)
        env = {"KINECOACH_API_KEY": "k"}
        result = generate_feedback(_bundle(), env=env)
        assert result.ok is False and "timed out" in result.text

    def test_malformed_body_is_reported(self, monkeypatch):
        class FakeResponse:
            status_code = 200

            def json(self):
                return {"unexpected": []}

        monkeypatch.setattr(fb.requests, "post", lambda *a, **k: FakeResponse())
        result = generate_feedback(_bundle(), env={"KINECOACH_API_KEY": "k"})
        assert result.ok is False and "malformed" in result.text
