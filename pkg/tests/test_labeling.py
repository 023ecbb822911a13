from __future__ import annotations

import pytest

from nliforge.corpus import Label, LengthCategory, Split
from nliforge.gateway import (
    CompletionRequest,
    CompletionResponse,
    Gateway,
    GatewayPolicy,
    MockBackend,
    TransientBackendFailure,
)
from nliforge.labeling import (
    DISCARD_MISFORMATTED,
    DISCARD_UNKNOWN_LABEL,
    DEFAULT_LABELER_INSTRUCTION,
    build_labeler_input,
    label_premises,
    parse_labeler_output,
)
from nliforge.premises import Premise


def make_gateway(backend, **kwargs) -> Gateway:
    policy = kwargs.pop("policy", GatewayPolicy(rate_limit=None, max_retries=0))
    return Gateway(backend, policy=policy, sleep=lambda s: None, **kwargs)


def premise(i: int, text: str | None = None) -> Premise:
    return Premise(
        id=f"p{i:03d}", domain="news", length=LengthCategory.SHORT,
        text=text or f"Premise number {i}.",
    )


class TestBuildLabelerInput:
    def test_ends_with_hypothesis_cue(self):
        prompt = build_labeler_input(DEFAULT_LABELER_INSTRUCTION, "The sky is blue.")
        assert prompt.endswith("hypothesis: {")
        assert "premise: {The sky is blue.}" in prompt
        assert prompt.startswith(DEFAULT_LABELER_INSTRUCTION)

    def test_empty_premise_rejected(self):
        with pytest.raises(ValueError, match="non-empty"):
            build_labeler_input(DEFAULT_LABELER_INSTRUCTION, "   ")

    def test_close_brace_premise_rejected(self):
        with pytest.raises(ValueError, match="cannot represent"):
            build_labeler_input(DEFAULT_LABELER_INSTRUCTION, "bad } text")


class TestParseLabelerOutput:
    def test_full_form(self):
        parsed, reason = parse_labeler_output(
            "hypothesis: {The sky has a color.} label: {entailment}"
        )
        assert reason is None
        assert parsed == ("The sky has a color.", Label.ENTAILMENT)

    def test_continuation_form(self):
        # prompts end with the cue, so completions usually start mid-field
        parsed, reason = parse_labeler_output("The sky has a color.}\nlabel: {neutral}")
        assert reason is None
        assert parsed == ("The sky has a color.", Label.NEUTRAL)

    def test_unknown_label(self):
        parsed, reason = parse_labeler_output("hypothesis: {X} label: {maybe}")
        assert parsed is None
        assert reason == DISCARD_UNKNOWN_LABEL

    def test_label_case_insensitive(self):
        parsed, _ = parse_labeler_output("hypothesis: {X} label: {Entailment}")
        assert parsed == ("X", Label.ENTAILMENT)

    def test_unclosed_hypothesis(self):
        parsed, reason = parse_labeler_output("hypothesis: {unclosed")
        assert parsed is None
        assert reason == DISCARD_MISFORMATTED

    def test_missing_label_field(self):
        parsed, reason = parse_labeler_output("hypothesis: {done} no label here")
        assert reason == DISCARD_MISFORMATTED

    def test_empty_hypothesis(self):
        parsed, reason = parse_labeler_output("hypothesis: {  } label: {neutral}")
        assert reason == DISCARD_MISFORMATTED


def script_for(premises, completions) -> dict[str, str]:
    return {
        build_labeler_input(DEFAULT_LABELER_INSTRUCTION, p.text): c
        for p, c in zip(premises, completions)
    }


class TestLabelPremises:
    def test_one_percent_discard_rate(self):
        batch = [premise(i) for i in range(100)]
        completions = [f"Hypothesis {i}.}}\nlabel: {{neutral}}" for i in range(99)]
        completions.append("hypothesis: {broken")
        gateway = make_gateway(MockBackend(script=script_for(batch, completions)))
        result = label_premises(gateway, batch)
        assert len(result.examples) == 99
        assert result.discard_rate == pytest.approx(0.01)
        assert result.warning is None  # at the threshold, not above it

    def test_all_valid_zero_rate(self):
        batch = [premise(i) for i in range(10)]
        completions = [f"H{i}.}}\nlabel: {{entailment}}" for i in range(10)]
        gateway = make_gateway(MockBackend(script=script_for(batch, completions)))
        result = label_premises(gateway, batch)
        assert result.discard_rate == 0.0
        assert result.warning is None

    def test_three_percent_triggers_warning(self):
        batch = [premise(i) for i in range(100)]
        completions = [f"H{i}.}}\nlabel: {{contradiction}}" for i in range(97)]
        completions += ["hypothesis: {a", "hypothesis: {b", "hypothesis: {c"]
        gateway = make_gateway(MockBackend(script=script_for(batch, completions)))
        result = label_premises(gateway, batch)
        assert result.discard_rate == pytest.approx(0.03)
        assert result.warning is not None
        assert "1%" in result.warning

    def test_one_request_per_premise(self):
        batch = [premise(i) for i in range(25)]
        completions = [f"H{i}.}}\nlabel: {{neutral}}" for i in range(25)]
        gateway = make_gateway(MockBackend(script=script_for(batch, completions)))
        label_premises(gateway, batch)
        assert len(gateway.audit_records) == 25

    def test_premise_text_byte_identical_and_labels_canonical(self):
        batch = [premise(0, "Exact  spacing é preserved."), premise(1)]
        completions = ["H.}\nlabel: {Entailment}", "H2.}\nlabel: {CONTRADICTION}"]
        gateway = make_gateway(MockBackend(script=script_for(batch, completions)))
        result = label_premises(gateway, batch)
        assert result.examples[0].premise == "Exact  spacing é preserved."
        assert all(ex.label in set(Label) for ex in result.examples)
        assert all(ex.split is Split.UNASSIGNED for ex in result.examples)
        assert [ex.id for ex in result.examples] == [p.id for p in batch]

    def test_transport_failures_counted_separately(self):
        batch = [premise(i) for i in range(3)]
        completions = [f"H{i}.}}\nlabel: {{neutral}}" for i in range(3)]
        script = script_for(batch, completions)
        failing_prompt = build_labeler_input(DEFAULT_LABELER_INSTRUCTION, batch[1].text)

        class PartiallyDown:
            backend_id = "partial"

            def __init__(self):
                self.inner = MockBackend(script=script)

            def complete(self, request: CompletionRequest) -> CompletionResponse:
                if request.prompt == failing_prompt:
                    raise TransientBackendFailure("link down")
                return self.inner.complete(request)

        gateway = make_gateway(PartiallyDown())
        result = label_premises(gateway, batch)
        assert len(result.examples) == 2
        assert len(result.transport_failures) == 1
        assert result.transport_failures[0][0] == "p001"
        assert result.discard_rate == 0.0  # transport failures are not discards

    def test_discard_log_contents(self):
        batch = [premise(0), premise(1)]
        completions = ["hypothesis: {oops", "H.}\nlabel: {maybe}"]
        gateway = make_gateway(MockBackend(script=script_for(batch, completions)))
        result = label_premises(gateway, batch)
        reasons = {o.premise_id: o.discard_reason for o in result.discards}
        assert reasons == {"p000": DISCARD_MISFORMATTED, "p001": DISCARD_UNKNOWN_LABEL}
