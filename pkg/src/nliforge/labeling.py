"""Hypothesis and label generation, one backend call per premise.

Unlike premise generation there are no parse retries here: a malformed
completion or an out-of-vocabulary label means the example is discarded
and logged. The discard rate is reported and compared against a soft
warning threshold (well-behaved generators stay under 1%).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Label, NliExample, Split
from .gateway import CompletionRequest, Gateway, GatewayError, derive_seed
from .parsing import BraceParseError, extract_field, field_cue, render_field

DEFAULT_LABELING_TEMPERATURE = 0.0
DEFAULT_DISCARD_WARN_RATE = 0.01

DISCARD_MISFORMATTED = "misformatted"
DISCARD_UNKNOWN_LABEL = "unknown_label"

#: Instruction prepended to every labeler prompt. The label definitions
#: follow the usual NLI annotation convention: hypothesis truth is judged
#: against the premise alone, not background knowledge.
DEFAULT_LABELER_INSTRUCTION = (
    "Read the premise, then write a hypothesis about it and choose the "
    "matching label. Use entailment when the hypothesis must be true given "
    "the premise, contradiction when it cannot be true given the premise, "
    "and neutral when it might be true but does not have to be.\n"
    "Answer exactly in the form:\n"
    "hypothesis: {...} label: {...}"
)


@dataclass(frozen=True)
class LabelerOutput:
    """Raw completion for one premise plus its parse outcome.

    Exactly one of ``parsed`` / ``discard_reason`` is set.
    """

    premise_id: str
    raw_completion: str
    parsed: tuple[str, Label] | None = None
    discard_reason: str | None = None

    def __post_init__(self) -> None:
        if (self.parsed is None) == (self.discard_reason is None):
            raise ValueError("exactly one of parsed / discard_reason must be set")

    def to_dict(self) -> dict:
        return {
            "premise_id": self.premise_id,
            "raw_completion": self.raw_completion,
            "parsed": None
            if self.parsed is None
            else {"hypothesis": self.parsed[0], "label": self.parsed[1].value},
            "discard_reason": self.discard_reason,
        }


def build_labeler_input(instruction: str, premise: str) -> str:
    """Instruction, then the premise as a brace field, then the hypothesis cue."""
    if not premise.strip():
        raise ValueError("premise must be non-empty")
    return (
        instruction
        + "\n\n"
        + render_field("premise", premise)
        + "\n"
        + field_cue("hypothesis")
    )


def parse_labeler_output(raw: str) -> tuple[tuple[str, Label] | None, str | None]:
    """Extract (hypothesis, label) from a completion, or classify the discard.

    Returns (parsed, None) on success and (None, reason) otherwise, where
    reason is ``misformatted`` for structural problems and
    ``unknown_label`` for labels outside the three canonical ones.
    """
    # The prompt ends with the "hypothesis: {" cue, so completions normally
    # start mid-field; restore the cue before parsing for uniformity.
    text = raw if field_cue("hypothesis") in raw else field_cue("hypothesis") + raw
    try:
        hypothesis, cursor = extract_field(text, "hypothesis")
        label_text, _ = extract_field(text, "label", cursor)
    except BraceParseError:
        return None, DISCARD_MISFORMATTED
    if not hypothesis.strip():
        return None, DISCARD_MISFORMATTED
    try:
        label = Label.parse(label_text)
    except ValueError:
        return None, DISCARD_UNKNOWN_LABEL
    return (hypothesis, label), None


@dataclass(frozen=True)
class LabelingResult:
    """Labeled examples plus the full audit trail of the run."""

    examples: tuple[NliExample, ...]
    outputs: tuple[LabelerOutput, ...]
    transport_failures: tuple[tuple[str, str], ...]  # (premise_id, error)
    discard_rate: float
    warning: str | None

    @property
    def discards(self) -> tuple[LabelerOutput, ...]:
        return tuple(o for o in self.outputs if o.discard_reason is not None)

    def report_dict(self) -> dict:
        return {
            "premises": len(self.outputs) + len(self.transport_failures),
            "examples": len(self.examples),
            "discards": len(self.discards),
            "discard_rate": self.discard_rate,
            "discard_reasons": {
                reason: sum(1 for o in self.discards if o.discard_reason == reason)
                for reason in (DISCARD_MISFORMATTED, DISCARD_UNKNOWN_LABEL)
            },
            "transport_failures": [list(t) for t in self.transport_failures],
            "warning": self.warning,
        }


def label_premises(
    gateway: Gateway,
    premises: Sequence,
    instruction: str = DEFAULT_LABELER_INSTRUCTION,
    temperature: float = DEFAULT_LABELING_TEMPERATURE,
    base_seed: int = 0,
    warn_rate: float = DEFAULT_DISCARD_WARN_RATE,
) -> LabelingResult:
    """Request exactly one completion per premise and parse each one.

    There are deliberately no parse retries: bad completions become logged
    discards. Transport failures are logged and counted separately from
    discards. Output order follows premise order, and each emitted example
    carries its source premise text byte-for-byte.
    """
    requests = [
        CompletionRequest(
            prompt=build_labeler_input(instruction, premise.text),
            temperature=temperature,
            seed=derive_seed(base_seed, premise.id),
        )
        for premise in premises
    ]
    outputs: list[LabelerOutput] = []
    examples: list[NliExample] = []
    transport_failures: list[tuple[str, str]] = []
    for premise, result in zip(premises, gateway.complete_many(requests)):
        if isinstance(result, GatewayError):
            transport_failures.append((premise.id, str(result)))
            continue
        parsed, reason = parse_labeler_output(result.text)
        outputs.append(
            LabelerOutput(
                premise_id=premise.id,
                raw_completion=result.text,
                parsed=parsed,
                discard_reason=reason,
            )
        )
        if parsed is not None:
            hypothesis, label = parsed
            examples.append(
                NliExample(
                    id=premise.id,
                    domain=premise.domain,
                    length=premise.length,
                    premise=premise.text,
                    hypothesis=hypothesis,
                    label=label,
                    split=Split.UNASSIGNED,
                )
            )
    completed = len(outputs)
    discards = completed - len(examples)
    discard_rate = discards / completed if completed else 0.0
    warning = None
    if discard_rate > warn_rate:
        warning = (
            f"discard rate {discard_rate:.1%} exceeds the {warn_rate:.0%} "
            f"warning threshold ({discards}/{completed} completions discarded)"
        )
    return LabelingResult(
        examples=tuple(examples),
        outputs=tuple(outputs),
        transport_failures=tuple(transport_failures),
        discard_rate=discard_rate,
        warning=warning,
    )


def write_discards(outputs: Iterable[LabelerOutput], path: str | Path) -> None:
    """Persist the discard log (premise id, raw completion, reason)."""
    with open(path, "w", encoding="utf-8") as handle:
        for output in outputs:
            if output.discard_reason is None:
                continue
            record = {
                "premise_id": output.premise_id,
                "raw": output.raw_completion,
                "reason": output.discard_reason,
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
