"""Inter-annotator agreement: Cohen's kappa, majority/unanimous labels,
and the full agreement report for an annotation session.

Kappa values are kept in [-1, 1] everywhere; rendering as a percentage
happens only at display boundaries (CLI tables, dashboards).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Hashable, Mapping, Sequence

from .corpus import Label, NliExample


class IncompleteSessionError(Exception):
    """An agreement report was requested before every vote was in."""

    def __init__(self, missing: Sequence[tuple[str, str]]):
        self.missing = tuple(missing)
        preview = ", ".join(f"({ex}, {annotator})" for ex, annotator in self.missing[:5])
        more = "" if len(self.missing) <= 5 else f" and {len(self.missing) - 5} more"
        super().__init__(f"missing votes: {preview}{more}")


class DuplicateVoteError(Exception):
    """A (example, annotator) pair voted twice."""


def cohen_kappa(labels_a: Sequence[Hashable], labels_b: Sequence[Hashable]) -> float:
    """Chance-corrected agreement between two aligned label sequences.

    kappa = (p_o - p_e) / (1 - p_e), with p_e the product of the two
    raters' marginal label frequencies. Perfect observed agreement returns
    exactly 1, which also covers the degenerate single-category case
    (p_e = 1 is only reachable when both raters are constant on the same
    label, forcing p_o = 1, so the division never sees a zero denominator
    with disagreement present).
    """
    if len(labels_a) != len(labels_b):
        raise ValueError(
            f"label sequences differ in length: {len(labels_a)} vs {len(labels_b)}"
        )
    n = len(labels_a)
    if n == 0:
        raise ValueError("label sequences must be non-empty")
    agreements = sum(1 for a, b in zip(labels_a, labels_b) if a == b)
    if agreements == n:
        return 1.0
    counts_a = Counter(labels_a)
    counts_b = Counter(labels_b)
    p_o = agreements / n
    p_e = sum(counts_a[label] * counts_b[label] for label in counts_a) / (n * n)
    return (p_o - p_e) / (1 - p_e)


def majority_label(votes: Sequence[Label], threshold: int = 2) -> Label | None:
    """The label reaching ``threshold`` votes, or None.

    A tie (two labels both at threshold, impossible for 3 votes with
    threshold 2) also yields None. Order of votes never matters.
    """
    if len(votes) < threshold:
        raise ValueError(f"need at least {threshold} votes, got {len(votes)}")
    reaching = [label for label, count in Counter(votes).items() if count >= threshold]
    if len(reaching) == 1:
        return reaching[0]
    return None


def is_tied_majority(votes: Sequence[Label], threshold: int = 2) -> bool:
    reaching = [label for label, count in Counter(votes).items() if count >= threshold]
    return len(reaching) > 1


def is_unanimous(votes: Sequence[Label]) -> bool:
    return len(votes) > 0 and len(set(votes)) == 1


@dataclass(frozen=True)
class SessionExample:
    """One holdout example as served to annotators. The generator's label
    rides along for the final report but is never exposed pre-vote."""

    id: str
    premise: str
    hypothesis: str
    domain: str
    length: str
    model_label: Label

    @classmethod
    def from_example(cls, ex: NliExample) -> "SessionExample":
        return cls(
            id=ex.id,
            premise=ex.premise,
            hypothesis=ex.hypothesis,
            domain=ex.domain,
            length=ex.length.value,
            model_label=ex.label,
        )

    def public_dict(self) -> dict:
        """The annotator-facing payload: no label field, by construction."""
        return {
            "id": self.id,
            "premise": self.premise,
            "hypothesis": self.hypothesis,
            "domain": self.domain,
            "length": self.length,
        }


class AnnotationSession:
    """Vote bookkeeping for one set of examples and annotators.

    At most one vote per (example, annotator); every annotator sees the
    examples in the same fixed order, so an interrupted session resumes
    where it left off.
    """

    def __init__(self, session_id: str, examples: Sequence[SessionExample], annotators: Sequence[str]):
        if len(annotators) != len(set(annotators)):
            raise ValueError("annotator ids must be unique")
        if len(annotators) < 2:
            raise ValueError("need at least 2 annotators for agreement statistics")
        if not examples:
            raise ValueError("session needs at least one example")
        self.id = session_id
        self.examples = tuple(examples)
        self.annotators = tuple(annotators)
        self.votes: dict[tuple[str, str], Label] = {}
        self._example_ids = {ex.id for ex in self.examples}

    def vote(self, example_id: str, annotator: str, label: Label) -> None:
        if annotator not in self.annotators:
            raise KeyError(f"unknown annotator {annotator!r}")
        if example_id not in self._example_ids:
            raise KeyError(f"unknown example {example_id!r}")
        key = (example_id, annotator)
        if key in self.votes:
            raise DuplicateVoteError(f"{annotator!r} already voted on {example_id!r}")
        self.votes[key] = label

    def next_unlabeled(self, annotator: str) -> SessionExample | None:
        if annotator not in self.annotators:
            raise KeyError(f"unknown annotator {annotator!r}")
        for ex in self.examples:
            if (ex.id, annotator) not in self.votes:
                return ex
        return None

    def progress(self, annotator: str) -> int:
        if annotator not in self.annotators:
            raise KeyError(f"unknown annotator {annotator!r}")
        return sum(1 for ex in self.examples if (ex.id, annotator) in self.votes)

    def missing_votes(self) -> list[tuple[str, str]]:
        return [
            (ex.id, annotator)
            for ex in self.examples
            for annotator in self.annotators
            if (ex.id, annotator) not in self.votes
        ]

    @property
    def complete(self) -> bool:
        return not self.missing_votes()


@dataclass(frozen=True)
class AgreementReport:
    """Everything the annotation study measures, in one place.

    Model accuracies are computed only over the majority-labeled
    (respectively unanimous) examples; kappas are two-rater Cohen values.
    """

    n_examples: int
    annotators: tuple[str, ...]
    pairwise_kappa: tuple[tuple[str, str, float], ...]
    average_kappa: float
    majority_labels: dict[str, Label | None]
    majority_coverage: float
    unanimous_ids: tuple[str, ...]
    ties: tuple[str, ...]
    model_accuracy_majority: float | None
    model_accuracy_unanimous: float | None
    model_kappa_majority: float | None
    model_kappa_unanimous: float | None

    @property
    def n_majority(self) -> int:
        return sum(1 for label in self.majority_labels.values() if label is not None)

    @property
    def n_unanimous(self) -> int:
        return len(self.unanimous_ids)

    def to_dict(self) -> dict:
        return {
            "n_examples": self.n_examples,
            "annotators": list(self.annotators),
            "pairwise_kappa": [
                {"annotators": [a, b], "kappa": k} for a, b, k in self.pairwise_kappa
            ],
            "average_kappa": self.average_kappa,
            "majority_labels": {
                ex_id: (label.value if label is not None else None)
                for ex_id, label in self.majority_labels.items()
            },
            "n_majority": self.n_majority,
            "majority_coverage": self.majority_coverage,
            "unanimous_ids": list(self.unanimous_ids),
            "n_unanimous": self.n_unanimous,
            "ties": list(self.ties),
            "model_accuracy_majority": self.model_accuracy_majority,
            "model_accuracy_unanimous": self.model_accuracy_unanimous,
            "model_kappa_majority": self.model_kappa_majority,
            "model_kappa_unanimous": self.model_kappa_unanimous,
        }


def agreement_report(
    session: AnnotationSession,
    model_labels: Mapping[str, Label] | None = None,
    majority_threshold: int = 2,
) -> AgreementReport:
    """Compute the full agreement report for a fully voted session.

    ``model_labels`` defaults to the generator labels carried by the
    session examples. Raises :class:`IncompleteSessionError` listing every
    missing (example, annotator) pair otherwise.
    """
    missing = session.missing_votes()
    if missing:
        raise IncompleteSessionError(missing)
    if model_labels is None:
        model_labels = {ex.id: ex.model_label for ex in session.examples}

    by_annotator = {
        annotator: [session.votes[(ex.id, annotator)] for ex in session.examples]
        for annotator in session.annotators
    }
    pairwise = tuple(
        (a, b, cohen_kappa(by_annotator[a], by_annotator[b]))
        for a, b in combinations(session.annotators, 2)
    )
    average = sum(k for _, _, k in pairwise) / len(pairwise)

    majority: dict[str, Label | None] = {}
    ties: list[str] = []
    unanimous: list[str] = []
    for ex in session.examples:
        votes = [session.votes[(ex.id, annotator)] for annotator in session.annotators]
        majority[ex.id] = majority_label(votes, majority_threshold)
        if is_tied_majority(votes, majority_threshold):
            ties.append(ex.id)
        if is_unanimous(votes):
            unanimous.append(ex.id)

    majority_ids = [ex.id for ex in session.examples if majority[ex.id] is not None]
    coverage = len(majority_ids) / len(session.examples)

    def accuracy(ids: Sequence[str], reference: Mapping[str, Label]) -> float | None:
        if not ids:
            return None
        return sum(1 for i in ids if model_labels[i] == reference[i]) / len(ids)

    def kappa(ids: Sequence[str], reference: Mapping[str, Label]) -> float | None:
        if not ids:
            return None
        return cohen_kappa(
            [model_labels[i] for i in ids], [reference[i] for i in ids]
        )

    unanimous_reference = {
        ex_id: majority[ex_id] for ex_id in unanimous
    }  # unanimous label == majority label by definition

    return AgreementReport(
        n_examples=len(session.examples),
        annotators=session.annotators,
        pairwise_kappa=pairwise,
        average_kappa=average,
        majority_labels=majority,
        majority_coverage=coverage,
        unanimous_ids=tuple(unanimous),
        ties=tuple(ties),
        model_accuracy_majority=accuracy(majority_ids, majority),
        model_accuracy_unanimous=accuracy(unanimous, unanimous_reference),
        model_kappa_majority=kappa(majority_ids, majority),
        model_kappa_unanimous=kappa(unanimous, unanimous_reference),
    )


def format_agreement(report: AgreementReport) -> str:
    """Display table; kappas rendered as percentages here only."""

    def pct(value: float | None) -> str:
        return "n/a" if value is None else f"{100 * value:.2f}%"

    lines = [f"examples: {report.n_examples}  annotators: {len(report.annotators)}"]
    for a, b, k in report.pairwise_kappa:
        lines.append(f"  kappa({a}, {b}) = {pct(k)}")
    lines.append(f"average kappa: {pct(report.average_kappa)}")
    lines.append(
        f"majority labels: {report.n_majority}/{report.n_examples} "
        f"({pct(report.majority_coverage)} coverage)"
    )
    lines.append(f"unanimous: {report.n_unanimous}/{report.n_examples}")
    if report.ties:
        lines.append(f"majority ties: {len(report.ties)}")
    lines.append(f"model accuracy vs majority: {pct(report.model_accuracy_majority)}")
    lines.append(f"model accuracy vs unanimous: {pct(report.model_accuracy_unanimous)}")
    lines.append(f"model kappa vs majority: {pct(report.model_kappa_majority)}")
    lines.append(f"model kappa vs unanimous: {pct(report.model_kappa_unanimous)}")
    return "\n".join(lines)
