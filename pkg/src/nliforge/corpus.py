"""Core corpus types, line-delimited storage, and corpus statistics.

Everything else in the package builds on the types defined here: the three
NLI labels, the two premise length categories, (premise, hypothesis, label)
examples with domain and split bookkeeping, and the curated domain roster
used for stratified generation.

Corpora are stored one JSON object per line (UTF-8) with exactly the
``NliExample`` field names as keys. Word counts split on Unicode whitespace
and count non-empty tokens; no other tokenization is applied anywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence


class CorpusError(Exception):
    """Raised for unrecoverable corpus data problems (I/O schema, duplicates)."""


class Label(str, Enum):
    """The three NLI labels. Input parsing is case-insensitive;
    the canonical serialized form is lowercase."""

    ENTAILMENT = "entailment"
    CONTRADICTION = "contradiction"
    NEUTRAL = "neutral"

    @classmethod
    def parse(cls, raw: str) -> "Label":
        try:
            return cls(raw.strip().lower())
        except ValueError:
            raise ValueError(f"unknown label: {raw!r}") from None

    def __str__(self) -> str:
        return self.value


#: Fixed label order used for deterministic tie-breaking and display.
LABEL_ORDER: tuple[Label, ...] = (Label.ENTAILMENT, Label.CONTRADICTION, Label.NEUTRAL)


class LengthCategory(str, Enum):
    """Premise size bucket: a single sentence or a longer paragraph."""

    SHORT = "short"
    PARAGRAPH = "paragraph"

    @classmethod
    def parse(cls, raw: str) -> "LengthCategory":
        try:
            return cls(raw.strip().lower())
        except ValueError:
            raise ValueError(f"unknown length category: {raw!r}") from None

    def __str__(self) -> str:
        return self.value


class Split(str, Enum):
    TRAIN = "train"
    DEV = "dev"
    TEST = "test"
    HUMAN_HOLDOUT = "human_holdout"
    UNASSIGNED = "unassigned"

    @classmethod
    def parse(cls, raw: str) -> "Split":
        try:
            return cls(raw.strip().lower())
        except ValueError:
            raise ValueError(f"unknown split: {raw!r}") from None

    def __str__(self) -> str:
        return self.value


#: Corpus file schema, in serialization order.
EXAMPLE_FIELDS = ("id", "domain", "length", "premise", "hypothesis", "label", "split")


@dataclass(frozen=True, slots=True)
class NliExample:
    """One (premise, hypothesis, label) triple with provenance bookkeeping.

    ``premise`` and ``hypothesis`` must be non-empty after whitespace
    trimming; ``id`` must be unique within a corpus.
    """

    id: str
    domain: str
    length: LengthCategory
    premise: str
    hypothesis: str
    label: Label
    split: Split = Split.UNASSIGNED

    def to_dict(self) -> dict[str, str]:
        return {
            "id": self.id,
            "domain": self.domain,
            "length": self.length.value,
            "premise": self.premise,
            "hypothesis": self.hypothesis,
            "label": self.label.value,
            "split": self.split.value,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, str]) -> "NliExample":
        missing = [k for k in EXAMPLE_FIELDS if k not in d]
        if missing:
            raise CorpusError(f"record missing field(s): {', '.join(missing)}")
        return cls(
            id=d["id"],
            domain=d["domain"],
            length=LengthCategory.parse(d["length"]),
            premise=d["premise"],
            hypothesis=d["hypothesis"],
            label=Label.parse(d["label"]),
            split=Split.parse(d["split"]),
        )


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of validating one raw example record.

    Validation failures are data, not exceptions: ``violations`` lists every
    broken invariant, never only the first.
    """

    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_example(
    record: Mapping[str, object], roster: "DomainRoster | None" = None
) -> ValidationReport:
    """Check one raw record against every example invariant.

    When ``roster`` is given, the record's domain must be a roster member
    (after name normalization).
    """
    violations: list[str] = []
    for key in EXAMPLE_FIELDS:
        if key not in record:
            violations.append(f"missing field {key!r}")
        elif not isinstance(record[key], str):
            violations.append(f"field {key!r} is not a string")

    def text(key: str) -> str | None:
        value = record.get(key)
        return value if isinstance(value, str) else None

    if text("id") is not None and not text("id").strip():
        violations.append("empty id")
    if text("premise") is not None and not text("premise").strip():
        violations.append("empty premise")
    if text("hypothesis") is not None and not text("hypothesis").strip():
        violations.append("empty hypothesis")
    label = text("label")
    if label is not None:
        try:
            Label.parse(label)
        except ValueError:
            violations.append(f"unknown label {label!r}")
    length = text("length")
    if length is not None:
        try:
            LengthCategory.parse(length)
        except ValueError:
            violations.append(f"unknown length category {length!r}")
    split = text("split")
    if split is not None:
        try:
            Split.parse(split)
        except ValueError:
            violations.append(f"unknown split {split!r}")
    domain = text("domain")
    if domain is not None:
        if not domain.strip():
            violations.append("empty domain")
        elif roster is not None and normalize_domain(domain) not in roster:
            violations.append(f"domain {domain!r} not in roster")
    return ValidationReport(tuple(violations))


def word_count(text: str) -> int:
    """Number of whitespace-separated tokens."""
    return len(text.split())


@dataclass(frozen=True)
class CorpusStats:
    """Aggregate counts and mean word lengths for a corpus.

    Fractions are exact (not rounded); rounding happens only at display
    time via :func:`format_stats`.
    """

    total: int
    label_counts: dict[Label, int]
    label_fractions: dict[Label, float]
    domain_counts: dict[str, int]
    length_counts: dict[LengthCategory, int]
    split_counts: dict[Split, int]
    mean_premise_words: dict[LengthCategory, float]
    mean_hypothesis_words: dict[LengthCategory, float]

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "label_counts": {l.value: c for l, c in self.label_counts.items()},
            "label_fractions": {l.value: f for l, f in self.label_fractions.items()},
            "domain_counts": dict(self.domain_counts),
            "length_counts": {l.value: c for l, c in self.length_counts.items()},
            "split_counts": {s.value: c for s, c in self.split_counts.items()},
            "mean_premise_words": {l.value: m for l, m in self.mean_premise_words.items()},
            "mean_hypothesis_words": {l.value: m for l, m in self.mean_hypothesis_words.items()},
        }


def compute_stats(corpus: Sequence[NliExample]) -> CorpusStats:
    """Exact counts plus per-length mean premise/hypothesis word counts."""
    if not corpus:
        raise CorpusError("empty corpus")
    label_counts = {label: 0 for label in LABEL_ORDER}
    domain_counts: dict[str, int] = {}
    length_counts: dict[LengthCategory, int] = {}
    split_counts: dict[Split, int] = {}
    premise_words: dict[LengthCategory, list[int]] = {}
    hypothesis_words: dict[LengthCategory, list[int]] = {}
    for ex in corpus:
        label_counts[ex.label] += 1
        domain_counts[ex.domain] = domain_counts.get(ex.domain, 0) + 1
        length_counts[ex.length] = length_counts.get(ex.length, 0) + 1
        split_counts[ex.split] = split_counts.get(ex.split, 0) + 1
        premise_words.setdefault(ex.length, []).append(word_count(ex.premise))
        hypothesis_words.setdefault(ex.length, []).append(word_count(ex.hypothesis))
    total = len(corpus)
    return CorpusStats(
        total=total,
        label_counts=label_counts,
        label_fractions={l: c / total for l, c in label_counts.items()},
        domain_counts=dict(sorted(domain_counts.items())),
        length_counts=length_counts,
        split_counts=split_counts,
        mean_premise_words={l: sum(w) / len(w) for l, w in premise_words.items()},
        mean_hypothesis_words={l: sum(w) / len(w) for l, w in hypothesis_words.items()},
    )


def format_stats(stats: CorpusStats) -> str:
    """Human-readable stats table; percentages rounded to one decimal here only."""
    lines = [f"examples: {stats.total}"]
    lines.append("labels:")
    for label in LABEL_ORDER:
        count = stats.label_counts.get(label, 0)
        frac = stats.label_fractions.get(label, 0.0)
        lines.append(f"  {label.value:<13} {count:>10}  {100 * frac:5.1f}%")
    if stats.split_counts:
        lines.append("splits:")
        for split, count in stats.split_counts.items():
            lines.append(f"  {split.value:<14} {count:>10}")
    lines.append("lengths:")
    for length in LengthCategory:
        if length in stats.length_counts:
            lines.append(
                f"  {length.value:<10} {stats.length_counts[length]:>10}  "
                f"mean premise words {stats.mean_premise_words[length]:.1f}, "
                f"mean hypothesis words {stats.mean_hypothesis_words[length]:.1f}"
            )
    lines.append(f"domains: {len(stats.domain_counts)}")
    return "\n".join(lines)


def read_corpus(path: str | Path) -> list[NliExample]:
    """Read a line-delimited corpus file.

    Raises :class:`CorpusError` naming the 1-based line number for malformed
    lines, and on duplicate example ids.
    """
    examples: list[NliExample] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from None
            try:
                example = NliExample.from_dict(record)
            except (CorpusError, ValueError) as exc:
                raise CorpusError(f"{path}: line {lineno}: {exc}") from None
            if example.id in seen:
                raise CorpusError(f"{path}: line {lineno}: duplicate id {example.id!r}")
            seen.add(example.id)
            examples.append(example)
    return examples


def write_corpus(corpus: Iterable[NliExample], path: str | Path) -> None:
    """Write a corpus in the line-delimited format, preserving record order.

    All examples must be valid and ids unique; violations abort the write.
    """
    corpus = list(corpus)
    problems: list[str] = []
    seen: set[str] = set()
    for i, ex in enumerate(corpus):
        report = validate_example(ex.to_dict())
        if not report.ok:
            problems.append(f"record {i} ({ex.id!r}): {'; '.join(report.violations)}")
        if ex.id in seen:
            problems.append(f"record {i}: duplicate id {ex.id!r}")
        seen.add(ex.id)
    if problems:
        raise CorpusError("refusing to write invalid corpus: " + " | ".join(problems))
    with open(path, "w", encoding="utf-8") as handle:
        for ex in corpus:
            handle.write(json.dumps(ex.to_dict(), ensure_ascii=False) + "\n")


def normalize_domain(name: str) -> str:
    """Canonical domain-name form: lowercase, internal whitespace collapsed."""
    return " ".join(name.lower().split())


@dataclass(frozen=True)
class DomainRoster:
    """Ordered set of domain names, with optional per-(domain, length) quotas
    and a record of where each name came from (seed prompt, sampling, manual).

    Names are stored normalized and must be unique.
    """

    names: tuple[str, ...]
    quotas: dict[str, dict[LengthCategory, int]] = field(default_factory=dict)
    provenance: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        normalized = [normalize_domain(n) for n in self.names]
        object.__setattr__(self, "names", tuple(normalized))
        dupes = {n for n in normalized if normalized.count(n) > 1}
        if dupes:
            raise ValueError(f"duplicate roster names after normalization: {sorted(dupes)}")

    def __contains__(self, name: str) -> bool:
        return normalize_domain(name) in self.names

    def __len__(self) -> int:
        return len(self.names)

    def quota_for(self, domain: str, length: LengthCategory, default: int) -> int:
        return self.quotas.get(normalize_domain(domain), {}).get(length, default)

    def to_dict(self) -> dict:
        domains = []
        for name in self.names:
            entry: dict[str, object] = {"name": name}
            if name in self.provenance:
                entry["sources"] = list(self.provenance[name])
            if name in self.quotas:
                entry["quotas"] = {l.value: q for l, q in self.quotas[name].items()}
            domains.append(entry)
        return {"domains": domains}

    @classmethod
    def from_dict(cls, d: Mapping) -> "DomainRoster":
        names: list[str] = []
        quotas: dict[str, dict[LengthCategory, int]] = {}
        provenance: dict[str, tuple[str, ...]] = {}
        for entry in d["domains"]:
            if isinstance(entry, str):
                names.append(entry)
                continue
            name = normalize_domain(entry["name"])
            names.append(name)
            if "sources" in entry:
                provenance[name] = tuple(entry["sources"])
            if "quotas" in entry:
                quotas[name] = {
                    LengthCategory.parse(l): int(q) for l, q in entry["quotas"].items()
                }
        return cls(names=tuple(names), quotas=quotas, provenance=provenance)


def load_roster(path: str | Path) -> DomainRoster:
    with open(path, encoding="utf-8") as handle:
        return DomainRoster.from_dict(json.load(handle))


def save_roster(roster: DomainRoster, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(roster.to_dict(), handle, ensure_ascii=False, indent=2)
        handle.write("\n")


def default_roster() -> DomainRoster:
    """The 38-name curated roster shipped with the package."""
    data = resources.files("nliforge.data").joinpath("default_domains.json").read_text("utf-8")
    return DomainRoster.from_dict(json.loads(data))
