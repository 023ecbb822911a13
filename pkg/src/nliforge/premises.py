"""Stratified premise generation over the (domain x length) grid.

Each cell reuses the discovery prompt with the target domain and length
substituted in and a ``text: {`` cue appended; the completion is truncated
at the first closing brace. Parse failures are retried with a fresh sample
(premises have a per-cell quota to fill, unlike labeled examples, which are
discarded on parse failure); shortfalls are reported, never padded.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import DomainRoster, LengthCategory, normalize_domain, word_count
from .discovery import build_discovery_prompt, load_default_seeds
from .gateway import CompletionRequest, Gateway, GatewayError, derive_seed
from .parsing import field_cue, render_field, truncate_at_close

logger = logging.getLogger(__name__)

DEFAULT_MAX_ATTEMPTS = 5
DEFAULT_PREMISE_TEMPERATURE = 1.0


class PremiseGenerationError(Exception):
    """All attempts for one premise item failed."""


@dataclass(frozen=True)
class PremiseBatchSpec:
    """Target counts for one stratified generation run."""

    roster: DomainRoster
    per_cell: int
    lengths: tuple[LengthCategory, ...] = (LengthCategory.SHORT, LengthCategory.PARAGRAPH)
    seed: int = 0
    max_attempts_per_item: int = DEFAULT_MAX_ATTEMPTS

    def __post_init__(self) -> None:
        if self.per_cell < 1:
            raise ValueError("per_cell must be >= 1")
        if not self.lengths:
            raise ValueError("lengths must be non-empty")
        if self.max_attempts_per_item < 1:
            raise ValueError("max_attempts_per_item must be >= 1")


@dataclass(frozen=True)
class Premise:
    id: str
    domain: str
    length: LengthCategory
    text: str
    attempt_count: int = 1

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "domain": self.domain,
            "length": self.length.value,
            "text": self.text,
            "attempt_count": self.attempt_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Premise":
        return cls(
            id=d["id"],
            domain=d["domain"],
            length=LengthCategory.parse(d["length"]),
            text=d["text"],
            attempt_count=int(d.get("attempt_count", 1)),
        )


def build_premise_prompt(base_prompt: str, domain: str, length: LengthCategory) -> str:
    """Discovery prompt plus the target cell and the ``text: {`` cue."""
    return (
        base_prompt
        + "\n\n"
        + render_field("domain", domain)
        + "\n"
        + render_field("length", length.value)
        + "\n"
        + field_cue("text")
    )


def extract_premise_text(completion: str) -> str:
    """Truncate at the first ``}`` and validate the remainder.

    Raises ValueError for empty text or a stray opening brace (which cannot
    be matched once everything past the first ``}`` is gone).
    """
    text = truncate_at_close(completion).strip()
    if not text:
        raise ValueError("empty text")
    if "{" in text:
        raise ValueError("unmatched '{' in text")
    return text


def _premise_id(domain: str, length: LengthCategory, index: int) -> str:
    slug = normalize_domain(domain).replace(" ", "-")
    return f"{slug}-{length.value}-{index:04d}"


def generate_premise(
    gateway: Gateway,
    base_prompt: str,
    domain: str,
    length: LengthCategory,
    item_index: int = 0,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    base_seed: int = 0,
    temperature: float = DEFAULT_PREMISE_TEMPERATURE,
) -> Premise:
    """Generate one premise for a cell, retrying with fresh samples.

    Raises :class:`PremiseGenerationError` once ``max_attempts`` parse
    failures accumulate; transport errors propagate immediately.
    """
    prompt = build_premise_prompt(base_prompt, domain, length)
    reasons: list[str] = []
    for attempt in range(1, max_attempts + 1):
        request = CompletionRequest(
            prompt=prompt,
            temperature=temperature,
            seed=derive_seed(base_seed, domain, length.value, item_index, attempt),
        )
        response = gateway.complete(request)
        try:
            text = extract_premise_text(response.text)
        except ValueError as exc:
            reasons.append(f"attempt {attempt}: {exc}")
            continue
        return Premise(
            id=_premise_id(domain, length, item_index),
            domain=normalize_domain(domain),
            length=length,
            text=text,
            attempt_count=attempt,
        )
    raise PremiseGenerationError(
        f"cell ({domain}, {length.value}) item {item_index}: "
        f"no usable text in {max_attempts} attempts ({'; '.join(reasons)})"
    )


@dataclass(frozen=True)
class CellReport:
    domain: str
    length: LengthCategory
    requested: int
    produced: int
    attempts: int
    failures: tuple[str, ...] = ()

    @property
    def shortfall(self) -> int:
        return self.requested - self.produced

    def to_dict(self) -> dict:
        return {
            "domain": self.domain,
            "length": self.length.value,
            "requested": self.requested,
            "produced": self.produced,
            "attempts": self.attempts,
            "failures": list(self.failures),
        }


@dataclass(frozen=True)
class GenerationReport:
    cells: tuple[CellReport, ...]

    @property
    def total_produced(self) -> int:
        return sum(c.produced for c in self.cells)

    @property
    def shortfalls(self) -> tuple[CellReport, ...]:
        return tuple(c for c in self.cells if c.shortfall)

    def to_dict(self) -> dict:
        return {
            "cells": [c.to_dict() for c in self.cells],
            "total_produced": self.total_produced,
            "shortfall_cells": [c.to_dict() for c in self.shortfalls],
        }


def generate_stratified(
    gateway: Gateway,
    spec: PremiseBatchSpec,
    base_prompt: str | None = None,
    temperature: float = DEFAULT_PREMISE_TEMPERATURE,
) -> tuple[list[Premise], GenerationReport]:
    """Fill every (domain, length) cell to its quota.

    Cells run concurrently (bounded by the gateway), but premises come back
    ordered by roster x length x item index, so runs against the mock
    backend are reproducible byte-for-byte. Failed items never abort the
    batch; they show up as cell shortfalls in the report.
    """
    if base_prompt is None:
        base_prompt = build_discovery_prompt(load_default_seeds())
    cells = [
        (domain, length)
        for domain in spec.roster.names
        for length in spec.lengths
    ]

    def run_cell(cell: tuple[str, LengthCategory]) -> tuple[list[Premise], CellReport]:
        domain, length = cell
        target = spec.roster.quota_for(domain, length, spec.per_cell)
        produced: list[Premise] = []
        failures: list[str] = []
        attempts = 0
        for item in range(target):
            try:
                premise = generate_premise(
                    gateway,
                    base_prompt,
                    domain,
                    length,
                    item_index=item,
                    max_attempts=spec.max_attempts_per_item,
                    base_seed=spec.seed,
                    temperature=temperature,
                )
            except PremiseGenerationError as exc:
                attempts += spec.max_attempts_per_item
                failures.append(str(exc))
                logger.warning("%s", exc)
                continue
            except GatewayError as exc:
                attempts += 1
                failures.append(f"item {item}: {exc}")
                logger.warning("cell (%s, %s) item %d: %s", domain, length.value, item, exc)
                continue
            attempts += premise.attempt_count
            produced.append(premise)
        report = CellReport(
            domain=normalize_domain(domain),
            length=length,
            requested=target,
            produced=len(produced),
            attempts=attempts,
            failures=tuple(failures),
        )
        return produced, report

    with ThreadPoolExecutor(max_workers=max(1, gateway.concurrency)) as pool:
        results = list(pool.map(run_cell, cells))

    premises = [p for cell_premises, _ in results for p in cell_premises]
    report = GenerationReport(cells=tuple(r for _, r in results))
    return premises, report


def dedup_premises(premises: Sequence[Premise]) -> tuple[list[Premise], int]:
    """Drop exact duplicate texts (lowercased, whitespace collapsed),
    keeping the first occurrence. Returns (kept, removed count)."""
    seen: set[str] = set()
    kept: list[Premise] = []
    for premise in premises:
        key = " ".join(premise.text.lower().split())
        if key in seen:
            continue
        seen.add(key)
        kept.append(premise)
    return kept, len(premises) - len(kept)


@dataclass(frozen=True)
class LengthAudit:
    """Mean word counts by length category, overall and per domain.

    ``anomalies`` flags any scope where the short mean exceeds the
    paragraph mean.
    """

    mean_words: dict[LengthCategory, float]
    per_domain: dict[str, dict[LengthCategory, float]]
    anomalies: tuple[str, ...]

    @property
    def flagged(self) -> bool:
        return bool(self.anomalies)

    def to_dict(self) -> dict:
        return {
            "mean_words": {l.value: m for l, m in self.mean_words.items()},
            "per_domain": {
                d: {l.value: m for l, m in by_length.items()}
                for d, by_length in self.per_domain.items()
            },
            "anomalies": list(self.anomalies),
        }


def audit_lengths(premises: Sequence[Premise]) -> LengthAudit:
    """Per-length mean word counts, flagging inverted short/paragraph means."""
    overall: dict[LengthCategory, list[int]] = {}
    by_domain: dict[str, dict[LengthCategory, list[int]]] = {}
    for premise in premises:
        n = word_count(premise.text)
        overall.setdefault(premise.length, []).append(n)
        by_domain.setdefault(premise.domain, {}).setdefault(premise.length, []).append(n)

    def means(groups: dict[LengthCategory, list[int]]) -> dict[LengthCategory, float]:
        return {l: sum(v) / len(v) for l, v in groups.items()}

    mean_words = means(overall)
    per_domain = {d: means(groups) for d, groups in sorted(by_domain.items())}
    anomalies: list[str] = []

    def check(scope: str, m: dict[LengthCategory, float]) -> None:
        short = m.get(LengthCategory.SHORT)
        paragraph = m.get(LengthCategory.PARAGRAPH)
        if short is not None and paragraph is not None and short > paragraph:
            anomalies.append(
                f"{scope}: short mean {short:.1f} exceeds paragraph mean {paragraph:.1f}"
            )

    check("overall", mean_words)
    for domain, m in per_domain.items():
        check(f"domain {domain!r}", m)
    return LengthAudit(mean_words=mean_words, per_domain=per_domain, anomalies=tuple(anomalies))


def write_premises(premises: Iterable[Premise], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for premise in premises:
            handle.write(json.dumps(premise.to_dict(), ensure_ascii=False) + "\n")


def read_premises(path: str | Path) -> list[Premise]:
    premises: list[Premise] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                premises.append(Premise.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
    return premises
