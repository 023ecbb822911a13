"""Domain discovery: few-shot prompting for new (domain, length, text) triples.

The discovery prompt is a fixed instruction followed by seed triples in the
brace-field format. Sampling the backend at high temperature yields new
triples whose domain names get tallied; a curation step (manual include and
exclude lists) turns a tally into the final roster used for stratified
premise generation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import DomainRoster, LengthCategory, normalize_domain
from .gateway import CompletionRequest, Gateway, GatewayError
from .parsing import BraceParseError, parse_fields, render_field

#: Instruction text at the top of the discovery prompt. This is deliberately
#: configuration, not a contract: plain few-shot prompting without any
#: instruction produces comparable samples.
DEFAULT_DISCOVERY_INSTRUCTION = (
    "Below are text samples from many different sources. Each sample states "
    "its domain, a length category (short or paragraph), and the text itself."
)

DEFAULT_DISCOVERY_SAMPLES = 1000
DEFAULT_DISCOVERY_TEMPERATURE = 1.0

_TRIPLE_FIELDS = ("domain", "length", "text")


@dataclass(frozen=True)
class DomainTriple:
    """One (domain, length, text) record.

    The same shape serves as an in-prompt seed and as a parsed sample.
    """

    domain: str
    length: LengthCategory
    text: str


@dataclass(frozen=True)
class ParseFailure:
    """A completion that did not parse into a triple."""

    index: int
    reason: str
    completion: str


def load_default_seeds() -> tuple[DomainTriple, ...]:
    """The 18 seed triples (8 distinct domains) shipped with the package."""
    raw = resources.files("nliforge.data").joinpath("seed_triples.jsonl").read_text("utf-8")
    seeds = []
    for line in raw.splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        seeds.append(
            DomainTriple(
                domain=record["domain"],
                length=LengthCategory.parse(record["length"]),
                text=record["text"],
            )
        )
    return tuple(seeds)


def render_triple(triple: DomainTriple) -> str:
    """Render the three fields in fixed order, one per line."""
    return "\n".join(
        (
            render_field("domain", triple.domain),
            render_field("length", triple.length.value),
            render_field("text", triple.text),
        )
    )


def parse_triple(completion: str) -> DomainTriple:
    """Inverse of :func:`render_triple` on well-formed completions.

    Each field takes everything up to its first closing brace; fields must
    appear in domain, length, text order. Raises :class:`BraceParseError`.
    """
    fields = parse_fields(completion, _TRIPLE_FIELDS)
    try:
        length = LengthCategory.parse(fields["length"])
    except ValueError as exc:
        raise BraceParseError(str(exc)) from None
    return DomainTriple(domain=fields["domain"], length=length, text=fields["text"])


def build_discovery_prompt(
    seeds: Sequence[DomainTriple],
    instruction: str = DEFAULT_DISCOVERY_INSTRUCTION,
) -> str:
    """Instruction plus the rendered seed triples, separated by blank lines."""
    if not seeds:
        raise ValueError("seed list must be non-empty")
    blocks = [instruction] if instruction else []
    blocks.extend(render_triple(seed) for seed in seeds)
    return "\n\n".join(blocks)


def sample_domain_triples(
    gateway: Gateway,
    n: int = DEFAULT_DISCOVERY_SAMPLES,
    temperature: float = DEFAULT_DISCOVERY_TEMPERATURE,
    seeds: Sequence[DomainTriple] | None = None,
    instruction: str = DEFAULT_DISCOVERY_INSTRUCTION,
    base_seed: int = 0,
) -> tuple[list[DomainTriple], list[ParseFailure]]:
    """Sample ``n`` completions of the discovery prompt and parse each one.

    Unparseable completions are logged as failures, not fatal; transport
    errors propagate.
    """
    if n == 0:
        return [], []
    prompt = build_discovery_prompt(seeds or load_default_seeds(), instruction)
    # Sequential request seeds: the i-th logical call always replays the
    # i-th scripted completion, regardless of scheduling.
    requests = [
        CompletionRequest(prompt=prompt, temperature=temperature, seed=base_seed + i)
        for i in range(n)
    ]
    triples: list[DomainTriple] = []
    failures: list[ParseFailure] = []
    for i, result in enumerate(gateway.complete_many(requests)):
        if isinstance(result, GatewayError):
            raise result
        try:
            triples.append(parse_triple(result.text))
        except BraceParseError as exc:
            failures.append(ParseFailure(index=i, reason=str(exc), completion=result.text))
    return triples, failures


@dataclass(frozen=True)
class DomainTally:
    """Occurrence counts of sampled domain names, by normalized name,
    with novelty relative to the seed domains."""

    counts: dict[str, int]
    seed_domains: frozenset[str]

    def is_novel(self, name: str) -> bool:
        return normalize_domain(name) not in self.seed_domains

    @property
    def novel(self) -> tuple[str, ...]:
        return tuple(name for name in self.counts if self.is_novel(name))

    def to_dict(self) -> dict:
        return {
            "counts": dict(self.counts),
            "seed_domains": sorted(self.seed_domains),
            "novel": list(self.novel),
        }


def tally_domains(
    triples: Iterable[DomainTriple], seed_domains: Iterable[str]
) -> DomainTally:
    """Count sampled domains by normalized name, most frequent first."""
    seeds = frozenset(normalize_domain(d) for d in seed_domains)
    counts: dict[str, int] = {}
    for triple in triples:
        name = normalize_domain(triple.domain)
        counts[name] = counts.get(name, 0) + 1
    ordered = dict(sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])))
    return DomainTally(counts=ordered, seed_domains=seeds)


def curate_roster(
    tally: DomainTally,
    include: Sequence[str] = (),
    exclude: Sequence[str] = (),
) -> DomainRoster:
    """Manual curation: tally domains plus seed domains plus ``include``,
    minus ``exclude``, deduplicated and sorted, with per-name provenance.

    Near-paraphrase domains are *not* merged automatically; that judgment
    stays with the include/exclude lists.
    """
    include_set = {normalize_domain(d) for d in include}
    exclude_set = {normalize_domain(d) for d in exclude}
    overlap = include_set & exclude_set
    if overlap:
        raise ValueError(f"include and exclude overlap: {sorted(overlap)}")

    sources: dict[str, list[str]] = {}
    for name in tally.seed_domains:
        sources.setdefault(name, []).append("seed")
    for name in tally.counts:
        sources.setdefault(name, []).append("sampled")
    for name in include_set:
        sources.setdefault(name, []).append("manual")

    names = sorted(name for name in sources if name not in exclude_set)
    if not names:
        raise ValueError("curated roster is empty")
    provenance = {name: tuple(sources[name]) for name in names}
    return DomainRoster(names=tuple(names), provenance=provenance)


def save_tally(tally: DomainTally, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(tally.to_dict(), handle, ensure_ascii=False, indent=2)
        handle.write("\n")


def load_tally(path: str | Path) -> DomainTally:
    with open(path, encoding="utf-8") as handle:
        data = json.load(handle)
    return DomainTally(counts=dict(data["counts"]), seed_domains=frozenset(data["seed_domains"]))


def write_triples(triples: Iterable[DomainTriple], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for triple in triples:
            record = {"domain": triple.domain, "length": triple.length.value, "text": triple.text}
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
