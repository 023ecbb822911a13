"""Split assembly, balance auditing, and nested ablation subsampling.

Splits are drawn in a fixed order (human holdout first, then dev, then
test; train is the remainder) with stratified sampling that preserves
category proportions within one example per stratum. All draws are
deterministic under the configured seed. Ablation subsets are *nested*: each
size extends the previous subset, so learning curves are monotone in the
data actually seen.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace
from typing import Hashable, Sequence

from .corpus import (
    LABEL_ORDER,
    CorpusError,
    Label,
    NliExample,
    Split,
    validate_example,
)

STRATIFY_FIELDS = ("label", "domain", "length")

#: Ablation subset sizes, smallest to largest.
DEFAULT_ABLATION_SIZES = (
    1_000, 2_000, 5_000, 10_000, 50_000, 100_000, 300_000, 392_000, 671_000,
)


@dataclass(frozen=True)
class SplitSpec:
    """How to carve a corpus into holdout/dev/test/train.

    ``dev_fraction`` and ``test_fraction`` apply to the remainder after the
    holdout is removed; fractional counts round up.
    """

    holdout_count: int = 500
    dev_fraction: float = 0.01
    test_fraction: float = 0.01
    seed: int = 0
    stratify_by: tuple[str, ...] = ("label",)

    def __post_init__(self) -> None:
        for name, fraction in (("dev", self.dev_fraction), ("test", self.test_fraction)):
            if not 0 < fraction < 1:
                raise ValueError(f"{name}_fraction must be in (0, 1), got {fraction}")
        if self.dev_fraction + self.test_fraction >= 1:
            raise ValueError("dev and test fractions must sum to less than 1")
        if self.holdout_count < 0:
            raise ValueError("holdout_count must be >= 0")
        unknown = set(self.stratify_by) - set(STRATIFY_FIELDS)
        if unknown:
            raise ValueError(f"unknown stratify_by fields: {sorted(unknown)}")

    def to_dict(self) -> dict:
        return {
            "holdout_count": self.holdout_count,
            "dev_fraction": self.dev_fraction,
            "test_fraction": self.test_fraction,
            "seed": self.seed,
            "stratify_by": list(self.stratify_by),
        }


def _stratum_key(example: NliExample, stratify_by: tuple[str, ...]) -> tuple[str, ...]:
    parts = []
    for name in stratify_by:
        value = getattr(example, name)
        parts.append(value.value if hasattr(value, "value") else value)
    return tuple(parts)


def largest_remainder(k: int, sizes: dict[Hashable, int]) -> dict[Hashable, int]:
    """Apportion ``k`` draws over strata proportionally to ``sizes``.

    Floors the exact quotas, then hands the leftover to the largest
    fractional remainders (ties broken by stratum key). Each allocation is
    within one of its exact quota and never exceeds the stratum size.
    """
    total = sum(sizes.values())
    if k > total:
        raise ValueError(f"cannot draw {k} from {total}")
    quotas = {key: k * n / total for key, n in sizes.items()}
    counts = {key: math.floor(q) for key, q in quotas.items()}
    leftover = k - sum(counts.values())
    by_remainder = sorted(quotas, key=lambda key: (-(quotas[key] - counts[key]), key))
    for key in by_remainder[:leftover]:
        counts[key] += 1
    return counts


def _allocate_split_matrix(
    split_sizes: dict[str, int], stratum_sizes: dict[Hashable, int]
) -> dict[tuple[str, Hashable], int]:
    """Joint allocation of every split over every stratum.

    Every cell is the floor or ceiling of its exact quota
    (split_size * stratum_size / total), with row sums equal to the split
    sizes and column sums equal to the stratum sizes, so *every* split
    (including the train remainder) stays within one example of exact
    stratification. The ceiling cells are chosen by a unit-capacity
    matching over cells with nonzero fractional quota, which is always
    feasible because the fractional parts themselves form a feasible flow.
    """
    total = sum(stratum_sizes.values())
    if sum(split_sizes.values()) != total:
        raise ValueError("split sizes must sum to the corpus size")
    splits = list(split_sizes)
    strata = sorted(stratum_sizes)
    floors: dict[tuple[str, Hashable], int] = {}
    fractions: dict[tuple[str, Hashable], float] = {}
    for s in splits:
        for g in strata:
            quota = split_sizes[s] * stratum_sizes[g] / total
            floors[(s, g)] = math.floor(quota)
            fractions[(s, g)] = quota - floors[(s, g)]
    row_need = {s: split_sizes[s] - sum(floors[(s, g)] for g in strata) for s in splits}
    col_need = {g: stratum_sizes[g] - sum(floors[(s, g)] for s in splits) for g in strata}

    # Unit-capacity bipartite flow: source -> split (row_need) -> stratum
    # (1 per cell with fractional quota) -> sink (col_need).
    source, sink = "source", "sink"
    capacity: dict[tuple[object, object], int] = {}
    neighbors: dict[object, list[object]] = {source: [], sink: []}
    for s in splits:
        capacity[(source, s)] = row_need[s]
        neighbors[source].append(s)
        neighbors[s] = [source]
    for g in strata:
        capacity[(("col", g), sink)] = col_need[g]
        neighbors[("col", g)] = [sink]
        neighbors[sink].append(("col", g))
    for s in splits:
        for g in strata:
            if fractions[(s, g)] > 0:
                capacity[(s, ("col", g))] = 1
                neighbors[s].append(("col", g))
                neighbors[("col", g)].append(s)

    def augment() -> bool:
        parent: dict[object, object] = {source: source}
        queue = [source]
        while queue:
            node = queue.pop(0)
            if node == sink:
                break
            for nxt in neighbors.get(node, []):
                if nxt not in parent and capacity.get((node, nxt), 0) > 0:
                    parent[nxt] = node
                    queue.append(nxt)
        if sink not in parent:
            return False
        node = sink
        while node != source:
            prev = parent[node]
            capacity[(prev, node)] = capacity.get((prev, node), 0) - 1
            capacity[(node, prev)] = capacity.get((node, prev), 0) + 1
            node = prev
        return True

    needed = sum(row_need.values())
    pushed = 0
    while pushed < needed and augment():
        pushed += 1
    if pushed < needed:  # cannot happen with consistent marginals
        raise RuntimeError("stratified allocation failed to converge")

    allocation = dict(floors)
    for s in splits:
        for g in strata:
            if capacity.get((("col", g), s), 0) > 0:
                allocation[(s, g)] += 1
    return allocation


def assemble(examples: Sequence[NliExample], spec: SplitSpec) -> list[NliExample]:
    """Assign every example to exactly one split, preserving input order.

    Requires all inputs valid with ``split=unassigned``. The holdout is
    drawn first, then dev and test from the remainder, and train is what
    is left.
    """
    problems: list[str] = []
    seen_ids: set[str] = set()
    for i, ex in enumerate(examples):
        if ex.split is not Split.UNASSIGNED:
            problems.append(f"record {i} ({ex.id!r}): split already assigned ({ex.split})")
        report = validate_example(ex.to_dict())
        if not report.ok:
            problems.append(f"record {i} ({ex.id!r}): {'; '.join(report.violations)}")
        if ex.id in seen_ids:
            problems.append(f"record {i}: duplicate id {ex.id!r}")
        seen_ids.add(ex.id)
    if problems:
        raise CorpusError("cannot assemble invalid corpus: " + " | ".join(problems[:20]))
    if spec.holdout_count > len(examples):
        raise CorpusError(
            f"corpus has {len(examples)} examples, smaller than holdout_count "
            f"{spec.holdout_count}"
        )

    remainder = len(examples) - spec.holdout_count
    dev_count = math.ceil(spec.dev_fraction * remainder)
    test_count = math.ceil(spec.test_fraction * remainder)
    split_sizes = {
        Split.HUMAN_HOLDOUT.value: spec.holdout_count,
        Split.DEV.value: dev_count,
        Split.TEST.value: test_count,
        Split.TRAIN.value: remainder - dev_count - test_count,
    }
    if split_sizes[Split.TRAIN.value] < 0:
        raise CorpusError("dev and test fractions leave no training examples")

    groups: dict[tuple[str, ...], list[int]] = {}
    for index, ex in enumerate(examples):
        groups.setdefault(_stratum_key(ex, spec.stratify_by), []).append(index)
    allocation = _allocate_split_matrix(
        split_sizes, {key: len(members) for key, members in groups.items()}
    )

    rng = random.Random(spec.seed)
    assignment: dict[int, Split] = {}
    for key in sorted(groups):
        members = list(groups[key])
        rng.shuffle(members)
        cursor = 0
        for split_name in split_sizes:
            take = allocation[(split_name, key)]
            for index in members[cursor : cursor + take]:
                assignment[index] = Split(split_name)
            cursor += take
    return [replace(ex, split=assignment[i]) for i, ex in enumerate(examples)]


@dataclass(frozen=True)
class BalanceTolerances:
    """Allowed deviations before the balance audit raises a flag."""

    label: float = 0.05  # absolute deviation of a label fraction from 1/3
    cell: float = 0.10  # relative deviation of a (domain, length) cell from uniform

    def to_dict(self) -> dict:
        return {"label": self.label, "cell": self.cell}


@dataclass(frozen=True)
class BalanceReport:
    per_split_label_fractions: dict[str, dict[str, float]]
    cell_counts: dict[str, dict[str, int]]  # domain -> length -> count
    flags: tuple[str, ...]
    tolerances: BalanceTolerances

    @property
    def passed(self) -> bool:
        return not self.flags

    def to_dict(self) -> dict:
        return {
            "per_split_label_fractions": self.per_split_label_fractions,
            "cell_counts": self.cell_counts,
            "flags": list(self.flags),
            "tolerances": self.tolerances.to_dict(),
            "passed": self.passed,
        }


def verify_balance(
    corpus: Sequence[NliExample], tolerances: BalanceTolerances | None = None
) -> BalanceReport:
    """Per-split label fractions and per-(domain, length) counts, flagging
    label fractions far from uniform and cells far from the uniform quota."""
    tolerances = tolerances or BalanceTolerances()
    flags: list[str] = []

    by_split: dict[str, list[NliExample]] = {"all": list(corpus)}
    for ex in corpus:
        by_split.setdefault(ex.split.value, []).append(ex)

    fractions: dict[str, dict[str, float]] = {}
    for split_name in sorted(by_split):
        members = by_split[split_name]
        counts = {label: 0 for label in LABEL_ORDER}
        for ex in members:
            counts[ex.label] += 1
        fractions[split_name] = {
            label.value: counts[label] / len(members) for label in LABEL_ORDER
        }
        for label in LABEL_ORDER:
            deviation = abs(fractions[split_name][label.value] - 1 / 3)
            if deviation > tolerances.label:
                flags.append(
                    f"split {split_name!r}: label {label.value} fraction "
                    f"{fractions[split_name][label.value]:.3f} deviates "
                    f"{deviation:.3f} from 1/3 (tolerance {tolerances.label})"
                )

    cell_counts: dict[str, dict[str, int]] = {}
    for ex in corpus:
        cell_counts.setdefault(ex.domain, {}).setdefault(ex.length.value, 0)
        cell_counts[ex.domain][ex.length.value] += 1
    n_cells = sum(len(by_length) for by_length in cell_counts.values())
    if n_cells:
        expected = len(corpus) / n_cells
        for domain in sorted(cell_counts):
            for length, count in sorted(cell_counts[domain].items()):
                if expected and abs(count - expected) / expected > tolerances.cell:
                    flags.append(
                        f"cell ({domain}, {length}): count {count} deviates more than "
                        f"{tolerances.cell:.0%} from uniform quota {expected:.1f}"
                    )

    return BalanceReport(
        per_split_label_fractions=fractions,
        cell_counts={d: dict(sorted(v.items())) for d, v in sorted(cell_counts.items())},
        flags=tuple(flags),
        tolerances=tolerances,
    )


@dataclass(frozen=True)
class AblationSpec:
    """Nested subsample sizes for the data-size ablation."""

    sizes: tuple[int, ...] = DEFAULT_ABLATION_SIZES
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.sizes:
            raise ValueError("sizes must be non-empty")
        if any(s <= 0 for s in self.sizes):
            raise ValueError("sizes must be positive")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError(f"sizes must be strictly increasing, got {self.sizes}")

    def to_dict(self) -> dict:
        return {"sizes": list(self.sizes), "seed": self.seed}


def subsample_nested(
    train: Sequence[NliExample], spec: AblationSpec
) -> list[list[NliExample]]:
    """Label-stratified nested subsets: each size extends the previous one.

    Examples are consumed from per-label shuffled queues, always taking the
    label furthest below its proportional share, so every prefix stays
    within one example of exact stratification while ids only accumulate.
    """
    if spec.sizes[-1] > len(train):
        raise ValueError(
            f"largest subset size {spec.sizes[-1]} exceeds train size {len(train)}"
        )
    rng = random.Random(spec.seed)
    queues: dict[Label, list[int]] = {}
    for index, ex in enumerate(train):
        queues.setdefault(ex.label, []).append(index)
    labels = [label for label in LABEL_ORDER if label in queues]
    for label in labels:
        rng.shuffle(queues[label])
    total = len(train)
    fractions = {label: len(queues[label]) / total for label in labels}
    positions = {label: 0 for label in labels}
    taken = {label: 0 for label in labels}

    selected: list[int] = []
    subsets: list[list[NliExample]] = []
    for size in spec.sizes:
        while len(selected) < size:
            candidates = [l for l in labels if positions[l] < len(queues[l])]
            label = max(candidates, key=lambda l: size * fractions[l] - taken[l])
            selected.append(queues[label][positions[label]])
            positions[label] += 1
            taken[label] += 1
        subsets.append([train[i] for i in sorted(selected)])
    return subsets


def downsample_to_balance(
    examples: Sequence[NliExample], seed: int = 0
) -> list[NliExample]:
    """Optional exact label balancing: keep min-label-count examples per
    label, drawn at random, preserving input order."""
    by_label: dict[Label, list[int]] = {}
    for index, ex in enumerate(examples):
        by_label.setdefault(ex.label, []).append(index)
    if not by_label:
        return []
    floor = min(len(v) for v in by_label.values())
    rng = random.Random(seed)
    keep: set[int] = set()
    for label in sorted(by_label, key=lambda l: l.value):
        keep.update(rng.sample(by_label[label], floor))
    return [ex for i, ex in enumerate(examples) if i in keep]
