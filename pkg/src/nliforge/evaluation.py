"""Entailment-scorer evaluation: binary ROC-AUC tasks, 3-way accuracy,
and the data-size learning-curve driver.

A scorer maps a (premise/grounding, hypothesis/claim) pair to a
probability distribution over the three labels. The binary score is the
entailment probability; ROC-AUC is the Mann-Whitney statistic (ties
credited one half), computed with average ranks in O(n log n).
"""

from __future__ import annotations

import csv
import json
import logging
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Protocol, Sequence

import numpy as np

from .corpus import LABEL_ORDER, Label, NliExample

logger = logging.getLogger(__name__)

DISTRIBUTION_TOLERANCE = 1e-6


class Scorer(Protocol):
    """Anything that scores a premise/hypothesis pair over the three labels."""

    def score(self, premise: str, hypothesis: str) -> Mapping[Label, float]: ...


def scorer_id(scorer: object) -> str:
    return getattr(scorer, "scorer_id", type(scorer).__name__)


def validate_distribution(dist: Mapping[Label, float]) -> None:
    missing = [label for label in LABEL_ORDER if label not in dist]
    if missing:
        raise ValueError(f"distribution missing labels: {[l.value for l in missing]}")
    if any(dist[label] < 0 for label in LABEL_ORDER):
        raise ValueError(f"negative probability in {dist}")
    total = sum(dist[label] for label in LABEL_ORDER)
    if abs(total - 1.0) > DISTRIBUTION_TOLERANCE:
        raise ValueError(f"probabilities sum to {total}, not 1")


def to_binary(label: Label) -> bool:
    """Binary view of the label space: entailment is the positive
    (consistent) class, neutral and contradiction are negative."""
    return label is Label.ENTAILMENT


def roc_auc(scores: Sequence[float], positives: Sequence[bool]) -> float:
    """Probability a random positive outscores a random negative, ties
    counted one half. Computed via average ranks (rank-sum identity).

    Raises ValueError("undefined AUC ...") unless both classes occur.
    """
    if len(scores) != len(positives):
        raise ValueError("scores and labels differ in length")
    y = np.asarray(positives, dtype=bool)
    s = np.asarray(scores, dtype=float)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError(
            f"undefined AUC: need both classes, got {n_pos} positives and {n_neg} negatives"
        )
    order = np.argsort(s, kind="mergesort")
    ranks = np.empty(len(s), dtype=float)
    sorted_scores = s[order]
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        # tie group [i, j] shares the average of ranks i+1 .. j+1
        ranks[order[i : j + 1]] = (i + j + 2) / 2
        i = j + 1
    rank_sum = float(ranks[y].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)


@dataclass(frozen=True)
class EvalInstance:
    """One binary factual-consistency judgment: is the claim supported by
    the grounding text?"""

    grounding: str
    claim: str
    consistent: bool
    task: str
    id: str = ""

    def __post_init__(self) -> None:
        if not self.grounding.strip():
            raise ValueError("grounding must be non-empty")
        if not self.claim.strip():
            raise ValueError("claim must be non-empty")


def score_pairs(
    scorer: Scorer,
    pairs: Sequence[tuple[str, str]],
    concurrency: int = 1,
) -> list[Mapping[Label, float] | Exception]:
    """Score pairs, optionally concurrently; results keep input order and
    per-pair failures come back as exceptions instead of aborting."""

    def one(pair: tuple[str, str]) -> Mapping[Label, float] | Exception:
        try:
            dist = scorer.score(*pair)
            validate_distribution(dist)
            return dist
        except Exception as exc:  # scorer failures are excluded, not fatal
            return exc

    if concurrency <= 1:
        return [one(pair) for pair in pairs]
    with ThreadPoolExecutor(max_workers=concurrency) as pool:
        return list(pool.map(one, pairs))


def clip_words(text: str, max_words: int | None) -> tuple[str, bool]:
    """Pass text through, or clip it to the first ``max_words`` whitespace
    tokens. Groundings can be article-length; scorer backends have finite
    input windows, so clipping is configuration here, never silent."""
    if max_words is None:
        return text, False
    words = text.split()
    if len(words) <= max_words:
        return text, False
    return " ".join(words[:max_words]), True


@dataclass(frozen=True)
class TaskResult:
    task: str
    auc: float
    n_scored: int
    n_excluded: int
    all_ties: bool = False
    n_truncated: int = 0

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "auc": self.auc,
            "n_scored": self.n_scored,
            "n_excluded": self.n_excluded,
            "all_ties": self.all_ties,
            "n_truncated": self.n_truncated,
        }


def evaluate_binary_task(
    scorer: Scorer,
    instances: Sequence[EvalInstance],
    concurrency: int = 1,
    max_grounding_words: int | None = None,
) -> TaskResult:
    """ROC-AUC of the scorer's entailment probability on one binary task.

    Instances the scorer fails on are logged and excluded (count reported);
    a constant scorer yields 0.5 with the all-ties flag set. Groundings
    longer than ``max_grounding_words`` (when set) are clipped, and the
    clip count is reported.
    """
    if not instances:
        raise ValueError("no instances to evaluate")
    task = instances[0].task
    pairs = []
    truncated = 0
    for instance in instances:
        grounding, clipped = clip_words(instance.grounding, max_grounding_words)
        truncated += clipped
        pairs.append((grounding, instance.claim))
    results = score_pairs(scorer, pairs, concurrency)
    scores: list[float] = []
    gold: list[bool] = []
    excluded = 0
    for instance, result in zip(instances, results):
        if isinstance(result, Exception):
            excluded += 1
            logger.warning("scorer failed on %s instance %r: %s", task, instance.id, result)
            continue
        scores.append(result[Label.ENTAILMENT])
        gold.append(instance.consistent)
    auc = roc_auc(scores, gold)
    return TaskResult(
        task=task,
        auc=auc,
        n_scored=len(scores),
        n_excluded=excluded,
        all_ties=len(set(scores)) == 1,
        n_truncated=truncated,
    )


@dataclass(frozen=True)
class EvalReport:
    """Per-task metrics plus the macro average, with enough configuration
    captured to rerun the evaluation."""

    results: tuple[TaskResult, ...]
    scorer: str
    config: dict = field(default_factory=dict)

    @property
    def macro_average(self) -> float:
        return sum(r.auc for r in self.results) / len(self.results)

    def to_dict(self) -> dict:
        return {
            "results": [r.to_dict() for r in self.results],
            "macro_average": self.macro_average,
            "scorer": self.scorer,
            "config": self.config,
        }


def evaluate_binary_suite(
    scorer: Scorer,
    tasks: Mapping[str, Sequence[EvalInstance]],
    concurrency: int = 1,
    max_grounding_words: int | None = None,
) -> EvalReport:
    results = tuple(
        evaluate_binary_task(scorer, instances, concurrency, max_grounding_words)
        for _, instances in sorted(tasks.items())
    )
    return EvalReport(
        results=results,
        scorer=scorer_id(scorer),
        config={
            "binary_score": "entailment_probability",
            "concurrency": concurrency,
            "max_grounding_words": max_grounding_words,
        },
    )


def format_report_table(report: EvalReport) -> str:
    """Aligned columns, one per task, macro average last."""
    headers = [r.task for r in report.results] + ["Avg"]
    values = [f"{100 * r.auc:.2f}" for r in report.results] + [
        f"{100 * report.macro_average:.2f}"
    ]
    widths = [max(len(h), len(v)) for h, v in zip(headers, values)]
    header_row = "  ".join(h.rjust(w) for h, w in zip(headers, widths))
    value_row = "  ".join(v.rjust(w) for v, w in zip(values, widths))
    return header_row + "\n" + value_row


@dataclass(frozen=True)
class ThreeWayResult:
    accuracy: float
    n_scored: int
    n_excluded: int
    tie_count: int

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "n_scored": self.n_scored,
            "n_excluded": self.n_excluded,
            "tie_count": self.tie_count,
        }


def evaluate_3way(
    scorer: Scorer,
    corpus: Sequence[NliExample],
    concurrency: int = 1,
) -> ThreeWayResult:
    """Exact-match accuracy of argmax predictions on a 3-way test set.

    Probability ties break to the first label in the fixed label order
    (entailment, contradiction, neutral) and are counted in ``tie_count``.
    """
    if not corpus:
        raise ValueError("no examples to evaluate")
    results = score_pairs(scorer, [(ex.premise, ex.hypothesis) for ex in corpus], concurrency)
    correct = 0
    scored = 0
    excluded = 0
    ties = 0
    for ex, result in zip(corpus, results):
        if isinstance(result, Exception):
            excluded += 1
            logger.warning("scorer failed on example %r: %s", ex.id, result)
            continue
        best = max(result[label] for label in LABEL_ORDER)
        top = [label for label in LABEL_ORDER if result[label] == best]
        if len(top) > 1:
            ties += 1
        prediction = top[0]
        scored += 1
        if prediction == ex.label:
            correct += 1
    if scored == 0:
        raise ValueError("scorer failed on every example")
    return ThreeWayResult(
        accuracy=correct / scored, n_scored=scored, n_excluded=excluded, tie_count=ties
    )


# --- scorers -------------------------------------------------------------


class ConstantScorer:
    """Same distribution for every pair; uniform by default."""

    def __init__(self, distribution: Mapping[Label, float] | None = None):
        self.distribution = dict(distribution or {label: 1 / 3 for label in LABEL_ORDER})
        self.scorer_id = "constant"

    def score(self, premise: str, hypothesis: str) -> Mapping[Label, float]:
        return self.distribution


class LookupScorer:
    """Fixed table from (premise, hypothesis) to a distribution."""

    def __init__(self, table: Mapping[tuple[str, str], Mapping[Label, float]]):
        self.table = dict(table)
        self.scorer_id = "lookup"

    def score(self, premise: str, hypothesis: str) -> Mapping[Label, float]:
        return self.table[(premise, hypothesis)]


def label_distribution(label: Label, confidence: float = 1.0) -> dict[Label, float]:
    """Point-ish mass on one label, remainder spread evenly."""
    rest = (1.0 - confidence) / 2
    return {l: (confidence if l == label else rest) for l in LABEL_ORDER}


class RemoteScorer:
    """HTTP scorer endpoint: POST {premise, hypothesis}, receive
    {entailment, contradiction, neutral}. ``batch_size`` bounds in-flight
    concurrent requests."""

    def __init__(self, endpoint: str, batch_size: int = 8, timeout: float = 30.0, session=None):
        import requests

        self.endpoint = endpoint
        self.batch_size = batch_size
        self.timeout = timeout
        self.scorer_id = endpoint
        self._session = session or requests.Session()

    def score(self, premise: str, hypothesis: str) -> Mapping[Label, float]:
        response = self._session.post(
            self.endpoint,
            json={"premise": premise, "hypothesis": hypothesis},
            timeout=self.timeout,
        )
        response.raise_for_status()
        payload = response.json()
        return {label: float(payload[label.value]) for label in LABEL_ORDER}


# --- task ingestion ------------------------------------------------------


@dataclass(frozen=True)
class TaskAdapter:
    """Column mapping for one tabular/JSONL factual-consistency file."""

    name: str
    grounding_column: str = "grounding"
    claim_column: str = "claim"
    label_column: str = "label"
    positive_values: frozenset[str] = frozenset({"1", "consistent", "true", "yes"})
    negative_values: frozenset[str] = frozenset({"0", "inconsistent", "false", "no"})


ADAPTERS: dict[str, TaskAdapter] = {
    "generic": TaskAdapter(name="generic"),
    "binary01": TaskAdapter(
        name="binary01",
        grounding_column="grounding",
        claim_column="generated_text",
        label_column="label",
        positive_values=frozenset({"1"}),
        negative_values=frozenset({"0"}),
    ),
    "consistency-strings": TaskAdapter(
        name="consistency-strings",
        grounding_column="grounding",
        claim_column="claim",
        label_column="label",
        positive_values=frozenset({"consistent"}),
        negative_values=frozenset({"inconsistent"}),
    ),
}


def get_adapter(name: str) -> TaskAdapter:
    try:
        return ADAPTERS[name]
    except KeyError:
        raise ValueError(
            f"unknown adapter {name!r}; available: {sorted(ADAPTERS)}"
        ) from None


def _iter_records(path: Path) -> Iterable[dict]:
    if path.suffix.lower() in {".jsonl", ".ndjson"}:
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                if line.strip():
                    yield json.loads(line)
        return
    delimiter = "\t" if path.suffix.lower() in {".tsv", ".tab"} else ","
    with open(path, encoding="utf-8", newline="") as handle:
        yield from csv.DictReader(handle, delimiter=delimiter)


def ingest_true_task(path: str | Path, adapter: TaskAdapter) -> list[EvalInstance]:
    """Load one binary task file through an adapter's declared columns.

    Raises ValueError naming the missing column, the unknown label value,
    or an empty file.
    """
    path = Path(path)
    instances: list[EvalInstance] = []
    for row_number, record in enumerate(_iter_records(path), start=1):
        for column in (adapter.grounding_column, adapter.claim_column, adapter.label_column):
            if column not in record or record[column] is None:
                raise ValueError(f"{path}: row {row_number}: missing column {column!r}")
        raw_label = str(record[adapter.label_column]).strip().lower()
        if raw_label in adapter.positive_values:
            consistent = True
        elif raw_label in adapter.negative_values:
            consistent = False
        else:
            raise ValueError(
                f"{path}: row {row_number}: label {raw_label!r} not in adapter "
                f"{adapter.name!r} vocabulary"
            )
        instances.append(
            EvalInstance(
                grounding=str(record[adapter.grounding_column]),
                claim=str(record[adapter.claim_column]),
                consistent=consistent,
                task=adapter.name,
                id=str(record.get("id", row_number)),
            )
        )
    if not instances:
        raise ValueError(f"{path}: empty task file")
    positives = sum(1 for i in instances if i.consistent)
    logger.info(
        "ingested %d instances from %s (%d consistent / %d inconsistent)",
        len(instances), path, positives, len(instances) - positives,
    )
    return instances


# --- data-size ablation ---------------------------------------------------


@dataclass(frozen=True)
class AblationRow:
    size: int
    eval_set: str
    metric: float | None
    status: str  # "ok" | "failed"

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "eval_set": self.eval_set,
            "metric": self.metric,
            "status": self.status,
        }


def run_ablation(
    scorer_factory: Callable[[Sequence[NliExample]], Scorer],
    subsets: Sequence[Sequence[NliExample]],
    eval_sets: Mapping[str, Sequence[NliExample]],
    concurrency: int = 1,
) -> list[AblationRow]:
    """One row per (subset size, eval set): train via the external factory
    hook, then measure 3-way accuracy. A factory failure marks that size's
    rows failed and the run continues."""
    rows: list[AblationRow] = []
    for subset in subsets:
        size = len(subset)
        try:
            scorer = scorer_factory(subset)
        except Exception as exc:
            logger.warning("scorer factory failed for size %d: %s", size, exc)
            for name in sorted(eval_sets):
                rows.append(AblationRow(size=size, eval_set=name, metric=None, status="failed"))
            continue
        for name in sorted(eval_sets):
            try:
                result = evaluate_3way(scorer, eval_sets[name], concurrency)
            except Exception as exc:
                logger.warning("evaluation failed for size %d on %s: %s", size, name, exc)
                rows.append(AblationRow(size=size, eval_set=name, metric=None, status="failed"))
                continue
            rows.append(
                AblationRow(size=size, eval_set=name, metric=result.accuracy, status="ok")
            )
    return rows


def format_ablation_table(rows: Sequence[AblationRow]) -> str:
    """Plot-ready table: one line per (size, eval set)."""
    lines = [f"{'size':>10}  {'eval_set':<24}  {'metric':>8}  status"]
    for row in rows:
        metric = "-" if row.metric is None else f"{row.metric:.4f}"
        lines.append(f"{row.size:>10}  {row.eval_set:<24}  {metric:>8}  {row.status}")
    return "\n".join(lines)


class CommandScorerFactory:
    """External training hook: run a command with the subset path appended;
    it prints a scorer endpoint URL on stdout."""

    def __init__(self, command: Sequence[str], workdir: str | Path, batch_size: int = 8):
        self.command = list(command)
        self.workdir = Path(workdir)
        self.batch_size = batch_size
        self._counter = 0

    def __call__(self, subset: Sequence[NliExample]) -> Scorer:
        from .corpus import write_corpus

        self._counter += 1
        subset_path = self.workdir / f"ablation_subset_{self._counter:02d}.jsonl"
        write_corpus(subset, subset_path)
        completed = subprocess.run(
            self.command + [str(subset_path)],
            capture_output=True,
            text=True,
            check=True,
        )
        endpoint = completed.stdout.strip().splitlines()[-1]
        return RemoteScorer(endpoint, batch_size=self.batch_size)
