"""Scorer evaluation: binary ROC-AUC, 3-way accuracy, and a learning curve.

Uses toy scorers whose behavior is known in closed form, so the printed
numbers can be checked by eye: an oracle hits AUC/accuracy 1.0, a constant
scorer lands at the all-ties 0.5, and a scorer whose noise shrinks with
training-set size traces a rising learning curve.
"""

import random

from nliforge.corpus import Label, LengthCategory, NliExample
from nliforge.evaluation import (
    ConstantScorer,
    EvalInstance,
    evaluate_3way,
    evaluate_binary_task,
    format_ablation_table,
    label_distribution,
    run_ablation,
)

E, C, N = Label.ENTAILMENT, Label.CONTRADICTION, Label.NEUTRAL
rng = random.Random(99)

# --- binary factual-consistency task ----------------------------------------

instances = [
    EvalInstance(
        grounding=f"Grounding passage {i}.",
        claim=f"Claim {i}.",
        consistent=i % 2 == 0,
        task="demo-task",
        id=str(i),
    )
    for i in range(400)
]


class NoisyOracle:
    """Scores gold-consistent claims higher, with tunable noise."""

    def __init__(self, noise: float, seed: int = 0):
        self.noise = noise
        self.rng = random.Random(seed)
        self.scorer_id = f"noisy-oracle({noise})"

    def score(self, premise, hypothesis):
        consistent = int(hypothesis.split()[-1].rstrip(".")) % 2 == 0
        base = 0.8 if consistent else 0.2
        p = min(1.0, max(0.0, base + self.rng.uniform(-self.noise, self.noise)))
        return {E: p, C: (1 - p) / 2, N: (1 - p) / 2}


for scorer in (NoisyOracle(0.0), NoisyOracle(0.4), ConstantScorer()):
    result = evaluate_binary_task(scorer, instances)
    flag = " (all ties)" if result.all_ties else ""
    print(f"{getattr(scorer, 'scorer_id', 'scorer'):>18}: AUC {result.auc:.3f}{flag}")

# --- 3-way accuracy -----------------------------------------------------------

corpus = [
    NliExample(
        id=f"e{i}", domain="news", length=LengthCategory.SHORT,
        premise=f"P {i}.", hypothesis=f"H {i}.", label=rng.choice(list(Label)),
    )
    for i in range(300)
]


class Sometimes:
    """Predicts the gold label with a fixed hit rate."""

    def __init__(self, hit_rate: float, gold: dict, seed: int = 1):
        self.hit_rate = hit_rate
        self.gold = gold
        self.rng = random.Random(seed)
        self.scorer_id = f"sometimes({hit_rate})"

    def score(self, premise, hypothesis):
        gold = self.gold[(premise, hypothesis)]
        if self.rng.random() < self.hit_rate:
            return label_distribution(gold)
        return label_distribution(self.rng.choice([l for l in Label if l is not gold]))


gold = {(ex.premise, ex.hypothesis): ex.label for ex in corpus}
for hit_rate in (1.0, 0.7):
    result = evaluate_3way(Sometimes(hit_rate, gold), corpus)
    print(f"3-way accuracy at hit rate {hit_rate}: {result.accuracy:.3f}")

# --- learning curve ------------------------------------------------------------
# The factory hook stands in for an external training job: here, more data
# just means a better hit rate, which is enough to see the curve rise.

train = corpus * 4
subsets = [train[:n] for n in (40, 120, 400, 1200)]


def factory(subset):
    hit_rate = min(0.95, 0.4 + 0.1 * len(subset) ** 0.33)
    return Sometimes(hit_rate, gold, seed=len(subset))


rows = run_ablation(factory, subsets, {"demo-eval": corpus})
print()
print(format_ablation_table(rows))
