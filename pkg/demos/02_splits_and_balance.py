"""Split assembly, balance auditing, and nested ablation subsets.

Builds a toy corpus with a realistic label mix, carves it into
human-holdout/dev/test/train with label stratification, audits the
balance, and derives the nested subsets used for learning-curve studies.
"""

import random
from collections import Counter

from nliforge.assembly import (
    AblationSpec,
    SplitSpec,
    assemble,
    subsample_nested,
    verify_balance,
)
from nliforge.corpus import Label, LengthCategory, NliExample, Split

rng = random.Random(7)

corpus = [
    NliExample(
        id=f"ex-{i:05d}",
        domain=rng.choice(["news", "recipe", "email", "legal"]),
        length=rng.choice(list(LengthCategory)),
        premise=f"Premise text number {i}.",
        hypothesis=f"Hypothesis number {i}.",
        label=rng.choices(list(Label), weights=(0.354, 0.311, 0.335), k=1)[0],
    )
    for i in range(4000)
]

# --- splits -----------------------------------------------------------------
# The holdout is reserved for human annotation; dev/test are fractions of
# the remainder; train is what is left. Every split stays within one
# example of exact label proportions.

spec = SplitSpec(holdout_count=50, dev_fraction=0.05, test_fraction=0.05, seed=7)
assembled = assemble(corpus, spec)
sizes = Counter(ex.split for ex in assembled)
print("split sizes:", {s.value: sizes[s] for s in Split if sizes[s]})

for split in (Split.TRAIN, Split.DEV):
    members = [ex for ex in assembled if ex.split is split]
    counts = Counter(ex.label for ex in members)
    fractions = {l.value: round(counts[l] / len(members), 3) for l in Label}
    print(f"{split.value} label fractions: {fractions}")

# --- balance audit ----------------------------------------------------------

report = verify_balance(assembled)
print(f"balance audit passed: {report.passed} ({len(report.flags)} flags)")

# --- nested ablation subsets -------------------------------------------------
# Subsets nest (each size extends the previous draw), so a learning curve
# over them is monotone in the data actually seen.

train = [ex for ex in assembled if ex.split is Split.TRAIN]
subsets = subsample_nested(train, AblationSpec(sizes=(50, 100, 500, 1000, 3000), seed=7))
previous: set[str] = set()
for subset in subsets:
    ids = {ex.id for ex in subset}
    assert previous <= ids
    previous = ids
    counts = Counter(ex.label for ex in subset)
    print(f"subset {len(subset):>5}: " +
          ", ".join(f"{l.value[:4]}={counts[l]}" for l in Label))
