"""A simulated human-annotation study over a holdout slice.

Three scripted annotators vote on every example (agreeing with the
generator label most of the time, with individual noise), then the
agreement report computes pairwise and average Cohen's kappa, majority
and unanimous subsets, and model-vs-human accuracy. The same statistics
are what the annotation hub serves over HTTP.
"""

import random

from nliforge.agreement import (
    AnnotationSession,
    SessionExample,
    agreement_report,
    format_agreement,
)
from nliforge.corpus import Label, LengthCategory, NliExample

rng = random.Random(13)

holdout = [
    NliExample(
        id=f"h{i:03d}",
        domain="news",
        length=LengthCategory.SHORT,
        premise=f"Premise {i}.",
        hypothesis=f"Hypothesis {i}.",
        label=rng.choice(list(Label)),
    )
    for i in range(120)
]

# Annotators agree with the generator label with individual reliabilities;
# otherwise they pick one of the other two labels at random.
RELIABILITY = {"ana": 0.85, "ben": 0.80, "cam": 0.75}

session = AnnotationSession(
    "demo-study",
    [SessionExample.from_example(ex) for ex in holdout],
    annotators=tuple(RELIABILITY),
)
for ex in holdout:
    for annotator, reliability in RELIABILITY.items():
        if rng.random() < reliability:
            vote = ex.label
        else:
            vote = rng.choice([l for l in Label if l is not ex.label])
        session.vote(ex.id, annotator, vote)

report = agreement_report(session)
print(format_agreement(report))

# The unanimous subset is always contained in the majority-labeled one.
majority_ids = {i for i, l in report.majority_labels.items() if l is not None}
assert set(report.unanimous_ids) <= majority_ids
print(f"\nunanimous subset is contained in the majority subset "
      f"({report.n_unanimous} <= {report.n_majority})")
