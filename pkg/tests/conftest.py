from __future__ import annotations

import pytest

from nliforge.corpus import Label, LengthCategory, NliExample, Split

ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(name): acceptance criterion checked by this test"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call":
        marker = item.get_closest_marker("acceptance")
        if marker:
            ACCEPTANCE_RESULTS.append((marker.args[0], "PASS" if report.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for name, outcome in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(f"{outcome}  {name}")


def make_example(
    id: str = "ex-0",
    label: Label = Label.ENTAILMENT,
    domain: str = "news",
    length: LengthCategory = LengthCategory.SHORT,
    premise: str = "The cat sat on the mat.",
    hypothesis: str = "A cat was sitting.",
    split: Split = Split.UNASSIGNED,
) -> NliExample:
    return NliExample(
        id=id, domain=domain, length=length, premise=premise,
        hypothesis=hypothesis, label=label, split=split,
    )


def make_corpus(label_counts: dict[Label, int], **kwargs) -> list[NliExample]:
    """A corpus with exactly the given per-label counts."""
    corpus = []
    i = 0
    for label, count in label_counts.items():
        for _ in range(count):
            corpus.append(make_example(id=f"ex-{i}", label=label, **kwargs))
            i += 1
    return corpus


@pytest.fixture(scope="session")
def full_scale_corpus() -> list[NliExample]:
    """684,929 examples, shared across tests that need full scale.

    The first 684,429 carry exactly the reported train+dev+test label
    counts (E/C/N 242,154 / 212,950 / 229,325); the final 500 (the future
    human holdout) get proportional labels (177 / 156 / 167).
    """
    corpus = make_corpus(
        {
            Label.ENTAILMENT: 242_154,
            Label.CONTRADICTION: 212_950,
            Label.NEUTRAL: 229_325,
        }
    )
    extra = make_corpus(
        {Label.ENTAILMENT: 177, Label.CONTRADICTION: 156, Label.NEUTRAL: 167}
    )
    for i, ex in enumerate(extra):
        corpus.append(
            NliExample(
                id=f"hx-{i}", domain=ex.domain, length=ex.length,
                premise=ex.premise, hypothesis=ex.hypothesis, label=ex.label,
            )
        )
    return corpus
