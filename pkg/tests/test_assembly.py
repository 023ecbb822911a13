from __future__ import annotations

import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nliforge.assembly import (
    AblationSpec,
    BalanceTolerances,
    SplitSpec,
    _allocate_split_matrix,
    assemble,
    downsample_to_balance,
    largest_remainder,
    subsample_nested,
    verify_balance,
)
from nliforge.corpus import CorpusError, Label, LengthCategory, Split

from .conftest import make_corpus, make_example


class TestSplitSpec:
    def test_bad_fractions(self):
        with pytest.raises(ValueError):
            SplitSpec(dev_fraction=0.0)
        with pytest.raises(ValueError):
            SplitSpec(dev_fraction=0.6, test_fraction=0.5)

    def test_unknown_stratify_field(self):
        with pytest.raises(ValueError, match="stratify_by"):
            SplitSpec(stratify_by=("genre",))


class TestLargestRemainder:
    def test_exact_total_and_bounds(self):
        sizes = {"a": 11, "b": 7, "c": 2}
        for k in range(0, 21):
            counts = largest_remainder(k, sizes)
            assert sum(counts.values()) == k
            for key, n in sizes.items():
                assert 0 <= counts[key] <= n
                assert abs(counts[key] - k * n / 20) <= 1

    def test_k_exceeding_total(self):
        with pytest.raises(ValueError):
            largest_remainder(5, {"a": 2})


class TestAllocateSplitMatrix:
    @settings(max_examples=200, deadline=None)
    @given(
        strata=st.lists(st.integers(1, 200), min_size=1, max_size=8),
        cuts=st.tuples(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1)),
    )
    def test_marginals_exact_and_cells_within_one(self, strata, cuts):
        stratum_sizes = {f"g{i}": n for i, n in enumerate(strata)}
        total = sum(strata)
        # carve the total into four split sizes from the random cut points
        a = int(cuts[0] * total)
        b = int(cuts[1] * (total - a))
        c = int(cuts[2] * (total - a - b))
        split_sizes = {"w": a, "x": b, "y": c, "z": total - a - b - c}
        allocation = _allocate_split_matrix(split_sizes, stratum_sizes)
        for split, size in split_sizes.items():
            assert sum(allocation[(split, g)] for g in stratum_sizes) == size
        for g, size in stratum_sizes.items():
            assert sum(allocation[(s, g)] for s in split_sizes) == size
        for split, split_size in split_sizes.items():
            for g, stratum_size in stratum_sizes.items():
                quota = split_size * stratum_size / total
                assert abs(allocation[(split, g)] - quota) < 1

    def test_inconsistent_marginals_rejected(self):
        with pytest.raises(ValueError, match="sum"):
            _allocate_split_matrix({"a": 3}, {"g": 5})


class TestAssemble:
    def test_full_scale_split_sizes(self, full_scale_corpus):
        spec = SplitSpec(holdout_count=500, dev_fraction=0.01, test_fraction=0.01, seed=1)
        assembled = assemble(full_scale_corpus, spec)
        sizes = Counter(ex.split for ex in assembled)
        assert sizes[Split.HUMAN_HOLDOUT] == 500
        assert sizes[Split.DEV] == 6_845
        assert sizes[Split.TEST] == 6_845
        assert sizes[Split.TRAIN] == 670_739
        assert sum(sizes.values()) == 684_929

    def test_holdout_larger_than_corpus(self):
        corpus = make_corpus({Label.ENTAILMENT: 10})
        with pytest.raises(CorpusError, match="smaller than holdout"):
            assemble(corpus, SplitSpec(holdout_count=20))

    def test_deterministic_under_seed(self):
        corpus = make_corpus(
            {Label.ENTAILMENT: 40, Label.CONTRADICTION: 35, Label.NEUTRAL: 25}
        )
        spec = SplitSpec(holdout_count=10, dev_fraction=0.1, test_fraction=0.1, seed=7)
        assert assemble(corpus, spec) == assemble(corpus, spec)
        other = SplitSpec(holdout_count=10, dev_fraction=0.1, test_fraction=0.1, seed=8)
        assert assemble(corpus, spec) != assemble(corpus, other)

    def test_rejects_preassigned_split(self):
        corpus = [make_example(split=Split.TRAIN)]
        with pytest.raises(CorpusError, match="already assigned"):
            assemble(corpus, SplitSpec(holdout_count=0))

    def test_partition_preserves_examples(self):
        corpus = make_corpus(
            {Label.ENTAILMENT: 30, Label.CONTRADICTION: 30, Label.NEUTRAL: 30}
        )
        spec = SplitSpec(holdout_count=9, dev_fraction=0.1, test_fraction=0.1, seed=3)
        assembled = assemble(corpus, spec)
        assert [ex.id for ex in assembled] == [ex.id for ex in corpus]
        assert all(ex.split is not Split.UNASSIGNED for ex in assembled)

    @settings(max_examples=20, deadline=None)
    @given(
        counts=st.tuples(
            st.integers(6, 40), st.integers(6, 40), st.integers(6, 40)
        ),
        seed=st.integers(0, 2**20),
    )
    def test_stratification_within_one(self, counts, seed):
        e, c, n = counts
        corpus = make_corpus(
            {Label.ENTAILMENT: e, Label.CONTRADICTION: c, Label.NEUTRAL: n}
        )
        total = e + c + n
        spec = SplitSpec(holdout_count=3, dev_fraction=0.1, test_fraction=0.1, seed=seed)
        assembled = assemble(corpus, spec)
        fractions = {
            Label.ENTAILMENT: e / total,
            Label.CONTRADICTION: c / total,
            Label.NEUTRAL: n / total,
        }
        by_split: dict[Split, Counter] = {}
        for ex in assembled:
            by_split.setdefault(ex.split, Counter())[ex.label] += 1
        for split, counter in by_split.items():
            split_size = sum(counter.values())
            for label, fraction in fractions.items():
                assert abs(counter[label] - split_size * fraction) <= 1 + 1e-9

    def test_stratify_by_domain_and_length(self):
        corpus = []
        i = 0
        for domain in ("ads", "news"):
            for length in LengthCategory:
                for _ in range(20):
                    corpus.append(
                        make_example(id=f"x{i}", domain=domain, length=length)
                    )
                    i += 1
        spec = SplitSpec(
            holdout_count=8, dev_fraction=0.1, test_fraction=0.1, seed=5,
            stratify_by=("domain", "length"),
        )
        assembled = assemble(corpus, spec)
        holdout = [ex for ex in assembled if ex.split is Split.HUMAN_HOLDOUT]
        cells = Counter((ex.domain, ex.length) for ex in holdout)
        assert all(count == 2 for count in cells.values())


class TestVerifyBalance:
    def test_near_uniform_passes(self):
        corpus = make_corpus(
            {Label.ENTAILMENT: 354, Label.CONTRADICTION: 311, Label.NEUTRAL: 335}
        )
        report = verify_balance(corpus, BalanceTolerances(label=0.05))
        assert report.passed
        assert report.per_split_label_fractions["all"]["entailment"] == pytest.approx(0.354)

    def test_gross_imbalance_flagged(self):
        corpus = make_corpus({Label.ENTAILMENT: 90, Label.CONTRADICTION: 5, Label.NEUTRAL: 5})
        report = verify_balance(corpus)
        assert not report.passed
        assert any("entailment" in flag for flag in report.flags)

    def test_exactly_uniform_zero_deviation(self):
        corpus = make_corpus(
            {Label.ENTAILMENT: 10, Label.CONTRADICTION: 10, Label.NEUTRAL: 10}
        )
        report = verify_balance(corpus)
        assert report.passed
        for fraction in report.per_split_label_fractions["all"].values():
            assert fraction == pytest.approx(1 / 3)

    def test_cell_quota_deviation_flagged(self):
        corpus = []
        for i in range(30):
            corpus.append(make_example(id=f"a{i}", domain="ads"))
        for i in range(10):
            corpus.append(make_example(id=f"n{i}", domain="news"))
        # labels uniform so only the cell flag fires
        corpus = [
            make_example(
                id=ex.id, domain=ex.domain,
                label=list(Label)[i % 3],
            )
            for i, ex in enumerate(corpus)
        ]
        report = verify_balance(corpus, BalanceTolerances(label=1.0, cell=0.1))
        assert any("cell" in flag for flag in report.flags)


class TestAblation:
    def train_corpus(self, n=700) -> list:
        rng = random.Random(0)
        labels = [rng.choices(list(Label), weights=(0.354, 0.311, 0.335), k=1)[0]
                  for _ in range(n)]
        return [make_example(id=f"t{i}", label=labels[i], split=Split.UNASSIGNED)
                for i in range(n)]

    def test_default_sizes_scaled_down(self):
        train = self.train_corpus(700)
        sizes = tuple(s // 1000 for s in AblationSpec().sizes)
        assert sizes == (1, 2, 5, 10, 50, 100, 300, 392, 671)
        subsets = subsample_nested(train, AblationSpec(sizes=sizes, seed=2))
        assert [len(s) for s in subsets] == list(sizes)
        previous_ids: set[str] = set()
        for subset in subsets:
            ids = {ex.id for ex in subset}
            assert previous_ids <= ids
            previous_ids = ids

    def test_label_stratified_within_one(self):
        train = self.train_corpus(700)
        total = len(train)
        fractions = {
            label: sum(1 for ex in train if ex.label is label) / total for label in Label
        }
        subsets = subsample_nested(train, AblationSpec(sizes=(10, 100, 671), seed=2))
        for subset in subsets:
            counter = Counter(ex.label for ex in subset)
            for label in Label:
                assert abs(counter[label] - len(subset) * fractions[label]) <= 1 + 1e-9

    def test_non_increasing_sizes_rejected(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            AblationSpec(sizes=(10, 5))

    def test_size_exceeding_train_rejected(self):
        train = self.train_corpus(100)
        with pytest.raises(ValueError, match="exceeds train size"):
            subsample_nested(train, AblationSpec(sizes=(50, 200)))

    def test_deterministic(self):
        train = self.train_corpus(300)
        spec = AblationSpec(sizes=(10, 50), seed=13)
        first = subsample_nested(train, spec)
        second = subsample_nested(train, spec)
        assert first == second


def test_downsample_to_balance():
    corpus = make_corpus(
        {Label.ENTAILMENT: 50, Label.CONTRADICTION: 20, Label.NEUTRAL: 30}
    )
    balanced = downsample_to_balance(corpus, seed=1)
    counts = Counter(ex.label for ex in balanced)
    assert counts == {Label.ENTAILMENT: 20, Label.CONTRADICTION: 20, Label.NEUTRAL: 20}
