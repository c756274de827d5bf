import random
from collections import Counter

import pytest

from pa_adjudicator.agents import reduce_votes
from pa_adjudicator.checklist import Judgment
from pa_adjudicator.clients import PhraseRuleClient
from pa_adjudicator.evaluation import (
    EmptyGold,
    EvidenceAnnotation,
    MisalignedIds,
    judgment_accuracy,
    mean_token_recall,
    propagation_accuracies,
    token_recall,
    tokenize,
)
from pa_adjudicator.propagation import generate_synthetic

T, F, N = Judgment.TRUE, Judgment.FALSE, Judgment.NO_INFORMATION


class TestTokenRecall:
    def test_containment_gives_one(self):
        gold = "previous foot ulceration of either foot"
        predicted = ["history of previous foot ulceration of either foot was noted"]
        assert token_recall(gold, predicted) == 1.0

    def test_half_coverage(self):
        assert token_recall("alpha beta gamma delta", ["beta gamma"]) == 0.5

    def test_self_recall_is_one(self):
        gold = "Type 2 diabetes mellitus, diagnosed 2015."
        assert token_recall(gold, [gold]) == 1.0

    def test_multiset_semantics(self):
        # gold mentions "foot" twice; predicting it once covers only one of three tokens
        assert token_recall("foot to foot", ["foot"]) == pytest.approx(1 / 3)

    def test_case_and_punctuation_insensitive(self):
        assert token_recall("Diabetes Mellitus!", ["diabetes, mellitus"]) == 1.0

    def test_monotone_under_predicted_growth(self):
        gold = "peripheral neuropathy with callus formation"
        small = token_recall(gold, ["callus formation"])
        large = token_recall(gold, ["callus formation", "peripheral neuropathy"])
        assert large >= small

    def test_empty_gold_raises(self):
        with pytest.raises(EmptyGold):
            token_recall("...", ["anything"])

    def test_bounds(self):
        assert 0.0 <= token_recall("a b c", ["z"]) <= 1.0

    def test_tokenize_drops_punctuation_and_lowercases(self):
        assert tokenize("A1c: 8.1%!") == Counter({"a1c": 1, "8": 1, "1": 1})


class TestMeanTokenRecall:
    def test_skips_empty_gold(self):
        annotations = [
            EvidenceAnnotation("n1", "1", T, ("has diabetes",)),
            EvidenceAnnotation("n1", "2", T, ()),
        ]
        report = mean_token_recall(annotations, {("n1", "1"): ["has diabetes"]})
        assert report.metrics["mean_token_recall"] == 1.0
        assert report.metadata["skipped_empty_gold"] == 1
        assert report.metadata["evaluated"] == 1


class TestJudgmentAccuracy:
    def test_perfect(self):
        gold = {"a": T, "b": F, "c": N}
        report = judgment_accuracy(dict(gold), gold)
        assert report.metrics["accuracy"] == 1.0
        assert report.breakdown["confusion"]["True"]["True"] == 1

    def test_all_no_information_baseline(self):
        gold = {f"l{i}": [T, F, N][i % 3] for i in range(300)}
        results = {k: N for k in gold}
        report = judgment_accuracy(results, gold)
        assert report.metrics["accuracy"] == pytest.approx(1 / 3)

    def test_misaligned_ids(self):
        with pytest.raises(MisalignedIds):
            judgment_accuracy({"a": T}, {"b": T})

    def test_order_invariance(self):
        gold = {"a": T, "b": F}
        r1 = judgment_accuracy({"a": T, "b": T}, gold)
        r2 = judgment_accuracy({"b": T, "a": T}, dict(reversed(list(gold.items()))))
        assert r1.metrics == r2.metrics

    def test_noise_vote_simulation_beats_per_run_accuracy(self):
        # 10-vote majority with p=0.3 flips must beat the 0.7 per-run rate
        rng = random.Random(99)
        golds = {f"l{i}": [T, F, N][i % 3] for i in range(1200)}
        results = {}
        for leaf_id, gold in golds.items():
            votes = Counter()
            for _ in range(10):
                if rng.random() < 0.3:
                    votes[rng.choice([j for j in (T, F, N) if j is not gold])] += 1
                else:
                    votes[gold] += 1
            results[leaf_id], _ = reduce_votes(votes, 10)
        report = judgment_accuracy(results, golds)
        assert report.metrics["accuracy"] > 0.7


class TestPropagationAccuracies:
    def test_engine_exact_on_own_oracle_dataset(self, bundled_guidelines):
        records = generate_synthetic(bundled_guidelines, count=450, seed=5)
        report = propagation_accuracies(records)
        assert report.metrics["response_accuracy"] == 1.0
        assert report.metrics["score_accuracy"] == 1.0

    def test_phrase_rule_operators_on_footwear(self, footwear):
        records = generate_synthetic([footwear], count=2, seed=1)
        assert {r["subchecklist"]["id"] for r in records} == {"footwear", "2"}
        report = propagation_accuracies(records, operator_client=PhraseRuleClient())
        assert report.metrics["operator_accuracy"] == 1.0

    def test_score_accuracy_detects_confidence_mismatch(self, footwear):
        records = generate_synthetic([footwear], count=20, seed=4)
        broken = [dict(r, oracle_confidence="1/3") for r in records]
        for old, new in zip(records, broken):
            new["subchecklist"] = old["subchecklist"]
        report = propagation_accuracies(broken)
        assert report.metrics["response_accuracy"] == 1.0
        assert report.metrics["score_accuracy"] < 1.0


class TestMetricReport:
    def test_serialization(self):
        report = judgment_accuracy({"a": T}, {"a": T})
        assert '"accuracy": 1.0' in report.to_json()
        assert "accuracy,1.0" in report.to_csv()
