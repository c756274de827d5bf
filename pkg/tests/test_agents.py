import json
from collections import Counter
from fractions import Fraction

import pytest

from pa_adjudicator.agents import (
    AgentConfig,
    AmbiguousOperator,
    EvidenceVerdict,
    Verdict,
    classify_evidence,
    extract_operators,
    judge_leaf,
    reduce_votes,
)
from pa_adjudicator.checklist import ChecklistNode, Judgment, Operator
from pa_adjudicator.clients import (
    AlwaysClient,
    ClientError,
    HallucinatingClient,
    NoisyOracleClient,
    OracleClient,
    PhraseRuleClient,
    ScriptedClient,
    make_client,
)
from pa_adjudicator.ingest import ChunkKind, DocumentChunk
from pa_adjudicator.retrieval import ScoredChunk

from oracle import majority_correct_probability, ref_majority

T, F, N = Judgment.TRUE, Judgment.FALSE, Judgment.NO_INFORMATION


def leaf(text="The beneficiary has diabetes mellitus", leaf_id="1"):
    return ChecklistNode(id=leaf_id, text=text)


def scored(texts, source="note"):
    return [
        ScoredChunk(
            chunk=DocumentChunk(
                chunk_id=f"{source}:s{i:04d}", source_id=source, text=t, kind=ChunkKind.SENTENCE
            ),
            score=1.0 - i * 0.01,
        )
        for i, t in enumerate(texts)
    ]


def irrelevant_verdicts(candidates):
    return [EvidenceVerdict(s.chunk.chunk_id, Verdict.IRRELEVANT) for s in candidates]


DIABETES_LABELS = {
    "1": {"judgment": "True", "evidence": ["Past medical history: type 2 diabetes"]}
}


class TestClassifyEvidence:
    def test_oracle_supporting(self):
        candidates = scored(["Past medical history: type 2 diabetes", "Lungs clear."])
        verdicts = classify_evidence(
            leaf(), candidates, OracleClient(DIABETES_LABELS), AgentConfig(n_votes=1)
        )
        assert verdicts[0].verdict is Verdict.SUPPORTING
        assert verdicts[1].verdict is Verdict.IRRELEVANT

    def test_oracle_contradictory_for_false_leaf(self):
        labels = {"1": {"judgment": "False", "evidence": ["No history of diabetes."]}}
        candidates = scored(["No history of diabetes."])
        verdicts = classify_evidence(leaf(), candidates, OracleClient(labels), AgentConfig())
        assert verdicts[0].verdict is Verdict.CONTRADICTORY

    def test_always_irrelevant_mock(self):
        candidates = scored(["anything at all"])
        verdicts = classify_evidence(
            leaf(), candidates, AlwaysClient("Irrelevant"), AgentConfig()
        )
        assert verdicts[0].verdict is Verdict.IRRELEVANT

    def test_one_verdict_per_candidate(self):
        candidates = scored([f"sentence {i}" for i in range(20)])
        verdicts = classify_evidence(leaf(), candidates, AlwaysClient("Supporting"), AgentConfig())
        assert len(verdicts) == 20
        assert [v.chunk_id for v in verdicts] == [s.chunk.chunk_id for s in candidates]

    def test_empty_candidates_rejected(self):
        with pytest.raises(ValueError):
            classify_evidence(leaf(), [], AlwaysClient("Irrelevant"), AgentConfig())

    def test_unparseable_degrades_to_irrelevant(self, caplog):
        client = ScriptedClient(["complete garbage, no JSON"])
        verdicts = classify_evidence(
            leaf(), scored(["x"]), client, AgentConfig(max_retries=1)
        )
        assert verdicts[0].verdict is Verdict.IRRELEVANT
        assert client.calls == 2  # initial + one retry

    def test_retry_recovers_parseable_response(self):
        client = ScriptedClient(["garbage", json.dumps({"verdict": "Supporting"})])
        verdicts = classify_evidence(leaf(), scored(["x"]), client, AgentConfig(max_retries=2))
        assert verdicts[0].verdict is Verdict.SUPPORTING


class TestJudgeLeaf:
    def run_scripted(self, judgments, candidates=None, evidence=()):
        candidates = candidates or scored(["some sentence"])
        responses = [
            json.dumps({"judgment": j, "evidence": list(evidence)}) for j in judgments
        ]
        client = ScriptedClient(responses)
        cfg = AgentConfig(n_votes=len(judgments))
        return judge_leaf(leaf(), candidates, irrelevant_verdicts(candidates), client, cfg)

    def test_majority_seven_of_ten(self):
        result = self.run_scripted(["True"] * 7 + ["False"] * 3)
        assert result.judgment is T
        assert result.confidence == Fraction(7, 10)
        assert result.votes == {"True": 7, "False": 3, "NoInformation": 0}
        assert result.runs == 10

    def test_unanimous_no_information(self):
        result = self.run_scripted(["NoInformation"] * 10)
        assert result.judgment is N
        assert result.confidence == Fraction(1)
        assert result.evidence == ()

    def test_five_five_tie_resolves_to_no_information(self):
        result = self.run_scripted(["True"] * 5 + ["False"] * 5)
        assert result.judgment is N
        assert result.confidence == Fraction(1, 2)

    def test_tie_rule_brute_force_all_compositions(self):
        # every vote histogram (t, f, n) with t + f + n = 10
        for t in range(11):
            for f in range(11 - t):
                n = 10 - t - f
                votes = Counter({T: t, F: f, N: n})
                judgment, confidence = reduce_votes(votes, 10)
                assert judgment is ref_majority({T: t, F: f, N: n})
                assert confidence == Fraction(max(t, f, n), 10)

    def test_evidence_union_from_majority_runs_only(self):
        candidates = scored(["a", "b", "c"])
        ids = [s.chunk.chunk_id for s in candidates]
        responses = [
            json.dumps({"judgment": "True", "evidence": [ids[0]]}),
            json.dumps({"judgment": "True", "evidence": [ids[1]]}),
            json.dumps({"judgment": "False", "evidence": [ids[2]]}),
        ]
        cfg = AgentConfig(n_votes=3)
        result = judge_leaf(
            leaf(), candidates, irrelevant_verdicts(candidates), ScriptedClient(responses), cfg
        )
        assert result.judgment is T
        assert result.evidence == (ids[0], ids[1])  # the False run's citation is excluded

    def test_hallucinated_citations_dropped_and_counted(self):
        candidates = scored(["real sentence"])
        labels = {"1": {"judgment": "True", "evidence": ["real sentence"]}}
        client = HallucinatingClient(OracleClient(labels), bogus_ids=["ghost:s9999"])
        cfg = AgentConfig(n_votes=4)
        result = judge_leaf(leaf(), candidates, irrelevant_verdicts(candidates), client, cfg)
        assert result.judgment is T
        assert "ghost:s9999" not in result.evidence
        assert result.evidence == (candidates[0].chunk.chunk_id,)
        assert result.hallucinated_citations == 4

    def test_unparseable_jury_run_raises_client_error(self):
        candidates = scored(["x"])
        with pytest.raises(ClientError):
            judge_leaf(
                leaf(),
                candidates,
                irrelevant_verdicts(candidates),
                ScriptedClient(["no json here"]),
                AgentConfig(n_votes=2, max_retries=1),
            )

    def test_misaligned_verdicts_rejected(self):
        candidates = scored(["a", "b"])
        with pytest.raises(ValueError):
            judge_leaf(leaf(), candidates, [], AlwaysClient("True"), AgentConfig())

    def test_perfect_oracle_is_exact_on_fixture_set(self, footwear_cases):
        from pa_adjudicator.ingest import chunk_text

        cfg = AgentConfig(n_votes=10)
        checked = 0
        for case in footwear_cases[:6]:
            client = OracleClient(case["labels"])
            chunks = chunk_text(case["note"], source_id=case["note_id"])
            candidates = [ScoredChunk(chunk=c, score=0.5) for c in chunks]
            for leaf_id, label in case["labels"].items():
                result = judge_leaf(
                    ChecklistNode(id=leaf_id, text=f"criterion {leaf_id}"),
                    candidates,
                    irrelevant_verdicts(candidates),
                    client,
                    cfg,
                )
                assert result.judgment.value == label["judgment"]
                assert result.confidence == Fraction(1)
                checked += 1
        assert checked == 6 * 7

    @pytest.mark.parametrize("p", [0.1, 0.2, 0.3])
    def test_noise_majority_amplification(self, p):
        candidates = scored(["evidence sentence"])
        verdicts = irrelevant_verdicts(candidates)
        cfg = AgentConfig(n_votes=10)
        golds = [T, F, N]
        correct = 0
        total = 1002
        labels = {
            f"L{i}": {"judgment": golds[i % 3].value, "evidence": ["evidence sentence"]}
            for i in range(total)
        }
        client = NoisyOracleClient(labels, p=p, seed=42)
        for i in range(total):
            result = judge_leaf(
                ChecklistNode(id=f"L{i}", text="criterion"), candidates, verdicts, client, cfg
            )
            correct += result.judgment is golds[i % 3]
        accuracy = correct / total
        assert accuracy > 1 - p
        expected = sum(
            float(majority_correct_probability(10, Fraction(p).limit_denominator(10), g))
            for g in golds
        ) / 3
        assert abs(accuracy - expected) < 0.02


class TestExtractOperators:
    def footwear_item2(self, footwear):
        return footwear.children[1]

    def test_phrase_rule_or(self, footwear):
        extraction = extract_operators(self.footwear_item2(footwear), PhraseRuleClient(), AgentConfig())
        assert extraction.operator is Operator.OR
        assert extraction.rationale

    def test_phrase_rule_and_from_child_conjunction(self):
        parent = ChecklistNode(
            id="p",
            text="The following criteria apply:",
            operator=Operator.AND,
            children=(
                ChecklistNode(id="p.1", text="has diabetes mellitus; and"),
                ChecklistNode(id="p.2", text="is followed by a podiatrist;"),
            ),
        )
        extraction = extract_operators(parent, PhraseRuleClient(), AgentConfig())
        assert extraction.operator is Operator.AND

    def test_gibberish_is_ambiguous(self):
        parent = ChecklistNode(
            id="g",
            text="xyzzy plugh quux",
            operator=Operator.AND,
            children=(
                ChecklistNode(id="g.1", text="frobnicate"),
                ChecklistNode(id="g.2", text="zork"),
            ),
        )
        with pytest.raises(AmbiguousOperator):
            extract_operators(parent, PhraseRuleClient(), AgentConfig())

    def test_leaf_rejected(self):
        with pytest.raises(ValueError):
            extract_operators(leaf(), PhraseRuleClient(), AgentConfig())


class TestAgentConfig:
    def test_votes_must_be_positive(self):
        with pytest.raises(ValueError):
            AgentConfig(n_votes=0)

    def test_unknown_strategy_rejected(self):
        with pytest.raises(ValueError):
            AgentConfig(prompt_strategy="zero-shot")


class TestClientFactory:
    def test_specs(self):
        assert isinstance(make_client("mock:oracle"), OracleClient)
        noisy = make_client("mock:noise:0.2", seed=1)
        assert isinstance(noisy, NoisyOracleClient) and noisy.p == 0.2
        assert isinstance(make_client("mock:phrase"), PhraseRuleClient)
        assert isinstance(make_client("mock:always:True"), AlwaysClient)
        assert isinstance(make_client("mock:hallucinate"), HallucinatingClient)

    def test_unknown_spec(self):
        with pytest.raises(ValueError):
            make_client("mock:unknown")
        with pytest.raises(ValueError):
            make_client("grpc:whatever")
