"""Completion clients: deterministic mocks and an HTTP backend.

Every client implements `complete(prompt, sampling) -> str`. Mocks answer
from the machine-readable payload embedded in each prompt, so the same
prompt-render/response-parse path is exercised with and without a live
model. The HTTP client posts {"prompt", "sampling"} and expects
{"text"}; credentials come from the PA_CLIENT_TOKEN environment
variable.
"""
from __future__ import annotations

import json
import os
import random
from typing import Protocol, Sequence

import httpx

from .checklist import Judgment
from .prompts import extract_payload


class ClientError(Exception):
    """The completion backend failed (after retries, where applicable)."""


class CompletionClient(Protocol):
    def complete(self, prompt: str, sampling: dict) -> str: ...


class HttpCompletionClient:
    def __init__(self, url: str, timeout: float = 60.0, client: httpx.Client | None = None):
        self.url = url
        headers = {}
        token = os.environ.get("PA_CLIENT_TOKEN")
        if token:
            headers["Authorization"] = f"Bearer {token}"
        self._client = client or httpx.Client(timeout=timeout, headers=headers)

    def complete(self, prompt: str, sampling: dict) -> str:
        try:
            response = self._client.post(self.url, json={"prompt": prompt, "sampling": sampling})
            response.raise_for_status()
            return response.json()["text"]
        except (httpx.HTTPError, KeyError, ValueError) as exc:
            raise ClientError(f"completion backend at {self.url}: {exc}") from exc


def _matches_gold(chunk_text: str, gold_evidence: Sequence[str]) -> bool:
    return any(e in chunk_text or chunk_text in e for e in gold_evidence if e)


class OracleClient:
    """Perfect-oracle mock: answers from ground-truth leaf labels.

    labels: {leaf_id: {"judgment": "True"|"False"|"NoInformation",
                       "evidence": [exact substrings of the source]}}
    """

    def __init__(self, labels: dict):
        self.labels = labels or {}

    def complete(self, prompt: str, sampling: dict) -> str:
        payload = extract_payload(prompt)
        task = payload["task"]
        label = self.labels.get(payload.get("leaf_id"), {})
        gold_judgment = label.get("judgment", Judgment.NO_INFORMATION.value)
        gold_evidence = label.get("evidence", [])

        if task == "classification":
            chunk = payload["chunk"]
            if gold_judgment == Judgment.NO_INFORMATION.value:
                verdict = "Irrelevant"
            elif _matches_gold(chunk["text"], gold_evidence):
                verdict = "Supporting" if gold_judgment == Judgment.TRUE.value else "Contradictory"
            else:
                verdict = "Irrelevant"
            return json.dumps({"verdict": verdict})

        if task == "jury":
            judgment = self._jury_judgment(payload, gold_judgment)
            evidence = []
            if judgment != Judgment.NO_INFORMATION.value:
                evidence = [
                    c["chunk_id"] for c in payload["chunks"] if _matches_gold(c["text"], gold_evidence)
                ]
            return json.dumps({"judgment": judgment, "evidence": evidence})

        if task == "operator":
            return json.dumps({"operator": None, "rationale": "oracle mock does not extract operators"})

        raise ClientError(f"oracle mock cannot answer task {task!r}")

    def _jury_judgment(self, payload: dict, gold_judgment: str) -> str:
        return gold_judgment


class NoisyOracleClient(OracleClient):
    """Oracle that flips each jury answer with probability p.

    A flip replaces the gold judgment by a uniform draw over the other
    two labels. Classification verdicts are passed through unflipped.
    Deterministic for a fixed seed.
    """

    def __init__(self, labels: dict, p: float, seed: int = 0):
        super().__init__(labels)
        if not 0.0 <= p <= 1.0:
            raise ValueError("flip probability must be in [0, 1]")
        self.p = p
        self._rng = random.Random(seed)

    def _jury_judgment(self, payload: dict, gold_judgment: str) -> str:
        if self._rng.random() >= self.p:
            return gold_judgment
        others = [j.value for j in Judgment if j.value != gold_judgment]
        return self._rng.choice(others)


class AlwaysClient:
    """Returns one fixed answer for every classification/jury prompt."""

    def __init__(self, answer: str):
        self.answer = answer

    def complete(self, prompt: str, sampling: dict) -> str:
        payload = extract_payload(prompt)
        if payload["task"] == "classification":
            verdict = self.answer if self.answer in ("Supporting", "Contradictory", "Irrelevant") else "Irrelevant"
            return json.dumps({"verdict": verdict})
        if payload["task"] == "jury":
            try:
                judgment = Judgment(self.answer).value
            except ValueError:
                judgment = Judgment.NO_INFORMATION.value
            return json.dumps({"judgment": judgment, "evidence": []})
        return json.dumps({"operator": None, "rationale": "fixed-answer mock"})


# Connective phrasing -> operator, checked against the parent statement and
# the trailing conjunctions of its child statements.
_OR_PHRASES = ("one or more", "any of", "at least one", "either of")
_AND_PHRASES = ("all of the following", "each of the following", "both of")
_NOT_PHRASES = ("must not", "none of", "does not have", "absence of")


class PhraseRuleClient:
    """Operator extraction by connective-phrase rules; abstains otherwise."""

    def complete(self, prompt: str, sampling: dict) -> str:
        payload = extract_payload(prompt)
        if payload["task"] != "operator":
            raise ClientError("phrase-rule mock only answers operator prompts")
        parent = payload["parent_text"].lower()
        child_tails = [c["text"].rstrip().lower() for c in payload.get("children", [])]

        if any(p in parent for p in _NOT_PHRASES):
            return self._answer("NOT", "negating phrase in parent statement")
        if any(p in parent for p in _OR_PHRASES) or any(t.endswith("; or") for t in child_tails):
            return self._answer("OR", "disjunctive phrasing ('one or more' / '; or')")
        if any(p in parent for p in _AND_PHRASES) or any(t.endswith("; and") for t in child_tails):
            return self._answer("AND", "conjunctive phrasing ('all of' / '; and')")
        return json.dumps({"operator": None, "rationale": "no connective phrasing found"})

    @staticmethod
    def _answer(operator: str, rationale: str) -> str:
        return json.dumps({"operator": operator, "rationale": rationale})


class HallucinatingClient:
    """Wraps a client and appends unknown chunk ids to jury citations."""

    def __init__(self, inner: CompletionClient, bogus_ids: Sequence[str] = ("ghost:s9999",)):
        self.inner = inner
        self.bogus_ids = list(bogus_ids)

    def complete(self, prompt: str, sampling: dict) -> str:
        text = self.inner.complete(prompt, sampling)
        try:
            obj = json.loads(text)
        except json.JSONDecodeError:
            return text
        if "judgment" in obj:
            obj["evidence"] = list(obj.get("evidence", [])) + self.bogus_ids
            return json.dumps(obj)
        return text


class ScriptedClient:
    """Replays a fixed list of raw response texts (cycling); for tests."""

    def __init__(self, responses: Sequence[str]):
        if not responses:
            raise ValueError("at least one scripted response is required")
        self.responses = list(responses)
        self.calls = 0

    def complete(self, prompt: str, sampling: dict) -> str:
        text = self.responses[self.calls % len(self.responses)]
        self.calls += 1
        return text


def make_client(spec: str, oracle_labels: dict | None = None, seed: int = 0) -> CompletionClient:
    """Build a client from a CLI/config spec string.

    Accepted forms: mock:oracle, mock:noise:<p>, mock:always:<answer>,
    mock:phrase, mock:hallucinate, http:<url> (or a bare http(s) URL).
    """
    labels = oracle_labels or {}
    if spec.startswith(("http://", "https://")):
        return HttpCompletionClient(spec)
    kind, _, rest = spec.partition(":")
    if kind == "http":
        return HttpCompletionClient(rest)
    if kind != "mock":
        raise ValueError(f"unknown client spec {spec!r}")
    mock, _, arg = rest.partition(":")
    if mock == "oracle":
        return OracleClient(labels)
    if mock == "noise":
        return NoisyOracleClient(labels, p=float(arg), seed=seed)
    if mock == "always":
        return AlwaysClient(arg)
    if mock == "phrase":
        return PhraseRuleClient()
    if mock == "hallucinate":
        return HallucinatingClient(OracleClient(labels))
    raise ValueError(f"unknown mock client {spec!r}")
