"""Prompt assembly from versioned template files.

Templates live under templates/<version>/ and expose named slots
(checklist_item, chunks, verdicts, icl_examples, cot_instruction,
payload). Every prompt also embeds a machine-readable task payload
between BEGIN_TASK_JSON / END_TASK_JSON markers; mock clients answer
from that payload, HTTP-backed models read the surrounding prose.
"""
from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

TEMPLATE_VERSION = "v1"

PAYLOAD_BEGIN = "BEGIN_TASK_JSON"
PAYLOAD_END = "END_TASK_JSON"

STRATEGY_ICL = "icl"
STRATEGY_ICL_COT = "icl-cot"


@lru_cache(maxsize=None)
def _load(name: str) -> str:
    path = resources.files("pa_adjudicator").joinpath("templates", TEMPLATE_VERSION, name)
    return path.read_text(encoding="utf-8")


def render(
    task: str,
    *,
    checklist_item: str,
    chunks: str,
    payload: dict,
    strategy: str = STRATEGY_ICL,
    verdicts: str = "",
) -> str:
    template = _load(f"{task}.txt")
    icl = _load(f"icl_{task}.txt")
    cot = _load("cot.txt") if strategy == STRATEGY_ICL_COT else ""
    reasoning_slot = ', "reasoning": "<your reasoning>"' if cot else ""
    return template.format(
        icl_examples=icl,
        cot_instruction=cot,
        checklist_item=checklist_item,
        chunks=chunks,
        verdicts=verdicts,
        payload=json.dumps(payload, sort_keys=True),
        reasoning_slot=reasoning_slot,
    )


def extract_payload(prompt: str) -> dict:
    """Recover the embedded task payload (used by mock clients)."""
    try:
        _, rest = prompt.split(PAYLOAD_BEGIN, 1)
        body, _ = rest.split(PAYLOAD_END, 1)
        return json.loads(body)
    except (ValueError, json.JSONDecodeError) as exc:
        raise ValueError(f"prompt carries no parseable task payload: {exc}") from exc
