"""Command-line interface.

`serve` runs the REST service; `adjudicate`, `show`, `override` and
`evaluate` are thin HTTP clients against a running service.
`generate-synthetic` and `export-fixtures` work locally.
"""
from __future__ import annotations

import json
import sys
from importlib import resources
from pathlib import Path

import click
import httpx

from . import checklist as cl
from .checklist import Judgment
from .evaluation import judgment_accuracy, load_annotations, mean_token_recall
from .pipeline import export_override_fixtures
from .propagation import generate_synthetic
from .store import RecordStore

DEFAULT_BASE_URL = "http://127.0.0.1:8000"


@click.group()
def main():
    """Adjudicate patient documents against clinical-guideline checklists."""


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--store", "store_dir", default="./adjudications", show_default=True,
              help="Directory for persisted records and the audit log.")
def serve(port: int, host: str, store_dir: str):
    """Run the adjudication REST service."""
    import uvicorn

    from .api import create_app

    uvicorn.run(create_app(RecordStore(store_dir)), host=host, port=port)


def _client(base_url: str) -> httpx.Client:
    return httpx.Client(base_url=base_url, timeout=300.0)


def _echo_json(obj) -> None:
    click.echo(json.dumps(obj, indent=2, sort_keys=True))


def _fail_on_error(response: httpx.Response) -> None:
    if response.status_code >= 400:
        click.echo(f"error {response.status_code}: {response.text}", err=True)
        sys.exit(1)


@main.command()
@click.option("--checklist", "checklist_path", required=True, type=click.Path(exists=True))
@click.option("--documents", "documents_path", required=True, type=click.Path(exists=True),
              help="JSON list of documents ({id, kind, text|resources}).")
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="JSON config file (k, n_votes, strategy, review_threshold, client, ...).")
@click.option("--k", type=int, default=None)
@click.option("--votes", type=int, default=None)
@click.option("--strategy", type=click.Choice(["icl", "icl-cot"]), default=None)
@click.option("--client", "client_spec", default=None,
              help="mock:oracle | mock:noise:<p> | http:<url>")
@click.option("--encoder", default=None, help="'test' for the deterministic embedder.")
@click.option("--encoder-url", default=None, help="Encoder backend URL.")
@click.option("--chunking", type=click.Choice(["auto", "sentence", "resource"]), default=None)
@click.option("--threshold", type=float, default=None, help="Review threshold on root confidence.")
@click.option("--base-url", default=DEFAULT_BASE_URL, show_default=True)
def adjudicate(checklist_path, documents_path, config_path, k, votes, strategy,
               client_spec, encoder, encoder_url, chunking, threshold, base_url):
    """Submit an adjudication and print the resulting record id."""
    config = {}
    if config_path:
        config = json.loads(Path(config_path).read_text(encoding="utf-8"))
    overrides = {
        "k": k,
        "n_votes": votes,
        "strategy": strategy,
        "client": client_spec,
        "encoder": encoder_url or encoder,
        "chunking": chunking,
        "review_threshold": threshold,
    }
    config.update({key: value for key, value in overrides.items() if value is not None})

    body = {
        "checklist": json.loads(Path(checklist_path).read_text(encoding="utf-8")),
        "documents": json.loads(Path(documents_path).read_text(encoding="utf-8")),
        "config": config,
    }
    with _client(base_url) as http:
        response = http.post("/adjudications", json=body)
        _fail_on_error(response)
        _echo_json(response.json())


@main.command()
@click.argument("record_id")
@click.option("--base-url", default=DEFAULT_BASE_URL, show_default=True)
def show(record_id: str, base_url: str):
    """Fetch and print one adjudication record."""
    with _client(base_url) as http:
        response = http.get(f"/adjudications/{record_id}")
        _fail_on_error(response)
        _echo_json(response.json())


@main.command()
@click.argument("record_id")
@click.option("--leaf", "leaf_id", required=True)
@click.option("--judgment", required=True, type=click.Choice([j.value for j in Judgment]))
@click.option("--reviewer", required=True)
@click.option("--note", default="")
@click.option("--version", type=int, default=None,
              help="Version token; defaults to the record's current version.")
@click.option("--base-url", default=DEFAULT_BASE_URL, show_default=True)
def override(record_id, leaf_id, judgment, reviewer, note, version, base_url):
    """Apply a reviewer override to one leaf judgment."""
    with _client(base_url) as http:
        if version is None:
            current = http.get(f"/adjudications/{record_id}")
            _fail_on_error(current)
            version = current.json()["version"]
        response = http.post(
            f"/adjudications/{record_id}/overrides",
            json={"leaf_id": leaf_id, "judgment": judgment, "reviewer": reviewer,
                  "note": note, "version": version},
        )
        _fail_on_error(response)
        _echo_json(response.json())


def _bundled_guidelines() -> list:
    base = resources.files("pa_adjudicator").joinpath("fixtures", "guidelines")
    docs = []
    for entry in sorted(base.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            docs.append(cl.parse_checklist(entry.read_text(encoding="utf-8")))
    return docs


@main.command("generate-synthetic")
@click.option("--count", type=int, default=None, help="Number of sampled records.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--exhaustive", is_flag=True, help="Emit all 3^m judgment permutations instead.")
@click.option("--guidelines", "guideline_paths", multiple=True, type=click.Path(exists=True),
              help="Checklist JSON files; defaults to the bundled guideline set.")
@click.option("--out", "out_path", type=click.Path(), default=None, help="Write JSONL here instead of stdout.")
def generate_synthetic_cmd(count, seed, exhaustive, guideline_paths, out_path):
    """Emit a labeled parent-judgment dataset as line-delimited JSON."""
    if guideline_paths:
        guidelines = [
            cl.parse_checklist(Path(p).read_text(encoding="utf-8")) for p in guideline_paths
        ]
    else:
        guidelines = _bundled_guidelines()
    records = generate_synthetic(guidelines, count=count, seed=seed, exhaustive=exhaustive)
    lines = "\n".join(json.dumps(r, sort_keys=True) for r in records) + "\n"
    if out_path:
        Path(out_path).write_text(lines, encoding="utf-8")
        click.echo(f"wrote {len(records)} records to {out_path}")
    else:
        click.echo(lines, nl=False)


@main.command()
@click.option("--run", "record_id", required=True, help="Adjudication record id.")
@click.option("--fixtures", "fixtures_path", required=True, type=click.Path(exists=True),
              help="JSONL fixtures: {note_id, leaf_id, gold_judgment, gold_evidence[]}.")
@click.option("--base-url", default=DEFAULT_BASE_URL, show_default=True)
@click.option("--csv-out", type=click.Path(), default=None, help="Also write a flat CSV.")
def evaluate(record_id, fixtures_path, base_url, csv_out):
    """Score one persisted run against annotated fixtures."""
    with _client(base_url) as http:
        response = http.get(f"/adjudications/{record_id}")
        _fail_on_error(response)
        record = response.json()

    annotations = load_annotations(fixtures_path)
    relevant = [a for a in annotations if a.leaf_id in record.get("leaf_results", {})]
    if not relevant:
        click.echo("no fixture rows match this record's leaves", err=True)
        sys.exit(1)

    chunks = record.get("chunks", {})
    predicted_evidence = {
        (a.note_id, a.leaf_id): [
            chunks[cid]["text"]
            for cid in record["leaf_results"][a.leaf_id].get("evidence", [])
            if cid in chunks
        ]
        for a in relevant
    }
    recall_report = mean_token_recall(relevant, predicted_evidence)

    results = {
        a.leaf_id: Judgment(record["leaf_results"][a.leaf_id]["judgment"]) for a in relevant
    }
    gold = {a.leaf_id: a.gold_judgment for a in relevant}
    accuracy_report = judgment_accuracy(results, gold)

    report = {
        "run": record_id,
        "metrics": {**recall_report.metrics, **accuracy_report.metrics},
        "breakdown": {
            "recall": recall_report.breakdown,
            "confusion": accuracy_report.breakdown["confusion"],
        },
        "metadata": {**recall_report.metadata, **accuracy_report.metadata,
                     "config": record.get("config", {})},
    }
    _echo_json(report)
    if csv_out:
        lines = ["metric,value"]
        for name in sorted(report["metrics"]):
            lines.append(f"{name},{report['metrics'][name]}")
        Path(csv_out).write_text("\n".join(lines) + "\n", encoding="utf-8")


@main.command("export-fixtures")
@click.option("--store", "store_dir", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path(), default=None)
def export_fixtures(store_dir, out_path):
    """Export overridden leaves as new evaluation fixtures (JSONL)."""
    fixtures = export_override_fixtures(RecordStore(store_dir))
    lines = "\n".join(json.dumps(f, sort_keys=True) for f in fixtures)
    if lines:
        lines += "\n"
    if out_path:
        Path(out_path).write_text(lines, encoding="utf-8")
        click.echo(f"wrote {len(fixtures)} fixtures to {out_path}")
    else:
        click.echo(lines, nl=False)


if __name__ == "__main__":
    main()
