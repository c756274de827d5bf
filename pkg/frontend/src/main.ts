// Browser entry point: wires the API client to the renderers. Kept thin so
// everything interesting stays in the testable pure modules.

import { AdjudicationClient, ServiceUnavailable, VersionConflict } from "./apiClient.js";
import { renderConflictPrompt, renderEvidencePanel, renderQueue, renderTree } from "./render.js";
import { buildTreeViewModel } from "./viewModel.js";
import type { JudgmentValue } from "./types.js";

const QUEUE_POLL_MS = 5000;

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

export function startApp(baseUrl: string): void {
  const client = new AdjudicationClient(baseUrl);
  const queueEl = el("queue");
  const treeEl = el("tree");
  const evidenceEl = el("evidence");
  const bannerEl = el("banner");
  let openRecordId: string | null = null;
  let openVersion = 0;

  async function refreshQueue(): Promise<void> {
    try {
      const summaries = await client.loadQueue("NeedsReview");
      queueEl.innerHTML = renderQueue(summaries);
      bannerEl.textContent = "";
    } catch (err) {
      if (err instanceof ServiceUnavailable) {
        bannerEl.textContent = "Service unavailable — retrying…";
      } else {
        throw err;
      }
    }
  }

  async function openRecord(recordId: string): Promise<void> {
    const record = await client.getRecord(recordId);
    openRecordId = record.id;
    openVersion = record.version;
    treeEl.innerHTML = renderTree(buildTreeViewModel(record));
  }

  async function showEvidence(leafId: string): Promise<void> {
    if (!openRecordId) return;
    const evidence = await client.getEvidence(openRecordId, leafId);
    evidenceEl.innerHTML = renderEvidencePanel(evidence);
  }

  async function overrideLeaf(leafId: string): Promise<void> {
    if (!openRecordId) return;
    const judgment = window.prompt("New judgment (True/False/NoInformation):");
    if (!judgment) return;
    const reviewer = window.prompt("Reviewer id:") ?? "reviewer";
    const note = window.prompt("Note (optional):") ?? "";
    try {
      await client.submitOverride(openRecordId, {
        leaf_id: leafId,
        judgment: judgment as JudgmentValue,
        reviewer,
        note,
        version: openVersion,
      });
      await openRecord(openRecordId); // single refresh re-renders the new decision
      await refreshQueue();
    } catch (err) {
      if (err instanceof VersionConflict) {
        treeEl.insertAdjacentHTML("afterbegin", renderConflictPrompt());
      } else {
        throw err;
      }
    }
  }

  document.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const row = target.closest<HTMLElement>("[data-record]");
    if (row?.dataset.record) void openRecord(row.dataset.record);
    if (target.matches(".override-btn") && target.dataset.leaf) {
      void overrideLeaf(target.dataset.leaf);
    } else if (target.matches(".reload-btn") && openRecordId) {
      void openRecord(openRecordId);
    } else {
      const node = target.closest<HTMLElement>("[data-node]");
      if (node?.dataset.node) void showEvidence(node.dataset.node);
    }
  });

  void refreshQueue();
  window.setInterval(() => void refreshQueue(), QUEUE_POLL_MS);
}
