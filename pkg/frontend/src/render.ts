// HTML renderers. Pure string-in/string-out so they are testable without a
// DOM; main.ts injects the results into the page.

import { highlightEvidence } from "./evidence.js";
import type { EvidenceResponse, RecordSummary } from "./types.js";
import type { TreeNodeVM, TreeViewModel } from "./viewModel.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const JUDGMENT_ICONS: Record<string, string> = {
  True: "✓",
  False: "✗",
  NoInformation: "?",
};

function renderNode(node: TreeNodeVM): string {
  const icon = JUDGMENT_ICONS[node.judgment] ?? "?";
  const badges = [
    `<span class="judgment judgment-${node.judgment.toLowerCase()}">${icon} ${node.judgment}</span>`,
    `<span class="confidence band-${node.band}">f=${escapeHtml(node.confidence)}</span>`,
  ];
  if (node.overridden) badges.push(`<span class="badge-overridden">overridden</span>`);
  if (node.operator) badges.push(`<span class="operator">${escapeHtml(node.operator)}</span>`);
  const override = node.isLeaf
    ? `<button class="override-btn" data-leaf="${escapeHtml(node.nodeId)}">override</button>`
    : "";
  const children = node.children.length
    ? `<ul class="${node.expanded ? "expanded" : "collapsed"}">` +
      node.children.map((c) => `<li>${renderNode(c)}</li>`).join("") +
      `</ul>`
    : "";
  return (
    `<div class="node" data-node="${escapeHtml(node.nodeId)}">` +
    `<span class="label">${escapeHtml(node.label || node.nodeId)}</span> ${badges.join(" ")} ${override}` +
    `</div>${children}`
  );
}

export function renderTree(vm: TreeViewModel): string {
  const review = vm.needsReview ? `<span class="badge-review">needs review</span>` : "";
  return (
    `<header class="decision decision-${vm.decisionLabel.replace(/\s+/g, "-").toLowerCase()}">` +
    `<h2>${escapeHtml(vm.decisionLabel)}</h2>` +
    `<span class="root-confidence">root f=${escapeHtml(vm.rootConfidence)}</span> ${review}` +
    `<span class="version">v${vm.version}</span>` +
    `</header>` +
    renderNode(vm.root)
  );
}

export function renderQueue(summaries: RecordSummary[]): string {
  if (summaries.length === 0) {
    return `<p class="empty-state">No records waiting for review.</p>`;
  }
  const rows = summaries
    .map(
      (s) =>
        `<tr data-record="${escapeHtml(s.id)}">` +
        `<td>${escapeHtml(s.id)}</td><td>${escapeHtml(s.status)}</td>` +
        `<td>${escapeHtml(s.root_confidence ?? "–")}</td><td>v${s.version}</td></tr>`
    )
    .join("");
  return (
    `<table class="queue"><thead><tr>` +
    `<th>record</th><th>status</th><th>root f</th><th>version</th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function renderEvidencePanel(evidence: EvidenceResponse): string {
  const blocks = evidence.evidence.map((item) => {
    const { segments } = highlightEvidence(item.source_text, [item.text]);
    const body = segments
      .map((seg) =>
        seg.highlighted
          ? `<mark>${escapeHtml(seg.text)}</mark>`
          : escapeHtml(seg.text)
      )
      .join("");
    return (
      `<article class="evidence-chunk" data-chunk="${escapeHtml(item.chunk_id)}">` +
      `<h4>${escapeHtml(item.source_id ?? "")} · ${escapeHtml(item.kind ?? "")}</h4>` +
      `<pre class="source-text">${body}</pre></article>`
    );
  });
  return (
    `<section class="evidence-panel">` +
    `<h3>${escapeHtml(evidence.leaf_id)} — ${evidence.judgment} (f=${escapeHtml(evidence.confidence)})</h3>` +
    (blocks.join("") || `<p class="empty-state">No evidence cited.</p>`) +
    `</section>`
  );
}

export function renderConflictPrompt(): string {
  return (
    `<div class="conflict-dialog">` +
    `<p>This record changed since you loaded it. Reload to continue.</p>` +
    `<button class="reload-btn">Reload</button></div>`
  );
}
