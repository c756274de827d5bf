// View-model for the checklist tree. Display state only: every judgment
// and confidence is the service's value verbatim — no re-propagation here.

import type { AdjudicationRecord, JudgmentValue, NodeResultPayload } from "./types.js";

export type ConfidenceBand = "high" | "mid" | "low";

export interface BandThresholds {
  high: number;
  mid: number;
}

export const DEFAULT_BANDS: BandThresholds = { high: 0.8, mid: 0.5 };

export interface TreeNodeVM {
  nodeId: string;
  /** Checklist text for this node (empty if the record omits it). */
  label: string;
  operator?: string;
  judgment: JudgmentValue;
  /** Exact confidence string from the service, shown as-is. */
  confidence: string;
  band: ConfidenceBand;
  isLeaf: boolean;
  overridden: boolean;
  expanded: boolean;
  children: TreeNodeVM[];
}

export interface TreeViewModel {
  recordId: string;
  version: number;
  status: string;
  needsReview: boolean;
  decisionLabel: string;
  rootConfidence: string;
  root: TreeNodeVM;
}

/** Parse the service's exact confidence strings ("0.7", "1.0", "2/3"). */
export function confidenceToNumber(confidence: string): number {
  if (confidence.includes("/")) {
    const [num, den] = confidence.split("/");
    return Number(num) / Number(den);
  }
  return Number(confidence);
}

export function confidenceBand(
  confidence: string,
  thresholds: BandThresholds = DEFAULT_BANDS
): ConfidenceBand {
  const value = confidenceToNumber(confidence);
  if (value >= thresholds.high) return "high";
  if (value >= thresholds.mid) return "mid";
  return "low";
}

export function decisionLabel(y: number): string {
  if (y === 1) return "Approved";
  if (y === -1) return "Denied";
  return "Insufficient evidence";
}

interface ChecklistIndexEntry {
  text: string;
  operator?: string;
}

function indexChecklist(
  node: AdjudicationRecord["checklist"],
  into: Map<string, ChecklistIndexEntry>
): void {
  into.set(node.id, { text: node.text, operator: node.operator });
  for (const child of node.children ?? []) indexChecklist(child, into);
}

export function buildTreeViewModel(
  record: AdjudicationRecord,
  thresholds: BandThresholds = DEFAULT_BANDS
): TreeViewModel {
  const labels = new Map<string, ChecklistIndexEntry>();
  indexChecklist(record.checklist, labels);

  const build = (node: NodeResultPayload): TreeNodeVM => {
    const children = (node.children ?? []).map(build);
    const entry = labels.get(node.node_id);
    const leaf = record.leaf_results[node.node_id];
    return {
      nodeId: node.node_id,
      label: entry?.text ?? "",
      operator: entry?.operator,
      judgment: node.judgment,
      confidence: node.confidence,
      band: confidenceBand(node.confidence, thresholds),
      isLeaf: children.length === 0,
      overridden: leaf?.overridden_by !== undefined,
      // collapse satisfied subtrees so reviewers land on the contested ones
      expanded: node.judgment !== "True",
      children,
    };
  };

  return {
    recordId: record.id,
    version: record.version,
    status: record.status,
    needsReview: record.status === "NeedsReview",
    decisionLabel: decisionLabel(record.decision.y),
    rootConfidence: record.decision.root_confidence,
    root: build(record.tree),
  };
}

/** Flatten for verbatim comparison with the service's NodeResult tree. */
export function flattenJudgments(
  vm: TreeNodeVM
): Array<{ nodeId: string; judgment: JudgmentValue; confidence: string }> {
  return [
    { nodeId: vm.nodeId, judgment: vm.judgment, confidence: vm.confidence },
    ...vm.children.flatMap(flattenJudgments),
  ];
}
