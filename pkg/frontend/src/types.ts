// API payload shapes, mirrored verbatim from the adjudication service.
// The UI never re-derives any of these values locally.

export type JudgmentValue = "True" | "False" | "NoInformation";

export interface NodeResultPayload {
  node_id: string;
  judgment: JudgmentValue;
  /** Exact confidence as serialized by the service, e.g. "0.7" or "2/3". */
  confidence: string;
  children?: NodeResultPayload[];
}

export interface LeafResultPayload {
  leaf_id: string;
  judgment: JudgmentValue;
  confidence: string;
  evidence: string[];
  votes: Record<string, number>;
  runs: number;
  hallucinated_citations: number;
  histogram_entropy: number;
  reviewer_note?: string;
  overridden_by?: string;
}

export interface ChunkPayload {
  text: string;
  source_id: string;
  kind: "Sentence" | "Resource";
}

export interface DecisionPayload {
  /** 1 approved, -1 denied, 0 insufficient evidence. */
  y: number;
  root_confidence: string;
}

export interface AdjudicationRecord {
  id: string;
  created_at: string;
  version: number;
  status: string;
  checklist: ChecklistNodePayload;
  chunks: Record<string, ChunkPayload>;
  sources: Record<string, { id?: string; kind?: string; text?: string }>;
  leaf_results: Record<string, LeafResultPayload>;
  tree: NodeResultPayload;
  decision: DecisionPayload;
  hallucinated_citations: number;
}

export interface ChecklistNodePayload {
  id: string;
  text: string;
  operator?: string;
  children?: ChecklistNodePayload[];
}

export interface RecordSummary {
  id: string;
  status: string;
  created_at: string;
  version: number;
  y: number | null;
  root_confidence: string | null;
}

export interface OverrideRequest {
  leaf_id: string;
  judgment: JudgmentValue;
  reviewer: string;
  note?: string;
  version: number;
}

export interface EvidenceItem {
  chunk_id: string;
  text: string;
  source_id: string | null;
  kind: string | null;
  source_text: string;
}

export interface EvidenceResponse {
  leaf_id: string;
  judgment: JudgmentValue;
  confidence: string;
  evidence: EvidenceItem[];
}
