// Typed REST client for the adjudication service. All logic (propagation,
// status transitions, queue ordering) lives server-side; this module only
// moves payloads and maps error codes to typed errors.

import type {
  AdjudicationRecord,
  EvidenceResponse,
  OverrideRequest,
  RecordSummary,
} from "./types.js";

export class ServiceUnavailable extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ServiceUnavailable";
  }
}

export class VersionConflict extends Error {
  constructor(message: string) {
    super(message);
    this.name = "VersionConflict";
  }
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

export class AdjudicationClient {
  constructor(private baseUrl: string, private fetchFn: typeof fetch = fetch) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, {
        headers: { "Content-Type": "application/json" },
        ...init,
      });
    } catch (err) {
      throw new ServiceUnavailable(`cannot reach ${this.baseUrl}: ${String(err)}`);
    }
    if (response.status === 409) {
      throw new VersionConflict(await response.text());
    }
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return (await response.json()) as T;
  }

  /** Review queue; the service returns it sorted ascending by root confidence. */
  loadQueue(status?: string): Promise<RecordSummary[]> {
    const query = status ? `?status=${encodeURIComponent(status)}` : "";
    return this.request<RecordSummary[]>(`/adjudications${query}`);
  }

  getRecord(id: string): Promise<AdjudicationRecord> {
    return this.request<AdjudicationRecord>(`/adjudications/${id}`);
  }

  createAdjudication(body: unknown): Promise<{ id: string; status: string }> {
    return this.request(`/adjudications`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  submitOverride(recordId: string, override: OverrideRequest): Promise<AdjudicationRecord> {
    return this.request<AdjudicationRecord>(`/adjudications/${recordId}/overrides`, {
      method: "POST",
      body: JSON.stringify({ note: "", ...override }),
    });
  }

  getEvidence(recordId: string, leafId: string): Promise<EvidenceResponse> {
    return this.request<EvidenceResponse>(
      `/adjudications/${recordId}/evidence/${encodeURIComponent(leafId)}`
    );
  }
}
