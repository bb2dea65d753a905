// Thin client for the /v1 endpoints.

import type { RecommendResponse, ReferenceDocument, ScopeName } from "./types";

export class ApiClient {
  constructor(private baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  async recommend(
    document: ReferenceDocument,
    scope: ScopeName,
    repositoryId: string,
    limit: number,
    userHash: string,
    variant?: string
  ): Promise<RecommendResponse> {
    const body: Record<string, unknown> = {
      document,
      scope,
      limit,
      user_hash: userHash,
    };
    if (scope === "repository") body.repository_id = repositoryId;
    if (variant) body.variant = variant;
    const response = await fetch(`${this.baseUrl}/v1/recommend`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) {
      throw new Error(`recommend failed: HTTP ${response.status}`);
    }
    return (await response.json()) as RecommendResponse;
  }

  /** Fire-and-forget click/impression event; never throws. */
  sendEvent(event: {
    user_hash: string;
    doc_id: string;
    kind: "click" | "impression";
    source_doc_id?: string;
    variant?: string;
  }): Promise<void> {
    const payload = { ...event, access_time: new Date().toISOString() };
    return fetch(`${this.baseUrl}/v1/events`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    })
      .then(() => undefined)
      .catch(() => undefined);
  }

  /** Report an irrelevant recommendation; never throws. */
  sendFeedback(referenceKey: string, recommendedId: string, reporterHash: string): Promise<void> {
    return fetch(`${this.baseUrl}/v1/feedback`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        reference_key: referenceKey,
        recommended_id: recommendedId,
        reporter_hash: reporterHash,
      }),
    })
      .then(() => undefined)
      .catch(() => undefined);
  }
}
