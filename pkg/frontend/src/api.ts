// Typed client for the annotation service. fetch is injectable so the
// views and tests can run against an in-memory service.

import type { LegendEntry, MetricsDoc, SequenceDetail, SequenceSummary } from "./types.js";

export class OfflineError extends Error {
  constructor(cause: unknown) {
    super(`service unreachable: ${String(cause)}`);
  }
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}/api/v1${path}`, init);
    } catch (cause) {
      throw new OfflineError(cause);
    }
    if (!response.ok) {
      let message = `${response.status}`;
      try {
        const body = (await response.json()) as { error?: string };
        if (body.error) message = body.error;
      } catch {
        // non-JSON error body
      }
      throw new ApiError(response.status, message);
    }
    return response;
  }

  async listSequences(): Promise<SequenceSummary[]> {
    return (await this.request("/sequences")).json();
  }

  async sequenceDetail(id: string): Promise<{ detail: SequenceDetail; etag: string | null }> {
    const response = await this.request(`/sequences/${encodeURIComponent(id)}`);
    return { detail: await response.json(), etag: response.headers.get("etag") };
  }

  async legend(): Promise<LegendEntry[]> {
    return (await this.request("/legend")).json();
  }

  async imageBytes(sequenceId: string, imageId: string): Promise<Uint8Array> {
    const response = await this.request(
      `/sequences/${encodeURIComponent(sequenceId)}/images/${encodeURIComponent(imageId)}`,
    );
    return new Uint8Array(await response.arrayBuffer());
  }

  async mergedMask(sequenceId: string, imageId: string): Promise<Uint8Array> {
    const response = await this.request(
      `/sequences/${encodeURIComponent(sequenceId)}/images/${encodeURIComponent(imageId)}/merged`,
    );
    return new Uint8Array(await response.arrayBuffer());
  }

  async annotation(sequenceId: string): Promise<Uint8Array> {
    const response = await this.request(`/sequences/${encodeURIComponent(sequenceId)}/annotation`);
    return new Uint8Array(await response.arrayBuffer());
  }

  async putAnnotation(sequenceId: string, png: Uint8Array): Promise<SequenceDetail> {
    const response = await this.request(`/sequences/${encodeURIComponent(sequenceId)}/annotation`, {
      method: "PUT",
      body: png.slice().buffer as ArrayBuffer,
      headers: { "content-type": "image/png" },
    });
    return response.json();
  }

  async metrics(): Promise<MetricsDoc> {
    return (await this.request("/metrics?against=gt")).json();
  }
}
