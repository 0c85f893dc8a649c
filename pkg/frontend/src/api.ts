// Thin client for the search service; every displayed number originates
// from one of these responses (the UI never re-ranks client-side).

import type { AskResponse, DocResponse, ExplorerState, SearchResponse } from "./types";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

async function parseError(response: Response): Promise<never> {
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    if (body && typeof body === "object") {
      message = JSON.stringify(body.error ?? body);
    }
  } catch {
    // keep the status line
  }
  throw new ApiError(message, response.status);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async search(state: ExplorerState): Promise<SearchResponse> {
    const params = new URLSearchParams({
      q: state.query,
      radius_m: String(state.radiusM),
      alpha: String(state.alpha),
      k: String(state.k),
      method: state.method,
    });
    if (state.lat !== null && state.lon !== null) {
      params.set("lat", String(state.lat));
      params.set("lon", String(state.lon));
    }
    const response = await this.fetchFn(`${this.baseUrl}/api/search?${params.toString()}`);
    if (!response.ok) await parseError(response);
    return (await response.json()) as SearchResponse;
  }

  async ask(state: ExplorerState): Promise<AskResponse> {
    const body: Record<string, unknown> = {
      question: state.query,
      radius_m: state.radiusM,
      alpha: state.alpha,
    };
    if (state.lat !== null && state.lon !== null) {
      body.lat = state.lat;
      body.lon = state.lon;
    }
    const response = await this.fetchFn(`${this.baseUrl}/api/ask`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as AskResponse;
  }

  async doc(docId: string): Promise<DocResponse> {
    const response = await this.fetchFn(`${this.baseUrl}/api/doc/${encodeURIComponent(docId)}`);
    if (!response.ok) await parseError(response);
    return (await response.json()) as DocResponse;
  }
}
