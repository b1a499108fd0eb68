/** Minimal fetch-based client for the session service HTTP API. */

import type { CreateSessionResponse, QueryPayload, SessionSnapshot } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: string,
  ) {
    super(`request failed with status ${status}: ${body}`);
  }
}

export interface SessionOptions {
  n_leafs?: number;
  alpha?: number;
  mode?: string;
}

export type InputObservation = { angle_radians: number } | { symbol_index: number };

async function parse<T>(response: Response): Promise<T> {
  const text = await response.text();
  if (!response.ok) {
    throw new ApiError(response.status, text);
  }
  return JSON.parse(text) as T;
}

/** Speller session client; one instance per server base URL. */
export class SpellerClient {
  private tokenCounter = 0;

  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, "")}${path}`;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchFn(this.url(path), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return parse<T>(response);
  }

  async createModel(corpusText: string, order = 3): Promise<{ lm_id: string; order: number }> {
    return this.post("/models", { corpus_text: corpusText, order });
  }

  async createChannel(
    counts: number[][],
    options: { smooth?: boolean; angles?: number[] } = {},
  ): Promise<{ channel_id: string; n_symbols: number }> {
    return this.post("/channels", { counts, ...options });
  }

  async createSession(lmId: string, channelId: string, options: SessionOptions = {}): Promise<CreateSessionResponse> {
    return this.post("/sessions", { lm_id: lmId, channel_id: channelId, ...options });
  }

  /** Submit one observation, either a raw pointer angle or a symbol index.
   * Each call carries a fresh request token so retries are idempotent;
   * the response is the next query payload (empty leafs once decided). */
  async submitInput(sessionId: string, input: InputObservation, requestToken?: string): Promise<QueryPayload> {
    const token = requestToken ?? `tok-${Date.now()}-${this.tokenCounter++}`;
    return this.post(`/sessions/${sessionId}/input`, { ...input, request_token: token });
  }

  async getSession(sessionId: string): Promise<SessionSnapshot> {
    const response = await this.fetchFn(this.url(`/sessions/${sessionId}`));
    return parse<SessionSnapshot>(response);
  }
}
