/** Wire types for the session service payloads (consumed verbatim). */

export type LeafKind = "plain" | "wildcard" | "goback" | "stop";

export interface LeafRecord {
  prefix: string;
  kind: LeafKind;
  mass: number;
  covered: string[];
  symbol: number | null;
  angle: number | null;
  parent_leaf_prev: string | null;
}

export interface QueryPayload {
  session_id: string;
  trial_index: number;
  root_prefix: string;
  decided_text: string;
  leafs: LeafRecord[];
  capacity_bits: number;
  expected_information_bits: number;
}

export interface SessionHandle {
  session_id: string;
  created_at: number;
  config: { n_leafs: number; alpha: number; mode: string };
  state: "awaiting_input" | "decided";
}

export interface CreateSessionResponse {
  session: SessionHandle;
  query: QueryPayload;
}

export interface SessionSnapshot {
  session: SessionHandle;
  decided_text: string;
  history_length: number;
  history: unknown[];
  top_beliefs: [string, number][];
  last_payload: QueryPayload | null;
}
