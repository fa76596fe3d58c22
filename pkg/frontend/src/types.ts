// Payload shapes of the session service API.

export interface Recommendation {
  decision: number[];
  performance: number[];
}

export interface QueryBase {
  session_id: string;
  query_count: number;
  mmer: number | null;
  initial_mmer: number | null;
  criteria_names: string[] | null;
}

export interface QueryReady extends QueryBase {
  status: "ready";
  query_index: number;
  x: number[];
  y: number[];
}

export interface QueryFinished extends QueryBase {
  status: "finished";
  recommendation: Recommendation;
}

export interface QueryComputing {
  status: "computing";
  session_id: string;
  query_count: number;
}

export type QueryPayload = QueryReady | QueryFinished | QueryComputing;

export interface AnswerAccepted {
  status: "computing";
  session_id: string;
  answered: number;
}

export interface HistoryEntry {
  queryIndex: number;
  x: number[];
  y: number[];
  answer: 0 | 1;
}

export function isReady(p: QueryPayload): p is QueryReady {
  return p.status === "ready";
}

export function isFinished(p: QueryPayload): p is QueryFinished {
  return p.status === "finished";
}
