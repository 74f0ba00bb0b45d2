/** Wire types for the annotation endpoints. Blind labels only — the client
 * never sees or stores a system identity. */

export interface TaskView {
  task_id: string;
  annotator_id: string;
  item_id: string;
  segment_index: number;
  source_text: string;
  reference_text: string;
  /** Ordered (blind_label, candidate text) pairs; rendered in server order. */
  candidates: [string, string][];
  progress: { done: number; total: number };
}

export interface ScoreSubmission {
  task_id: string;
  blind_label: string;
  /** Integer in [0, 10]; the UI cannot construct anything else. */
  score: number;
  annotator_id: string;
  timestamp: string;
}

export type ErrorLevel = "lexical" | "morphological" | "syntactic";

export interface ErrorTagSubmission {
  task_id: string;
  level: ErrorLevel;
  /** Only meaningful (and only settable) for lexical errors. */
  terminology_cause?: string;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}
