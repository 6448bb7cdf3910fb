// View-model for the sequence board (pure functions; the DOM layer in
// main.ts renders the result).

import type { SequenceStatus, SequenceSummary } from "./types.js";

export interface BoardRow {
  id: string;
  size: number;
  representativeId: string;
  status: SequenceStatus;
  badge: string;
  action: "annotate" | "review";
}

const BADGES: Record<SequenceStatus, string> = {
  unannotated: "needs annotation",
  annotated: "propagating…",
  propagated: "propagated",
};

export function progressCounter(sequences: SequenceSummary[]): string {
  const annotated = sequences.filter((s) => s.status !== "unannotated").length;
  return `${annotated} / ${sequences.length}`;
}

export function boardRows(sequences: SequenceSummary[]): BoardRow[] {
  return sequences.map((s) => ({
    id: s.id,
    size: s.size,
    representativeId: s.representative_id,
    status: s.status,
    badge: BADGES[s.status],
    action: s.status === "propagated" ? "review" : "annotate",
  }));
}

export function isEmptyState(sequences: SequenceSummary[]): boolean {
  return sequences.length === 0;
}
