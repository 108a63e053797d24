import type { AssignedDoc, AssignmentPayload, Grade, Progress } from "./types.js";

/** One row of the assignment list as the UI tracks it. */
export interface DocRow {
  topicId: string;
  docId: string;
  status: "pending" | "judged";
  grade: Grade | null;
  /** An optimistic submission is in flight (or queued for retry). */
  inFlight: boolean;
}

export interface ViewState {
  assessorId: string;
  docs: DocRow[];
  /** Index into docs, or -1 before anything is selected. */
  selected: number;
}

export function fromAssignment(payload: AssignmentPayload): ViewState {
  const docs = payload.docs.map((d: AssignedDoc): DocRow => ({
    topicId: d.topic_id,
    docId: d.doc_id,
    status: d.status,
    grade: d.grade as Grade | null,
    inFlight: false,
  }));
  return { assessorId: payload.assessor_id, docs, selected: docs.length ? 0 : -1 };
}

/** judged/assigned counts straight off the rows (in-flight rows count as judged). */
export function progressOf(docs: DocRow[]): Progress {
  return {
    judged: docs.filter((d) => d.status === "judged").length,
    assigned: docs.length,
  };
}

/**
 * The next pending row after `from`, wrapping around; -1 when everything
 * is judged. Used for auto-advance after a grade lands.
 */
export function nextPendingIndex(docs: DocRow[], from: number): number {
  if (!docs.length) return -1;
  for (let step = 1; step <= docs.length; step++) {
    const i = (from + step) % docs.length;
    const row = docs[i];
    if (row && row.status === "pending") return i;
  }
  return -1;
}

function updateRow(
  docs: DocRow[],
  topicId: string,
  docId: string,
  change: Partial<DocRow>,
): DocRow[] {
  return docs.map((row) =>
    row.topicId === topicId && row.docId === docId ? { ...row, ...change } : row,
  );
}

/** Optimistically mark a row judged while the submission is in flight. */
export function markPendingSubmit(
  docs: DocRow[],
  topicId: string,
  docId: string,
  grade: Grade,
): DocRow[] {
  return updateRow(docs, topicId, docId, { status: "judged", grade, inFlight: true });
}

export function confirmSubmit(docs: DocRow[], topicId: string, docId: string): DocRow[] {
  return updateRow(docs, topicId, docId, { inFlight: false });
}

/** Server rejected the grade: restore what the row looked like before. */
export function rollbackSubmit(
  docs: DocRow[],
  topicId: string,
  docId: string,
  previous: Pick<DocRow, "status" | "grade">,
): DocRow[] {
  return updateRow(docs, topicId, docId, { ...previous, inFlight: false });
}
