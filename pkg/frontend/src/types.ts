/** JSON shapes served by the judging API. Field names mirror the wire format. */

export type Grade = -1 | 0 | 1 | 2;

export interface AssignedDoc {
  topic_id: string;
  doc_id: string;
  status: "pending" | "judged";
  grade: number | null;
}

export interface AssignmentPayload {
  assessor_id: string;
  docs: AssignedDoc[];
  progress: Progress;
}

export interface Progress {
  judged: number;
  assigned: number;
}

export interface TopicLevel {
  grade: number;
  description: string;
}

export interface TopicPayload {
  topic_id: string;
  title: string;
  levels: TopicLevel[];
}

export interface DocPayload {
  topic_id: string;
  doc_id: string;
  title: string;
  body: string;
  highlight_terms: string[];
  original_bytes: number;
  truncated: boolean;
  grade: number | null;
}

export interface JudgmentResponse {
  topic_id: string;
  doc_id: string;
  grade: number;
  revision: number;
  progress: Progress;
}

/** The four grades in display order, with the labels shown on the buttons. */
export const GRADE_LABELS: ReadonlyArray<{ grade: Grade; label: string }> = [
  { grade: -1, label: "can't render" },
  { grade: 0, label: "nonrelevant" },
  { grade: 1, label: "somewhat" },
  { grade: 2, label: "highly relevant" },
];
