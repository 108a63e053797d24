import type {
  AssignmentPayload,
  DocPayload,
  Grade,
  JudgmentResponse,
  Progress,
  TopicPayload,
} from "./types.js";

/** Server said no: carries the HTTP status and the error detail text. */
export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
    this.status = status;
  }
}

/**
 * Thin fetch wrapper around the judging service. Every call sends the
 * assessor's bearer token; non-2xx responses become ApiError, network
 * failures stay TypeError so callers can tell "rejected" from "offline".
 */
export class JudgeApi {
  constructor(
    private readonly baseUrl: string,
    private readonly token: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: {
        "X-Auth-Token": this.token,
        ...(body === undefined ? {} : { "Content-Type": "application/json" }),
      },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const parsed = (await response.json()) as { detail?: string };
        if (parsed.detail) detail = parsed.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  assignment(): Promise<AssignmentPayload> {
    return this.request("GET", "/assignment");
  }

  topic(topicId: string): Promise<TopicPayload> {
    return this.request("GET", `/topic/${encodeURIComponent(topicId)}`);
  }

  doc(topicId: string, docId: string): Promise<DocPayload> {
    return this.request(
      "GET",
      `/doc/${encodeURIComponent(topicId)}/${encodeURIComponent(docId)}`,
    );
  }

  submit(topicId: string, docId: string, grade: Grade): Promise<JudgmentResponse> {
    return this.request("POST", "/judgment", {
      topic_id: topicId,
      doc_id: docId,
      grade,
    });
  }

  progress(): Promise<Progress> {
    return this.request("GET", "/progress");
  }
}
