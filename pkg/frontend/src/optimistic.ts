import { ApiError } from "./api.js";

/**
 * Optimistic submission helper: apply the change locally first, then let
 * the server catch up. A definite server "no" (4xx/5xx) reverts the
 * local change; a network failure keeps the change visible and queues
 * the remote call for retry.
 */

export type SubmitOutcome = "ok" | "rejected" | "queued";

export interface OptimisticOptions<T> {
  /** Apply the change locally, returning a snapshot for revert. */
  apply: () => T;
  /** The actual server call. */
  remote: () => Promise<void>;
  /** Undo the local change after a server rejection. */
  revert: (snapshot: T) => void;
  /** Called with the server's reason after revert. */
  onRejected?: (error: ApiError) => void;
  /** Called when the call could not reach the server and was queued. */
  onQueued?: () => void;
}

export async function optimistic<T>(options: OptimisticOptions<T>): Promise<SubmitOutcome> {
  const snapshot = options.apply();
  try {
    await options.remote();
    return "ok";
  } catch (error) {
    if (error instanceof ApiError) {
      options.revert(snapshot);
      options.onRejected?.(error);
      return "rejected";
    }
    options.onQueued?.();
    return "queued";
  }
}

interface QueuedCall {
  run: () => Promise<void>;
  onSettled: (outcome: "ok" | "rejected", error?: ApiError) => void;
}

/**
 * Holds submissions that failed with network errors. flush() retries in
 * order; anything that fails with a network error again stays queued,
 * definite rejections are reported and dropped.
 */
export class RetryQueue {
  private readonly calls: QueuedCall[] = [];

  get size(): number {
    return this.calls.length;
  }

  push(run: () => Promise<void>, onSettled: QueuedCall["onSettled"]): void {
    this.calls.push({ run, onSettled });
  }

  async flush(): Promise<void> {
    const pending = this.calls.splice(0);
    for (const call of pending) {
      try {
        await call.run();
        call.onSettled("ok");
      } catch (error) {
        if (error instanceof ApiError) {
          call.onSettled("rejected", error);
        } else {
          this.calls.push(call); // still offline, keep it
        }
      }
    }
  }
}
