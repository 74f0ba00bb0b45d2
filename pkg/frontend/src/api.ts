import { TransientError } from "./queue.js";
import {
  ApiError,
  ErrorTagSubmission,
  ScoreSubmission,
  TaskView,
} from "./types.js";

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

/** Thin typed client over the service's /api/v1/annotation endpoints. */
export class AnnotationClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  /** Next unscored task for the annotator, or "done" when the queue is
   * exhausted.  Network failures surface as TransientError so callers can
   * show a retry banner. */
  async fetchNext(annotatorId: string): Promise<TaskView | "done"> {
    const url = `${this.baseUrl}/api/v1/annotation/next?annotator=${encodeURIComponent(annotatorId)}`;
    const response = await this.request(url);
    if (response.status === 204) {
      return "done";
    }
    await this.raiseForStatus(response);
    return (await response.json()) as TaskView;
  }

  async submitScore(submission: ScoreSubmission): Promise<void> {
    const response = await this.request(
      `${this.baseUrl}/api/v1/annotation/score`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(submission),
      },
    );
    await this.raiseForStatus(response);
  }

  async submitErrorTag(submission: ErrorTagSubmission): Promise<void> {
    const response = await this.request(
      `${this.baseUrl}/api/v1/annotation/error`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(submission),
      },
    );
    await this.raiseForStatus(response);
  }

  async summary(): Promise<unknown> {
    const response = await this.request(
      `${this.baseUrl}/api/v1/annotation/summary`,
    );
    await this.raiseForStatus(response);
    return response.json();
  }

  private async request(
    url: string,
    init?: RequestInit,
  ): Promise<Response> {
    let response: Response;
    try {
      response = await this.fetchFn(url, init);
    } catch {
      throw new TransientError(`cannot reach ${url}`);
    }
    if (response.status >= 500) {
      throw new TransientError(`server error ${response.status}`);
    }
    return response;
  }

  private async raiseForStatus(response: Response): Promise<void> {
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { error?: string };
        if (body.error) detail = body.error;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
  }
}
