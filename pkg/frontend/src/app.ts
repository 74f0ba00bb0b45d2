import { AnnotationClient } from "./api.js";
import { isValidScore, scoreForKey } from "./keyboard.js";
import { QueueOptions, RetryQueue, TransientError } from "./queue.js";
import {
  ApiError,
  ErrorLevel,
  ScoreSubmission,
  TaskView,
} from "./types.js";

export interface AppOptions {
  queue?: QueueOptions;
  now?: () => string;
}

type AppState = "loading" | "task" | "done" | "offline";

const ERROR_LEVELS: ErrorLevel[] = ["lexical", "morphological", "syntactic"];
const TERMINOLOGY_CAUSES = [
  "unseen_term",
  "context_mistranslation",
  "inconsistent_terminology",
];

/** Single-column, keyboard-first scoring flow.
 *
 * Digits score the highlighted candidate and advance to the next one; once
 * every candidate of the task has a score, the batch is submitted and the
 * next task loads automatically.  Arrow keys revisit candidates (rescoring
 * overwrites server-side).  A connection banner with retry appears when the
 * service is unreachable; queued scores are retried in the background.
 */
export class AnnotatorApp {
  private state: AppState = "loading";
  private task: TaskView | null = null;
  private candidateIndex = 0;
  private scores = new Map<string, number>();
  private banner: string | null = null;
  private tagLevel: ErrorLevel | null = null;
  private tagNotice: string | null = null;
  private readonly queue: RetryQueue<ScoreSubmission>;
  private readonly now: () => string;
  private readonly keyListener = (event: KeyboardEvent) =>
    this.handleKey(event);

  constructor(
    private readonly root: HTMLElement,
    private readonly client: AnnotationClient,
    private readonly annotatorId: string,
    options: AppOptions = {},
  ) {
    this.now = options.now ?? (() => new Date().toISOString());
    this.queue = new RetryQueue(
      (submission) => this.client.submitScore(submission),
      (_, error) => {
        this.banner = error instanceof Error ? error.message : String(error);
        this.render();
      },
      options.queue,
    );
  }

  async start(): Promise<void> {
    this.root.ownerDocument.addEventListener("keydown", this.keyListener);
    await this.loadNext();
  }

  stop(): void {
    this.root.ownerDocument.removeEventListener("keydown", this.keyListener);
  }

  get pendingSubmissions(): number {
    return this.queue.pending;
  }

  private async loadNext(): Promise<void> {
    this.state = "loading";
    this.banner = null;
    this.render();
    let next: TaskView | "done";
    try {
      next = await this.client.fetchNext(this.annotatorId);
    } catch (error) {
      this.state = "offline";
      this.banner =
        error instanceof TransientError
          ? "Service unreachable — press Enter or click Retry."
          : error instanceof ApiError
            ? error.message
            : String(error);
      this.render();
      this.emit("app-error");
      return;
    }
    if (next === "done") {
      this.state = "done";
      this.task = null;
      this.render();
      this.emit("app-done");
      return;
    }
    this.state = "task";
    this.task = next;
    this.candidateIndex = 0;
    this.scores = new Map();
    this.tagLevel = null;
    this.tagNotice = null;
    this.render();
    this.emit("task-loaded");
  }

  private handleKey(event: KeyboardEvent): void {
    if (this.state === "offline" && event.key === "Enter") {
      event.preventDefault();
      void this.loadNext();
      return;
    }
    if (this.state !== "task" || !this.task) {
      return;
    }
    if (event.key === "ArrowLeft" || event.key === "ArrowRight") {
      event.preventDefault();
      const step = event.key === "ArrowLeft" ? -1 : 1;
      const count = this.task.candidates.length;
      this.candidateIndex = (this.candidateIndex + step + count) % count;
      this.render();
      return;
    }
    const score = scoreForKey(event);
    if (score === null || !isValidScore(score)) {
      return;
    }
    event.preventDefault();
    const candidate = this.task.candidates[this.candidateIndex];
    if (!candidate) {
      return;
    }
    this.scores.set(candidate[0], score);
    if (this.candidateIndex < this.task.candidates.length - 1) {
      this.candidateIndex += 1;
    }
    this.render();
    if (this.scores.size === this.task.candidates.length) {
      void this.submitTask();
    }
  }

  private async submitTask(): Promise<void> {
    if (!this.task) return;
    for (const [label] of this.task.candidates) {
      const score = this.scores.get(label);
      if (score === undefined) return;
      this.queue.enqueue({
        task_id: this.task.task_id,
        blind_label: label,
        score,
        annotator_id: this.annotatorId,
        timestamp: this.now(),
      });
    }
    await this.queue.flush();
    await this.loadNext();
  }

  private async submitErrorTag(cause: string | null): Promise<void> {
    if (!this.task || !this.tagLevel) return;
    try {
      await this.client.submitErrorTag({
        task_id: this.task.task_id,
        level: this.tagLevel,
        ...(this.tagLevel === "lexical" && cause
          ? { terminology_cause: cause }
          : {}),
      });
      this.tagNotice = "error tag recorded";
    } catch (error) {
      this.tagNotice = error instanceof Error ? error.message : String(error);
    }
    this.render();
  }

  private emit(name: string): void {
    this.root.dispatchEvent(new CustomEvent(name, { bubbles: true }));
  }

  // -- rendering ----------------------------------------------------------

  private render(): void {
    const doc = this.root.ownerDocument;
    this.root.textContent = "";

    if (this.banner) {
      const banner = doc.createElement("div");
      banner.dataset.role = "banner";
      banner.textContent = this.banner;
      const retry = doc.createElement("button");
      retry.textContent = "Retry";
      retry.addEventListener("click", () => void this.loadNext());
      banner.appendChild(retry);
      this.root.appendChild(banner);
    }

    if (this.state === "loading") {
      const note = doc.createElement("p");
      note.dataset.role = "loading";
      note.textContent = "Loading…";
      this.root.appendChild(note);
      return;
    }
    if (this.state === "done") {
      const completion = doc.createElement("div");
      completion.dataset.role = "completion";
      completion.textContent = "All tasks scored. ";
      const link = doc.createElement("a");
      link.href = "#summary";
      link.textContent = "View summary";
      completion.appendChild(link);
      this.root.appendChild(completion);
      return;
    }
    if (this.state !== "task" || !this.task) {
      return;
    }

    const progress = doc.createElement("p");
    progress.dataset.role = "progress";
    progress.textContent = `Task ${this.task.progress.done + 1} of ${this.task.progress.total}`;
    this.root.appendChild(progress);

    const source = doc.createElement("section");
    source.dataset.role = "source";
    source.textContent = this.task.source_text;
    this.root.appendChild(source);

    const reference = doc.createElement("section");
    reference.dataset.role = "reference";
    reference.textContent = this.task.reference_text;
    this.root.appendChild(reference);

    const list = doc.createElement("ol");
    list.dataset.role = "candidates";
    this.task.candidates.forEach(([label, text], index) => {
      const item = doc.createElement("li");
      item.dataset.role = "candidate";
      item.dataset.label = label;
      if (index === this.candidateIndex) {
        item.dataset.current = "true";
      }
      const header = doc.createElement("strong");
      header.textContent = label;
      item.appendChild(header);
      const body = doc.createElement("span");
      body.textContent = ` ${text} `;
      item.appendChild(body);
      const scoreBox = doc.createElement("em");
      scoreBox.dataset.role = "score";
      const score = this.scores.get(label);
      scoreBox.textContent = score === undefined ? "–" : String(score);
      item.appendChild(scoreBox);
      list.appendChild(item);
    });
    this.root.appendChild(list);

    this.root.appendChild(this.renderTagPanel(doc));

    const hint = doc.createElement("p");
    hint.dataset.role = "hint";
    hint.textContent = "Keys 0–9 score the highlighted candidate; Shift+0 = 10.";
    this.root.appendChild(hint);
  }

  private renderTagPanel(doc: Document): HTMLElement {
    const panel = doc.createElement("fieldset");
    panel.dataset.role = "error-tagging";
    const legend = doc.createElement("legend");
    legend.textContent = "Tag an error (optional)";
    panel.appendChild(legend);

    const cause = doc.createElement("select");
    cause.dataset.role = "cause";
    for (const option of TERMINOLOGY_CAUSES) {
      const el = doc.createElement("option");
      el.value = option;
      el.textContent = option;
      cause.appendChild(el);
    }
    cause.disabled = this.tagLevel !== "lexical";

    for (const level of ERROR_LEVELS) {
      const button = doc.createElement("button");
      button.dataset.role = "level";
      button.dataset.level = level;
      button.textContent = level;
      if (this.tagLevel === level) {
        button.dataset.selected = "true";
      }
      button.addEventListener("click", () => {
        this.tagLevel = level;
        this.render();
      });
      panel.appendChild(button);
    }
    panel.appendChild(cause);

    const submit = doc.createElement("button");
    submit.dataset.role = "tag-submit";
    submit.textContent = "Submit tag";
    submit.disabled = this.tagLevel === null;
    submit.addEventListener("click", () => {
      void this.submitErrorTag(
        this.tagLevel === "lexical" ? cause.value : null,
      );
    });
    panel.appendChild(submit);

    if (this.tagNotice) {
      const notice = doc.createElement("p");
      notice.dataset.role = "tag-notice";
      notice.textContent = this.tagNotice;
      panel.appendChild(notice);
    }
    return panel;
  }
}
