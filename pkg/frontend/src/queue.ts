/** In-memory retry queue for score submissions.
 *
 * Transient failures (network errors, 5xx) keep items queued and retried
 * with exponential backoff; permanent rejections (4xx) are reported and
 * dropped.  At most one flush is in flight at a time, and items are always
 * delivered in submission order.
 */

export type Sender<T> = (item: T) => Promise<void>;

export interface QueueOptions {
  baseDelayMs?: number;
  maxDelayMs?: number;
  sleep?: (ms: number) => Promise<void>;
}

export class TransientError extends Error {}

const defaultSleep = (ms: number) =>
  new Promise<void>((resolve) => setTimeout(resolve, ms));

export class RetryQueue<T> {
  private items: T[] = [];
  private flushing: Promise<void> | null = null;
  private attempt = 0;
  private readonly baseDelayMs: number;
  private readonly maxDelayMs: number;
  private readonly sleep: (ms: number) => Promise<void>;

  constructor(
    private readonly send: Sender<T>,
    private readonly onRejected: (item: T, error: unknown) => void = () => {},
    options: QueueOptions = {},
  ) {
    this.baseDelayMs = options.baseDelayMs ?? 250;
    this.maxDelayMs = options.maxDelayMs ?? 8000;
    this.sleep = options.sleep ?? defaultSleep;
  }

  get pending(): number {
    return this.items.length;
  }

  enqueue(item: T): void {
    this.items.push(item);
  }

  /** Drain the queue; resolves when every queued item was either delivered
   * or permanently rejected.  Concurrent calls share one in-flight drain. */
  flush(): Promise<void> {
    if (!this.flushing) {
      this.flushing = this.drain().finally(() => {
        this.flushing = null;
      });
    }
    return this.flushing;
  }

  private async drain(): Promise<void> {
    while (this.items.length > 0) {
      const item = this.items[0]!;
      try {
        await this.send(item);
        this.items.shift();
        this.attempt = 0;
      } catch (error) {
        if (error instanceof TransientError) {
          const delay = Math.min(
            this.baseDelayMs * 2 ** this.attempt,
            this.maxDelayMs,
          );
          this.attempt += 1;
          await this.sleep(delay);
        } else {
          this.items.shift();
          this.attempt = 0;
          this.onRejected(item, error);
        }
      }
    }
  }
}
