/**
 * Latest-wins frame scheduling: at most one request in flight, and rapid
 * input coalesces to the newest pose instead of queueing a backlog. A
 * steering human wants freshness, not a replay of every intermediate pose.
 */

export type RequestFn<T, R> = (payload: T) => Promise<R>;

export class LatestWinsScheduler<T, R> {
  private inFlight = false;
  private pending: T | null = null;
  private generation = 0;

  constructor(
    private readonly request: RequestFn<T, R>,
    private readonly onResult: (result: R, payload: T) => void,
    private readonly onError: (error: unknown) => void = () => {},
  ) {}

  /** Submit a payload; it replaces any not-yet-started pending payload. */
  submit(payload: T): void {
    if (this.inFlight) {
      this.pending = payload;
      return;
    }
    void this.run(payload);
  }

  /** Drop any pending payload and ignore the in-flight response. */
  cancel(): void {
    this.pending = null;
    this.generation += 1;
    this.inFlight = false;
  }

  get busy(): boolean {
    return this.inFlight;
  }

  private async run(payload: T): Promise<void> {
    this.inFlight = true;
    const generation = this.generation;
    try {
      const result = await this.request(payload);
      if (generation === this.generation) {
        this.onResult(result, payload);
      }
    } catch (error) {
      if (generation === this.generation) {
        this.onError(error);
      }
    }
    if (generation !== this.generation) {
      return;
    }
    this.inFlight = false;
    if (this.pending !== null) {
      const next = this.pending;
      this.pending = null;
      void this.run(next);
    }
  }
}
