/**
 * Polling feed with last-response-wins ordering and stale-state tracking.
 *
 * Responses carry a monotonic sequence token taken when the request starts;
 * an out-of-order response (older token than the newest applied) is dropped
 * so overlapping polls can never interleave renders inconsistently. A failed
 * poll keeps the last good data and raises the stale flag instead of
 * throwing - the UI shows a stale banner with the last-updated time.
 */

export interface FeedState<T> {
  data: T | null;
  stale: boolean;
  lastUpdated: number | null;
  lastError: string | null;
}

export class PollingFeed<T> {
  private sequence = 0;
  private applied = 0;
  readonly state: FeedState<T> = {
    data: null,
    stale: false,
    lastUpdated: null,
    lastError: null,
  };

  constructor(
    private readonly fetcher: () => Promise<T>,
    private readonly onChange: (state: FeedState<T>) => void = () => {},
    private readonly now: () => number = () => Date.now(),
  ) {}

  /** One poll cycle. Never throws. Returns true when fresh data applied. */
  async pollOnce(): Promise<boolean> {
    const token = ++this.sequence;
    try {
      const data = await this.fetcher();
      return this.commit(token, data);
    } catch (error) {
      this.state.stale = true;
      this.state.lastError = error instanceof Error ? error.message : String(error);
      this.onChange(this.state);
      return false;
    }
  }

  /** Apply a response only if nothing newer has been applied already. */
  commit(token: number, data: T): boolean {
    if (token <= this.applied) {
      return false; // stale response from an older in-flight poll
    }
    this.applied = token;
    this.state.data = data;
    this.state.stale = false;
    this.state.lastError = null;
    this.state.lastUpdated = this.now();
    this.onChange(this.state);
    return true;
  }

  /** Token for an externally managed request (tests drive ordering). */
  begin(): number {
    return ++this.sequence;
  }
}
