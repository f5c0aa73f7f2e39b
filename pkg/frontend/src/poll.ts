/** Event polling at a fixed cadence with a monotone `since` cursor. */

import type { ApiClient, SessionEvent } from "./api.js";

const POLL_INTERVAL_MS = 500;

export class EventPoller {
  private timer: ReturnType<typeof setInterval> | null = null;
  private since = 0;
  private inFlight = false;

  constructor(
    private readonly api: ApiClient,
    private readonly sessionId: string,
    private readonly onBatch: (events: SessionEvent[]) => void,
    private readonly onError: (error: unknown) => void = () => {},
    private readonly intervalMs = POLL_INTERVAL_MS,
  ) {}

  start(): void {
    if (this.timer !== null) return;
    this.timer = setInterval(() => void this.tick(), this.intervalMs);
    void this.tick();
  }

  stop(): void {
    if (this.timer !== null) clearInterval(this.timer);
    this.timer = null;
  }

  async tick(): Promise<void> {
    if (this.inFlight) return;
    this.inFlight = true;
    try {
      const { events } = await this.api.events(this.sessionId, this.since);
      if (events.length > 0) {
        this.since = events[events.length - 1]?.seq ?? this.since;
        this.onBatch(events);
      }
    } catch (error) {
      this.onError(error);
    } finally {
      this.inFlight = false;
    }
  }
}
