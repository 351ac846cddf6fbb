// Frame scheduling for one view panel: debounced requests, at most one
// in flight, latest state wins, and responses applied in sequence order
// only (a stale frame never overwrites a newer one).

import { buildWarpQuery, ViewState } from "./viewstate.js";

export const DEBOUNCE_MS = 50;

export interface FrameResult {
  state: ViewState;
  preview: boolean;
  body: Blob | ArrayBuffer;
  sequence: number;
}

type FetchFn = (url: string) => Promise<Blob | ArrayBuffer>;

export interface SchedulerHooks {
  onFrame: (frame: FrameResult) => void;
  onError: (err: unknown) => void;
  /** Injectable for tests; defaults to globalThis.setTimeout/clearTimeout. */
  setTimer?: (fn: () => void, ms: number) => unknown;
  clearTimer?: (handle: unknown) => void;
}

export class FrameScheduler {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchFn;
  private readonly hooks: SchedulerHooks;

  private pending: { state: ViewState; preview: boolean } | null = null;
  private timer: unknown = null;
  private inFlight = false;
  private nextSequence = 1;
  private appliedSequence = 0;

  /** URLs actually sent, newest last (exposed for tests and debugging). */
  readonly requestLog: string[] = [];

  constructor(baseUrl: string, fetchFn: FetchFn, hooks: SchedulerHooks) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchFn = fetchFn;
    this.hooks = hooks;
  }

  /** Ask for a frame of `state`; coalesces bursts within the debounce
   *  window and defers while a request is in flight. */
  request(state: ViewState, preview = false): void {
    this.pending = { state, preview };
    const set = this.hooks.setTimer ?? ((fn, ms) => setTimeout(fn, ms));
    const clear = this.hooks.clearTimer ?? ((h) => clearTimeout(h as number));
    if (this.timer !== null) clear(this.timer);
    this.timer = set(() => {
      this.timer = null;
      this.firePending();
    }, DEBOUNCE_MS);
  }

  /** Skip the debounce (used on pointer release for the full-res frame). */
  flush(): void {
    if (this.timer !== null) {
      const clear = this.hooks.clearTimer ?? ((h) => clearTimeout(h as number));
      clear(this.timer);
      this.timer = null;
    }
    this.firePending();
  }

  get busy(): boolean {
    return this.inFlight;
  }

  private firePending(): void {
    if (this.pending === null || this.inFlight) return;
    const { state, preview } = this.pending;
    this.pending = null;
    void this.send(state, preview);
  }

  private async send(state: ViewState, preview: boolean): Promise<void> {
    this.inFlight = true;
    const sequence = this.nextSequence++;
    const url = `${this.baseUrl}/api/warp?${buildWarpQuery(state, preview)}`;
    this.requestLog.push(url);
    try {
      const body = await this.fetchFn(url);
      if (sequence > this.appliedSequence) {
        this.appliedSequence = sequence;
        this.hooks.onFrame({ state, preview, body, sequence });
      }
    } catch (err) {
      this.hooks.onError(err);
    } finally {
      this.inFlight = false;
      // exactly one trailing request carries whatever arrived meanwhile
      this.firePending();
    }
  }
}
