/** Side-effect shell around the state machine: talks to the service,
 * dispatches events, retries connection failures with backoff. */

import type { ApiConfig } from './api.js';
import { ApiError, nextItem, submitLabel } from './api.js';
import type { SessionEvent, SessionState } from './stateMachine.js';
import { canSubmit, initialState, transition } from './stateMachine.js';
import type { RawLabel } from './types.js';

export interface SessionDeps {
  fetchNext?: typeof nextItem;
  sendLabel?: typeof submitLabel;
  /** called after every state change */
  onChange?: (state: SessionState) => void;
  /** backoff schedule in ms for connection retries */
  retryDelays?: number[];
  sleep?: (ms: number) => Promise<void>;
}

const DEFAULT_RETRIES = [1000, 2000, 5000];

export class TriageSession {
  state: SessionState = initialState();
  private readonly fetchNext: typeof nextItem;
  private readonly sendLabel: typeof submitLabel;
  private readonly onChange: (state: SessionState) => void;
  private readonly retryDelays: number[];
  private readonly sleep: (ms: number) => Promise<void>;
  private retryCount = 0;

  constructor(
    private readonly config: ApiConfig,
    private readonly projectId: string,
    deps: SessionDeps = {},
  ) {
    this.fetchNext = deps.fetchNext ?? nextItem;
    this.sendLabel = deps.sendLabel ?? submitLabel;
    this.onChange = deps.onChange ?? (() => undefined);
    this.retryDelays = deps.retryDelays ?? DEFAULT_RETRIES;
    this.sleep = deps.sleep ?? ((ms) => new Promise((resolve) => setTimeout(resolve, ms)));
  }

  private dispatch(event: SessionEvent): void {
    const next = transition(this.state, event);
    if (next !== this.state) {
      this.state = next;
      this.onChange(next);
    }
  }

  async start(): Promise<void> {
    await this.advance();
  }

  private async advance(): Promise<void> {
    try {
      const { item, progress } = await this.fetchNext(this.config, this.projectId);
      this.retryCount = 0;
      this.dispatch({ type: 'FETCH_SUCCESS', item, progress });
    } catch (error) {
      this.dispatch({ type: 'FETCH_ERROR', message: String(error) });
      await this.scheduleRetry();
    }
  }

  private async scheduleRetry(): Promise<void> {
    const delay = this.retryDelays[Math.min(this.retryCount, this.retryDelays.length - 1)];
    this.retryCount += 1;
    await this.sleep(delay);
    await this.retry();
  }

  async retry(): Promise<void> {
    this.dispatch({ type: 'RETRY' });
    if (this.state.status === 'loading') {
      await this.advance();
    }
  }

  selectLabel(label: RawLabel): void {
    this.dispatch({ type: 'SELECT_LABEL', label });
  }

  setNote(note: string): void {
    this.dispatch({ type: 'SET_NOTE', note });
  }

  /** Submit the selected label; a no-op unless the machine allows it. */
  async submit(): Promise<void> {
    if (!canSubmit(this.state)) {
      return; // guard enforced here too: the API is never called without a label
    }
    const item = this.state.item!;
    const label = this.state.selectedLabel!;
    const note = this.state.note || null;
    this.dispatch({ type: 'SUBMIT' });
    try {
      const { progress } = await this.sendLabel(this.config, this.projectId, item.event_id, label, note);
      this.dispatch({ type: 'SUBMIT_SUCCESS', progress });
      await this.advance();
    } catch (error) {
      if (error instanceof ApiError && error.status >= 400 && error.status < 500) {
        this.dispatch({ type: 'SUBMIT_REJECTED', message: error.message });
      } else {
        this.dispatch({ type: 'SUBMIT_FAILED', message: String(error) });
        await this.scheduleRetry();
      }
    }
  }
}
