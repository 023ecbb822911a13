// Labeling flow state machine: one example at a time, keyboard shortcuts
// 1/2/3 for entailment/contradiction/neutral, explicit handling for
// duplicate-vote conflicts (skip forward with a notice) and network
// failures (retry banner; the chosen label is kept, never silently lost).

import { ConflictError, HubClient, HubExample, LabelName } from './api.js';

export const KEY_TO_LABEL: Record<string, LabelName> = {
  '1': 'entailment',
  '2': 'contradiction',
  '3': 'neutral',
};

export type SubmissionStatus = 'idle' | 'ok' | 'conflict' | 'offline';

export type UiSessionState = {
  sessionId: string;
  annotator: string;
  current: HubExample | null;
  done: number;
  total: number;
  finished: boolean;
  lastSubmission: SubmissionStatus;
  notice: string | null;
  pendingLabel: LabelName | null;
};

export class LabelingSession {
  state: UiSessionState;

  constructor(
    private readonly client: HubClient,
    sessionId: string,
    annotator: string,
  ) {
    this.state = {
      sessionId,
      annotator,
      current: null,
      done: 0,
      total: 0,
      finished: false,
      lastSubmission: 'idle',
      notice: null,
      pendingLabel: null,
    };
  }

  /** Fetch the next unlabeled example (or the completion state). */
  async start(): Promise<void> {
    await this.advance();
  }

  private async advance(): Promise<void> {
    try {
      const next = await this.client.next(this.state.sessionId, this.state.annotator);
      this.state.current = next.example;
      this.state.done = next.done;
      this.state.total = next.total;
      this.state.finished = next.example === null;
      this.state.pendingLabel = null;
    } catch (error) {
      this.markOffline(error);
    }
  }

  /** Keyboard entry point; unknown keys are ignored. */
  async submitKey(key: string): Promise<void> {
    const label = KEY_TO_LABEL[key];
    if (label !== undefined) await this.submit(label);
  }

  async submit(label: LabelName): Promise<void> {
    const example = this.state.current;
    if (example === null) return;
    this.state.pendingLabel = label;
    try {
      await this.client.vote(this.state.sessionId, example.id, this.state.annotator, label);
      this.state.lastSubmission = 'ok';
      this.state.notice = null;
      await this.advance();
    } catch (error) {
      if (error instanceof ConflictError) {
        // someone (or a previous tab) already voted here: move on, but say so
        this.state.lastSubmission = 'conflict';
        this.state.notice = `vote for ${example.id} already recorded; skipped ahead`;
        await this.advance();
        return;
      }
      this.markOffline(error);
    }
  }

  /** Re-submit after a network failure; the pending label was kept. */
  async retry(): Promise<void> {
    const pending = this.state.pendingLabel;
    if (pending !== null && this.state.current !== null) {
      await this.submit(pending);
    } else {
      await this.advance();
    }
  }

  private markOffline(error: unknown): void {
    this.state.lastSubmission = 'offline';
    this.state.notice = `hub unreachable (${String(error)}); nothing was lost, retry when back online`;
  }
}
