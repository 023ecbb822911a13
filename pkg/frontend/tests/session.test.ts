import { describe, expect, it } from 'vitest';

import { ConflictError, HubClient, HubExample, LabelName, NextResponse } from '../src/api.js';
import { KEY_TO_LABEL, LabelingSession } from '../src/session.js';

type VoteCall = { exampleId: string; annotator: string; label: LabelName };

/** In-memory stand-in for HubClient with scriptable failures. */
class FakeClient {
  votes: VoteCall[] = [];
  conflictOn = new Set<string>();
  offline = false;

  constructor(private examples: HubExample[]) {}

  async next(_sessionId: string, annotator: string): Promise<NextResponse> {
    if (this.offline) throw new TypeError('fetch failed');
    const voted = new Set(
      this.votes.filter((v) => v.annotator === annotator).map((v) => v.exampleId),
    );
    for (const id of this.conflictOn) voted.add(id);
    const remaining = this.examples.filter((ex) => !voted.has(ex.id));
    return {
      example: remaining[0] ?? null,
      done: this.examples.length - remaining.length,
      total: this.examples.length,
    };
  }

  async vote(
    _sessionId: string,
    exampleId: string,
    annotator: string,
    label: LabelName,
  ): Promise<{ recorded: boolean; done: number; total: number }> {
    if (this.offline) throw new TypeError('fetch failed');
    if (this.conflictOn.has(exampleId)) throw new ConflictError('already voted');
    this.votes.push({ exampleId, annotator, label });
    return { recorded: true, done: this.votes.length, total: this.examples.length };
  }
}

function examples(n: number): HubExample[] {
  return Array.from({ length: n }, (_, i) => ({
    id: `e${i}`,
    premise: `P ${i}`,
    hypothesis: `H ${i}`,
    domain: 'news',
    length: 'short',
  }));
}

function makeSession(client: FakeClient): LabelingSession {
  return new LabelingSession(client as unknown as HubClient, 's1', 'ana');
}

describe('keyboard mapping', () => {
  it('maps 1/2/3 to entailment/contradiction/neutral', () => {
    expect(KEY_TO_LABEL['1']).toBe('entailment');
    expect(KEY_TO_LABEL['2']).toBe('contradiction');
    expect(KEY_TO_LABEL['3']).toBe('neutral');
  });

  it('pressing 1 votes entailment and advances', async () => {
    const client = new FakeClient(examples(3));
    const session = makeSession(client);
    await session.start();
    expect(session.state.current?.id).toBe('e0');
    await session.submitKey('1');
    expect(client.votes).toEqual([{ exampleId: 'e0', annotator: 'ana', label: 'entailment' }]);
    expect(session.state.current?.id).toBe('e1');
    expect(session.state.done).toBe(1);
    expect(session.state.lastSubmission).toBe('ok');
  });

  it('ignores unmapped keys', async () => {
    const client = new FakeClient(examples(1));
    const session = makeSession(client);
    await session.start();
    await session.submitKey('x');
    expect(client.votes).toEqual([]);
    expect(session.state.current?.id).toBe('e0');
  });
});

describe('completion', () => {
  it('shows the completion state when nothing remains', async () => {
    const client = new FakeClient(examples(2));
    const session = makeSession(client);
    await session.start();
    await session.submit('neutral');
    await session.submit('contradiction');
    expect(session.state.finished).toBe(true);
    expect(session.state.current).toBeNull();
    expect(session.state.done).toBe(2);
  });
});

describe('conflict handling', () => {
  it('skips forward with a notice on duplicate votes', async () => {
    const client = new FakeClient(examples(3));
    const session = makeSession(client);
    await session.start();
    client.conflictOn.add('e0');
    await session.submit('entailment');
    expect(session.state.lastSubmission).toBe('conflict');
    expect(session.state.notice).toContain('e0');
    expect(session.state.current?.id).toBe('e1');
    expect(client.votes).toEqual([]);
  });
});

describe('network failure', () => {
  it('keeps the pending label and recovers on retry', async () => {
    const client = new FakeClient(examples(2));
    const session = makeSession(client);
    await session.start();
    client.offline = true;
    await session.submit('neutral');
    expect(session.state.lastSubmission).toBe('offline');
    expect(session.state.notice).toContain('retry');
    expect(session.state.pendingLabel).toBe('neutral');
    expect(session.state.current?.id).toBe('e0'); // nothing lost

    client.offline = false;
    await session.retry();
    expect(client.votes).toEqual([{ exampleId: 'e0', annotator: 'ana', label: 'neutral' }]);
    expect(session.state.current?.id).toBe('e1');
    expect(session.state.lastSubmission).toBe('ok');
  });
});
