// Typed client for the annotation hub HTTP JSON API. This is the only
// place the frontend talks to the network; everything rendered is
// traceable to a response field returned here.

export type LabelName = 'entailment' | 'contradiction' | 'neutral';

export const LABELS: LabelName[] = ['entailment', 'contradiction', 'neutral'];

export type HubExample = {
  id: string;
  premise: string;
  hypothesis: string;
  domain: string;
  length: string;
};

export type NextResponse = {
  example: HubExample | null;
  done: number;
  total: number;
};

export type SessionStatus = {
  session_id: string;
  total: number;
  annotators: string[];
  per_annotator_done: Record<string, number>;
  complete: boolean;
};

export type PairwiseKappa = {
  annotators: [string, string];
  kappa: number;
};

export type AgreementReport = {
  n_examples: number;
  annotators: string[];
  pairwise_kappa: PairwiseKappa[];
  average_kappa: number;
  majority_labels: Record<string, LabelName | null>;
  n_majority: number;
  majority_coverage: number;
  unanimous_ids: string[];
  n_unanimous: number;
  ties: string[];
  model_accuracy_majority: number | null;
  model_accuracy_unanimous: number | null;
  model_kappa_majority: number | null;
  model_kappa_unanimous: number | null;
};

export type IncompleteReport = {
  error: string;
  missing: [string, string][];
};

export class ConflictError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'ConflictError';
  }
}

export class HubError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
    this.name = 'HubError';
  }
}

export class ReportIncomplete extends Error {
  constructor(readonly missing: [string, string][]) {
    super(`session incomplete: ${missing.length} votes missing`);
    this.name = 'ReportIncomplete';
  }
}

async function parseError(response: Response): Promise<string> {
  try {
    const body = await response.json();
    return typeof body.detail === 'string' ? body.detail : JSON.stringify(body.detail);
  } catch {
    return `HTTP ${response.status}`;
  }
}

export class HubClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, '') + path;
  }

  async createSession(
    annotators: string[],
    exampleIds?: string[],
    sessionId?: string,
  ): Promise<{ session_id: string; n_examples: number; annotators: string[] }> {
    const response = await fetch(this.url('/sessions'), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({
        annotators,
        example_ids: exampleIds ?? null,
        session_id: sessionId ?? null,
      }),
    });
    if (!response.ok) throw new HubError(await parseError(response), response.status);
    return response.json();
  }

  async status(sessionId: string): Promise<SessionStatus> {
    const response = await fetch(this.url(`/sessions/${sessionId}`));
    if (!response.ok) throw new HubError(await parseError(response), response.status);
    return response.json();
  }

  async next(sessionId: string, annotator: string): Promise<NextResponse> {
    const response = await fetch(
      this.url(`/sessions/${sessionId}/next?annotator=${encodeURIComponent(annotator)}`),
    );
    if (!response.ok) throw new HubError(await parseError(response), response.status);
    return response.json();
  }

  async vote(
    sessionId: string,
    exampleId: string,
    annotator: string,
    label: LabelName,
  ): Promise<{ recorded: boolean; done: number; total: number }> {
    const response = await fetch(this.url(`/sessions/${sessionId}/votes`), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ example_id: exampleId, annotator, label }),
    });
    if (response.status === 409) throw new ConflictError(await parseError(response));
    if (!response.ok) throw new HubError(await parseError(response), response.status);
    return response.json();
  }

  async report(sessionId: string): Promise<AgreementReport> {
    const response = await fetch(this.url(`/sessions/${sessionId}/report`));
    if (response.status === 409) {
      const body = await response.json();
      throw new ReportIncomplete(body.detail.missing as [string, string][]);
    }
    if (!response.ok) throw new HubError(await parseError(response), response.status);
    return response.json();
  }
}
