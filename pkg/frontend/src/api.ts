/** Typed client for the session service's /v1 endpoints (the UI's only data source). */

export interface FeedbackEntry {
  round: number;
  slot: number;
  result: "PASS" | "FAIL";
}

export interface Outcome {
  outcome: "won" | "lost" | "forfeit";
  reason: string | null;
  submitted: number[] | null;
  rounds: number;
  queries: number;
}

export interface SessionState {
  session_id: string;
  setup_id: string;
  mode: "classic" | "nightmare";
  difficulty: string;
  strategy: string;
  phase: "proposal" | "question" | "deduce" | "finished";
  round_number: number;
  queries_this_round: number;
  queries_remaining: number;
  slot_count: number;
  feedback: FeedbackEntry[];
  finished: boolean;
  outcome: Outcome | null;
  prompt: string;
  kind?: "ok" | "retry" | "final";
  last_feedback?: FeedbackEntry | null;
}

export interface SetupListing {
  setup_id: string;
  mode: string;
  difficulty: string;
  verifiers: number;
}

export interface TranscriptEvent {
  event: string;
  seq: number;
  [key: string]: unknown;
}

export class ApiError extends Error {
  constructor(message: string, readonly retriable: boolean, readonly status?: number) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch (error) {
      throw new ApiError(`network failure: ${String(error)}`, true);
    }
    if (!response.ok) {
      const body = await response.text();
      // 409 = another action in flight on this session; safe to retry later
      throw new ApiError(body || response.statusText, response.status === 409, response.status);
    }
    return (await response.json()) as T;
  }

  async listSetups(): Promise<SetupListing[]> {
    const payload = await this.request<{ batches: Record<string, SetupListing[]> }>("/v1/setups");
    return Object.values(payload.batches).flat();
  }

  createSession(setupId: string, participant = "human"): Promise<SessionState> {
    return this.request<SessionState>("/v1/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ setup_id: setupId, participant }),
    });
  }

  getPrompt(sessionId: string): Promise<SessionState> {
    return this.request<SessionState>(`/v1/sessions/${sessionId}/prompt`);
  }

  postAction(sessionId: string, text: string, reasoningNote?: string): Promise<SessionState> {
    const body: Record<string, string> = { text };
    const note = reasoningNote?.trim();
    if (note) body["reasoning_note"] = note;
    return this.request<SessionState>(`/v1/sessions/${sessionId}/actions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getTranscript(sessionId: string): Promise<{ events: TranscriptEvent[] }> {
    return this.request<{ events: TranscriptEvent[] }>(`/v1/sessions/${sessionId}/transcript`);
  }
}
