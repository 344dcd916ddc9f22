/**
 * HTTP client for the reasoning service.
 *
 * One method per endpoint, each validating the response body against the
 * wire schema before returning it. The client also exposes an intercept
 * hook: every exchange is reported with its raw parsed body and elapsed
 * time, which is how the tests prove that each number on screen equals a
 * number the service actually sent.
 */

import type { ZodType } from "zod";
import {
  ApplyResponseSchema,
  ErrorEnvelopeSchema,
  LosResponseSchema,
  MitigateResponseSchema,
  NoncomplianceResponseSchema,
  SatisfactionResponseSchema,
  SessionCreatedSchema,
  SessionListSchema,
  SessionStateSchema,
  SessionTheorySchema,
  TrustResponseSchema,
} from "./schemas.js";
import type {
  ApplyResponse,
  ErrorEnvelope,
  EvaluationMode,
  LosResponse,
  MitigateResponse,
  NoncomplianceResponse,
  SatisfactionResponse,
  SessionCreated,
  SessionState,
  SessionTheory,
  StateDoc,
  TrustResponse,
} from "./schemas.js";

/** One observed request/response exchange. */
export interface InterceptRecord {
  method: string;
  path: string;
  status: number;
  /** Raw parsed JSON body, before schema validation. */
  body: unknown;
  /** Wall-clock milliseconds from request start to body parse. */
  ms: number;
}

export type InterceptHook = (record: InterceptRecord) => void;

/**
 * A non-2xx response from the service. Carries the validated error
 * envelope so callers can dispatch on the machine-readable code and, for
 * ambiguous applies, read the embedded candidate states.
 */
export class ServiceError extends Error {
  readonly status: number;
  readonly code: string;
  readonly envelope: ErrorEnvelope;

  constructor(status: number, envelope: ErrorEnvelope) {
    super(`${envelope.error.code}: ${envelope.error.message}`);
    this.name = "ServiceError";
    this.status = status;
    this.code = envelope.error.code;
    this.envelope = envelope;
  }

  /** Candidate final states of an ambiguous apply, if this is one. */
  branches(): StateDoc[] | null {
    return this.envelope.error.branches ?? null;
  }
}

/** Request bodies accepted by the query endpoints. */
export interface SatisfactionQuery {
  mode?: EvaluationMode;
  set?: string[];
}

export interface TrustQuery {
  mode?: EvaluationMode;
  set?: string[];
}

export interface LosQuery {
  mode?: EvaluationMode;
  set?: string[];
  weights?: Record<string, string | number>;
  priority?: string[];
}

export interface MitigateQuery {
  concerns: string[];
  horizon?: number;
  minimal?: boolean;
  mode?: EvaluationMode;
  set?: string[];
  plans?: string[][];
  policy?: string;
  weights?: Record<string, string | number>;
  priority?: string[];
}

export interface NoncomplianceQuery {
  sa: string[];
  sc: string[];
  n: number;
  mode?: "weak" | "strong";
  evaluation_mode?: EvaluationMode;
}

export interface WhatIfQuery {
  set: string[];
  mode?: EvaluationMode;
}

export interface ApplyRequest {
  plan: string[];
  branch?: number;
  set?: string[];
}

export class ConsoleClient {
  private readonly baseUrl: string;
  private readonly onIntercept: InterceptHook | null;

  constructor(baseUrl: string, onIntercept?: InterceptHook) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.onIntercept = onIntercept ?? null;
  }

  // -- transport -----------------------------------------------------------

  private async exchange(method: string, path: string, body?: unknown): Promise<unknown> {
    const started = performance.now();
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await fetch(this.baseUrl + path, init);
    const parsed: unknown = await response.json();
    const ms = performance.now() - started;
    if (this.onIntercept) {
      this.onIntercept({ method, path, status: response.status, body: parsed, ms });
    }
    if (!response.ok) {
      throw new ServiceError(response.status, ErrorEnvelopeSchema.parse(parsed));
    }
    return parsed;
  }

  private async call<T>(method: string, path: string, schema: ZodType<T>, body?: unknown): Promise<T> {
    const parsed = await this.exchange(method, path, body);
    const checked = schema.safeParse(parsed);
    if (!checked.success) {
      throw new Error(`response from ${path} does not match the wire contract: ${checked.error.message}`);
    }
    return checked.data;
  }

  // -- sessions --------------------------------------------------------------

  async listSessions(): Promise<string[]> {
    const out = await this.call("GET", "/sessions", SessionListSchema);
    return out.sessions;
  }

  createSession(document: unknown): Promise<SessionCreated> {
    return this.call("POST", "/sessions", SessionCreatedSchema, { document });
  }

  getState(sessionId: string): Promise<SessionState> {
    return this.call("GET", `/sessions/${sessionId}/state`, SessionStateSchema);
  }

  getTheory(sessionId: string): Promise<SessionTheory> {
    return this.call("GET", `/sessions/${sessionId}/theory`, SessionTheorySchema);
  }

  // -- queries ---------------------------------------------------------------

  satisfaction(sessionId: string, query: SatisfactionQuery = {}): Promise<SatisfactionResponse> {
    return this.call("POST", `/sessions/${sessionId}/query/satisfaction`,
      SatisfactionResponseSchema, query);
  }

  trust(sessionId: string, query: TrustQuery = {}): Promise<TrustResponse> {
    return this.call("POST", `/sessions/${sessionId}/query/trust`, TrustResponseSchema, query);
  }

  los(sessionId: string, query: LosQuery = {}): Promise<LosResponse> {
    return this.call("POST", `/sessions/${sessionId}/query/los`, LosResponseSchema, query);
  }

  mitigate(sessionId: string, query: MitigateQuery): Promise<MitigateResponse> {
    return this.call("POST", `/sessions/${sessionId}/query/mitigate`, MitigateResponseSchema, query);
  }

  noncompliance(sessionId: string, query: NoncomplianceQuery): Promise<NoncomplianceResponse> {
    return this.call("POST", `/sessions/${sessionId}/query/noncompliance`,
      NoncomplianceResponseSchema, query);
  }

  // -- exploration and mutation -----------------------------------------------

  whatIf(sessionId: string, query: WhatIfQuery): Promise<SatisfactionResponse> {
    return this.call("POST", `/sessions/${sessionId}/whatif`, SatisfactionResponseSchema, query);
  }

  apply(sessionId: string, request: ApplyRequest): Promise<ApplyResponse> {
    return this.call("POST", `/sessions/${sessionId}/apply`, ApplyResponseSchema, request);
  }
}
