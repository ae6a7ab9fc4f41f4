/**
 * Thin typed client for the atlasd HTTP API.
 *
 * Server-side rejections carry a stable machine code in a flat
 * {code, message} body; those become ApiError. Transport failures
 * (offline, refused connection) keep their original TypeError, so
 * callers can tell "the server said no" from "no server reachable".
 */

import type {
  AtlasEvent,
  AuthenticityRecord,
  CardBody,
  FeedCard,
  GeoPoint,
  IngestResponse,
  LinkRecord,
  SessionHeader,
  TrajectoryRecord,
} from './types.js';

export class ApiError extends Error {
  status: number;
  code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.name = 'ApiError';
    this.status = status;
    this.code = code;
  }
}

/** True for "the network ate it" failures, false for server-issued errors. */
export function isNetworkError(err: unknown): boolean {
  return err instanceof TypeError;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface CreateSessionBody {
  learner_id: string;
  title: string;
  session_id?: string;
  geofence?: { lat: number; lon: number; radius_m: number };
  embed_dim?: number;
}

export class AtlasApi {
  readonly base: string;
  readonly fetchImpl: FetchLike;

  constructor(base: string, fetchImpl?: FetchLike) {
    this.base = base.replace(/\/+$/, '');
    // bind lazily so a page-level fetch override still applies
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { 'content-type': 'application/json' };
      init.body = JSON.stringify(body);
    }
    const resp = await this.fetchImpl(`${this.base}${path}`, init);
    const payload = await resp.json().catch(() => null);
    if (!resp.ok) {
      const rec = (payload ?? {}) as { code?: string; message?: string };
      throw new ApiError(resp.status, rec.code ?? 'unknown', rec.message ?? `HTTP ${resp.status}`);
    }
    return payload as T;
  }

  createSession(body: CreateSessionBody): Promise<SessionHeader> {
    return this.request('POST', '/sessions', body);
  }

  postCard(sessionId: string, body: CardBody): Promise<IngestResponse> {
    return this.request('POST', `/sessions/${encodeURIComponent(sessionId)}/cards`, body);
  }

  getCards(sessionId: string, after = -1): Promise<{ session_id: string; cards: FeedCard[] }> {
    return this.request('GET', `/sessions/${encodeURIComponent(sessionId)}/cards?after=${after}`);
  }

  getTrajectory(sessionId: string): Promise<TrajectoryRecord> {
    return this.request('GET', `/sessions/${encodeURIComponent(sessionId)}/trajectory`);
  }

  getAuthenticity(sessionId: string): Promise<AuthenticityRecord> {
    return this.request('GET', `/sessions/${encodeURIComponent(sessionId)}/authenticity`);
  }

  getLinks(learnerId: string): Promise<{ learner_id: string; links: LinkRecord[] }> {
    return this.request('GET', `/learners/${encodeURIComponent(learnerId)}/links`);
  }

  /** The event log as JSON, for clients that cannot hold a stream open. */
  pollEvents(sessionId: string, after = -1): Promise<{ session_id: string; events: AtlasEvent[] }> {
    return this.request(
      'GET',
      `/sessions/${encodeURIComponent(sessionId)}/events?format=json&after=${after}`,
    );
  }

  eventStreamUrl(sessionId: string, after = -1): string {
    return `${this.base}/sessions/${encodeURIComponent(sessionId)}/events?after=${after}`;
  }

  health(): Promise<{ ok: boolean }> {
    return this.request('GET', '/healthz');
  }
}

/** RFC 3339 UTC with seconds precision, the only ts format atlasd accepts. */
export function nowTs(): string {
  return new Date().toISOString().replace(/\.\d{3}Z$/, 'Z');
}

export function localId(prefix: string): string {
  return `${prefix}-${Date.now()}-${Math.random().toString(36).slice(2, 8)}`;
}

export type { GeoPoint };
