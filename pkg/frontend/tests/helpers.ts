/**
 * Shared test scaffolding: record builders, a scripted fake fetch
 * that behaves like atlasd's endpoints, and a hand-driven
 * EventSource. The fake server is not a reimplementation of the
 * service; it serves canned records so unit tests can run without a
 * network. The live suite talks to the real thing.
 */

import type { FetchLike } from '../src/api.js';
import type { EventSourceLike, SseMessage } from '../src/events.js';
import type {
  AtlasEvent,
  AuthenticityRecord,
  CardRecord,
  FeedCard,
  ProvocationRecord,
  TrajectoryRecord,
} from '../src/types.js';

export const ZERO_HASH = '0'.repeat(64);

export function cardRecord(partial: Partial<CardRecord> & { id: string }): CardRecord {
  return {
    learner_id: 'maya',
    session_id: 'maya-met',
    ts: '2025-10-18T14:00:00Z',
    lat: 40.7794,
    lon: -73.9632,
    photo_ref: '',
    voice_text: 'a note',
    kind: 'capture',
    prev_hash: ZERO_HASH,
    self_hash: 'f'.repeat(64),
    embedding: [],
    ...partial,
  };
}

export function feedCard(seq: number, partial: Partial<CardRecord> & { id: string }): FeedCard {
  return { ...cardRecord(partial), seq };
}

export interface RequestLog {
  method: string;
  url: string;
  body: unknown;
}

export interface FakeAtlasState {
  cards: FeedCard[];
  trajectory: TrajectoryRecord | null;
  authenticity: AuthenticityRecord | null;
  events: AtlasEvent[];
  /** responses for the next POST /cards calls, consumed in order */
  ingestResponses: Array<{ card: CardRecord; provocation: ProvocationRecord | null }>;
  /** when true every request rejects like a dead network */
  offline: boolean;
  log: RequestLog[];
}

export function emptyState(): FakeAtlasState {
  return {
    cards: [],
    trajectory: null,
    authenticity: null,
    events: [],
    ingestResponses: [],
    offline: false,
    log: [],
  };
}

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json' },
  });
}

/** A fetch that serves FakeAtlasState the way atlasd would. */
export function fakeAtlas(state: FakeAtlasState): FetchLike {
  return async (url, init) => {
    const method = init?.method ?? 'GET';
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    state.log.push({ method, url, body });
    if (state.offline) throw new TypeError('fetch failed');

    const u = new URL(url);
    const path = u.pathname;

    if (method === 'POST' && /^\/sessions\/[^/]+\/cards$/.test(path)) {
      const scripted = state.ingestResponses.shift();
      if (!scripted) {
        return jsonResponse(400, { code: 'bad-card', message: 'no scripted response left' });
      }
      // keep later GETs consistent with what the POST claimed happened
      state.cards.push({ ...scripted.card, seq: state.cards.length });
      if (scripted.provocation) {
        state.cards.push({ ...scripted.provocation.card, seq: state.cards.length });
      }
      return jsonResponse(201, scripted);
    }
    if (method === 'GET' && /^\/sessions\/[^/]+\/cards$/.test(path)) {
      const after = Number(u.searchParams.get('after') ?? '-1');
      return jsonResponse(200, {
        session_id: 'maya-met',
        cards: state.cards.filter((c) => c.seq > after),
      });
    }
    if (method === 'GET' && /^\/sessions\/[^/]+\/trajectory$/.test(path)) {
      if (!state.trajectory) {
        return jsonResponse(404, { code: 'empty-trajectory', message: 'no capture cards' });
      }
      return jsonResponse(200, state.trajectory);
    }
    if (method === 'GET' && /^\/sessions\/[^/]+\/authenticity$/.test(path)) {
      if (!state.authenticity) {
        return jsonResponse(404, { code: 'session-not-found', message: 'no such session' });
      }
      return jsonResponse(200, state.authenticity);
    }
    if (method === 'GET' && /^\/sessions\/[^/]+\/events$/.test(path)) {
      const after = Number(u.searchParams.get('after') ?? '-1');
      return jsonResponse(200, {
        session_id: 'maya-met',
        events: state.events.filter((e) => e.seq > after),
      });
    }
    return jsonResponse(404, { code: 'session-not-found', message: `unscripted: ${path}` });
  };
}

/** EventSource stand-in the test drives by hand. */
export class FakeEventSource implements EventSourceLike {
  static instances: FakeEventSource[] = [];

  onopen: (() => void) | null = null;
  onerror: (() => void) | null = null;
  closed = false;
  readonly url: string;
  private readonly listeners = new Map<string, Array<(msg: SseMessage) => void>>();

  constructor(url: string) {
    this.url = url;
    FakeEventSource.instances.push(this);
  }

  static reset(): void {
    FakeEventSource.instances = [];
  }

  static latest(): FakeEventSource {
    const inst = FakeEventSource.instances.at(-1);
    if (!inst) throw new Error('no FakeEventSource was created');
    return inst;
  }

  addEventListener(type: string, listener: (msg: SseMessage) => void): void {
    const bucket = this.listeners.get(type);
    if (bucket) bucket.push(listener);
    else this.listeners.set(type, [listener]);
  }

  close(): void {
    this.closed = true;
  }

  open(): void {
    this.onopen?.();
  }

  fail(): void {
    this.onerror?.();
  }

  emit(type: string, seq: number, data: unknown): void {
    const msg: SseMessage = { data: JSON.stringify(data), lastEventId: String(seq) };
    for (const fn of this.listeners.get(type) ?? []) fn(msg);
  }
}

export function waitFor(cond: () => boolean, timeoutMs = 10000, stepMs = 25): Promise<void> {
  const start = Date.now();
  return new Promise((resolve, reject) => {
    const poll = () => {
      if (cond()) return resolve();
      if (Date.now() - start > timeoutMs) return reject(new Error('waitFor timed out'));
      setTimeout(poll, stepMs);
    };
    poll();
  });
}
