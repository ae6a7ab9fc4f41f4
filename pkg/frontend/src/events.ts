/**
 * Live event feed for one session.
 *
 * Prefers the SSE stream at /sessions/{id}/events. On a drop it
 * reconnects with exponential backoff, resuming from the last seen
 * seq so nothing is missed; after repeated consecutive failures it
 * degrades to polling the same log as JSON. Both transports share
 * one cursor, which is what makes the fallback lossless. A seq at
 * or below the cursor is a replay and is silently skipped.
 */

import type { AtlasApi } from './api.js';
import type { AtlasEvent, AtlasEventType } from './types.js';

export interface SseMessage {
  data: string;
  lastEventId: string;
}

export interface EventSourceLike {
  onopen: (() => void) | null;
  onerror: (() => void) | null;
  addEventListener(type: string, listener: (msg: SseMessage) => void): void;
  close(): void;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

export type EventHandler = (event: AtlasEvent) => void;

const EVENT_TYPES: AtlasEventType[] = ['card-appended', 'provocation-issued', 'pivot-detected'];

export interface EventFeedOptions {
  /** null forces polling; undefined uses the platform EventSource if present */
  esFactory?: EventSourceFactory | null;
  initialBackoffMs?: number;
  maxBackoffMs?: number;
  pollIntervalMs?: number;
  streamFailuresBeforePoll?: number;
}

export type FeedMode = 'stopped' | 'sse' | 'poll';

export class EventFeed {
  readonly api: AtlasApi;
  readonly sessionId: string;
  /** seq of the last event handed to subscribers */
  cursor = -1;
  mode: FeedMode = 'stopped';

  private readonly esFactory: EventSourceFactory | null;
  private readonly initialBackoffMs: number;
  private readonly maxBackoffMs: number;
  private readonly pollIntervalMs: number;
  private readonly streamFailuresBeforePoll: number;

  private handlers: EventHandler[] = [];
  private es: EventSourceLike | null = null;
  private backoffMs: number;
  private failures = 0;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private pollTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(api: AtlasApi, sessionId: string, options: EventFeedOptions = {}) {
    this.api = api;
    this.sessionId = sessionId;
    this.esFactory =
      options.esFactory !== undefined
        ? options.esFactory
        : typeof EventSource !== 'undefined'
          ? (url) => new EventSource(url) as unknown as EventSourceLike
          : null;
    this.initialBackoffMs = options.initialBackoffMs ?? 1000;
    this.maxBackoffMs = options.maxBackoffMs ?? 30000;
    this.pollIntervalMs = options.pollIntervalMs ?? 2000;
    this.streamFailuresBeforePoll = options.streamFailuresBeforePoll ?? 3;
    this.backoffMs = this.initialBackoffMs;
  }

  onEvent(fn: EventHandler): void {
    this.handlers.push(fn);
  }

  start(): void {
    if (this.mode !== 'stopped') return;
    if (this.esFactory) this.connect();
    else this.startPolling();
  }

  stop(): void {
    this.mode = 'stopped';
    if (this.es) {
      this.es.close();
      this.es = null;
    }
    if (this.reconnectTimer !== null) {
      clearTimeout(this.reconnectTimer);
      this.reconnectTimer = null;
    }
    if (this.pollTimer !== null) {
      clearTimeout(this.pollTimer);
      this.pollTimer = null;
    }
  }

  private dispatch(event: AtlasEvent): void {
    if (event.seq <= this.cursor) return;
    this.cursor = event.seq;
    for (const fn of this.handlers) fn(event);
  }

  private connect(): void {
    this.mode = 'sse';
    const es = this.esFactory!(this.api.eventStreamUrl(this.sessionId, this.cursor));
    this.es = es;
    es.onopen = () => {
      this.failures = 0;
      this.backoffMs = this.initialBackoffMs;
    };
    es.onerror = () => this.onStreamError(es);
    for (const type of EVENT_TYPES) {
      es.addEventListener(type, (msg) => {
        this.dispatch({ seq: Number(msg.lastEventId), type, data: JSON.parse(msg.data) });
      });
    }
  }

  private onStreamError(es: EventSourceLike): void {
    // a closed source can still fire queued callbacks; ignore stale ones
    if (this.mode !== 'sse' || es !== this.es) return;
    es.close();
    this.es = null;
    this.failures += 1;
    if (this.failures >= this.streamFailuresBeforePoll) {
      // the stream will not hold here; the JSON log carries the same
      // events, so stay on polling for the rest of this feed's life
      this.startPolling();
      return;
    }
    this.reconnectTimer = setTimeout(() => {
      this.reconnectTimer = null;
      if (this.mode === 'sse') this.connect();
    }, this.backoffMs);
    this.backoffMs = Math.min(this.backoffMs * 2, this.maxBackoffMs);
  }

  private startPolling(): void {
    this.mode = 'poll';
    const tick = async () => {
      this.pollTimer = null;
      if (this.mode !== 'poll') return;
      try {
        const { events } = await this.api.pollEvents(this.sessionId, this.cursor);
        for (const e of events) this.dispatch(e);
      } catch {
        // still unreachable; keep the cadence and try again
      }
      if (this.mode === 'poll') {
        this.pollTimer = setTimeout(() => void tick(), this.pollIntervalMs);
      }
    };
    void tick();
  }
}
