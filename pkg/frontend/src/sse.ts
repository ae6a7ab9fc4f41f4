/**
 * EventSource over fetch, for runtimes without the native class.
 *
 * Speaks just enough of the SSE wire format for the atlasd stream:
 * id / event / data fields, blank-line dispatch, comment lines
 * ignored, multi-line data joined with newlines. No internal retry;
 * the feed layer owns reconnect policy, so a dropped or finished
 * stream surfaces as a single onerror call.
 */

import type { FetchLike } from './api.js';
import type { EventSourceFactory, EventSourceLike, SseMessage } from './events.js';

export class FetchEventSource implements EventSourceLike {
  onopen: (() => void) | null = null;
  onerror: (() => void) | null = null;

  private readonly url: string;
  private readonly fetchImpl: FetchLike;
  private readonly listeners = new Map<string, Array<(msg: SseMessage) => void>>();
  private readonly controller = new AbortController();
  private closed = false;

  constructor(url: string, fetchImpl?: FetchLike) {
    this.url = url;
    this.fetchImpl = fetchImpl ?? ((u, init) => fetch(u, init));
    void this.run();
  }

  addEventListener(type: string, listener: (msg: SseMessage) => void): void {
    const existing = this.listeners.get(type);
    if (existing) existing.push(listener);
    else this.listeners.set(type, [listener]);
  }

  close(): void {
    this.closed = true;
    this.controller.abort();
  }

  private fail(): void {
    if (!this.closed && this.onerror) this.onerror();
  }

  private async run(): Promise<void> {
    let resp: Response;
    try {
      resp = await this.fetchImpl(this.url, {
        signal: this.controller.signal,
        headers: { accept: 'text/event-stream' },
      });
    } catch {
      this.fail();
      return;
    }
    if (!resp.ok || !resp.body) {
      this.fail();
      return;
    }
    if (this.onopen) this.onopen();

    const reader = resp.body.getReader();
    const decoder = new TextDecoder();
    let buffered = '';
    let eventType = 'message';
    let eventId = '';
    let data: string[] = [];

    const dispatch = () => {
      if (data.length > 0) {
        const msg: SseMessage = { data: data.join('\n'), lastEventId: eventId };
        for (const fn of this.listeners.get(eventType) ?? []) fn(msg);
      }
      eventType = 'message';
      data = [];
    };

    const handleLine = (line: string) => {
      if (line === '') {
        dispatch();
        return;
      }
      if (line.startsWith(':')) return;
      const colon = line.indexOf(':');
      const field = colon < 0 ? line : line.slice(0, colon);
      let value = colon < 0 ? '' : line.slice(colon + 1);
      if (value.startsWith(' ')) value = value.slice(1);
      if (field === 'event') eventType = value;
      else if (field === 'data') data.push(value);
      else if (field === 'id') eventId = value;
      // 'retry' is ignored: reconnect timing lives in the feed layer
    };

    try {
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        buffered += decoder.decode(value, { stream: true });
        let nl: number;
        while ((nl = buffered.indexOf('\n')) >= 0) {
          handleLine(buffered.slice(0, nl).replace(/\r$/, ''));
          buffered = buffered.slice(nl + 1);
        }
      }
    } catch {
      this.fail();
      return;
    }
    // server ended the stream; from the feed's side that is a drop
    this.fail();
  }
}

export function fetchEventSourceFactory(fetchImpl?: FetchLike): EventSourceFactory {
  return (url) => new FetchEventSource(url, fetchImpl);
}
