import { afterEach, beforeEach, describe, expect, it, vi } from 'vitest';

import { AtlasApi } from '../src/api.js';
import { EventFeed } from '../src/events.js';
import type { AtlasEvent } from '../src/types.js';
import { FakeEventSource, emptyState, fakeAtlas } from './helpers.js';

function feedWith(
  state = emptyState(),
  options: ConstructorParameters<typeof EventFeed>[2] = {},
): { feed: EventFeed; got: AtlasEvent[]; state: ReturnType<typeof emptyState> } {
  const api = new AtlasApi('http://x:1', fakeAtlas(state));
  const feed = new EventFeed(api, 'maya-met', {
    esFactory: (url) => new FakeEventSource(url),
    ...options,
  });
  const got: AtlasEvent[] = [];
  feed.onEvent((e) => got.push(e));
  return { feed, got, state };
}

beforeEach(() => {
  FakeEventSource.reset();
  vi.useFakeTimers();
});

afterEach(() => {
  vi.useRealTimers();
});

describe('EventFeed over SSE', () => {
  it('dispatches typed events and advances the cursor', () => {
    const { feed, got } = feedWith();
    feed.start();
    const es = FakeEventSource.latest();
    expect(es.url).toContain('/sessions/maya-met/events?after=-1');
    es.open();
    es.emit('card-appended', 0, { id: 'maya-met:000' });
    es.emit('provocation-issued', 1, { card: { id: 'maya-met:002' }, link: null });
    expect(got.map((e) => e.type)).toEqual(['card-appended', 'provocation-issued']);
    expect(feed.cursor).toBe(1);
    feed.stop();
  });

  it('skips replayed seqs at or below the cursor', () => {
    const { feed, got } = feedWith();
    feed.start();
    const es = FakeEventSource.latest();
    es.open();
    es.emit('card-appended', 0, {});
    es.emit('card-appended', 0, {});
    es.emit('card-appended', 1, {});
    expect(got).toHaveLength(2);
    feed.stop();
  });

  it('reconnects after a drop, resuming from the cursor', () => {
    const { feed } = feedWith();
    feed.start();
    const first = FakeEventSource.latest();
    first.open();
    first.emit('card-appended', 0, {});
    first.emit('card-appended', 1, {});

    first.fail();
    expect(first.closed).toBe(true);
    expect(FakeEventSource.instances).toHaveLength(1);
    vi.advanceTimersByTime(1000);
    expect(FakeEventSource.instances).toHaveLength(2);
    expect(FakeEventSource.latest().url).toContain('after=1');
    feed.stop();
  });

  it('backs off exponentially and caps the delay', () => {
    const { feed } = feedWith(emptyState(), { maxBackoffMs: 4000, streamFailuresBeforePoll: 99 });
    feed.start();
    // each failure doubles the wait: 1000, 2000, 4000, then capped
    for (const delay of [1000, 2000, 4000, 4000]) {
      FakeEventSource.latest().fail();
      const before = FakeEventSource.instances.length;
      vi.advanceTimersByTime(delay - 1);
      expect(FakeEventSource.instances).toHaveLength(before);
      vi.advanceTimersByTime(1);
      expect(FakeEventSource.instances).toHaveLength(before + 1);
    }
    feed.stop();
  });

  it('a successful open resets the backoff', () => {
    const { feed } = feedWith();
    feed.start();
    FakeEventSource.latest().fail();
    vi.advanceTimersByTime(1000);
    const second = FakeEventSource.latest();
    second.open();

    second.fail();
    vi.advanceTimersByTime(1000);
    // back to the initial 1s, not 2s
    expect(FakeEventSource.instances).toHaveLength(3);
    feed.stop();
  });
});

describe('EventFeed polling fallback', () => {
  it('falls back to the json log after repeated stream failures', async () => {
    const { feed, got, state } = feedWith(emptyState(), {
      streamFailuresBeforePoll: 2,
      pollIntervalMs: 500,
    });
    state.events = [
      { seq: 0, type: 'card-appended', data: { id: 'maya-met:000' } },
      { seq: 1, type: 'pivot-detected', data: { index: 1 } },
    ];
    feed.start();
    FakeEventSource.latest().fail();
    vi.advanceTimersByTime(1000);
    FakeEventSource.latest().fail();
    expect(feed.mode).toBe('poll');

    await vi.advanceTimersByTimeAsync(1);
    expect(got.map((e) => e.seq)).toEqual([0, 1]);

    // nothing new: the next tick dispatches nothing extra
    await vi.advanceTimersByTimeAsync(500);
    expect(got).toHaveLength(2);

    state.events.push({ seq: 2, type: 'card-appended', data: { id: 'maya-met:001' } });
    await vi.advanceTimersByTimeAsync(500);
    expect(got.map((e) => e.seq)).toEqual([0, 1, 2]);
    feed.stop();
  });

  it('keeps the shared cursor across the stream-to-poll handoff', async () => {
    const { feed, got, state } = feedWith(emptyState(), {
      streamFailuresBeforePoll: 1,
      pollIntervalMs: 500,
    });
    feed.start();
    const es = FakeEventSource.latest();
    es.open();
    es.emit('card-appended', 0, { id: 'maya-met:000' });
    state.events = [
      { seq: 0, type: 'card-appended', data: { id: 'maya-met:000' } },
      { seq: 1, type: 'card-appended', data: { id: 'maya-met:001' } },
    ];

    es.fail();
    expect(feed.mode).toBe('poll');
    await vi.advanceTimersByTimeAsync(1);
    // seq 0 already seen over the stream; polling only adds seq 1
    expect(got.map((e) => e.seq)).toEqual([0, 1]);
    feed.stop();
  });

  it('polls from the start when no EventSource exists', async () => {
    const { feed, got, state } = feedWith(emptyState(), { esFactory: null, pollIntervalMs: 500 });
    state.events = [{ seq: 0, type: 'card-appended', data: {} }];
    feed.start();
    expect(feed.mode).toBe('poll');
    expect(FakeEventSource.instances).toHaveLength(0);
    await vi.advanceTimersByTimeAsync(1);
    expect(got).toHaveLength(1);
    feed.stop();
  });

  it('swallows poll errors and keeps the cadence', async () => {
    const { feed, got, state } = feedWith(emptyState(), { esFactory: null, pollIntervalMs: 500 });
    state.offline = true;
    feed.start();
    await vi.advanceTimersByTimeAsync(1);
    expect(got).toHaveLength(0);

    state.offline = false;
    state.events = [{ seq: 0, type: 'card-appended', data: {} }];
    await vi.advanceTimersByTimeAsync(500);
    expect(got).toHaveLength(1);
    feed.stop();
  });
});

describe('EventFeed lifecycle', () => {
  it('stop() closes the source and cancels reconnects', () => {
    const { feed } = feedWith();
    feed.start();
    const es = FakeEventSource.latest();
    feed.stop();
    expect(es.closed).toBe(true);
    es.fail();
    vi.advanceTimersByTime(60000);
    expect(FakeEventSource.instances).toHaveLength(1);
  });

  it('start() is idempotent while running', () => {
    const { feed } = feedWith();
    feed.start();
    feed.start();
    expect(FakeEventSource.instances).toHaveLength(1);
    feed.stop();
  });
});
