/**
 * Offline capture queue.
 *
 * A capture made without connectivity keeps the timestamp it was
 * recorded at. That ts is what the authenticity checks reason about,
 * so the flush replays the original body verbatim; only the transport
 * moves in time, never the capture. Each queued body is pinned to an
 * idempotency key, so a flush interrupted mid-request cannot
 * double-append on retry.
 *
 * Storage is pluggable: a plain in-memory list by default, a
 * Storage-backed store (localStorage) in the browser entry.
 */

import { ApiError, isNetworkError, localId } from './api.js';
import type { AtlasApi } from './api.js';
import type { CardBody } from './types.js';

export interface QueuedCapture {
  /** local queue id, not the server card id */
  id: string;
  session_id: string;
  /** exactly what will be posted, original ts included */
  body: CardBody;
  /** bookkeeping only, never sent */
  queued_at: string;
}

export interface QueueStore {
  load(): QueuedCapture[];
  save(items: QueuedCapture[]): void;
}

export class MemoryQueueStore implements QueueStore {
  private items: QueuedCapture[] = [];

  load(): QueuedCapture[] {
    return [...this.items];
  }

  save(items: QueuedCapture[]): void {
    this.items = [...items];
  }
}

interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export class WebStorageQueueStore implements QueueStore {
  constructor(
    private readonly storage: StorageLike,
    private readonly key = 'atlas-offline-queue',
  ) {}

  load(): QueuedCapture[] {
    const raw = this.storage.getItem(this.key);
    if (!raw) return [];
    try {
      return JSON.parse(raw) as QueuedCapture[];
    } catch {
      return [];
    }
  }

  save(items: QueuedCapture[]): void {
    this.storage.setItem(this.key, JSON.stringify(items));
  }
}

export class OfflineQueue {
  private readonly store: QueueStore;

  constructor(store?: QueueStore) {
    this.store = store ?? new MemoryQueueStore();
  }

  get length(): number {
    return this.store.load().length;
  }

  items(): QueuedCapture[] {
    return this.store.load();
  }

  enqueue(sessionId: string, body: CardBody): QueuedCapture {
    const item: QueuedCapture = {
      id: localId('q'),
      session_id: sessionId,
      body: { idempotency_key: body.idempotency_key ?? localId('cap'), ...body },
      queued_at: new Date().toISOString(),
    };
    this.store.save([...this.store.load(), item]);
    return item;
  }

  /**
   * Replay queued captures in FIFO order. Stops at the first network
   * failure (still offline; everything after it stays queued). A
   * server-side rejection drops the item instead: it would wedge the
   * queue forever, and the cards behind it are independent.
   */
  async flush(api: AtlasApi): Promise<{ synced: number; failed: number }> {
    let synced = 0;
    let failed = 0;
    let items = this.store.load();
    while (items.length > 0) {
      const item = items[0];
      try {
        await api.postCard(item.session_id, item.body);
        synced += 1;
      } catch (err) {
        if (isNetworkError(err)) {
          failed += 1;
          break;
        }
        if (err instanceof ApiError) {
          failed += 1;
        } else {
          throw err;
        }
      }
      items = items.slice(1);
      this.store.save(items);
    }
    return { synced, failed };
  }
}
