/**
 * ClientSessionView: the state behind the live session screen.
 *
 * Holds the card feed (newest first, ordered by server sequence
 * numbers), the pending provocation banner, both trajectory panels,
 * and the authenticity badge. Everything epistemic arrives from
 * atlasd; this module only re-projects server records into screen
 * state, and refreshes that state from events without a reload.
 */

import { ApiError, AtlasApi, isNetworkError, localId, nowTs } from './api.js';
import { EventFeed } from './events.js';
import type { EventFeedOptions } from './events.js';
import { OfflineQueue } from './queue.js';
import type { QueuedCapture } from './queue.js';
import type {
  AtlasEvent,
  CardBody,
  FeedCard,
  GeoPoint,
  IngestResponse,
  ProvocationRecord,
  SessionHeader,
  TrajectoryRecord,
  ViolationRecord,
} from './types.js';

export interface BannerState {
  card_id: string;
  /** the provocation text itself; for linked ones it quotes the prior card's phrases */
  text: string;
  /** id of the prior card the provocation bridges to, if link-triggered */
  linked_to: string | null;
  cross_session: boolean;
}

/** A panel A point, already scaled to the canvas. Pure presentation. */
export interface PanelPoint {
  x: number;
  y: number;
  card_id: string;
  pivot: boolean;
}

export interface TimelineSlot {
  kind: 'capture' | 'response' | 'provocation';
  card_id: string;
  /** HH:MM from the card's own ts */
  label: string;
}

export interface TrajectoryPanels {
  points: PanelPoint[];
  /** SVG polyline points attribute for the path through panel A */
  path: string;
  pivotCount: number;
  timeline: TimelineSlot[];
}

export const PANEL_W = 420;
export const PANEL_H = 420;
export const PANEL_MARGIN = 0.1;

export const EMPTY_PLACEHOLDER = 'no captures yet';

export type Badge = 'unknown' | 'authentic' | 'violations';

export type CaptureResult =
  | { status: 'posted'; card: FeedCard | null }
  | { status: 'queued'; queued: QueuedCapture }
  | { status: 'invalid' }
  | { status: 'rejected'; error: ApiError };

export interface ViewOptions {
  header?: SessionHeader;
  queue?: OfflineQueue;
  events?: EventFeedOptions;
}

/** Scale server xy coordinates into a fixed canvas. Presentation only. */
export function buildPanels(traj: TrajectoryRecord, feed: FeedCard[]): TrajectoryPanels {
  const xs = traj.points.map((p) => p.xy[0]);
  const ys = traj.points.map((p) => p.xy[1]);
  const x0 = Math.min(...xs);
  const y0 = Math.min(...ys);
  // degenerate spans (single point, collinear axis) get a unit span
  const spanX = Math.max(...xs) - x0 || 1;
  const spanY = Math.max(...ys) - y0 || 1;
  const innerW = PANEL_W * (1 - 2 * PANEL_MARGIN);
  const innerH = PANEL_H * (1 - 2 * PANEL_MARGIN);
  const pivotAt = new Set(traj.pivots.map((pv) => pv.index));

  const points: PanelPoint[] = traj.points.map((p, i) => ({
    // y flipped: SVG grows downward, the latent axis grows upward
    x: PANEL_W * PANEL_MARGIN + ((p.xy[0] - x0) / spanX) * innerW,
    y: PANEL_H * PANEL_MARGIN + (1 - (p.xy[1] - y0) / spanY) * innerH,
    card_id: p.card_id,
    pivot: pivotAt.has(i),
  }));

  const timeline: TimelineSlot[] = [...feed]
    .sort((a, b) => a.seq - b.seq)
    .map((c) => ({ kind: c.kind, card_id: c.id, label: c.ts.slice(11, 16) }));

  return {
    points,
    path: points.map((p) => `${p.x.toFixed(2)},${p.y.toFixed(2)}`).join(' '),
    pivotCount: traj.pivots.length,
    timeline,
  };
}

export class ClientSessionView {
  readonly api: AtlasApi;
  readonly sessionId: string;
  readonly queue: OfflineQueue;
  readonly events: EventFeed;

  header: SessionHeader | null;
  /** newest first; seq comes from the server, never assigned locally */
  feed: FeedCard[] = [];
  banner: BannerState | null = null;
  /** how many distinct provocations have been surfaced on screen */
  bannersShown = 0;
  trajectory: TrajectoryRecord | null = null;
  panels: TrajectoryPanels | null = null;
  badge: Badge = 'unknown';
  violations: ViolationRecord[] = [];
  offline = false;
  validationError: string | null = null;

  private readonly surfacedIds = new Set<string>();
  private listeners: Array<() => void> = [];
  private sync: Promise<void> = Promise.resolve();

  constructor(api: AtlasApi, sessionId: string, options: ViewOptions = {}) {
    this.api = api;
    this.sessionId = sessionId;
    this.header = options.header ?? null;
    this.queue = options.queue ?? new OfflineQueue();
    this.events = new EventFeed(api, sessionId, options.events ?? {});
    this.events.onEvent((e) => this.handleEvent(e));
  }

  /** Register a render callback; fired after every state change. */
  onChange(fn: () => void): void {
    this.listeners.push(fn);
  }

  private changed(): void {
    for (const fn of this.listeners) fn();
  }

  /** Initial load plus the live event feed. */
  async open(): Promise<void> {
    await this.refreshCards();
    await this.refreshTrajectory();
    await this.refreshAuthenticity();
    this.events.start();
  }

  close(): void {
    this.events.stop();
  }

  get lastSeq(): number {
    return this.feed.length > 0 ? this.feed[0].seq : -1;
  }

  /** null when panels are showing; the placeholder text otherwise */
  trajectoryPlaceholder(): string | null {
    return this.panels === null ? EMPTY_PLACEHOLDER : null;
  }

  async refreshCards(): Promise<void> {
    const { cards } = await this.api.getCards(this.sessionId, this.lastSeq);
    let added = false;
    for (const card of cards) {
      if (this.feed.some((c) => c.id === card.id)) continue;
      this.feed.push(card);
      added = true;
    }
    if (added) {
      this.feed.sort((a, b) => b.seq - a.seq);
      this.changed();
    }
  }

  async refreshTrajectory(): Promise<void> {
    try {
      this.trajectory = await this.api.getTrajectory(this.sessionId);
      this.panels = buildPanels(this.trajectory, this.feed);
    } catch (err) {
      if (err instanceof ApiError && err.code === 'empty-trajectory') {
        this.trajectory = null;
        this.panels = null;
      } else if (!isNetworkError(err)) {
        throw err;
      }
    }
    this.changed();
  }

  async refreshAuthenticity(): Promise<void> {
    try {
      const record = await this.api.getAuthenticity(this.sessionId);
      this.badge = record.authentic ? 'authentic' : 'violations';
      this.violations = record.violations;
      this.changed();
    } catch (err) {
      // the badge is advisory; a failed refresh leaves it stale or
      // unknown rather than taking the whole view down
      if (!isNetworkError(err) && !(err instanceof ApiError)) throw err;
    }
  }

  /**
   * The capture flow: validate, post, surface whatever came back.
   * Empty text never reaches the network. A transport failure queues
   * the card with its original ts for a later flush.
   */
  async captureFlow(
    voiceText: string,
    photoRef: string,
    geo: GeoPoint,
    ts?: string,
    kind: 'capture' | 'response' = 'capture',
  ): Promise<CaptureResult> {
    if (voiceText.trim() === '') {
      this.validationError = 'a capture needs a voice note; say what you noticed';
      this.changed();
      return { status: 'invalid' };
    }
    this.validationError = null;
    const body: CardBody = {
      ts: ts ?? nowTs(),
      lat: geo.lat,
      lon: geo.lon,
      photo_ref: photoRef,
      voice_text: voiceText,
      kind,
      idempotency_key: localId('cap'),
    };
    let resp: IngestResponse;
    try {
      resp = await this.api.postCard(this.sessionId, body);
    } catch (err) {
      if (isNetworkError(err)) {
        const queued = this.queue.enqueue(this.sessionId, body);
        this.offline = true;
        this.changed();
        return { status: 'queued', queued };
      }
      if (err instanceof ApiError) {
        this.validationError = err.message;
        this.changed();
        return { status: 'rejected', error: err };
      }
      throw err;
    }
    this.offline = false;
    if (resp.provocation) this.showProvocation(resp.provocation);
    try {
      await this.refreshCards();
      await this.refreshTrajectory();
      await this.refreshAuthenticity();
    } catch {
      // the card is durable server-side; a flaky refresh here is
      // caught up by the event feed, never re-queued
    }
    const posted = this.feed.find((c) => c.id === resp.card.id) ?? null;
    return { status: 'posted', card: posted };
  }

  /** Connectivity is back: replay the queue, then catch the view up. */
  async onOnline(): Promise<{ synced: number; failed: number }> {
    const result = await this.queue.flush(this.api);
    if (result.synced > 0 || this.offline) {
      this.offline = this.queue.length > 0;
      await this.refreshCards();
      await this.refreshTrajectory();
      await this.refreshAuthenticity();
    }
    return result;
  }

  dismissBanner(): void {
    this.banner = null;
    this.changed();
  }

  /** Tests can await this to know all event-driven refreshes landed. */
  settled(): Promise<void> {
    return this.sync;
  }

  private showProvocation(prov: ProvocationRecord): void {
    // a provocation can arrive twice (ingest response and the event
    // stream); it is shown exactly once
    if (this.surfacedIds.has(prov.card.id)) return;
    this.surfacedIds.add(prov.card.id);
    this.banner = {
      card_id: prov.card.id,
      text: prov.card.voice_text,
      linked_to: prov.link ? prov.link.to : null,
      cross_session: prov.link?.cross_session ?? false,
    };
    this.bannersShown += 1;
    this.changed();
  }

  private handleEvent(event: AtlasEvent): void {
    if (event.type === 'provocation-issued') {
      this.showProvocation(event.data as ProvocationRecord);
    }
    this.enqueueSync(async () => {
      if (event.type === 'pivot-detected') {
        await this.refreshTrajectory();
        return;
      }
      await this.refreshCards();
      await this.refreshTrajectory();
      await this.refreshAuthenticity();
    });
  }

  private enqueueSync(work: () => Promise<void>): void {
    // refreshes run one at a time, in event order; a transient failure
    // is dropped because the next event triggers the same refresh
    this.sync = this.sync.then(work).catch(() => undefined);
  }
}
