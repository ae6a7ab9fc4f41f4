/**
 * Browser entry: wires ClientSessionView state to the DOM.
 *
 * All rendering is a projection of view state; the view itself never
 * touches the DOM, so everything interesting is testable without a
 * browser. The photo stays on this machine: only its file name goes
 * into photo_ref, the preview uses a local object URL.
 */

import { AtlasApi, nowTs } from './api.js';
import { currentLocation, manualLocation } from './geo.js';
import { OfflineQueue, WebStorageQueueStore } from './queue.js';
import type { SessionHeader } from './types.js';
import { ClientSessionView } from './view.js';

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const SVG_NS = 'http://www.w3.org/2000/svg';

let view: ClientSessionView | null = null;
let photoRef = '';

function svgEl(name: string, attrs: Record<string, string>): SVGElement {
  const el = document.createElementNS(SVG_NS, name);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, v);
  return el;
}

function renderBanner(v: ClientSessionView): void {
  const banner = $('banner');
  if (!v.banner) {
    banner.hidden = true;
    return;
  }
  banner.hidden = false;
  $('banner-text').textContent = v.banner.text;
  const origin = $('banner-origin');
  if (v.banner.linked_to) {
    origin.textContent = v.banner.cross_session
      ? `bridges to ${v.banner.linked_to} from an earlier session`
      : `echoes ${v.banner.linked_to}`;
  } else {
    origin.textContent = '';
  }
}

function renderFeed(v: ClientSessionView): void {
  const feed = $('feed');
  feed.replaceChildren();
  for (const card of v.feed) {
    const li = document.createElement('li');
    li.className = `card card-${card.kind}`;
    const meta = document.createElement('div');
    meta.className = 'card-meta';
    meta.textContent = `${card.kind} · ${card.ts} · ${card.lat.toFixed(5)}, ${card.lon.toFixed(5)}`;
    const text = document.createElement('div');
    text.textContent = card.voice_text;
    li.append(meta, text);
    if (card.photo_ref) {
      const ref = document.createElement('div');
      ref.className = 'card-photo-ref';
      ref.textContent = card.photo_ref;
      li.append(ref);
    }
    feed.append(li);
  }
}

function renderPanels(v: ClientSessionView): void {
  const panelA = $('panel-a');
  const panelB = $('panel-b');
  panelA.replaceChildren();
  panelB.replaceChildren();
  const placeholder = v.trajectoryPlaceholder();
  if (placeholder !== null || !v.panels) {
    const p = document.createElement('p');
    p.className = 'placeholder';
    p.textContent = placeholder ?? '';
    panelA.append(p);
    return;
  }

  const svg = svgEl('svg', { viewBox: '0 0 420 420', width: '420', height: '420' });
  if (v.panels.points.length > 1) {
    svg.append(
      svgEl('polyline', {
        points: v.panels.path,
        fill: 'none',
        stroke: '#2a6f97',
        'stroke-width': '1.5',
      }),
    );
  }
  for (const pt of v.panels.points) {
    svg.append(
      svgEl('circle', {
        cx: pt.x.toFixed(2),
        cy: pt.y.toFixed(2),
        r: '5',
        fill: pt.pivot ? '#e07a0e' : '#2a6f97',
      }),
    );
    if (pt.pivot) {
      const label = svgEl('text', {
        x: (pt.x + 8).toFixed(2),
        y: pt.y.toFixed(2),
        'font-size': '11',
        fill: '#e07a0e',
      });
      label.textContent = `pivot ← ${pt.card_id}`;
      svg.append(label);
    }
  }
  panelA.append(svg);

  const line = document.createElement('ol');
  line.className = 'timeline';
  for (const slot of v.panels.timeline) {
    const li = document.createElement('li');
    li.className = `slot slot-${slot.kind}`;
    li.title = slot.card_id;
    li.textContent = slot.kind === 'provocation' ? `◆ ${slot.label}` : `● ${slot.label}`;
    line.append(li);
  }
  panelB.append(line);
}

function renderBadge(v: ClientSessionView): void {
  const badge = $('badge');
  badge.dataset.state = v.badge;
  badge.textContent =
    v.badge === 'authentic'
      ? 'authentic'
      : v.badge === 'violations'
        ? `${v.violations.length} violation(s)`
        : 'not checked';
}

function render(): void {
  if (!view) return;
  renderBanner(view);
  renderFeed(view);
  renderPanels(view);
  renderBadge(view);
  $('offline-pill').hidden = !view.offline && view.queue.length === 0;
  $('queue-count').textContent = String(view.queue.length);
  const err = $('capture-error');
  err.textContent = view.validationError ?? '';
  err.hidden = view.validationError === null;
}

async function openSession(): Promise<void> {
  const base = ($<HTMLInputElement>('base-url')).value.trim() || 'http://127.0.0.1:8847';
  const learner = ($<HTMLInputElement>('learner-id')).value.trim();
  const sessionId = ($<HTMLInputElement>('session-id')).value.trim();
  const title = ($<HTMLInputElement>('session-title')).value.trim() || sessionId;
  if (!learner || !sessionId) return;

  const api = new AtlasApi(base);
  let header: SessionHeader | undefined;
  try {
    header = await api.createSession({ learner_id: learner, title, session_id: sessionId });
  } catch {
    // 409 means the session already exists; joining it is fine
    header = undefined;
  }

  view?.close();
  view = new ClientSessionView(api, sessionId, {
    header,
    queue: new OfflineQueue(new WebStorageQueueStore(window.localStorage)),
  });
  view.onChange(render);
  await view.open();
  $('session-screen').hidden = false;
  $('session-name').textContent = header?.title ?? sessionId;
  render();
}

async function submitCapture(): Promise<void> {
  if (!view) return;
  const text = ($<HTMLTextAreaElement>('voice-text')).value;
  const latRaw = parseFloat(($<HTMLInputElement>('lat')).value);
  const lonRaw = parseFloat(($<HTMLInputElement>('lon')).value);
  const fix = manualLocation(latRaw, lonRaw);
  if (!fix) {
    $('capture-error').textContent = 'need a position: use GPS or fill lat/lon';
    $('capture-error').hidden = false;
    return;
  }
  const result = await view.captureFlow(text, photoRef, { lat: fix.lat, lon: fix.lon }, nowTs());
  if (result.status === 'posted' || result.status === 'queued') {
    ($<HTMLTextAreaElement>('voice-text')).value = '';
    ($<HTMLInputElement>('photo-input')).value = '';
    photoRef = '';
    $<HTMLImageElement>('photo-preview').hidden = true;
  }
  render();
}

function wire(): void {
  $('open-session').addEventListener('click', () => void openSession());
  $('submit-capture').addEventListener('click', () => void submitCapture());
  $('banner-dismiss').addEventListener('click', () => view?.dismissBanner());

  $('use-gps').addEventListener('click', () => {
    void currentLocation().then((fix) => {
      if (fix) {
        ($<HTMLInputElement>('lat')).value = String(fix.lat);
        ($<HTMLInputElement>('lon')).value = String(fix.lon);
      } else {
        $('capture-error').textContent = 'no GPS fix; enter lat/lon by hand';
        $('capture-error').hidden = false;
      }
    });
  });

  $('photo-input').addEventListener('change', (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    const preview = $<HTMLImageElement>('photo-preview');
    if (file) {
      photoRef = file.name;
      preview.src = URL.createObjectURL(file);
      preview.hidden = false;
    } else {
      photoRef = '';
      preview.hidden = true;
    }
  });

  window.addEventListener('online', () => {
    if (view) void view.onOnline().then(render);
  });
}

wire();
