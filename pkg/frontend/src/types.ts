/**
 * Record shapes returned by the atlasd HTTP API.
 *
 * The client renders these as-is. Every number here was computed
 * server-side; the UI never derives embeddings, links, or trajectory
 * geometry on its own.
 */

export interface GeoPoint {
  lat: number;
  lon: number;
}

export interface SessionHeader {
  id: string;
  learner_id: string;
  title: string;
  geofence?: { lat: number; lon: number; radius_m: number };
  embed_dim: number;
}

export type CardKind = 'capture' | 'response' | 'provocation';

export interface CardRecord {
  id: string;
  learner_id: string;
  session_id: string;
  ts: string;
  lat: number;
  lon: number;
  photo_ref: string;
  voice_text: string;
  kind: CardKind;
  prev_hash: string;
  self_hash: string;
  embedding: number[];
}

/** A card as returned by GET /cards: the record plus its position in the chain. */
export interface FeedCard extends CardRecord {
  seq: number;
}

/** Body the client sends when posting a card. Clients may not post provocations. */
export interface CardBody {
  ts: string;
  lat: number;
  lon: number;
  photo_ref: string;
  voice_text: string;
  kind?: 'capture' | 'response';
  idempotency_key?: string;
}

export interface LinkRecord {
  from: string;
  to: string;
  similarity: number;
  cross_session: boolean;
  surfaced: boolean;
}

/** A surfaced provocation: the provocation card plus the link that triggered it, if any. */
export interface ProvocationRecord {
  card: CardRecord;
  link: LinkRecord | null;
}

export interface IngestResponse {
  card: CardRecord;
  provocation: ProvocationRecord | null;
}

export interface TrajectoryPointRecord {
  card_id: string;
  ts: string;
  xy: [number, number];
  v: number;
  lat: number;
  lon: number;
}

export interface PivotRecord {
  index: number;
  turn_cosine: number;
  magnitude: number;
  attributed_provocation: string | null;
}

export interface TrajectoryRecord {
  session_id: string;
  points: TrajectoryPointRecord[];
  pivots: PivotRecord[];
  provocation_indices: number[];
}

export interface ViolationRecord {
  code: string;
  card_ids: string[];
  detail: string;
}

export interface AuthenticityRecord {
  session_id: string;
  authentic: boolean;
  violations: ViolationRecord[];
  params_used: Record<string, number>;
}

export type AtlasEventType = 'card-appended' | 'provocation-issued' | 'pivot-detected';

export interface AtlasEvent {
  seq: number;
  type: AtlasEventType;
  data: unknown;
}
