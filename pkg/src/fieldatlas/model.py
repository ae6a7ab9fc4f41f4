"""Data Card and Session domain model with an append-only SHA-256 hash chain.

A Data Card is one dual-coded capture event: photo reference, voice
transcript, GPS point and timestamp, embedded at append time. Cards chain
via self_hash = SHA-256(canonical payload || prev_hash); the first card
links to a genesis constant of 64 zero hex chars. The store is
non-judgmental: appends never reorder or rewrite, and questionable
metadata (e.g. non-monotone timestamps) is recorded as-is and flagged
later by verification.
"""

from __future__ import annotations

import hashlib
import io
import json
import re
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .embedding import HashedEmbedder

GENESIS_HASH = "0" * 64

CARD_KINDS = ("capture", "provocation", "response")

# Canonical payload field order; separator \x1f. Changing either breaks
# every stored chain, so both are frozen.
_FIELD_SEP = "\x1f"

_SESSION_ID_RE = re.compile(r"^[A-Za-z0-9_.:-]+$")


class ChainError(ValueError):
    """Raised when a session byte stream fails hash-chain validation."""

    def __init__(self, message: str, card_id: str | None = None, line: int | None = None):
        super().__init__(message)
        self.card_id = card_id
        self.line = line


_TS_RE = re.compile(
    r"^\d{4}-\d{2}-\d{2}[Tt ]\d{2}:\d{2}:\d{2}(\.\d+)?([Zz]|\+00:00)$"
)


def parse_ts(ts: str) -> datetime:
    """Parse an RFC 3339 UTC timestamp with seconds precision.

    Accepts 'Z' or '+00:00' offsets only; naive or non-UTC timestamps are
    rejected so that stored strings compare consistently.
    """
    if not _TS_RE.match(ts):
        raise ValueError(
            f"timestamp {ts!r} is not RFC 3339 UTC with seconds (e.g. 2025-10-18T14:00:00Z)"
        )
    normalized = ts[:-1] + "+00:00" if ts[-1] in "Zz" else ts
    try:
        dt = datetime.fromisoformat(normalized)
    except ValueError:
        raise ValueError(f"timestamp {ts!r} is not a valid date-time") from None
    return dt.astimezone(timezone.utc)


@dataclass(frozen=True)
class GeoPoint:
    """WGS84 coordinate; latitude in [-90, 90], longitude in [-180, 180]."""

    lat: float
    lon: float

    def __post_init__(self):
        if not (np.isfinite(self.lat) and np.isfinite(self.lon)):
            raise ValueError("geo coordinates must be finite")
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"longitude {self.lon} outside [-180, 180]")


@dataclass(frozen=True)
class Geofence:
    center: GeoPoint
    radius_m: float

    def __post_init__(self):
        if not (np.isfinite(self.radius_m) and self.radius_m > 0):
            raise ValueError(f"geofence radius must be > 0, got {self.radius_m}")


@dataclass
class DataCard:
    id: str
    learner_id: str
    session_id: str
    ts: str
    geo: GeoPoint
    photo_ref: str
    voice_text: str
    kind: str
    embedding: np.ndarray
    prev_hash: str
    self_hash: str

    def payload(self) -> str:
        """Canonical hash payload: fixed field order joined by \\x1f."""
        return _FIELD_SEP.join(
            [
                self.id,
                self.learner_id,
                self.session_id,
                self.ts,
                repr(float(self.geo.lat)),
                repr(float(self.geo.lon)),
                self.photo_ref,
                self.voice_text,
                self.kind,
                self.prev_hash,
            ]
        )

    def compute_hash(self) -> str:
        return hashlib.sha256(self.payload().encode("utf-8")).hexdigest()

    @property
    def when(self) -> datetime:
        return parse_ts(self.ts)


@dataclass
class CardInput:
    """Learner-supplied card fields, before chaining and embedding."""

    ts: str
    geo: GeoPoint
    photo_ref: str
    voice_text: str
    kind: str = "capture"


@dataclass
class Session:
    id: str
    learner_id: str
    title: str
    geofence: Geofence | None = None
    embed_dim: int = 128
    cards: list[DataCard] = field(default_factory=list)

    def capture_cards(self) -> list[DataCard]:
        """Cards carrying learner epistemic content (capture + response)."""
        return [c for c in self.cards if c.kind in ("capture", "response")]

    def last_hash(self) -> str:
        return self.cards[-1].self_hash if self.cards else GENESIS_HASH

    def next_card_id(self) -> str:
        return f"{self.id}:{len(self.cards):03d}"


def create_session(
    learner_id: str,
    title: str,
    geofence: Geofence | None = None,
    embed_dim: int = 128,
    session_id: str | None = None,
) -> Session:
    """Create an empty session. Session ids must be filename-safe."""
    if embed_dim < 8:
        raise ValueError(f"embed_dim must be >= 8, got {embed_dim}")
    if not learner_id:
        raise ValueError("learner_id must be nonempty")
    if session_id is None:
        session_id = uuid.uuid4().hex[:12]
    if not _SESSION_ID_RE.match(session_id):
        raise ValueError(f"session id {session_id!r} has unsafe characters")
    return Session(
        id=session_id,
        learner_id=learner_id,
        title=title,
        geofence=geofence,
        embed_dim=embed_dim,
    )


def append_card(
    session: Session,
    card: CardInput,
    gate_passed: bool = False,
    embedder=None,
) -> DataCard:
    """Append a card to the session, chaining it to the previous card.

    Provocation cards may only be appended with ``gate_passed=True``, which
    the provocation module sets after its rule check. Appends are
    append-only and never validated against earlier timestamps; that is
    verification's job.
    """
    parse_ts(card.ts)
    if card.kind not in CARD_KINDS:
        raise ValueError(f"unknown card kind {card.kind!r}")
    if card.kind == "provocation" and not gate_passed:
        raise ValueError("provocation cards must pass the SCL gate before append")
    if embedder is None:
        embedder = HashedEmbedder(session.embed_dim)
    if embedder.dim != session.embed_dim:
        raise ValueError(
            f"embedder dim {embedder.dim} != session embed_dim {session.embed_dim}"
        )
    out = DataCard(
        id=session.next_card_id(),
        learner_id=session.learner_id,
        session_id=session.id,
        ts=card.ts,
        geo=card.geo,
        photo_ref=card.photo_ref,
        voice_text=card.voice_text,
        kind=card.kind,
        embedding=embedder.embed(card.voice_text),
        prev_hash=session.last_hash(),
        self_hash="",
    )
    out.self_hash = out.compute_hash()
    session.cards.append(out)
    return out


# ---------------------------------------------------------------------------
# JSONL session files: line 1 is the session header, lines 2..n are cards.
# UTF-8, LF line endings, lowercase hex hashes, one record per line.

def _dumps(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def card_record(card: DataCard) -> dict:
    return {
        "id": card.id,
        "learner_id": card.learner_id,
        "session_id": card.session_id,
        "ts": card.ts,
        "lat": card.geo.lat,
        "lon": card.geo.lon,
        "photo_ref": card.photo_ref,
        "voice_text": card.voice_text,
        "kind": card.kind,
        "prev_hash": card.prev_hash,
        "self_hash": card.self_hash,
        "embedding": [float(x) for x in card.embedding],
    }


def session_header(session: Session) -> dict:
    header: dict = {
        "id": session.id,
        "learner_id": session.learner_id,
        "title": session.title,
    }
    if session.geofence is not None:
        header["geofence"] = {
            "lat": session.geofence.center.lat,
            "lon": session.geofence.center.lon,
            "radius_m": session.geofence.radius_m,
        }
    header["embed_dim"] = session.embed_dim
    return header


def header_line(session: Session) -> str:
    return _dumps(session_header(session)) + "\n"


def card_line(card: DataCard) -> str:
    return _dumps(card_record(card)) + "\n"


def export_session(session: Session) -> bytes:
    """Serialize the session to JSONL bytes (header line, then cards)."""
    buf = io.StringIO()
    buf.write(header_line(session))
    for card in session.cards:
        buf.write(card_line(card))
    return buf.getvalue().encode("utf-8")


def _card_from_record(rec: dict, line_no: int) -> DataCard:
    try:
        return DataCard(
            id=rec["id"],
            learner_id=rec["learner_id"],
            session_id=rec["session_id"],
            ts=rec["ts"],
            geo=GeoPoint(rec["lat"], rec["lon"]),
            photo_ref=rec["photo_ref"],
            voice_text=rec["voice_text"],
            kind=rec["kind"],
            embedding=np.asarray(rec["embedding"], dtype=np.float64),
            prev_hash=rec["prev_hash"],
            self_hash=rec["self_hash"],
        )
    except KeyError as exc:
        raise ChainError(f"line {line_no}: card record missing field {exc}", line=line_no)


def load_session(data: bytes) -> Session:
    """Parse and validate a session byte stream.

    The whole chain is recomputed; the first card whose linkage or stored
    self_hash fails is named in the raised :class:`ChainError`.
    """
    text = data.decode("utf-8")
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines:
        raise ChainError("empty session stream: a header line is required")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ChainError(f"line 1: bad header JSON: {exc}", line=1)
    for key in ("id", "learner_id", "title", "embed_dim"):
        if key not in header:
            raise ChainError(f"line 1: header missing {key!r}", line=1)
    geofence = None
    if "geofence" in header:
        gf = header["geofence"]
        geofence = Geofence(GeoPoint(gf["lat"], gf["lon"]), gf["radius_m"])
    session = Session(
        id=header["id"],
        learner_id=header["learner_id"],
        title=header["title"],
        geofence=geofence,
        embed_dim=int(header["embed_dim"]),
    )
    prev = GENESIS_HASH
    for line_no, line in enumerate(lines[1:], start=2):
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ChainError(f"line {line_no}: bad card JSON: {exc}", line=line_no)
        card = _card_from_record(rec, line_no)
        if card.session_id != session.id:
            raise ChainError(
                f"card {card.id}: session_id {card.session_id!r} != {session.id!r}",
                card_id=card.id,
                line=line_no,
            )
        if card.prev_hash != prev:
            raise ChainError(
                f"card {card.id}: prev_hash does not match preceding card",
                card_id=card.id,
                line=line_no,
            )
        recomputed = card.compute_hash()
        if card.self_hash != recomputed:
            raise ChainError(
                f"card {card.id}: stored self_hash does not match recomputed payload hash",
                card_id=card.id,
                line=line_no,
            )
        if len(card.embedding) != session.embed_dim:
            raise ChainError(
                f"card {card.id}: embedding length {len(card.embedding)} != embed_dim "
                f"{session.embed_dim}",
                card_id=card.id,
                line=line_no,
            )
        prev = card.self_hash
        session.cards.append(card)
    return session


def verify_chain(session: Session) -> str | None:
    """Return the id of the first chain-inconsistent card, or None if intact."""
    prev = GENESIS_HASH
    for card in session.cards:
        if card.prev_hash != prev or card.compute_hash() != card.self_hash:
            return card.id
        prev = card.self_hash
    return None
