"""Durable session store backed by per-session JSONL files.

Layout under the data directory:

    sessions/{session_id}.jsonl     header line + one line per card
    idempotency/{session_id}.jsonl  client idempotency keys -> card ids
    surfaced/{learner_id}.jsonl     link pairs already used for provocations

Cards are durable before any caller sees them: every append writes the
line, flushes and fsyncs before returning. Idempotency keys live in a
sidecar rather than the card payload, so the hash chain covers only
field-capture content. Writes to one session serialize on a per-session
lock; reads and writes to other sessions proceed concurrently.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path

from .model import (
    CardInput,
    DataCard,
    Geofence,
    Session,
    append_card,
    card_line,
    create_session,
    header_line,
    load_session,
)


class StoreError(KeyError):
    """Missing session or card lookups."""


def _append_fsync(path: Path, text: str) -> None:
    with open(path, "a", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
        fh.flush()
        os.fsync(fh.fileno())


class SessionStore:
    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.sessions_dir = self.data_dir / "sessions"
        self.idem_dir = self.data_dir / "idempotency"
        self.surfaced_dir = self.data_dir / "surfaced"
        for d in (self.sessions_dir, self.idem_dir, self.surfaced_dir):
            d.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, Session] = {}
        self._idem: dict[str, dict[str, str]] = {}
        self._registry_lock = threading.Lock()
        self._locks: dict[str, threading.RLock] = {}

    # -- locking ------------------------------------------------------------

    def session_lock(self, session_id: str) -> threading.RLock:
        """Per-session write lock. Reentrant so an ingest pipeline can hold
        it across several appends."""
        with self._registry_lock:
            lock = self._locks.get(session_id)
            if lock is None:
                lock = self._locks[session_id] = threading.RLock()
            return lock

    # -- paths --------------------------------------------------------------

    def _session_path(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}.jsonl"

    def _idem_path(self, session_id: str) -> Path:
        return self.idem_dir / f"{session_id}.jsonl"

    def _surfaced_path(self, learner_id: str) -> Path:
        return self.surfaced_dir / f"{learner_id}.jsonl"

    # -- sessions -----------------------------------------------------------

    def list_ids(self) -> list[str]:
        ids = {p.stem for p in self.sessions_dir.glob("*.jsonl")}
        ids.update(self._sessions)
        return sorted(ids)

    def exists(self, session_id: str) -> bool:
        return session_id in self._sessions or self._session_path(session_id).exists()

    def create(
        self,
        learner_id: str,
        title: str,
        geofence: Geofence | None = None,
        embed_dim: int = 128,
        session_id: str | None = None,
    ) -> Session:
        session = create_session(
            learner_id, title, geofence=geofence, embed_dim=embed_dim,
            session_id=session_id,
        )
        with self.session_lock(session.id):
            if self.exists(session.id):
                raise ValueError(f"session {session.id!r} already exists")
            _append_fsync(self._session_path(session.id), header_line(session))
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        session = self._sessions.get(session_id)
        if session is not None:
            return session
        path = self._session_path(session_id)
        if not path.exists():
            raise StoreError(f"no such session: {session_id}")
        with self.session_lock(session_id):
            if session_id not in self._sessions:
                self._sessions[session_id] = load_session(path.read_bytes())
        return self._sessions[session_id]

    def learner_sessions(self, learner_id: str) -> list[Session]:
        out = [s for sid in self.list_ids() if (s := self.get(sid)).learner_id == learner_id]
        return out

    def learner_cards(self, learner_id: str) -> list[DataCard]:
        cards: list[DataCard] = []
        for session in self.learner_sessions(learner_id):
            cards.extend(session.cards)
        return cards

    def find_card(self, card_id: str) -> tuple[Session, DataCard]:
        # card ids are "{session_id}:{seq}"; session ids may contain ':'
        session_id = card_id.rsplit(":", 1)[0]
        try:
            session = self.get(session_id)
        except StoreError:
            raise StoreError(f"no such card: {card_id}") from None
        for card in session.cards:
            if card.id == card_id:
                return session, card
        raise StoreError(f"no such card: {card_id}")

    # -- appends ------------------------------------------------------------

    def _idem_map(self, session_id: str) -> dict[str, str]:
        cached = self._idem.get(session_id)
        if cached is not None:
            return cached
        mapping: dict[str, str] = {}
        path = self._idem_path(session_id)
        if path.exists():
            for line in path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    rec = json.loads(line)
                    mapping[rec["key"]] = rec["card_id"]
        self._idem[session_id] = mapping
        return mapping

    def append(
        self,
        session_id: str,
        card: CardInput,
        gate_passed: bool = False,
        idempotency_key: str | None = None,
    ) -> tuple[DataCard, bool]:
        """Append a card and make it durable.

        Returns (card, fresh). A repeated idempotency key returns the
        originally stored card with fresh=False and appends nothing.
        """
        with self.session_lock(session_id):
            session = self.get(session_id)
            if idempotency_key is not None:
                seen = self._idem_map(session_id).get(idempotency_key)
                if seen is not None:
                    _, existing = self.find_card(seen)
                    return existing, False
            stored = append_card(session, card, gate_passed=gate_passed)
            try:
                _append_fsync(self._session_path(session_id), card_line(stored))
            except OSError:
                session.cards.pop()
                raise
            if idempotency_key is not None:
                rec = {"key": idempotency_key, "card_id": stored.id}
                _append_fsync(
                    self._idem_path(session_id),
                    json.dumps(rec, ensure_ascii=False, separators=(",", ":")) + "\n",
                )
                self._idem_map(session_id)[idempotency_key] = stored.id
        return stored, True

    # -- surfaced link pairs ------------------------------------------------

    def surfaced_pairs(self, learner_id: str) -> set[tuple[str, str]]:
        pairs: set[tuple[str, str]] = set()
        path = self._surfaced_path(learner_id)
        if path.exists():
            for line in path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    rec = json.loads(line)
                    pairs.add((rec["from"], rec["to"]))
        return pairs

    def mark_surfaced(self, learner_id: str, from_card: str, to_card: str) -> None:
        rec = {"from": from_card, "to": to_card}
        _append_fsync(
            self._surfaced_path(learner_id),
            json.dumps(rec, ensure_ascii=False, separators=(",", ":")) + "\n",
        )
