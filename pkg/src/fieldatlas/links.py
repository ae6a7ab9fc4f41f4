"""Cross-session semantic network over Data Cards.

Links are directed newer -> older, carry the cosine similarity that
created them, and exist only between learner capture cards. The nearest
preceding capture of the same session is never a target: adjacent
captures are trivially related and would drown real connections.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .embedding import cosine
from .model import DataCard

DEFAULT_THETA = 0.35
DEFAULT_K = 3


@dataclass
class SemanticLink:
    from_card: str
    to_card: str
    similarity: float
    cross_session: bool
    surfaced: bool = False

    def pair(self) -> tuple[str, str]:
        return (self.from_card, self.to_card)


def _order_key(card: DataCard) -> tuple:
    return (card.when, card.session_id, card.id)


def link_candidates(
    card: DataCard,
    corpus: list[DataCard],
    theta: float = DEFAULT_THETA,
    k: int | None = DEFAULT_K,
) -> list[SemanticLink]:
    """Rank prior capture cards semantically similar to a new capture.

    Targets are the learner's prior captures (provocations and responses
    excluded), minus the nearest preceding capture of the same session.
    Results meet ``theta``, are sorted by similarity descending with ties
    going to the older card, and are truncated to ``k`` (None = no limit).
    """
    if card.kind != "capture":
        raise ValueError(f"link source must be a capture card, got kind={card.kind!r}")
    key = _order_key(card)
    targets = [
        c
        for c in corpus
        if c.kind == "capture" and c.id != card.id and _order_key(c) < key
    ]
    same_session = [c for c in targets if c.session_id == card.session_id]
    if same_session:
        nearest = max(same_session, key=_order_key)
        targets = [c for c in targets if c.id != nearest.id]
    links = []
    for target in targets:
        sim = cosine(card.embedding, target.embedding)
        if sim >= theta:
            links.append(
                SemanticLink(
                    from_card=card.id,
                    to_card=target.id,
                    similarity=sim,
                    cross_session=target.session_id != card.session_id,
                )
            )
    by_ts = {c.id: _order_key(c) for c in corpus}
    links.sort(key=lambda ln: (-ln.similarity, by_ts[ln.to_card]))
    if k is not None:
        links = links[:k]
    return links


def build_network(corpus: list[DataCard], theta: float = DEFAULT_THETA) -> list[SemanticLink]:
    """All pairwise links meeting theta, each directed newer -> older.

    Equals the union of incremental :func:`link_candidates` calls with
    unlimited k over every capture card in time order.
    """
    ordered = sorted((c for c in corpus if c.kind == "capture"), key=_order_key)
    links = []
    for i, card in enumerate(ordered):
        links.extend(link_candidates(card, ordered[:i], theta=theta, k=None))
    return links


def links_to_jsonl(links: list[SemanticLink]) -> str:
    lines = []
    for ln in links:
        lines.append(
            json.dumps(
                {
                    "from": ln.from_card,
                    "to": ln.to_card,
                    "similarity": ln.similarity,
                    "cross_session": ln.cross_session,
                    "surfaced": ln.surfaced,
                },
                ensure_ascii=False,
                separators=(",", ":"),
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")
