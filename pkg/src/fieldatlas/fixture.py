"""Bundled demo scenario: Maya's museum hour and a later memorial visit.

Two sessions for one learner. The first spans an hour in a gallery:
two descriptive captures, a gated provocation, then a response and three
captures whose vocabulary turns interpretive. The second, months later,
captures a structurally similar observation at a memorial, which links
back across sessions and yields a linked provocation. All ids, texts,
coordinates and timestamps are fixed constants so downstream outputs are
reproducible byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import CardInput, DataCard, Geofence, GeoPoint, Session, append_card, create_session
from .provoke import gate, session_vocab

LEARNER = "maya"

MET_SESSION_ID = "maya-met"
LINCOLN_SESSION_ID = "maya-lincoln"

MET_CENTER = GeoPoint(40.7794, -73.9632)
LINCOLN_CENTER = GeoPoint(38.8893, -77.0502)

# The two provocations the scenario turns on. Both must pass the gate
# against the learner's vocabulary at the moment they are issued.
MET_PROVOCATION = (
    "You described the light as 'pulling' Washington forward. What evidence "
    "from the physical composition supports the idea that this painting was "
    "meant to construct a hero, not merely depict a crossing?"
)
LINCOLN_PROVOCATION = (
    "You previously observed how a painting uses light and posture to make "
    "one person look inevitable. How does this architectural composition "
    "achieve a similar effect?"
)

# A declarative control that the gate must reject.
DECLARATIVE_CONTROL = "The answer is that Leutze painted it in 1851."

_MET_NOTES = [
    (
        "capture",
        "2025-10-18T14:00:00Z",
        (40.77940, -73.96320),
        "photos/washington-crossing-low-angle.jpg",
        "Washington is the only figure standing -- everyone else is crouched "
        "or rowing. And the light hits him from the far shore, like it's "
        "pulling him forward. Is the whole composition built to make one "
        "person look inevitable?",
    ),
    (
        "capture",
        "2025-10-18T14:04:00Z",
        (40.77945, -73.96310),
        "photos/flag-in-storm-detail.jpg",
        "The flag is at the center but almost lost in the storm. And the ice "
        "chunks look more theatrical than real -- stage ice, not river ice.",
    ),
    (
        "provocation",
        "2025-10-18T14:08:00Z",
        (40.77945, -73.96310),
        "",
        MET_PROVOCATION,
    ),
    (
        "response",
        "2025-10-18T14:11:00Z",
        (40.77943, -73.96314),
        "",
        "The standing figure, the light pulling him forward, the whole "
        "composition built to make one person look inevitable -- that is not "
        "observation, that is an argument.",
    ),
    (
        "capture",
        "2025-10-18T14:32:00Z",
        (40.77950, -73.96300),
        "photos/gallery-760-wide.jpg",
        "Constructed heroism -- that is what I see now. The painting works as "
        "visual rhetoric, propaganda: light and posture staging a hero.",
    ),
    (
        "capture",
        "2025-10-18T14:46:00Z",
        (40.77947, -73.96308),
        "photos/brushwork-closeup.jpg",
        "The propaganda reads clearly now: constructed heroism, visual "
        "rhetoric, a hero staged in light. Slower looking, deeper seeing.",
    ),
    (
        "capture",
        "2025-10-18T14:59:00Z",
        (40.77941, -73.96316),
        "photos/wing-exit-view.jpg",
        "Last note: heroism here is constructed -- composition, posture, "
        "light, all staged. Visual rhetoric, and the propaganda still works.",
    ),
]

_LINCOLN_NOTES = [
    (
        "capture",
        "2026-03-14T15:20:00Z",
        (38.88930, -77.05020),
        "photos/lincoln-seated-from-below.jpg",
        "Lincoln is the only figure here -- massive, seated, lit from the "
        "front. The architecture uses light and posture to make one person "
        "look inevitable, like the painting did.",
    ),
    (
        "provocation",
        "2026-03-14T15:21:00Z",
        (38.88930, -77.05020),
        "",
        LINCOLN_PROVOCATION,
    ),
]


@dataclass
class MayaFixture:
    met: Session
    lincoln: Session

    @property
    def sessions(self) -> list[Session]:
        return [self.met, self.lincoln]

    def all_cards(self) -> list[DataCard]:
        return self.met.cards + self.lincoln.cards

    def learner_vocab(self) -> set[str]:
        return session_vocab(self.all_cards())

    @property
    def met_provocation_card(self) -> DataCard:
        return next(c for c in self.met.cards if c.kind == "provocation")

    @property
    def washington_card(self) -> DataCard:
        return self.met.cards[0]

    @property
    def lincoln_card(self) -> DataCard:
        return self.lincoln.cards[0]


def _build(session: Session, notes, prior_cards: list[DataCard]) -> None:
    for kind, ts, (lat, lon), photo_ref, text in notes:
        card = CardInput(
            ts=ts, geo=GeoPoint(lat, lon), photo_ref=photo_ref,
            voice_text=text, kind=kind,
        )
        if kind == "provocation":
            vocab = session_vocab(prior_cards + session.cards)
            verdict = gate(text, vocab)
            if not verdict.passed:
                raise AssertionError(
                    f"fixture provocation failed the gate: {verdict.failed_codes()}"
                )
            append_card(session, card, gate_passed=True)
        else:
            append_card(session, card)


def maya_fixture(embed_dim: int = 128) -> MayaFixture:
    """Build both demo sessions deterministically."""
    met = create_session(
        LEARNER,
        "American Wing, Gallery 760",
        geofence=Geofence(MET_CENTER, 200.0),
        embed_dim=embed_dim,
        session_id=MET_SESSION_ID,
    )
    _build(met, _MET_NOTES, prior_cards=[])
    lincoln = create_session(
        LEARNER,
        "Lincoln Memorial",
        geofence=Geofence(LINCOLN_CENTER, 150.0),
        embed_dim=embed_dim,
        session_id=LINCOLN_SESSION_ID,
    )
    _build(lincoln, _LINCOLN_NOTES, prior_cards=met.cards)
    return MayaFixture(met=met, lincoln=lincoln)
