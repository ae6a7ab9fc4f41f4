"""
Data Cards and the Hash Chain
=============================

Every observation a learner captures in the field becomes a Data Card:
timestamp, GPS fix, photo reference, transcribed voice note. Cards are
chained: each one carries the SHA-256 of its payload plus the previous
card's hash, so a session file is append-only and tamper-evident.
"""
from fieldatlas import (
    CardInput,
    ChainError,
    GeoPoint,
    append_card,
    create_session,
    export_session,
    load_session,
    verify_chain,
)

print("Data Cards and the Hash Chain")
print("=" * 40)

###############################################################################
# A field session
# ---------------
# Sessions are created per visit. The embedding dimension is fixed at
# creation so every card in the session lives in the same space.

session = create_session("amy", "Old mill, first visit", session_id="amy-mill-1")
print(f"session {session.id!r} for learner {session.learner_id!r}")

notes = [
    ("2025-11-02T10:00:00Z", "rusted iron gate with hand forged square bolts"),
    ("2025-11-02T10:06:00Z", "limestone wall stained orange below the gate hinges"),
    ("2025-11-02T10:15:00Z", "oak lintel overhead, adze marks still visible"),
]
for ts, text in notes:
    card = append_card(session, CardInput(
        ts=ts, geo=GeoPoint(43.0812, -73.4921), photo_ref="mill.jpg",
        voice_text=text,
    ))
    print(f"  {card.id}  prev={card.prev_hash[:12]}...  self={card.self_hash[:12]}...")

###############################################################################
# The chain property
# ------------------
# The first card's prev_hash is the all-zero genesis value; every later
# card commits to the card before it. verify_chain recomputes the whole
# thing and returns None when it is intact.

print(f"\ngenesis prev_hash: {session.cards[0].prev_hash}")
print(f"chain intact: {verify_chain(session) is None}")

###############################################################################
# Round-tripping through bytes
# ----------------------------
# export_session writes the JSONL form (header line, then one line per
# card). load_session parses and re-validates every hash. The bytes
# round-trip exactly.

data = export_session(session)
print(f"\nexported {len(data)} bytes, {len(data.splitlines())} lines")
reloaded = load_session(data)
print(f"round-trip byte-identical: {export_session(reloaded) == data}")

###############################################################################
# Tampering is loud
# -----------------
# Flip one character of a stored voice note and the reload fails,
# naming the exact card whose stored hash no longer matches.

tampered = data.replace(b"limestone", b"sandstone", 1)
try:
    load_session(tampered)
except ChainError as exc:
    print(f"\ntamper detected: {exc}")
