"""
Hashed Embeddings and the Semantic Network
==========================================

Voice notes are embedded with a deterministic signed hashed bag of
words: no model weights, no network calls, identical output on every
machine. Cosine similarity over those vectors drives the semantic
network that connects a new observation back to older ones, including
observations from sessions weeks earlier.
"""
import numpy as np

from fieldatlas import (
    CardInput,
    GeoPoint,
    append_card,
    build_network,
    cosine,
    create_session,
    embed_text,
    link_candidates,
    tokenize,
)

print("Hashed Embeddings and the Semantic Network")
print("=" * 40)

###############################################################################
# Tokenize and embed
# ------------------
# Lowercased word tokens minus a small pinned stoplist; each token is
# FNV-1a hashed to pick a dimension and a sign. Non-zero vectors are
# L2-normalized.

text = "The gate is iron, the hinges are iron, the bolts hand forged."
print(f"tokens: {tokenize(text)}")
vec = embed_text(text, dim=128)
print(f"embedding: dim={vec.shape[0]}, norm={np.linalg.norm(vec):.6f}")

###############################################################################
# Cosine similarity behaves as expected
# -------------------------------------

pairs = [
    ("rusted iron gate", "iron gate, badly rusted"),
    ("rusted iron gate", "oak beams in the hall"),
    ("rusted iron gate", "rusted iron gate"),
]
for a, b in pairs:
    sim = cosine(embed_text(a, 128), embed_text(b, 128))
    print(f"  cos({a!r}, {b!r}) = {sim:.4f}")

###############################################################################
# A two-session corpus
# --------------------
# Ten notes from one visit, then a later visit that echoes the first.
# Links are directed newer -> older and each card's nearest preceding
# same-session capture is excluded, so adjacent notes do not drown the
# network in trivial self-similarity.

first = create_session("amy", "Old mill", session_id="amy-mill-1")
for i, note in enumerate([
    "rusted iron gate with square bolts",
    "limestone wall stained by iron runoff",
    "oak beams inside, adze marks visible",
    "iron nails, square shanks, hand cut",
]):
    append_card(first, CardInput(
        ts=f"2025-11-02T10:{i * 6:02d}:00Z", geo=GeoPoint(43.08, -73.49),
        photo_ref="", voice_text=note,
    ))

second = create_session("amy", "Old mill, return", session_id="amy-mill-2")
card = append_card(second, CardInput(
    ts="2025-11-20T09:00:00Z", geo=GeoPoint(43.08, -73.49), photo_ref="",
    voice_text="the square iron bolts again, same hand forged pattern",
))

corpus = first.cards + second.cards
print("\ncandidates for the returning note:")
for ln in link_candidates(card, corpus):
    scope = "cross-session" if ln.cross_session else "within-session"
    print(f"  {ln.from_card} -> {ln.to_card}  sim={ln.similarity:.4f}  ({scope})")

###############################################################################
# Batch equals incremental
# ------------------------
# build_network over the full corpus produces exactly the links the
# incremental calls produced card by card.

network = build_network(corpus, theta=0.35)
print(f"\nfull network at theta=0.35: {len(network)} links")
for ln in network:
    print(f"  {ln.from_card} -> {ln.to_card}  sim={ln.similarity:.4f}")
