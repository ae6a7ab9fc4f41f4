"""Data Card chain and JSONL format tests. The SHA-256 oracle below
re-derives the canonical payload from the documented field order rather
than calling the card's own method."""

import hashlib
import json

import numpy as np
import pytest

from fieldatlas.model import (
    GENESIS_HASH,
    CardInput,
    ChainError,
    DataCard,
    Geofence,
    GeoPoint,
    append_card,
    create_session,
    export_session,
    load_session,
    parse_ts,
    verify_chain,
)


def sha256_oracle(card: DataCard) -> str:
    """Independent recomputation: documented order, \\x1f separators."""
    fields = [
        card.id, card.learner_id, card.session_id, card.ts,
        repr(float(card.geo.lat)), repr(float(card.geo.lon)),
        card.photo_ref, card.voice_text, card.kind, card.prev_hash,
    ]
    return hashlib.sha256("\x1f".join(fields).encode("utf-8")).hexdigest()


def make_session(**kwargs):
    defaults = dict(learner_id="maya", title="American Wing")
    defaults.update(kwargs)
    return create_session(**defaults)


def make_card(ts="2025-10-18T14:00:00Z", text="a standing figure", kind="capture"):
    return CardInput(
        ts=ts, geo=GeoPoint(40.7794, -73.9632), photo_ref="p.jpg",
        voice_text=text, kind=kind,
    )


class TestParseTs:
    def test_z_suffix(self):
        dt = parse_ts("2025-10-18T14:00:00Z")
        assert (dt.year, dt.hour, dt.second) == (2025, 14, 0)

    def test_offset_form(self):
        assert parse_ts("2025-10-18T14:00:00+00:00") == parse_ts("2025-10-18T14:00:00Z")

    def test_fractional_seconds(self):
        dt = parse_ts("2025-10-18T14:00:00.250Z")
        assert dt.microsecond == 250000

    @pytest.mark.parametrize("bad", [
        "2025-10-18", "14:00:00Z", "2025-10-18T14:00Z",
        "2025-10-18T14:00:00", "2025-10-18T14:00:00+02:00", "not a time",
    ])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            parse_ts(bad)


class TestGeo:
    def test_valid(self):
        GeoPoint(40.7794, -73.9632)

    @pytest.mark.parametrize("lat,lon", [(91, 0), (-91, 0), (0, 181), (0, -181),
                                         (float("nan"), 0), (0, float("inf"))])
    def test_out_of_range(self, lat, lon):
        with pytest.raises(ValueError):
            GeoPoint(lat, lon)

    def test_geofence_radius_positive(self):
        with pytest.raises(ValueError):
            Geofence(GeoPoint(0, 0), 0.0)
        with pytest.raises(ValueError):
            Geofence(GeoPoint(0, 0), -5.0)


class TestCreateSession:
    def test_empty_construction(self):
        s = make_session()
        assert s.cards == []
        assert s.embed_dim == 128

    def test_with_geofence(self):
        s = make_session(
            title="Gallery 760",
            geofence=Geofence(GeoPoint(40.7794, -73.9632), 200.0),
        )
        assert s.geofence.radius_m == 200.0

    def test_dim_below_8_rejected(self):
        with pytest.raises(ValueError):
            make_session(learner_id="x", title="t", embed_dim=4)

    def test_unique_ids(self):
        assert make_session().id != make_session().id

    def test_unsafe_session_id_rejected(self):
        with pytest.raises(ValueError):
            make_session(session_id="has/slash")


class TestAppendCard:
    def test_genesis_prev_hash(self):
        s = make_session()
        card = append_card(s, make_card())
        assert card.prev_hash == GENESIS_HASH
        assert card.prev_hash == "0" * 64

    def test_all_four_anchors_populated(self):
        s = make_session()
        card = append_card(s, make_card(
            text="Washington is the only figure standing -- everyone else is "
                 "crouched or rowing."))
        assert card.kind == "capture"
        assert card.photo_ref and card.voice_text
        assert card.ts and card.geo is not None
        assert len(card.embedding) == 128

    def test_hash_matches_external_sha256(self):
        s = make_session()
        a = append_card(s, make_card())
        b = append_card(s, make_card(ts="2025-10-18T14:05:00Z", text="stage ice"))
        for card in (a, b):
            assert card.self_hash == sha256_oracle(card)
        assert b.prev_hash == a.self_hash

    def test_non_monotone_ts_accepted(self):
        s = make_session()
        append_card(s, make_card(ts="2025-10-18T14:05:00Z"))
        late = append_card(s, make_card(ts="2025-10-18T14:00:00Z"))
        assert late.self_hash == sha256_oracle(late)

    def test_provocation_requires_gate(self):
        s = make_session()
        with pytest.raises(ValueError):
            append_card(s, make_card(kind="provocation"))
        card = append_card(s, make_card(kind="provocation"), gate_passed=True)
        assert card.kind == "provocation"

    def test_unknown_kind_rejected(self):
        s = make_session()
        with pytest.raises(ValueError):
            append_card(s, make_card(kind="lecture"))

    def test_embedding_deterministic(self):
        s = make_session()
        a = append_card(s, make_card(text="the ice looks staged"))
        b = append_card(s, make_card(ts="2025-10-18T14:05:00Z", text="the ice looks staged"))
        assert np.array_equal(a.embedding, b.embedding)


class TestChain:
    def test_chain_integrity_invariant(self):
        s = make_session()
        for i in range(5):
            append_card(s, make_card(ts=f"2025-10-18T14:0{i}:00Z", text=f"note {i}"))
        for i in range(1, 5):
            assert s.cards[i].prev_hash == s.cards[i - 1].self_hash
        assert verify_chain(s) is None

    def test_tamper_detected_by_verify_chain(self):
        s = make_session()
        append_card(s, make_card())
        append_card(s, make_card(ts="2025-10-18T14:05:00Z", text="second"))
        s.cards[0].voice_text = s.cards[0].voice_text.replace("a", "e", 1)
        assert verify_chain(s) == s.cards[0].id


class TestRoundTrip:
    def test_maya_fixture_byte_identical(self, maya):
        for session in maya.sessions:
            blob = export_session(session)
            again = export_session(load_session(blob))
            assert blob == again

    def test_reload_preserves_everything(self, maya):
        loaded = load_session(export_session(maya.met))
        assert loaded.id == maya.met.id
        assert loaded.geofence == maya.met.geofence
        assert loaded.embed_dim == maya.met.embed_dim
        for orig, back in zip(maya.met.cards, loaded.cards):
            assert orig.self_hash == back.self_hash
            assert np.array_equal(orig.embedding, back.embedding)

    def test_tampered_voice_text_names_bad_card(self, maya):
        lines = export_session(maya.met).decode().split("\n")
        rec = json.loads(lines[3])
        rec["voice_text"] = "X" + rec["voice_text"][1:]
        lines[3] = json.dumps(rec, ensure_ascii=False, separators=(",", ":"))
        with pytest.raises(ChainError) as err:
            load_session("\n".join(lines).encode())
        assert err.value.card_id == rec["id"]

    def test_edited_prev_hash_detected(self, maya):
        lines = export_session(maya.met).decode().split("\n")
        rec = json.loads(lines[2])
        rec["prev_hash"] = "f" * 64
        lines[2] = json.dumps(rec, ensure_ascii=False, separators=(",", ":"))
        with pytest.raises(ChainError):
            load_session("\n".join(lines).encode())

    def test_empty_file_rejected(self):
        with pytest.raises(ChainError):
            load_session(b"")

    def test_headerless_file_rejected(self):
        with pytest.raises(ChainError):
            load_session(b'{"not": "a header"}\n')
