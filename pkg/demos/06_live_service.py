"""
The Live Loop: Ingest, Link, Provoke
====================================

atlasd runs the whole loop on every posted capture: append to the
chain, look for semantic links into the learner's history, and (by
policy) issue a gated provocation, all before the request returns.
This demo drives the service layer directly, then leaves the store on
disk so the CLI can pick it up.

The same store serves `atlas serve` for HTTP clients:

    atlas --data-dir demos/out/atlas-data serve --port 8847
    curl localhost:8847/sessions/maya-met/trajectory
"""
import shutil
from pathlib import Path

from fieldatlas import AtlasService, ServiceConfig, maya_fixture

print("The Live Loop: Ingest, Link, Provoke")
print("=" * 40)

maya = maya_fixture()
data_dir = Path(__file__).parent / "out" / "atlas-data"
if data_dir.exists():
    shutil.rmtree(data_dir)

svc = AtlasService(ServiceConfig(data_dir=str(data_dir)))

###############################################################################
# Replaying the museum morning
# ----------------------------
# Only the learner-authored cards are posted; provocations are the
# service's to issue. The default policy provokes on an unsurfaced
# link, else on every second consecutive capture.

for session in (maya.met, maya.lincoln):
    svc.store.create(session.learner_id, session.title,
                     geofence=session.geofence, embed_dim=session.embed_dim,
                     session_id=session.id)
    print(f"\n-- session {session.id}")
    for card in session.cards:
        if card.kind == "provocation":
            continue
        record, _ = svc.ingest(session.id, {
            "ts": card.ts, "lat": card.geo.lat, "lon": card.geo.lon,
            "photo_ref": card.photo_ref, "voice_text": card.voice_text,
            "kind": card.kind,
        })
        line = f"  {record['card']['id']} ({card.kind})"
        prov = record["provocation"]
        if prov:
            line += f" -> provoked {prov['card']['id']}"
        print(line)
        if prov:
            print(f"       {prov['card']['voice_text']!r}")
            if prov["link"]:
                ln = prov["link"]
                print(f"       via link {ln['from']} -> {ln['to']} "
                      f"(sim={ln['similarity']:.4f}, "
                      f"cross_session={ln['cross_session']})")

###############################################################################
# The event log
# -------------
# Everything the loop did is replayable per session: card appends,
# issued provocations, detected pivots. HTTP clients stream these as
# server-sent events or poll them as JSON.

for sid in ("maya-met", "maya-lincoln"):
    rt = svc.runtime(sid)
    print(f"\n{sid} events:")
    for e in rt.events:
        print(f"  [{e.seq}] {e.type}")

###############################################################################
# The store persists
# ------------------
# Cards were fsynced before each ingest returned. Try the CLI next:
#
#   atlas --data-dir demos/out/atlas-data etm --session maya-met
#   atlas --data-dir demos/out/atlas-data verify --session maya-met
#   atlas --data-dir demos/out/atlas-data links --learner maya

print(f"\nstore on disk: {data_dir}")
for p in sorted((data_dir / "sessions").glob("*.jsonl")):
    print(f"  {p.name}: {len(p.read_bytes())} bytes")
