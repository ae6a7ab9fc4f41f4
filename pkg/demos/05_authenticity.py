"""
Authenticity: Proving the Walk Happened
=======================================

A field journal is only worth trusting if it was actually made in the
field. Five checks run over a session: monotone timestamps (A1),
physically plausible movement (A2), geofence containment (A3), an
intact hash chain (A4), and minimum capture spacing (A5). Distances
come from the haversine formula on a spherical Earth.
"""
import copy

from fieldatlas import (
    CardInput,
    GeoPoint,
    append_card,
    create_session,
    haversine,
    maya_fixture,
    verify_session,
)

print("Authenticity: Proving the Walk Happened")
print("=" * 40)

maya = maya_fixture()

###############################################################################
# The pristine fixture passes
# ---------------------------

for session in (maya.met, maya.lincoln):
    report = verify_session(session)
    print(f"{session.id}: authentic={report.authentic} "
          f"({len(report.violations)} violations)")

###############################################################################
# Teleportation fails A2
# ----------------------
# The Met and the Lincoln Memorial are ~331 km apart. Claiming both
# within five minutes implies a speed three orders of magnitude over
# the walking limit.

met = GeoPoint(40.7794, -73.9632)
lincoln = GeoPoint(38.8893, -77.0502)
dist = haversine(met, lincoln)
print(f"\nMet -> Lincoln Memorial: {dist / 1000:.1f} km")
print(f"implied speed over 5 min: {dist / 300:.0f} m/s (limit 3 m/s)")

jump = create_session("maya", "impossible commute", session_id="jump")
append_card(jump, CardInput(ts="2025-10-18T14:00:00Z", geo=met,
                            photo_ref="", voice_text="standing figure"))
append_card(jump, CardInput(ts="2025-10-18T14:05:00Z", geo=lincoln,
                            photo_ref="", voice_text="seated figure"))
report = verify_session(jump)
for v in report.violations:
    print(f"  {v.code} on {','.join(v.card_ids)}: {v.detail}")

###############################################################################
# GPS jitter does not fail A2
# ---------------------------
# Fixes within the 15 m deadband are treated as stationary no matter
# how small the time delta, so ordinary receiver noise never trips the
# speed check. The fixture cards carry exactly that kind of jitter.

print(f"\nfixture Met geo spread stays inside the deadband; "
      f"authentic={verify_session(maya.met).authentic}")

###############################################################################
# Editing history fails A4
# ------------------------
# Rewriting one voice note breaks that card's stored hash; the report
# names the card.

tampered = copy.deepcopy(maya.met)
tampered.cards[4].voice_text = "Actually the light was nothing special."
report = verify_session(tampered)
print(f"\nafter rewriting card 4: authentic={report.authentic}")
for v in report.violations:
    print(f"  {v.code} on {','.join(v.card_ids)}: {v.detail}")

###############################################################################
# Sessions months apart are independent
# -------------------------------------
# A2 reasons within a session. Visiting a different city months later
# is a new session and raises nothing.

print(f"\nMet (October) and Lincoln (March) both verify cleanly: "
      f"{verify_session(maya.met).authentic and verify_session(maya.lincoln).authentic}")
