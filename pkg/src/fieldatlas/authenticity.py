"""Physical-metadata and chain verification for a session.

Checks are evidence, not proof: a clean report means the session is
consistent with a person actually moving through the declared places at
the recorded times, which raises the cost of fabricating a trajectory;
it does not cryptographically guarantee authenticity. Verification is
read-only and per-session; gaps between different sessions are never
checked, so months-apart visits cannot trip the speed or spacing rules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import GENESIS_HASH, GeoPoint, Session

EARTH_RADIUS_M = 6_371_008.8

# Defaults: fast museum/urban walking; two-step capture protocol spacing;
# indoor GPS jitter deadband under which movement never counts as travel.
DEFAULT_V_MAX = 3.0
DEFAULT_T_MIN = 10.0
GPS_DEADBAND_M = 15.0

CHECK_CODES = ("A1", "A2", "A3", "A4", "A5")


@dataclass
class Violation:
    code: str
    card_ids: list[str]
    detail: str


@dataclass
class AuthenticityReport:
    session_id: str
    authentic: bool
    violations: list[Violation] = field(default_factory=list)
    params_used: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "session_id": self.session_id,
            "authentic": self.authentic,
            "violations": [
                {"code": v.code, "card_ids": v.card_ids, "detail": v.detail}
                for v in self.violations
            ],
            "params_used": self.params_used,
        }


def haversine(p: GeoPoint, q: GeoPoint) -> float:
    """Great-circle distance in meters."""
    phi1 = math.radians(p.lat)
    phi2 = math.radians(q.lat)
    dphi = math.radians(q.lat - p.lat)
    dlam = math.radians(q.lon - p.lon)
    a = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(math.sqrt(a))


def verify_session(
    session: Session,
    v_max: float = DEFAULT_V_MAX,
    t_min: float = DEFAULT_T_MIN,
) -> AuthenticityReport:
    """Run the five per-session checks and collect violations.

    A1 timestamps strictly increase; A2 implied speed between consecutive
    cards stays under ``v_max`` m/s (movements inside the GPS deadband are
    ignored); A3 every card sits inside the declared geofence, if any;
    A4 the hash chain recomputes; A5 consecutive learner captures are at
    least ``t_min`` seconds apart. Problems are violations, not errors.
    """
    violations: list[Violation] = []
    cards = session.cards

    for prev, cur in zip(cards, cards[1:]):
        if cur.when <= prev.when:
            violations.append(
                Violation("A1", [prev.id, cur.id],
                          f"timestamp {cur.ts} does not increase after {prev.ts}")
            )

    for prev, cur in zip(cards, cards[1:]):
        dist = haversine(prev.geo, cur.geo)
        if dist <= GPS_DEADBAND_M:
            continue
        dt = (cur.when - prev.when).total_seconds()
        if dt <= 0:
            # A1 already fired; an instantaneous jump is also a speed violation.
            speed = math.inf
        else:
            speed = dist / dt
        if speed > v_max:
            violations.append(
                Violation("A2", [prev.id, cur.id],
                          f"{dist:.0f} m in {dt:.0f} s implies {speed:.1f} m/s > {v_max} m/s")
            )

    if session.geofence is not None:
        fence = session.geofence
        for card in cards:
            dist = haversine(fence.center, card.geo)
            if dist > fence.radius_m:
                violations.append(
                    Violation("A3", [card.id],
                              f"{dist:.0f} m from geofence center exceeds "
                              f"radius {fence.radius_m:.0f} m")
                )

    prev_hash = GENESIS_HASH
    for card in cards:
        if card.prev_hash != prev_hash:
            violations.append(
                Violation("A4", [card.id], "prev_hash does not match preceding card")
            )
        elif card.compute_hash() != card.self_hash:
            violations.append(
                Violation("A4", [card.id], "stored self_hash does not match payload")
            )
        prev_hash = card.self_hash

    captures = [c for c in cards if c.kind == "capture"]
    for prev, cur in zip(captures, captures[1:]):
        dt = (cur.when - prev.when).total_seconds()
        if dt < t_min:
            violations.append(
                Violation("A5", [prev.id, cur.id],
                          f"captures {dt:.0f} s apart; framing a photo and recording "
                          f"a note take at least {t_min:.0f} s")
            )

    return AuthenticityReport(
        session_id=session.id,
        authentic=not violations,
        violations=violations,
        params_used={
            "v_max": v_max,
            "t_min": t_min,
            "gps_deadband_m": GPS_DEADBAND_M,
            "earth_radius_m": EARTH_RADIUS_M,
        },
    )
