"""Trajectory modeling over per-card embeddings.

Pipeline: filter to learner cards (captures and responses; provocation
cards carry AI text, so they become timeline events instead of points),
smooth with a centered moving average, derive per-minute velocity,
project to 2D via per-session PCA, and detect pivots as sharp direction
changes in the smoothed full-dimension space. Two trajectory-comparison
metrics are provided: discrete Frechet distance and classic DTW.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DataCard, GeoPoint, Session

# Velocity time floor: one second, in minutes. Same-second captures would
# otherwise blow the rate up.
MIN_DT_MINUTES = 1.0 / 60.0

DEFAULT_WINDOW = 3
DEFAULT_COS_MAX = 0.0
DEFAULT_MAG_QUANTILE = 0.5
DEFAULT_K_ATTRIB = 2

# Relative singular-value cutoff below which a principal component is
# treated as numerically absent and its coordinates zero-filled.
_RANK_RTOL = 1e-12


@dataclass
class PivotMarker:
    index: int
    turn_cosine: float
    magnitude: float
    attributed_provocation: str | None = None


@dataclass
class TrajectoryPoint:
    t: str
    minutes: float
    e: np.ndarray
    v: float
    xy: tuple[float, float]
    geo: GeoPoint
    card_id: str


@dataclass
class EpistemicTrajectory:
    session_id: str
    points: list[TrajectoryPoint]
    pivots: list[PivotMarker]
    provocation_indices: list[int]


def smooth(raw, w: int = DEFAULT_WINDOW) -> np.ndarray:
    """Centered moving average over an odd index window, truncated at ends.

    Output vectors are not re-normalized; smoothed points live inside the
    unit ball. ``w=1`` is the identity.
    """
    if w < 1 or w % 2 == 0:
        raise ValueError(f"window must be odd and >= 1, got {w}")
    arr = np.asarray(raw, dtype=np.float64)
    if arr.ndim != 2:
        arr = np.atleast_2d(arr)
    n = arr.shape[0]
    half = w // 2
    out = np.empty_like(arr)
    for i in range(n):
        lo = max(0, i - half)
        hi = min(n, i + half + 1)
        out[i] = arr[lo:hi].mean(axis=0)
    return out


def reduce_2d(points) -> np.ndarray:
    """Project embeddings onto their top-2 principal components.

    Mean-centers, then uses the SVD of the centered matrix. Sign
    convention: each component vector is flipped so its largest-magnitude
    entry (lowest index on ties) is positive. Missing components (fewer
    than 3 points, or rank < 2) are zero-filled.
    """
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim != 2:
        arr = np.atleast_2d(arr)
    n = arr.shape[0]
    if n == 0:
        raise ValueError("need at least one point")
    centered = arr - arr.mean(axis=0)
    coords = np.zeros((n, 2), dtype=np.float64)
    if n < 2:
        return coords
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    if svals[0] <= 0.0:
        return coords
    for j in range(min(2, len(svals))):
        if svals[j] <= _RANK_RTOL * svals[0]:
            break
        comp = vt[j]
        lead = np.argmax(np.abs(comp))
        if comp[lead] < 0:
            comp = -comp
        coords[:, j] = centered @ comp
    return coords


def velocity_series(embeddings, minutes) -> list[float]:
    """Per-minute movement speed through embedding space.

    The first point gets 0; later points get step length over elapsed
    minutes, floored at one second.
    """
    arr = np.asarray(embeddings, dtype=np.float64)
    t = np.asarray(minutes, dtype=np.float64)
    if arr.shape[0] != t.shape[0]:
        raise ValueError("embeddings and times must align")
    v = [0.0]
    for i in range(1, arr.shape[0]):
        dt = max(t[i] - t[i - 1], MIN_DT_MINUTES)
        v.append(float(np.linalg.norm(arr[i] - arr[i - 1]) / dt))
    return v


def detect_pivots(
    smoothed,
    cos_max: float = DEFAULT_COS_MAX,
    mag_quantile: float = DEFAULT_MAG_QUANTILE,
) -> list[PivotMarker]:
    """Find sharp turns in a smoothed trajectory.

    An interior point pivots when the angle between incoming and outgoing
    displacement reaches at least 90 degrees (cosine <= ``cos_max``) and
    the outgoing step is at least the ``mag_quantile`` of all step
    lengths. Zero-length displacements cannot pivot (the turn angle is
    undefined, so the rule fails closed). Fewer than 3 points yield no
    pivots. Attribution to a provocation is a separate step; see
    :func:`build_trajectory`.
    """
    arr = np.asarray(smoothed, dtype=np.float64)
    n = arr.shape[0]
    if n < 3:
        return []
    disp = arr[1:] - arr[:-1]
    norms = np.linalg.norm(disp, axis=1)
    mag_gate = float(np.quantile(norms, mag_quantile))
    pivots = []
    for i in range(1, n - 1):
        d_in = disp[i - 1]
        d_out = disp[i]
        n_in = norms[i - 1]
        n_out = norms[i]
        if n_in == 0.0 or n_out == 0.0:
            continue
        c = float(np.dot(d_in, d_out) / (n_in * n_out))
        if c <= cos_max and n_out >= mag_gate:
            pivots.append(PivotMarker(index=i, turn_cosine=c, magnitude=float(n_out)))
    return pivots


def _attribute(
    pivots: list[PivotMarker],
    point_cards: list[DataCard],
    all_cards: list[DataCard],
    k_attrib: int,
) -> None:
    pos = {c.id: i for i, c in enumerate(all_cards)}
    for pivot in pivots:
        after = point_cards[pivot.index + 1]
        at = pos[after.id]
        for back in range(at - 1, max(-1, at - 1 - k_attrib), -1):
            if all_cards[back].kind == "provocation":
                pivot.attributed_provocation = all_cards[back].id
                break


def build_trajectory(
    session: Session,
    w: int = DEFAULT_WINDOW,
    cos_max: float = DEFAULT_COS_MAX,
    mag_quantile: float = DEFAULT_MAG_QUANTILE,
    k_attrib: int = DEFAULT_K_ATTRIB,
) -> EpistemicTrajectory:
    """Run the full pipeline over a session's learner cards."""
    point_cards = session.capture_cards()
    if not point_cards:
        raise ValueError(f"session {session.id} has no capture or response cards")
    raw = np.stack([c.embedding for c in point_cards])
    smoothed = smooth(raw, w)
    start = point_cards[0].when
    minutes = [(c.when - start).total_seconds() / 60.0 for c in point_cards]
    v = velocity_series(smoothed, minutes)
    xy = reduce_2d(smoothed)
    pivots = detect_pivots(smoothed, cos_max=cos_max, mag_quantile=mag_quantile)
    _attribute(pivots, point_cards, session.cards, k_attrib)
    points = [
        TrajectoryPoint(
            t=c.ts,
            minutes=minutes[i],
            e=smoothed[i],
            v=v[i],
            xy=(float(xy[i, 0]), float(xy[i, 1])),
            geo=c.geo,
            card_id=c.id,
        )
        for i, c in enumerate(point_cards)
    ]
    provocation_indices = [
        i for i, c in enumerate(session.cards) if c.kind == "provocation"
    ]
    return EpistemicTrajectory(
        session_id=session.id,
        points=points,
        pivots=pivots,
        provocation_indices=provocation_indices,
    )


def trajectory_record(traj: EpistemicTrajectory) -> dict:
    """JSON-ready export record for a trajectory."""
    return {
        "session_id": traj.session_id,
        "points": [
            {
                "card_id": p.card_id,
                "ts": p.t,
                "xy": [p.xy[0], p.xy[1]],
                "v": p.v,
                "lat": p.geo.lat,
                "lon": p.geo.lon,
            }
            for p in traj.points
        ],
        "pivots": [
            {
                "index": pv.index,
                "turn_cosine": pv.turn_cosine,
                "magnitude": pv.magnitude,
                "attributed_provocation": pv.attributed_provocation,
            }
            for pv in traj.pivots
        ],
        "provocation_indices": traj.provocation_indices,
    }


def _pairwise_dist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt((diff**2).sum(axis=-1))


def frechet_distance(a, b) -> float:
    """Discrete Frechet distance with Euclidean ground distance.

    Standard dynamic program over the coupling lattice: each cell holds
    the min over couplings of the max pointwise distance so far.
    """
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ValueError("trajectories must be nonempty")
    d = _pairwise_dist(a, b)
    n, m = d.shape
    ca = np.full((n, m), np.inf)
    ca[0, 0] = d[0, 0]
    for j in range(1, m):
        ca[0, j] = max(ca[0, j - 1], d[0, j])
    for i in range(1, n):
        ca[i, 0] = max(ca[i - 1, 0], d[i, 0])
        for j in range(1, m):
            ca[i, j] = max(min(ca[i - 1, j], ca[i - 1, j - 1], ca[i, j - 1]), d[i, j])
    return float(ca[n - 1, m - 1])


def dtw_distance(a, b) -> float:
    """Classic DTW with Euclidean ground cost, sum aggregation, no window."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ValueError("trajectories must be nonempty")
    d = _pairwise_dist(a, b)
    n, m = d.shape
    c = np.full((n + 1, m + 1), np.inf)
    c[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            c[i, j] = d[i - 1, j - 1] + min(c[i - 1, j], c[i - 1, j - 1], c[i, j - 1])
    return float(c[n, m])
