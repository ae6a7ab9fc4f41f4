"""
Epistemic Trajectories, Pivots and the Two-Panel View
=====================================================

A session's voice notes, embedded and smoothed, trace a path through
meaning space. Projected to 2D that path becomes readable: steady
drift while the learner describes, then a sharp turn when a
provocation lands and the framing changes. This demo reproduces the
bundled museum morning end to end and writes the SVG view.
"""
from pathlib import Path

import numpy as np

from fieldatlas import (
    build_trajectory,
    dtw_distance,
    frechet_distance,
    maya_fixture,
    render_svg,
    trajectory_record,
)

print("Epistemic Trajectories, Pivots and the Two-Panel View")
print("=" * 40)

maya = maya_fixture()

###############################################################################
# The museum morning
# ------------------
# Six learner cards over one hour: two observational notes, a response
# to the provocation, then three notes in a new interpretive register.

traj = build_trajectory(maya.met)
print(f"session {traj.session_id}: {len(traj.points)} points")
for i, p in enumerate(traj.points):
    print(f"  [{i}] {p.t}  v={p.v:.4f}/min  xy=({p.xy[0]:+.3f}, {p.xy[1]:+.3f})")

###############################################################################
# The pivot
# ---------
# A pivot is an interior point where the smoothed path turns at least
# 90 degrees with above-median magnitude. Attribution walks back from
# the turn to the nearest recent provocation card.

for pv in traj.pivots:
    print(f"\npivot at point {pv.index}: turn_cosine={pv.turn_cosine:.4f}, "
          f"magnitude={pv.magnitude:.4f}")
    print(f"  attributed to provocation card: {pv.attributed_provocation}")

###############################################################################
# The velocity profile
# --------------------
# Early exploration moves fast; after the reframing settles, the notes
# consolidate and slow down.

total = traj.points[-1].minutes
early = [p.v for p in traj.points if p.minutes <= 15.0]
late = [p.v for p in traj.points if p.minutes >= total - 30.0]
print(f"\nmean velocity, first 15 min:  {np.mean(early):.5f}/min")
print(f"mean velocity, final 30 min:  {np.mean(late):.5f}/min")
print(f"ratio: {np.mean(early) / np.mean(late):.2f}")

###############################################################################
# Comparing visits
# ----------------
# Trajectory-to-trajectory distances use discrete Frechet (worst-case
# separation under monotone alignment) and DTW (total warped cost).

lincoln = build_trajectory(maya.lincoln)
a = np.array([p.xy for p in traj.points])
b = np.array([p.xy for p in lincoln.points])
print(f"\nfrechet(met, lincoln) = {frechet_distance(a, b):.4f}")
print(f"dtw(met, lincoln)     = {dtw_distance(a, b):.4f}")

###############################################################################
# The deterministic SVG
# ---------------------
# Panel A is the 2D trajectory with the pivot marked and labeled;
# Panel B is the card timeline with the provocation's diamond glyph.
# Bytes are identical on every render of the same trajectory.

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)
svg = render_svg(traj)
(out / "met_trajectory.svg").write_bytes(svg)
print(f"\nwrote {out / 'met_trajectory.svg'} ({len(svg)} bytes)")
print(f"stable across renders: {render_svg(traj) == svg}")

record = trajectory_record(traj)
print(f"export record keys: {sorted(record)}")
