"""Field Atlas: hash-chained field notes, epistemic trajectories, provocations.

A local-first toolkit for situated learning capture. Data Cards (photo
reference, voice transcript, GPS, timestamp) append to tamper-evident
per-session chains; a deterministic embedder turns each card's transcript
into a vector; the semantic network links related observations across
sessions; the SCL gate constrains generated provocations to questions
grounded in the learner's own vocabulary; and the trajectory pipeline
surfaces pivots, velocity and comparable 2D paths. A small HTTP service
(atlasd) and CLI (atlas) expose the loop to clients.
"""

from .authenticity import (
    AuthenticityReport,
    EARTH_RADIUS_M,
    Violation,
    haversine,
    verify_session,
)
from .embedding import HashedEmbedder, STOPWORDS, cosine, embed_text, fnv1a_64, tokenize
from .fixture import MayaFixture, maya_fixture
from .links import SemanticLink, build_network, link_candidates, links_to_jsonl
from .model import (
    CardInput,
    ChainError,
    DataCard,
    GENESIS_HASH,
    Geofence,
    GeoPoint,
    Session,
    append_card,
    create_session,
    export_session,
    load_session,
    parse_ts,
    verify_chain,
)
from .plotting import MarkerStyle, PlotSpec, render_svg
from .provoke import (
    GateError,
    GateVerdict,
    Provocation,
    gate,
    generate_linked,
    generate_single,
    session_vocab,
)
from .service import AtlasService, ServiceConfig, create_app, serve
from .store import SessionStore, StoreError
from .trajectory import (
    EpistemicTrajectory,
    PivotMarker,
    TrajectoryPoint,
    build_trajectory,
    detect_pivots,
    dtw_distance,
    frechet_distance,
    reduce_2d,
    smooth,
    trajectory_record,
    velocity_series,
)

__version__ = "0.1.0"

__all__ = [
    "AtlasService",
    "AuthenticityReport",
    "CardInput",
    "ChainError",
    "DataCard",
    "EARTH_RADIUS_M",
    "EpistemicTrajectory",
    "GENESIS_HASH",
    "GateError",
    "GateVerdict",
    "Geofence",
    "GeoPoint",
    "HashedEmbedder",
    "MarkerStyle",
    "MayaFixture",
    "PivotMarker",
    "PlotSpec",
    "Provocation",
    "STOPWORDS",
    "SemanticLink",
    "ServiceConfig",
    "Session",
    "SessionStore",
    "StoreError",
    "TrajectoryPoint",
    "Violation",
    "append_card",
    "build_network",
    "build_trajectory",
    "cosine",
    "create_app",
    "create_session",
    "detect_pivots",
    "dtw_distance",
    "embed_text",
    "export_session",
    "fnv1a_64",
    "frechet_distance",
    "gate",
    "generate_linked",
    "generate_single",
    "haversine",
    "link_candidates",
    "links_to_jsonl",
    "load_session",
    "maya_fixture",
    "parse_ts",
    "reduce_2d",
    "render_svg",
    "serve",
    "session_vocab",
    "smooth",
    "tokenize",
    "trajectory_record",
    "velocity_series",
    "verify_chain",
    "verify_session",
]
