"""atlasd: the local HTTP service running the live field loop.

Single-process and local-first. Every ingest executes append -> link ->
(policy) provoke -> persist atomically under the session's write lock,
and the card is durable on disk before the 2xx response. Reads never
mutate state. Live updates stream as server-sent events; the same event
log is pollable as JSON for clients that cannot hold a stream open.

Errors use stable machine codes in a flat {code, message} body:
session-not-found, session-exists, card-not-found, empty-trajectory,
bad-request, bad-card.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, StreamingResponse

from .authenticity import DEFAULT_T_MIN, DEFAULT_V_MAX, verify_session
from .links import DEFAULT_K, DEFAULT_THETA, SemanticLink, build_network, link_candidates
from .model import CardInput, Geofence, GeoPoint, Session, card_record, parse_ts, session_header
from .provoke import GateError, generate_linked, generate_single
from .store import SessionStore, StoreError
from .trajectory import (
    DEFAULT_COS_MAX,
    DEFAULT_K_ATTRIB,
    DEFAULT_MAG_QUANTILE,
    DEFAULT_WINDOW,
    build_trajectory,
    trajectory_record,
)

POLICIES = ("auto", "on-link", "every-nth", "off")


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8847
    data_dir: str = "./atlas-data"
    embed_dim: int = 128
    theta: float = DEFAULT_THETA
    k: int = DEFAULT_K
    w: int = DEFAULT_WINDOW
    cos_max: float = DEFAULT_COS_MAX
    mag_quantile: float = DEFAULT_MAG_QUANTILE
    k_attrib: int = DEFAULT_K_ATTRIB
    v_max: float = DEFAULT_V_MAX
    t_min: float = DEFAULT_T_MIN
    # auto: provoke on an unsurfaced link, else on every policy_nth
    # consecutive capture; on-link and every-nth are the pure modes.
    policy: str = "auto"
    policy_nth: int = 2

    def validate(self) -> None:
        if self.policy not in POLICIES:
            raise ValueError(f"policy must be one of {POLICIES}, got {self.policy!r}")
        if not -1.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must be in [-1, 1], got {self.theta}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.w < 1 or self.w % 2 == 0:
            raise ValueError(f"w must be odd and >= 1, got {self.w}")
        if not 0.0 <= self.mag_quantile <= 1.0:
            raise ValueError(f"mag_quantile must be in [0, 1], got {self.mag_quantile}")
        if self.k_attrib < 1:
            raise ValueError(f"k_attrib must be >= 1, got {self.k_attrib}")
        if self.v_max <= 0 or self.t_min < 0:
            raise ValueError("v_max must be > 0 and t_min >= 0")
        if self.embed_dim < 8:
            raise ValueError(f"embed_dim must be >= 8, got {self.embed_dim}")
        if self.policy_nth < 1:
            raise ValueError(f"policy_nth must be >= 1, got {self.policy_nth}")

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        config = cls(**raw)
        config.validate()
        return config


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _not_found(session_id: str) -> ApiError:
    return ApiError(404, "session-not-found", f"no such session: {session_id}")


@dataclass
class _Event:
    seq: int
    type: str
    data: dict


@dataclass
class _SessionRuntime:
    events: list[_Event] = field(default_factory=list)
    pivot_count: int = 0
    cond: threading.Condition = field(default_factory=threading.Condition)


def _require(body: dict, key: str, kind, code: str = "bad-request"):
    if key not in body:
        raise ApiError(400, code, f"missing field {key!r}")
    value = body[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ApiError(400, code, f"field {key!r} must be {kind.__name__}")
    return value


class AtlasService:
    """Application state: the store plus per-session event logs."""

    def __init__(self, config: ServiceConfig):
        config.validate()
        self.config = config
        self.store = SessionStore(config.data_dir)
        self._runtimes: dict[str, _SessionRuntime] = {}
        self._rt_lock = threading.Lock()

    def runtime(self, session_id: str) -> _SessionRuntime:
        with self._rt_lock:
            rt = self._runtimes.get(session_id)
            if rt is None:
                rt = self._runtimes[session_id] = _SessionRuntime()
            return rt

    def emit(self, session_id: str, type_: str, data: dict) -> None:
        rt = self.runtime(session_id)
        with rt.cond:
            rt.events.append(_Event(seq=len(rt.events), type=type_, data=data))
            rt.cond.notify_all()

    def session(self, session_id: str) -> Session:
        try:
            return self.store.get(session_id)
        except StoreError:
            raise _not_found(session_id) from None

    # -- ingest pipeline ----------------------------------------------------

    def ingest(self, session_id: str, body: dict) -> tuple[dict, bool]:
        ts = _require(body, "ts", str, "bad-card")
        lat = _require(body, "lat", float, "bad-card")
        lon = _require(body, "lon", float, "bad-card")
        photo_ref = _require(body, "photo_ref", str, "bad-card")
        voice_text = _require(body, "voice_text", str, "bad-card")
        kind = body.get("kind", "capture")
        idem_key = body.get("idempotency_key")
        if idem_key is not None and not isinstance(idem_key, str):
            raise ApiError(400, "bad-card", "idempotency_key must be a string")
        if kind not in ("capture", "response"):
            raise ApiError(400, "bad-card", f"clients may not post kind {kind!r}")
        try:
            card = CardInput(
                ts=ts, geo=GeoPoint(lat, lon), photo_ref=photo_ref,
                voice_text=voice_text, kind=kind,
            )
            parse_ts(ts)
        except ValueError as exc:
            raise ApiError(400, "bad-card", str(exc)) from None

        with self.store.session_lock(session_id):
            session = self.session(session_id)
            stored, fresh = self.store.append(
                session_id, card, idempotency_key=idem_key
            )
            if not fresh:
                return {"card": card_record(stored), "provocation": None}, False
            self.emit(session_id, "card-appended", card_record(stored))
            provocation = None
            if kind == "capture":
                provocation = self._maybe_provoke(session, stored)
            self._check_pivots(session)
        return {"card": card_record(stored), "provocation": provocation}, True

    def _maybe_provoke(self, session: Session, trigger) -> dict | None:
        cfg = self.config
        if cfg.policy == "off":
            return None
        learner_cards = self.store.learner_cards(session.learner_id)
        link = None
        if cfg.policy in ("auto", "on-link"):
            surfaced = self.store.surfaced_pairs(session.learner_id)
            for cand in link_candidates(trigger, learner_cards, cfg.theta, cfg.k):
                if (cand.from_card, cand.to_card) not in surfaced:
                    link = cand
                    break
        due_nth = False
        if cfg.policy == "every-nth" or (cfg.policy == "auto" and link is None):
            since = 0
            for c in session.cards:
                if c.kind == "provocation":
                    since = 0
                elif c.kind == "capture":
                    since += 1
            due_nth = since >= cfg.policy_nth
        if link is None and not due_nth:
            return None

        try:
            if link is not None:
                _, prior = self.store.find_card(link.to_card)
                prov = generate_linked(trigger, prior)
            else:
                prov = generate_single(trigger)
        except (GateError, ValueError):
            return None

        # issue one second after the trigger so A1 ordering holds
        issued = trigger.when.timestamp() + 1.0
        ts = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(issued))
        stored, _ = self.store.append(
            session.id,
            CardInput(ts=ts, geo=trigger.geo, photo_ref="", voice_text=prov.text,
                      kind="provocation"),
            gate_passed=prov.gate.passed,
        )
        link_rec = None
        if link is not None:
            self.store.mark_surfaced(session.learner_id, link.from_card, link.to_card)
            link_rec = {
                "from": link.from_card,
                "to": link.to_card,
                "similarity": link.similarity,
                "cross_session": link.cross_session,
                "surfaced": True,
            }
        out = {"card": card_record(stored), "link": link_rec}
        self.emit(session.id, "provocation-issued", out)
        return out

    def _check_pivots(self, session: Session) -> None:
        if not session.capture_cards():
            return
        cfg = self.config
        traj = build_trajectory(
            session, w=cfg.w, cos_max=cfg.cos_max,
            mag_quantile=cfg.mag_quantile, k_attrib=cfg.k_attrib,
        )
        rt = self.runtime(session.id)
        if len(traj.pivots) > rt.pivot_count:
            for pv in traj.pivots[rt.pivot_count:]:
                self.emit(session.id, "pivot-detected", {
                    "index": pv.index,
                    "turn_cosine": pv.turn_cosine,
                    "magnitude": pv.magnitude,
                    "attributed_provocation": pv.attributed_provocation,
                })
        rt.pivot_count = len(traj.pivots)


def _link_records(links: list[SemanticLink], surfaced: set[tuple[str, str]]) -> list[dict]:
    return [
        {
            "from": ln.from_card,
            "to": ln.to_card,
            "similarity": ln.similarity,
            "cross_session": ln.cross_session,
            "surfaced": (ln.from_card, ln.to_card) in surfaced,
        }
        for ln in links
    ]


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    svc = AtlasService(config or ServiceConfig())
    app = FastAPI(title="atlasd", docs_url=None, redoc_url=None)
    app.state.service = svc

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_req: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400, content={"code": "bad-request", "message": str(exc)}
        )

    @app.post("/sessions", status_code=201)
    def create_session_ep(body: dict):
        learner_id = _require(body, "learner_id", str)
        title = _require(body, "title", str)
        geofence = None
        if body.get("geofence") is not None:
            gf = body["geofence"]
            if not isinstance(gf, dict):
                raise ApiError(400, "bad-request", "geofence must be an object")
            try:
                geofence = Geofence(
                    GeoPoint(_require(gf, "lat", float), _require(gf, "lon", float)),
                    _require(gf, "radius_m", float),
                )
            except ValueError as exc:
                raise ApiError(400, "bad-request", str(exc)) from None
        try:
            session = svc.store.create(
                learner_id,
                title,
                geofence=geofence,
                embed_dim=int(body.get("embed_dim", svc.config.embed_dim)),
                session_id=body.get("session_id"),
            )
        except ValueError as exc:
            if "already exists" in str(exc):
                raise ApiError(409, "session-exists", str(exc)) from None
            raise ApiError(400, "bad-request", str(exc)) from None
        return session_header(session)

    @app.post("/sessions/{session_id}/cards")
    def post_card(session_id: str, body: dict):
        record, fresh = svc.ingest(session_id, body)
        return JSONResponse(status_code=201 if fresh else 200, content=record)

    @app.get("/sessions/{session_id}/cards")
    def get_cards(session_id: str, after: int = -1):
        session = svc.session(session_id)
        cards = [
            dict(card_record(c), seq=i)
            for i, c in enumerate(session.cards)
            if i > after
        ]
        return {"session_id": session_id, "cards": cards}

    @app.get("/sessions/{session_id}/trajectory")
    def get_trajectory(session_id: str):
        session = svc.session(session_id)
        if not session.capture_cards():
            raise ApiError(404, "empty-trajectory",
                           f"session {session_id} has no capture cards")
        cfg = svc.config
        traj = build_trajectory(
            session, w=cfg.w, cos_max=cfg.cos_max,
            mag_quantile=cfg.mag_quantile, k_attrib=cfg.k_attrib,
        )
        return trajectory_record(traj)

    @app.get("/sessions/{session_id}/authenticity")
    def get_authenticity(session_id: str):
        session = svc.session(session_id)
        report = verify_session(
            session, v_max=svc.config.v_max, t_min=svc.config.t_min
        )
        return report.to_record()

    @app.get("/learners/{learner_id}/links")
    def get_links(learner_id: str):
        cards = svc.store.learner_cards(learner_id)
        links = build_network(cards, theta=svc.config.theta)
        surfaced = svc.store.surfaced_pairs(learner_id)
        return {"learner_id": learner_id, "links": _link_records(links, surfaced)}

    @app.get("/sessions/{session_id}/events")
    def get_events(
        session_id: str,
        after: int = -1,
        format: str = "stream",
        max_events: int | None = None,
        idle_timeout_s: float | None = None,
    ):
        svc.session(session_id)
        rt = svc.runtime(session_id)
        if format == "json":
            with rt.cond:
                events = [
                    {"seq": e.seq, "type": e.type, "data": e.data}
                    for e in rt.events
                    if e.seq > after
                ]
            return {"session_id": session_id, "events": events}
        if format != "stream":
            raise ApiError(400, "bad-request", "format must be 'stream' or 'json'")

        def stream():
            cursor = after
            sent = 0
            while True:
                with rt.cond:
                    pending = [e for e in rt.events if e.seq > cursor]
                    if not pending:
                        got = rt.cond.wait(timeout=idle_timeout_s)
                        if not got and idle_timeout_s is not None:
                            return
                        pending = [e for e in rt.events if e.seq > cursor]
                for e in pending:
                    payload = json.dumps(
                        e.data, ensure_ascii=False, separators=(",", ":")
                    )
                    yield f"id: {e.seq}\nevent: {e.type}\ndata: {payload}\n\n"
                    cursor = e.seq
                    sent += 1
                    if max_events is not None and sent >= max_events:
                        return

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.get("/healthz")
    def healthz():
        return {"ok": True, "config": asdict(svc.config)}

    return app


def serve(config: ServiceConfig) -> None:
    """Run atlasd until interrupted."""
    import uvicorn

    config.validate()
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
