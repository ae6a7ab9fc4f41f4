"""atlas: batch command-line interface over the same store as atlasd.

Commands wrap module operations thinly: `ingest` runs the exact service
ingest pipeline (append, link, policy provocation), `etm` emits the
Fig.-3-style SVG and the trajectory export record, `verify` exits 0 iff
the session is authentic, `compare` runs the trajectory metrics, `gate`
and `provoke` expose the SCL machinery, and `serve` starts atlasd.

Outputs are deterministic for a given store so they can be golden-filed.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

import click

from .authenticity import verify_session
from .links import build_network, links_to_jsonl
from .plotting import PlotSpec, render_svg
from .provoke import GateError, gate as run_gate, generate_linked, generate_single, session_vocab
from .service import ApiError, AtlasService, ServiceConfig, serve as run_serve
from .store import StoreError
from .trajectory import build_trajectory, dtw_distance, frechet_distance, trajectory_record
from .model import ChainError, Geofence, GeoPoint


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def _config(ctx) -> ServiceConfig:
    return ctx.obj["config"]


def _service(ctx) -> AtlasService:
    return AtlasService(_config(ctx))


def _get_session(svc, session_id):
    # a corrupt session file surfaces here as a chain failure
    try:
        return svc.store.get(session_id)
    except (StoreError, ChainError) as exc:
        raise click.ClickException(str(exc))


@click.group()
@click.option("--data-dir", default=None, help="Store directory (default ./atlas-data).")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON file with ServiceConfig-shaped parameters.")
@click.pass_context
def main(ctx, data_dir, config_path):
    """Field Atlas batch tools."""
    if config_path is not None:
        config = ServiceConfig.from_file(config_path)
    else:
        config = ServiceConfig()
    if data_dir is not None:
        config.data_dir = data_dir
    config.validate()
    ctx.obj = {"config": config}


@main.command()
@click.option("--learner", required=True)
@click.option("--title", required=True)
@click.option("--session-id", default=None)
@click.option("--geofence", default=None, metavar="LAT,LON,RADIUS_M",
              help="Optional circular geofence.")
@click.option("--embed-dim", default=None, type=int)
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def new(ctx, learner, title, session_id, geofence, embed_dim, as_json):
    """Create a session in the store."""
    svc = _service(ctx)
    fence = None
    if geofence is not None:
        try:
            lat, lon, radius = (float(part) for part in geofence.split(","))
        except ValueError:
            raise click.ClickException("geofence must be LAT,LON,RADIUS_M")
        fence = Geofence(GeoPoint(lat, lon), radius)
    try:
        session = svc.store.create(
            learner, title, geofence=fence,
            embed_dim=embed_dim or svc.config.embed_dim, session_id=session_id,
        )
    except ValueError as exc:
        raise click.ClickException(str(exc))
    if as_json:
        click.echo(_dumps({"id": session.id, "learner_id": learner, "title": title}))
    else:
        click.echo(session.id)


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--session", "session_id", default=None,
              help="Target session for lines that carry no session_id.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def ingest(ctx, file, session_id, as_json):
    """Ingest a JSONL file of card bodies through the full pipeline.

    Each line: {ts, lat, lon, photo_ref, voice_text, kind?, session_id?,
    idempotency_key?}. Links and policy provocations fire exactly as they
    would over HTTP.
    """
    svc = _service(ctx)
    results = []
    for line_no, line in enumerate(Path(file).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        body = json.loads(line)
        target = body.pop("session_id", None) or session_id
        if target is None:
            raise click.ClickException(f"line {line_no}: no session_id and no --session")
        try:
            record, fresh = svc.ingest(target, body)
        except ApiError as exc:
            raise click.ClickException(f"line {line_no}: {exc.code}: {exc.message}")
        prov = record["provocation"]
        results.append({
            "card_id": record["card"]["id"],
            "fresh": fresh,
            "provocation": None if prov is None else prov["card"]["id"],
        })
    if as_json:
        click.echo(_dumps(results))
    else:
        for r in results:
            suffix = f" provoked {r['provocation']}" if r["provocation"] else ""
            click.echo(f"{r['card_id']}{suffix}")


@main.command()
@click.option("--session", "session_id", required=True)
@click.option("--svg", "svg_path", type=click.Path(dir_okay=False), default=None)
@click.option("--json", "json_path", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def etm(ctx, session_id, svg_path, json_path):
    """Build the epistemic trajectory; optionally write SVG / JSON files."""
    svc = _service(ctx)
    cfg = svc.config
    session = _get_session(svc, session_id)
    if not session.capture_cards():
        raise click.ClickException(f"session {session_id} has no capture cards")
    traj = build_trajectory(
        session, w=cfg.w, cos_max=cfg.cos_max,
        mag_quantile=cfg.mag_quantile, k_attrib=cfg.k_attrib,
    )
    if svg_path is not None:
        Path(svg_path).write_bytes(render_svg(traj, PlotSpec()))
    if json_path is not None:
        Path(json_path).write_text(_dumps(trajectory_record(traj)) + "\n", encoding="utf-8")
    click.echo(
        f"{session_id}: {len(traj.points)} points, {len(traj.pivots)} pivots, "
        f"{len(traj.provocation_indices)} provocations"
    )
    for pv in traj.pivots:
        click.echo(
            f"  pivot at point {pv.index}: turn_cosine={pv.turn_cosine:.4f} "
            f"magnitude={pv.magnitude:.4f} "
            f"provocation={pv.attributed_provocation or 'unattributed'}"
        )


@main.command()
@click.option("--session", "session_id", required=True)
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def verify(ctx, session_id, as_json):
    """Authenticity checks A1-A5; exit code 0 iff authentic."""
    svc = _service(ctx)
    session = _get_session(svc, session_id)
    report = verify_session(session, v_max=svc.config.v_max, t_min=svc.config.t_min)
    if as_json:
        click.echo(_dumps(report.to_record()))
    else:
        status = "authentic" if report.authentic else "NOT authentic"
        click.echo(f"{session_id}: {status}")
        for v in report.violations:
            click.echo(f"  {v.code} {','.join(v.card_ids)}: {v.detail}")
    sys.exit(0 if report.authentic else 1)


@main.command()
@click.option("--a", "a_id", required=True)
@click.option("--b", "b_id", required=True)
@click.option("--metric", type=click.Choice(["frechet", "dtw"]), default="frechet")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def compare(ctx, a_id, b_id, metric, as_json):
    """Compare two sessions' 2D trajectories."""
    import numpy as np

    svc = _service(ctx)
    cfg = svc.config
    paths = []
    for sid in (a_id, b_id):
        session = _get_session(svc, sid)
        if not session.capture_cards():
            raise click.ClickException(f"session {sid} has no capture cards")
        traj = build_trajectory(
            session, w=cfg.w, cos_max=cfg.cos_max,
            mag_quantile=cfg.mag_quantile, k_attrib=cfg.k_attrib,
        )
        paths.append(np.array([p.xy for p in traj.points]))
    fn = frechet_distance if metric == "frechet" else dtw_distance
    value = float(fn(paths[0], paths[1]))
    if as_json:
        click.echo(_dumps({"a": a_id, "b": b_id, "metric": metric, "distance": value}))
    else:
        click.echo(f"{metric}({a_id}, {b_id}) = {value:.6f}")


@main.command()
@click.option("--learner", required=True)
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def links(ctx, learner, as_json):
    """Semantic network over all the learner's sessions, as JSONL."""
    svc = _service(ctx)
    cards = svc.store.learner_cards(learner)
    network = build_network(cards, theta=svc.config.theta)
    surfaced = svc.store.surfaced_pairs(learner)
    for ln in network:
        ln.surfaced = (ln.from_card, ln.to_card) in surfaced
    if as_json:
        out = links_to_jsonl(network)
        if out:
            click.echo(out)
    else:
        if not network:
            click.echo(f"{learner}: no links")
        for ln in network:
            flag = " [surfaced]" if ln.surfaced else ""
            cross = "cross" if ln.cross_session else "within"
            click.echo(
                f"{ln.from_card} -> {ln.to_card} sim={ln.similarity:.4f} ({cross}){flag}"
            )


@main.command()
@click.option("--session", "session_id", required=True)
@click.option("--text", required=True)
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def gate(ctx, session_id, text, as_json):
    """Check text against the SCL gate for a session's vocabulary."""
    svc = _service(ctx)
    session = _get_session(svc, session_id)
    verdict = run_gate(text, session_vocab(session.cards))
    if as_json:
        click.echo(_dumps({
            "passed": verdict.passed,
            "rules": [
                {"code": r.code, "passed": r.passed, "detail": r.detail}
                for r in verdict.rule_results
            ],
        }))
    else:
        click.echo("PASS" if verdict.passed else "FAIL")
        for r in verdict.rule_results:
            click.echo(f"  {r.code} {'ok  ' if r.passed else 'FAIL'} {r.detail}")
    sys.exit(0 if verdict.passed else 1)


@main.command()
@click.option("--card", "card_id", required=True)
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def provoke(ctx, card_id, as_json):
    """Generate (but do not store) a provocation from a card.

    Uses the card's best unsurfaced link when one exists, else the
    single-card form.
    """
    svc = _service(ctx)
    try:
        session, card = svc.store.find_card(card_id)
    except (StoreError, ChainError) as exc:
        raise click.ClickException(str(exc))
    from .links import link_candidates

    corpus = svc.store.learner_cards(session.learner_id)
    surfaced = svc.store.surfaced_pairs(session.learner_id)
    link = None
    for cand in link_candidates(card, corpus, svc.config.theta, svc.config.k):
        if (cand.from_card, cand.to_card) not in surfaced:
            link = cand
            break
    try:
        if link is not None:
            _, prior = svc.store.find_card(link.to_card)
            prov = generate_linked(card, prior)
        else:
            prov = generate_single(card)
    except (GateError, ValueError) as exc:
        raise click.ClickException(f"cannot provoke from {card_id}: {exc}")
    if as_json:
        click.echo(_dumps({
            "text": prov.text,
            "trigger_card": prov.trigger_card,
            "linked_card": prov.linked_card,
            "gate_passed": prov.gate.passed,
        }))
    else:
        click.echo(prov.text)
        if prov.linked_card:
            click.echo(f"  (linked to {prov.linked_card})")


@main.command()
@click.option("--host", default=None)
@click.option("--port", default=None, type=int)
@click.pass_context
def serve(ctx, host, port):
    """Run the atlasd HTTP service."""
    config = dataclasses.replace(_config(ctx))
    if host is not None:
        config.host = host
    if port is not None:
        config.port = port
    run_serve(config)


if __name__ == "__main__":
    main()
