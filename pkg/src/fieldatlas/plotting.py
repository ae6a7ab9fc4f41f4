"""Two-panel SVG rendering of an epistemic trajectory.

Panel A is the 2D trajectory space: a time-ordered polyline through the
reduced coordinates with a marker per point and a distinct marker on
every pivot, annotated with the attributed provocation card. Panel B is
a horizontal card timeline with one glyph per card and provocations
distinguished. Output bytes are deterministic for identical input: all
coordinates are emitted with fixed two-decimal formatting and element
order follows data order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .trajectory import EpistemicTrajectory


@dataclass(frozen=True)
class MarkerStyle:
    shape: str  # "circle", "diamond" or "cross"
    size: float
    color: str


@dataclass(frozen=True)
class PlotSpec:
    width: int = 880
    height: int = 560
    margin_frac: float = 0.10
    capture: MarkerStyle = field(default=MarkerStyle("circle", 4.0, "#2a6f97"))
    provocation: MarkerStyle = field(default=MarkerStyle("diamond", 6.0, "#bc4749"))
    pivot: MarkerStyle = field(default=MarkerStyle("cross", 9.0, "#e07a0e"))


def _fmt(v: float) -> str:
    # fixed decimals keep output bytes stable across platforms
    return f"{v:.2f}"


def _marker(x: float, y: float, style: MarkerStyle, css_class: str) -> str:
    fx, fy = _fmt(x), _fmt(y)
    s = style.size
    if style.shape == "circle":
        return (f'<circle class="{css_class}" cx="{fx}" cy="{fy}" r="{_fmt(s)}" '
                f'fill="{style.color}"/>')
    if style.shape == "diamond":
        pts = " ".join(
            f"{_fmt(px)},{_fmt(py)}"
            for px, py in [(x, y - s), (x + s, y), (x, y + s), (x - s, y)]
        )
        return f'<polygon class="{css_class}" points="{pts}" fill="{style.color}"/>'
    if style.shape == "cross":
        h = s / 2.0
        d = (f"M {_fmt(x - h)} {_fmt(y - h)} L {_fmt(x + h)} {_fmt(y + h)} "
             f"M {_fmt(x - h)} {_fmt(y + h)} L {_fmt(x + h)} {_fmt(y - h)}")
        return (f'<path class="{css_class}" d="{d}" stroke="{style.color}" '
                f'stroke-width="2.5" fill="none"/>')
    raise ValueError(f"unknown marker shape: {style.shape!r}")


def _scale(values: list[float], lo_px: float, hi_px: float, margin_frac: float):
    """Affine map from data range (plus margin) to pixel range."""
    vmin, vmax = min(values), max(values)
    span = vmax - vmin
    if span == 0.0:
        span = 1.0
        vmin -= 0.5
    pad = span * margin_frac
    vmin -= pad
    span += 2 * pad

    def to_px(v: float) -> float:
        return lo_px + (v - vmin) / span * (hi_px - lo_px)

    return to_px


def render_svg(traj: EpistemicTrajectory, spec: PlotSpec = PlotSpec()) -> bytes:
    """Render the Fig.-3-style two-panel view. Raises on an empty trajectory."""
    if not traj.points:
        raise ValueError("cannot render an empty trajectory")

    w, h = spec.width, spec.height
    ax_l, ax_r = 70.0, w - 40.0
    ay_t, ay_b = 50.0, h - 150.0
    tl_y = h - 70.0

    xs = [p.xy[0] for p in traj.points]
    ys = [p.xy[1] for p in traj.points]
    sx = _scale(xs, ax_l, ax_r, spec.margin_frac)
    # SVG y runs downward; flip so larger latent values sit higher
    sy = _scale(ys, ay_b, ay_t, spec.margin_frac)

    out = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">'
    )
    out.append(f'<rect width="{w}" height="{h}" fill="white"/>')
    out.append(
        f'<text x="{_fmt(ax_l)}" y="30" font-size="15" fill="#222">'
        f"(A) Epistemic trajectory space: {traj.session_id}</text>"
    )
    out.append(
        f'<rect x="{_fmt(ax_l)}" y="{_fmt(ay_t)}" width="{_fmt(ax_r - ax_l)}" '
        f'height="{_fmt(ay_b - ay_t)}" fill="none" stroke="#999"/>'
    )
    out.append(
        f'<text x="{_fmt((ax_l + ax_r) / 2)}" y="{_fmt(ay_b + 24)}" font-size="12" '
        f'fill="#555" text-anchor="middle">latent dim 1</text>'
    )
    out.append(
        f'<text x="{_fmt(ax_l - 40)}" y="{_fmt((ay_t + ay_b) / 2)}" font-size="12" '
        f'fill="#555" text-anchor="middle" '
        f'transform="rotate(-90 {_fmt(ax_l - 40)} {_fmt((ay_t + ay_b) / 2)})">'
        f"latent dim 2</text>"
    )

    px = [(sx(x), sy(y)) for x, y in zip(xs, ys)]
    if len(px) > 1:
        path = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in px)
        out.append(
            f'<polyline class="traj-path" points="{path}" fill="none" '
            f'stroke="#888" stroke-width="1.5"/>'
        )
    for i, (x, y) in enumerate(px):
        out.append(_marker(x, y, spec.capture, "pt-capture"))
        out.append(
            f'<text x="{_fmt(x + 6)}" y="{_fmt(y - 6)}" font-size="10" '
            f'fill="#666">{i}</text>'
        )
    for pv in traj.pivots:
        x, y = px[pv.index]
        out.append(_marker(x, y, spec.pivot, "pivot-marker"))
        label = pv.attributed_provocation or "unattributed"
        out.append(
            f'<text class="pivot-label" x="{_fmt(x + 8)}" y="{_fmt(y + 14)}" '
            f'font-size="11" fill="{spec.pivot.color}">pivot &#8592; {label}</text>'
        )

    # Panel B: one glyph per card in session order. Timeline slots are
    # reconstructed from provocation_indices plus the point sequence.
    n_cards = len(traj.points) + len(traj.provocation_indices)
    prov_set = list(traj.provocation_indices)
    out.append(
        f'<text x="{_fmt(ax_l)}" y="{_fmt(tl_y - 28)}" font-size="15" fill="#222">'
        f"(B) Data Card timeline</text>"
    )
    out.append(
        f'<line x1="{_fmt(ax_l)}" y1="{_fmt(tl_y)}" x2="{_fmt(ax_r)}" '
        f'y2="{_fmt(tl_y)}" stroke="#999"/>'
    )
    if n_cards == 1:
        slot_xs = [(ax_l + ax_r) / 2]
    else:
        step = (ax_r - ax_l) / (n_cards - 1)
        slot_xs = [ax_l + i * step for i in range(n_cards)]
    point_iter = iter(traj.points)
    for slot in range(n_cards):
        x = slot_xs[slot]
        if slot in prov_set:
            out.append(_marker(x, tl_y, spec.provocation, "prov-glyph"))
        else:
            p = next(point_iter)
            out.append(_marker(x, tl_y, spec.capture, "card-glyph"))
            out.append(
                f'<text x="{_fmt(x)}" y="{_fmt(tl_y + 20)}" font-size="9" '
                f'fill="#666" text-anchor="middle">{p.t[11:16]}</text>'
            )
    out.append("</svg>")
    return "\n".join(out).encode("utf-8")
