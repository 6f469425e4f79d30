"""Minimal SVG line plots for the CSV artifacts (no plotting library needed)."""
from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from pathlib import Path
from xml.sax.saxutils import escape

from .errors import UnsupportedPlot

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=80, right=150, top=40, bottom=55)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")


def read_artifact(path):
    """Return (schema, rows) for a CSV artifact written by the CLI."""
    text = Path(path).read_text()
    lines = text.splitlines()
    schema = None
    body = []
    for line in lines:
        if line.startswith("#"):
            s = line.lstrip("#").strip()
            if s.startswith("schema:"):
                schema = s.split(":", 1)[1].strip()
            continue
        body.append(line)
    rows = list(csv.DictReader(io.StringIO("\n".join(body))))
    return schema, rows


def _pes_series(rows):
    cols = [c for c in rows[0] if c.endswith("_hartree")]
    x = [float(r["beta_deg"]) for r in rows]
    return ({c[: -len("_hartree")]: (x, [float(r[c]) for r in rows]) for c in cols},
            dict(title="Potential energy curve", xlabel="beta (deg)", ylabel="energy (hartree)"))


def _convergence_series(rows):
    out = defaultdict(lambda: ([], []))
    for r in rows:
        xs, ys = out[f"beta={r['beta_deg']}"]
        xs.append(float(r["m_bits"]))
        ys.append(max(float(r["abs_error_hartree"]), 1e-12))
    return dict(out), dict(title="IQPE error vs bits", xlabel="IQPE bits", ylabel="|E - E_FCI| (hartree)",
                           logy=True)


def _overlap_series(rows):
    labels = [c for c in rows[0] if c in ("GS", "ES1", "ES2", "ES3")]
    guesses = sorted({r["guess"] for r in rows})
    out = {}
    for g in guesses:
        sub = [r for r in rows if r["guess"] == g]
        x = [float(r["eval_index"]) for r in sub]
        for lab in labels:
            name = lab if len(guesses) == 1 else f"{lab} ({g})"
            out[name] = (x, [float(r[lab]) for r in sub])
    return out, dict(title="Overlap with FCI states", xlabel="VQE evaluations", ylabel="|<psi|n>|^2")


def _spread_series(rows):
    out = defaultdict(lambda: ([], []))
    for r in rows:
        xs, ys = out[r["prep"]]
        xs.append(float(r["shots"]))
        ys.append(max(float(r["spread_hartree"]), 1e-9))
    return dict(out), dict(title="Spread over repetitions", xlabel="shots per bit",
                           ylabel="spread (hartree)", logx=True, logy=True)


KINDS = {"pes": _pes_series, "convergence": _convergence_series,
         "overlap": _overlap_series, "shot-spread": _spread_series}
SCHEMA_KIND = {"pes/v1": "pes", "iqpe-conv/v1": "convergence",
               "overlap-scan/v1": "overlap", "shot-stats/v1": "shot-spread"}


def _scale(lo, hi, a, b, log):
    if log:
        lo, hi = math.log10(lo), math.log10(hi)
    if hi - lo < 1e-300:
        lo, hi = lo - 0.5, hi + 0.5
    return lambda v: a + (b - a) * (((math.log10(v) if log else v) - lo) / (hi - lo))


def render_svg(series: dict, title="", xlabel="", ylabel="", logx=False, logy=False) -> str:
    xs = [x for sx, _ in series.values() for x in sx]
    ys = [y for _, sy in series.values() for y in sy]
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
    fx = _scale(min(xs), max(xs), x0, x1, logx)
    fy = _scale(min(ys), max(ys), y0, y1, logy)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
           '<rect width="100%" height="100%" fill="white"/>',
           f'<text x="{(x0 + x1) / 2}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
           f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
           f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
           f'<text x="{(x0 + x1) / 2}" y="{HEIGHT - 12}" text-anchor="middle">{escape(xlabel)}</text>',
           f'<text x="18" y="{(y0 + y1) / 2}" text-anchor="middle" '
           f'transform="rotate(-90 18 {(y0 + y1) / 2})">{escape(ylabel)}</text>']
    for v, lab in ((min(xs), min(xs)), (max(xs), max(xs))):
        out.append(f'<text x="{fx(v):.1f}" y="{y0 + 16}" text-anchor="middle">{lab:.4g}</text>')
    for v in (min(ys), max(ys)):
        out.append(f'<text x="{x0 - 6}" y="{fy(v) + 4:.1f}" text-anchor="end">{v:.6g}</text>')
    for k, (name, (sx, sy)) in enumerate(series.items()):
        color = COLORS[k % len(COLORS)]
        pts = " ".join(f"{fx(x):.2f},{fy(y):.2f}" for x, y in zip(sx, sy))
        out.append(f'<polyline class="series" data-name="{escape(name)}" fill="none" '
                   f'stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        for x, y in zip(sx, sy):
            out.append(f'<circle cx="{fx(x):.2f}" cy="{fy(y):.2f}" r="2.5" fill="{color}"/>')
        ly = MARGIN["top"] + 18 * k
        out.append(f'<line x1="{x1 + 12}" y1="{ly}" x2="{x1 + 32}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{x1 + 38}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(csv_path, kind: str | None = None, svg_path=None) -> Path:
    """Render a CLI CSV artifact as SVG next to it (or at ``svg_path``)."""
    schema, rows = read_artifact(csv_path)
    if kind is None:
        if schema not in SCHEMA_KIND:
            raise UnsupportedPlot(f"no plot for schema {schema!r} in {csv_path}")
        kind = SCHEMA_KIND[schema]
    if kind not in KINDS:
        raise UnsupportedPlot(f"unknown plot kind {kind!r}")
    if not rows:
        raise UnsupportedPlot(f"{csv_path} has no data rows")
    try:
        series, opts = KINDS[kind](rows)
    except (KeyError, ValueError) as exc:
        raise UnsupportedPlot(f"{csv_path} does not match the {kind} layout: {exc}") from None
    if not series:
        raise UnsupportedPlot(f"{csv_path} has no plottable series")
    svg_path = Path(svg_path) if svg_path else Path(csv_path).with_suffix(".svg")
    svg_path.write_text(render_svg(series, **opts))
    return svg_path
