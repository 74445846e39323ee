"""CSV, JSON and SVG report emission for score tables and rankings."""

from __future__ import annotations

import csv
import json
import os
import xml.etree.ElementTree as ET

import numpy as np

from .scores import ScoreTable
from .stats import RankingResult, aggregate, capped

SUMMARY_SCHEMA = {
    "type": "object",
    "required": ["metrics"],
    "properties": {
        "metrics": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["order", "summary", "p_values", "links", "threshold"],
                "properties": {
                    "order": {"type": "array", "items": {"type": "string"}},
                    "threshold": {"type": "number"},
                    "summary": {
                        "type": "object",
                        "additionalProperties": {
                            "type": "object",
                            "required": ["mean", "standard_error", "n"],
                            "properties": {
                                "mean": {"type": "number"},
                                "standard_error": {"type": "number"},
                                "n": {"type": "integer", "minimum": 0},
                            },
                        },
                    },
                    "p_values": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["a", "b", "p"],
                            "properties": {
                                "a": {"type": "string"},
                                "b": {"type": "string"},
                                "p": {"type": "number", "minimum": 0, "maximum": 1},
                            },
                        },
                    },
                    "links": {
                        "type": "array",
                        "items": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
                    },
                },
            },
        }
    },
}


def summary_dict(table: ScoreTable, rankings: dict[str, RankingResult]) -> dict:
    out = {"metrics": {}}
    for metric, r in rankings.items():
        agg = aggregate(table, metric)
        out["metrics"][metric] = {
            "order": list(r.order),
            "threshold": r.threshold,
            "summary": {m: {"mean": s.mean, "standard_error": s.standard_error, "n": s.n}
                        for m, s in agg.items()},
            "p_values": [{"a": a, "b": b, "p": p} for (a, b), p in sorted(r.p_values.items())],
            "links": [list(pair) for pair in sorted(r.links)],
        }
    return out


def emit_reports(table: ScoreTable, rankings: dict[str, RankingResult], out_dir) -> list[str]:
    """Write <metric>.csv, <metric>.svg and summary.json into ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for metric, ranking in rankings.items():
        path = os.path.join(out_dir, f"{metric}.csv")
        table.to_csv(path, metric)
        written.append(path)
        path = os.path.join(out_dir, f"{metric}.svg")
        with open(path, "w") as f:
            f.write(render_svg(table, ranking))
        written.append(path)
    path = os.path.join(out_dir, "summary.json")
    with open(path, "w") as f:
        json.dump(summary_dict(table, rankings), f, indent=2, sort_keys=True)
    written.append(path)
    return written


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def render_svg(table: ScoreTable, ranking: RankingResult, width: int = 720) -> str:
    """Box-and-whisker per method (mean +- SE marker) above a ranking strip."""
    methods = ranking.order
    agg = aggregate(table, ranking.metric)
    data = {m: capped(table.column(m, ranking.metric)[1]) for m in methods}
    lo = min(float(v.min()) for v in data.values())
    hi = max(float(v.max()) for v in data.values())
    if hi == lo:
        hi, lo = hi + 1.0, lo - 1.0
    pad, plot_h, strip_h = 60, 260, 40 + 14 * max(1, len(ranking.links))
    height = pad + plot_h + 60 + strip_h
    col = (width - 2 * pad) / len(methods)

    def y(v):
        return pad + plot_h * (1.0 - (v - lo) / (hi - lo))

    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=str(width), height=str(height),
                     viewBox=f"0 0 {width} {height}")
    ET.SubElement(svg, "title").text = f"{ranking.metric}: per-method score distributions"
    ET.SubElement(svg, "text", x=str(pad), y="24", attrib={"font-size": "14"}).text = ranking.metric
    ET.SubElement(svg, "line", x1=str(pad), y1=str(pad), x2=str(pad), y2=str(pad + plot_h), stroke="black")
    for v in np.linspace(lo, hi, 5):
        ET.SubElement(svg, "text", x=str(pad - 6), y=_fmt(y(v) + 4),
                      attrib={"font-size": "10", "text-anchor": "end"}).text = f"{v:.3g}"

    centers = {}
    for i, m in enumerate(methods):
        v = data[m]
        cx = pad + col * (i + 0.5)
        centers[m] = cx
        q1, med, q3 = np.percentile(v, [25, 50, 75])
        half = min(18.0, col * 0.3)
        g = ET.SubElement(svg, "g", attrib={"data-method": m})
        ET.SubElement(g, "line", x1=_fmt(cx), y1=_fmt(y(v.min())), x2=_fmt(cx), y2=_fmt(y(v.max())), stroke="#555")
        ET.SubElement(g, "rect", x=_fmt(cx - half), y=_fmt(y(q3)), width=_fmt(2 * half),
                      height=_fmt(max(y(q1) - y(q3), 0.5)), fill="#cfe0f3", stroke="#345")
        ET.SubElement(g, "line", x1=_fmt(cx - half), y1=_fmt(y(med)), x2=_fmt(cx + half), y2=_fmt(y(med)), stroke="#345")
        s = agg[m]
        ET.SubElement(g, "line", x1=_fmt(cx), y1=_fmt(y(s.mean - s.standard_error)), x2=_fmt(cx),
                      y2=_fmt(y(s.mean + s.standard_error)), stroke="#c00", attrib={"stroke-width": "2"})
        ET.SubElement(g, "circle", cx=_fmt(cx), cy=_fmt(y(s.mean)), r="3", fill="#c00")
        ET.SubElement(g, "text", x=_fmt(cx), y=str(pad + plot_h + 16),
                      attrib={"font-size": "10", "text-anchor": "middle"}).text = m

    # ranking strip: best on the left, bars join methods the t-test cannot separate
    strip_top = pad + plot_h + 50
    ET.SubElement(svg, "text", x=str(pad), y=str(strip_top - 8), attrib={"font-size": "11"}).text = (
        f"ranking (p > {ranking.threshold:g} linked)")
    for i, m in enumerate(methods):
        ET.SubElement(svg, "circle", cx=_fmt(centers[m]), cy=str(strip_top), r="4", fill="black")
    for k, (a, b) in enumerate(sorted(ranking.links, key=lambda p: (methods.index(p[0]), methods.index(p[1])))):
        yy = strip_top + 12 + 14 * k
        x1, x2 = sorted((centers[a], centers[b]))
        ET.SubElement(svg, "line", x1=_fmt(x1), y1=str(yy), x2=_fmt(x2), y2=str(yy), stroke="#333",
                      attrib={"stroke-width": "3", "data-link": f"{a}|{b}"})
    return ET.tostring(svg, encoding="unicode")


def write_ev_report(rows, path) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["method", "mean_ev5", "mean_ev10", "delta", "violates_expectation"])
        for r in rows:
            w.writerow([r.method, repr(r.mean_ev5), repr(r.mean_ev10), repr(r.delta), int(r.violates_expectation)])

