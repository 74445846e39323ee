import csv
import json
import math
import xml.etree.ElementTree as ET

import jsonschema
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hdrbench.report import SUMMARY_SCHEMA, emit_reports, render_svg, summary_dict, write_ev_report
from hdrbench.scores import ScoreTable, format_score
from hdrbench.stats import ev_consistency, ranking_groups


def demo_table(n_scenes=6, methods=("plin", "prec", "naive"), seed=0):
    rng = np.random.default_rng(seed)
    t = ScoreTable()
    for i in range(n_scenes):
        for j, m in enumerate(methods):
            t.set(f"scene_{i:02d}", m, "pu_psnr", 20 - 3 * j + rng.normal())
            t.set(f"scene_{i:02d}", m, "pu_ssim", 0.9 - 0.05 * j + 0.01 * rng.normal())
    return t


# --- ScoreTable -----------------------------------------------------------

def test_score_table_missing_and_nan():
    t = ScoreTable(["a", "b"], ["m"], ["x"])
    assert t.shape == (2, 1, 1)
    assert t.get("a", "m", "x") is None
    assert t.n_missing("x") == 2
    t.set("a", "m", "x", 1.5)
    assert t.has("a", "m", "x") and not t.has("zzz", "m", "x")
    with pytest.raises(ValueError):
        t.set("b", "m", "x", math.nan)
    with pytest.raises(ValueError):
        ScoreTable(["a", "a"], [], [])


def test_score_table_grows_and_restricts():
    t = ScoreTable()
    t.set("s1", "a", "x", 1.0)
    t.set("s1", "b", "x", 2.0)
    t.set("s2", "a", "x", 3.0)
    assert t.shape == (2, 2, 1)
    assert t.complete_scenes("x") == ["s1"]
    sub = t.restrict_to_complete("x")
    assert sub.scenes == ["s1"] and sub.get("s1", "b", "x") == 2.0
    xa, xb = t.paired("a", "b", "x")
    assert list(xa) == [1.0] and list(xb) == [2.0]
    scenes, vals = t.column("a", "x")
    assert scenes == ["s1", "s2"] and list(vals) == [1.0, 3.0]


def test_csv_round_trip_with_missing_and_inf(tmp_path):
    t = demo_table(3)
    t.set("scene_99", "plin", "pu_psnr", math.inf)
    path = tmp_path / "pu_psnr.csv"
    t.to_csv(path, "pu_psnr")
    rows = list(csv.DictReader(open(path)))
    assert len(rows) == len(t.scenes) * len(t.methods)
    assert sum(r["value"] == "" for r in rows) == 2
    back = ScoreTable.from_csv(path, "pu_psnr")
    assert back.scenes == t.scenes and back.methods == t.methods
    for s in t.scenes:
        for m in t.methods:
            assert back.get(s, m, "pu_psnr") == t.get(s, m, "pu_psnr")
    assert format_score(math.inf) == "inf"


def test_merge():
    a, b = ScoreTable(), ScoreTable()
    a.set("s", "m", "x", 1.0)
    b.set("s", "m", "y", 2.0)
    a.merge(b)
    assert a.metrics == ["x", "y"] and a.get("s", "m", "y") == 2.0


@settings(max_examples=30, deadline=None)
@given(st.dictionaries(st.tuples(st.sampled_from("abcd"), st.sampled_from("xyz")),
                       st.floats(-1e6, 1e6), min_size=1))
def test_csv_round_trip_property(tmp_path_factory, cells):
    t = ScoreTable()
    for (scene, method), v in cells.items():
        t.set(scene, method, "q", v)
    path = tmp_path_factory.mktemp("csv") / "q.csv"
    t.to_csv(path, "q")
    back = ScoreTable.from_csv(path, "q")
    for (scene, method), v in cells.items():
        assert back.get(scene, method, "q") == v
    assert back.n_missing("q") == t.n_missing("q")


# --- reports --------------------------------------------------------------

def test_emit_reports(tmp_path):
    t = demo_table()
    rankings = {m: ranking_groups(t, m) for m in t.metrics}
    written = emit_reports(t, rankings, tmp_path)
    names = sorted(p.rsplit("/", 1)[-1] for p in map(str, written))
    assert names == ["pu_psnr.csv", "pu_psnr.svg", "pu_ssim.csv", "pu_ssim.svg", "summary.json"]
    rows = list(csv.DictReader(open(tmp_path / "pu_psnr.csv")))
    assert len(rows) == 6 * 3
    summary = json.loads((tmp_path / "summary.json").read_text())
    jsonschema.validate(summary, SUMMARY_SCHEMA)
    assert summary["metrics"]["pu_psnr"]["order"] == ["plin", "prec", "naive"]
    root = ET.parse(tmp_path / "pu_psnr.svg").getroot()
    assert root.tag.endswith("svg")
    assert len([g for g in root.iter() if g.get("data-method")]) == 3


def test_reports_are_deterministic(tmp_path):
    t = demo_table()
    rankings = {m: ranking_groups(t, m) for m in t.metrics}
    emit_reports(t, rankings, tmp_path / "a")
    emit_reports(t, rankings, tmp_path / "b")
    for name in ("pu_psnr.csv", "pu_psnr.svg", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_svg_draws_links_and_handles_constant_scores():
    t = ScoreTable()
    for i in range(4):
        for m in ("a", "b"):
            t.set(f"s{i}", m, "x", 1.0)
    r = ranking_groups(t, "x")
    root = ET.fromstring(render_svg(t, r))
    links = [e for e in root.iter() if e.get("data-link")]
    assert len(links) == 1


def test_summary_json_round_trips_schema():
    t = demo_table()
    d = summary_dict(t, {"pu_psnr": ranking_groups(t, "pu_psnr")})
    jsonschema.validate(json.loads(json.dumps(d)), SUMMARY_SCHEMA)
    bad = json.loads(json.dumps(d))
    bad["metrics"]["pu_psnr"]["p_values"][0]["p"] = 2.0
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(bad, SUMMARY_SCHEMA)


def test_ev_report(tmp_path):
    t5, t10 = demo_table(seed=1), demo_table(seed=2)
    path = tmp_path / "ev.csv"
    write_ev_report(ev_consistency(t5, t10, "pu_psnr"), path)
    rows = list(csv.DictReader(open(path)))
    assert [r["method"] for r in rows] == ["plin", "prec", "naive"]
    assert set(rows[0]) == {"method", "mean_ev5", "mean_ev10", "delta", "violates_expectation"}
