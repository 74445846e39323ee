"""The five pipeline stages. Every stage reads and writes a fixed directory layout:

    <out>/gt/<scene>.pfm                              resized ground truth
    <out>/sim/<camera>/<scene>.pfm, <scene>.json      simulated capture + meta
    <out>/recon/<camera>/<method>/<scene>.pfm         reconstructions
    <out>/scores/<camera>/<metric>.csv, <metric>_sat.csv
    <out>/reports/<camera>/...                        rankings, summary, figures
    <out>/vdp/<camera>/<scene>__<method>/...          HDR-VDP export

External methods are read from ``external_roots`` with the same
``<camera>/<method>/<scene>.{pfm,hdr}`` layout as ``recon/``.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache

import numpy as np

from .baselines import make_baseline, saturation_mask
from .camsim import CameraConfig, SimulationMeta, scene_seed, simulate
from .config import BenchConfig
from .crf import Crf, load_dorf, mean_crf, parse_dorf, synthetic_dorf_text
from .images import HdrImage, LdrImage, load_hdr, read_pfm_array, resize_center_crop, write_pfm, write_pfm_array
from .metrics import anchor_to_display, export_vdp_pair, masked_score, score
from .report import emit_reports, write_ev_report
from .scores import ScoreTable, ingest_qjod
from .stats import ev_consistency, ranking_groups

log = logging.getLogger("hdrbench")

HDR_EXTS = (".pfm", ".hdr")


class StageError(RuntimeError):
    """Raised when a stage cannot run at all (as opposed to per-scene failures)."""


def _p(cfg: BenchConfig, *parts) -> str:
    return os.path.join(cfg.output_root, *parts)


@lru_cache(maxsize=4)
def _mcrf(dorf_path: str | None) -> Crf:
    db = load_dorf(dorf_path) if dorf_path else parse_dorf(synthetic_dorf_text())
    return mean_crf(db)


def camera_config(cfg: BenchConfig, camera: str, scene_id: str) -> CameraConfig:
    spec = cfg.cameras[camera]
    mode = _mcrf(cfg.dorf_path) if spec.crf == "mcrf" else spec.crf
    return CameraConfig(mode, spec.clip_fraction, cfg.noise, cfg.bit_depth,
                        scene_seed(cfg.seed, scene_id), cfg.clahe)


def _run(fn, items, workers: int):
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


def _write_json(path, data) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")


# --- simulate ----------------------------------------------------------------

def _simulate_scene(args) -> list[str]:
    cfg, scene_id, path = args
    errors = []
    try:
        h = load_hdr(path)
        if cfg.target_size is not None:
            h = resize_center_crop(h, *cfg.target_size)
        write_pfm(h, _p(cfg, "gt", f"{scene_id}.pfm"))
    except Exception as exc:  # noqa: BLE001 - reported per scene
        return [f"{scene_id}: {exc}"]
    for camera in cfg.cameras:
        try:
            ldr, meta = simulate(h, camera_config(cfg, camera, scene_id), scene_id)
            write_pfm_array(ldr.pixels, _p(cfg, "sim", camera, f"{scene_id}.pfm"))
            _write_json(_p(cfg, "sim", camera, f"{scene_id}.json"), meta.to_json())
        except Exception as exc:  # noqa: BLE001
            errors.append(f"{scene_id}/{camera}: {exc}")
    return errors


def cmd_simulate(cfg: BenchConfig) -> int:
    scenes = cfg.scene_paths()
    if not scenes:
        raise StageError(f"no scenes found in {cfg.dataset_dir} matching {cfg.scenes}")
    results = _run(_simulate_scene, [(cfg, sid, p) for sid, p in scenes.items()], cfg.workers)
    return _report_errors("simulate", results)


def _report_errors(stage, results) -> int:
    errors = [e for r in results for e in r]
    for e in errors:
        log.error("%s failed: %s", stage, e)
    log.info("%s: %d item(s), %d failure(s)", stage, len(results), len(errors))
    return len(errors)


# --- baselines ---------------------------------------------------------------

def load_simulation(cfg: BenchConfig, camera: str, scene_id: str) -> tuple[LdrImage, SimulationMeta]:
    meta_path = _p(cfg, "sim", camera, f"{scene_id}.json")
    if not os.path.exists(meta_path):
        raise FileNotFoundError(f"missing simulation meta {meta_path}")
    with open(meta_path) as f:
        meta = SimulationMeta.from_json(json.load(f))
    pixels = read_pfm_array(_p(cfg, "sim", camera, f"{scene_id}.pfm")).astype(np.float64)
    return LdrImage.from_values(pixels, meta.bit_depth), meta


def load_gt(cfg: BenchConfig, scene_id: str) -> HdrImage:
    return load_hdr(_p(cfg, "gt", f"{scene_id}.pfm"))


def simulated_scenes(cfg: BenchConfig, camera: str) -> list[str]:
    d = _p(cfg, "sim", camera)
    if not os.path.isdir(d):
        return []
    return sorted(os.path.splitext(f)[0] for f in os.listdir(d) if f.endswith(".json"))


def _baselines_scene(args) -> list[str]:
    cfg, camera, scene_id = args
    try:
        h = load_gt(cfg, scene_id)
        ldr, meta = load_simulation(cfg, camera, scene_id)
    except Exception as exc:  # noqa: BLE001
        return [f"{camera}/{scene_id}: {exc}"]
    errors = []
    for method in cfg.methods:
        try:
            rec = make_baseline(method, h, ldr, meta)
            write_pfm(rec.image, _p(cfg, "recon", camera, method, f"{scene_id}.pfm"))
        except Exception as exc:  # noqa: BLE001
            errors.append(f"{camera}/{method}/{scene_id}: {exc}")
    return errors


def cmd_baselines(cfg: BenchConfig) -> int:
    items = [(cfg, cam, sid) for cam in cfg.cameras for sid in simulated_scenes(cfg, cam)]
    if not items:
        raise StageError("no simulation outputs found; run 'simulate' first")
    return _report_errors("baselines", _run(_baselines_scene, items, cfg.workers))


# --- evaluate ----------------------------------------------------------------

def method_dirs(cfg: BenchConfig, camera: str) -> dict[str, str]:
    """method -> directory for own baselines and every external root."""
    dirs = {}
    roots = [_p(cfg, "recon")] + list(cfg.external_roots)
    for root in roots:
        cam_dir = os.path.join(root, camera)
        if not os.path.isdir(cam_dir):
            continue
        for method in sorted(os.listdir(cam_dir)):
            d = os.path.join(cam_dir, method)
            if os.path.isdir(d):
                if method in dirs and dirs[method] != d:
                    log.warning("method %s found in several roots; using %s", method, dirs[method])
                    continue
                dirs[method] = d
    return dirs


def find_reconstruction(method_dir: str, scene_id: str) -> str | None:
    for ext in HDR_EXTS:
        p = os.path.join(method_dir, scene_id + ext)
        if os.path.exists(p):
            return p
    return None


def _evaluate_scene(args):
    cfg, camera, scene_id, methods = args
    rows, errors = [], []
    display = cfg.display_for(camera)
    try:
        h = load_gt(cfg, scene_id)
        ldr, _ = load_simulation(cfg, camera, scene_id)
        alpha = saturation_mask(ldr)
    except Exception as exc:  # noqa: BLE001
        return rows, [f"{camera}/{scene_id}: {exc}"]
    saturated = bool(np.any(alpha > 0))
    if not saturated and cfg.masked_metrics:
        errors.append(f"{camera}/{scene_id}: no saturated pixels, masked metrics skipped")
    for method, mdir in methods.items():
        path = find_reconstruction(mdir, scene_id)
        if path is None:
            errors.append(f"{camera}/{method}/{scene_id}: reconstruction missing")
            continue
        try:
            rec = load_hdr(path)
            if rec.pixels.shape != h.pixels.shape:
                raise ValueError(f"dimension mismatch {rec.pixels.shape} vs {h.pixels.shape}")
            for metric in cfg.metrics:
                rows.append((scene_id, method, metric, score(metric, h, rec, display, cfg.anchor_mode)))
            if saturated:
                for metric in cfg.masked_metrics:
                    v = masked_score(metric, h, rec, alpha, display, cfg.anchor_mode)
                    rows.append((scene_id, method, metric + "_sat", v))
        except Exception as exc:  # noqa: BLE001
            errors.append(f"{camera}/{method}/{scene_id}: {exc}")
    return rows, errors


def evaluate_camera(cfg: BenchConfig, camera: str) -> tuple[ScoreTable, list[str]]:
    methods = method_dirs(cfg, camera)
    scenes = simulated_scenes(cfg, camera)
    table = ScoreTable(scenes, list(methods), [])
    results = _run(_evaluate_scene, [(cfg, camera, s, methods) for s in scenes], cfg.workers)
    errors = []
    for rows, errs in results:
        errors.extend(errs)
        for scene, method, metric, value in rows:
            table.set(scene, method, metric, value)
    return table, errors


def cmd_evaluate(cfg: BenchConfig) -> int:
    failures = 0
    for camera in cfg.cameras:
        if not simulated_scenes(cfg, camera):
            log.error("evaluate: no simulations for camera %s", camera)
            failures += 1
            continue
        table, errors = evaluate_camera(cfg, camera)
        for e in errors:
            log.warning("evaluate: %s", e)
        hard = [e for e in errors if "masked metrics skipped" not in e]
        failures += len(hard)
        for metric in table.metrics:
            # scenes failing for any method are dropped for that metric
            complete = table.restrict_to_complete(metric)
            dropped = len(table.scenes) - len(complete.scenes)
            if dropped:
                log.info("evaluate: %s/%s excludes %d incomplete scene(s)", camera, metric, dropped)
            complete.to_csv(_p(cfg, "scores", camera, f"{metric}.csv"), metric)
    return failures


# --- rank --------------------------------------------------------------------

def load_scores(cfg: BenchConfig, camera: str) -> ScoreTable:
    d = _p(cfg, "scores", camera)
    table = ScoreTable()
    if not os.path.isdir(d):
        return table
    for fname in sorted(os.listdir(d)):
        if fname.endswith(".csv"):
            table.merge(ScoreTable.from_csv(os.path.join(d, fname), fname[:-4]))
    return table


def cmd_rank(cfg: BenchConfig) -> int:
    failures = 0
    tables = {}
    for camera in cfg.cameras:
        table = load_scores(cfg, camera)
        if not table.metrics:
            log.error("rank: no score tables for camera %s", camera)
            failures += 1
            continue
        tables[camera] = table
        rankings = {}
        for metric in table.metrics:
            sub = table.restrict_to_complete(metric)
            try:
                rankings[metric] = ranking_groups(sub, metric, cfg.p_threshold, cfg.paired_ttest)
            except ValueError as exc:
                log.error("rank: %s/%s: %s", camera, metric, exc)
                failures += 1
        if rankings:
            emit_reports(table, rankings, _p(cfg, "reports", camera))
    failures += _ev_reports(cfg, tables)
    return failures


def _ev_reports(cfg: BenchConfig, tables: dict) -> int:
    failures = 0
    by_crf = {}
    for name, spec in cfg.cameras.items():
        by_crf.setdefault(spec.crf, []).append((spec.clip_fraction, name))
    for crf, cams in sorted(by_crf.items()):
        cams.sort()
        if len(cams) < 2:
            continue
        (_, low), (_, high) = cams[0], cams[-1]
        if low not in tables or high not in tables:
            continue
        for metric in tables[low].metrics:
            if metric not in tables[high].metrics:
                continue
            try:
                rows = ev_consistency(tables[low].restrict_to_complete(metric),
                                      tables[high].restrict_to_complete(metric), metric)
            except ValueError as exc:
                log.error("rank: EV consistency %s/%s: %s", crf, metric, exc)
                failures += 1
                continue
            write_ev_report(rows, _p(cfg, "reports", f"ev_consistency__{crf}__{metric}.csv"))
    return failures


# --- export-vdp --------------------------------------------------------------

def _export_scene(args) -> list[str]:
    cfg, camera, scene_id, methods = args
    display = cfg.display_for(camera)
    try:
        h = load_gt(cfg, scene_id)
        ref = anchor_to_display(h, display)
    except Exception as exc:  # noqa: BLE001
        return [f"{camera}/{scene_id}: {exc}"]
    errors = []
    for method, mdir in methods.items():
        path = find_reconstruction(mdir, scene_id)
        if path is None:
            errors.append(f"{camera}/{method}/{scene_id}: reconstruction missing")
            continue
        try:
            test = anchor_to_display(load_hdr(path), display, cfg.anchor_mode, reference=h)
            export_vdp_pair(ref, test, display, _p(cfg, "vdp", camera), scene_id, method)
        except Exception as exc:  # noqa: BLE001
            errors.append(f"{camera}/{method}/{scene_id}: {exc}")
    return errors


def cmd_export_vdp(cfg: BenchConfig, ingest: str | None = None, camera: str | None = None) -> int:
    """Export anchored pairs; with ``ingest``, fold an external q_jod CSV into the scores."""
    if ingest:
        cams = [camera] if camera else list(cfg.cameras)
        if len(cams) != 1:
            raise StageError("--ingest needs --camera when several cameras are configured")
        table = ingest_qjod(ingest)
        table.to_csv(_p(cfg, "scores", cams[0], "q_jod.csv"), "q_jod")
        log.info("export-vdp: ingested %d q_jod score(s) for %s",
                 sum(table.has(s, m, "q_jod") for s in table.scenes for m in table.methods), cams[0])
        return 0
    items = []
    for cam in ([camera] if camera else cfg.cameras):
        methods = method_dirs(cfg, cam)
        items += [(cfg, cam, sid, methods) for sid in simulated_scenes(cfg, cam)]
    if not items:
        raise StageError("nothing to export; run 'simulate' and 'baselines' first")
    return _report_errors("export-vdp", _run(_export_scene, items, cfg.workers))
