"""Command-line interface for the pipeline stages and the study service."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import cochlea, labels as labels_mod, stats as stats_mod
from .config import StudyConfig, load_config
from .dataset import load_sample, meta_filter, scan_library
from .embedding import Embedding2D, concat_features, embed
from .errors import ParameterError, TimbrespaceError
from .layout import Canvas, random_placement, resolve_overlaps, scale_to_canvas
from .scene import canonical_json
from .store import ResultStore


def _write_json(path: str, payload) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(canonical_json(payload) + "\n", encoding="utf-8")


def cmd_scan(args) -> int:
    predicate = meta_filter(pitch=args.pitch, velocity=args.velocity, family=args.family)
    result = scan_library(args.directory, filter=predicate, target_rate=args.rate)
    manifest = {
        "sample_rate": args.rate,
        "skipped": result.skipped,
        "samples": [{
            "id": s.id, "path": s.meta.source_path, "duration": s.duration,
            "meta": {"pitch": s.meta.pitch, "velocity": s.meta.velocity,
                     "family": s.meta.family},
        } for s in result.set],
    }
    _write_json(args.out, manifest)
    print(f"scanned {len(result.set)} samples ({result.skipped} skipped) -> {args.out}")
    return 0


def cmd_features(args) -> int:
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    rate = manifest["sample_rate"]
    fb = cochlea.make_filterbank(args.channels, args.fmin, args.fmax, rate)
    entries = []
    roughness_max = 0.0
    for item in manifest["samples"]:
        sample = load_sample(item["path"], target_rate=rate)
        profile = cochlea.analyze(sample, fb, args.frame_rate)
        entry = {
            "id": sample.id, "duration": sample.duration,
            "spectral_envelope": profile.spectral_envelope.tolist(),
            "roughness_envelope": profile.roughness_envelope.tolist(),
            "temporal_envelope": profile.temporal_envelope.tolist(),
        }
        if profile.spectral_envelope.sum() > 0:
            desc = cochlea.descriptors(profile, fb)
            entry["centroid"] = desc.spectral_centroid
            entry["flatness"] = desc.spectral_flatness
        if len(profile.roughness_envelope):
            roughness_max = max(roughness_max, float(profile.roughness_envelope.max()))
        entries.append(entry)
    payload = {
        "sample_rate": rate, "frame_rate": args.frame_rate,
        "filterbank": {"n_channels": fb.n_channels, "fmin": args.fmin,
                       "fmax": args.fmax,
                       "center_freqs": fb.center_freqs.tolist()},
        "roughness_global_max": roughness_max,
        "samples": entries,
    }
    _write_json(args.out, payload)
    print(f"extracted features for {len(entries)} samples -> {args.out}")
    return 0


def _profiles_from_features(payload: dict) -> dict[str, cochlea.TimbreProfile]:
    out = {}
    for item in payload["samples"]:
        out[item["id"]] = cochlea.TimbreProfile(
            spectral_envelope=np.asarray(item["spectral_envelope"]),
            roughness_envelope=np.asarray(item["roughness_envelope"]),
            temporal_envelope=np.asarray(item["temporal_envelope"]),
            frame_rate=payload["frame_rate"])
    return out


def cmd_embed(args) -> int:
    payload = json.loads(Path(args.features).read_text(encoding="utf-8"))
    profiles = _profiles_from_features(payload)
    vectors = concat_features(profiles, d_pca=args.pca_dim)
    emb = embed(vectors, n_neighbors=args.neighbors, min_dist=args.min_dist,
                n_epochs=args.epochs, seed=args.seed)
    _write_json(args.out, {
        "ids": list(emb.ids),
        "coords": [[float(x), float(y)] for x, y in emb.coords],
        "seed": emb.seed,
        "params": {"neighbors": emb.n_neighbors, "min_dist": emb.min_dist,
                   "epochs": emb.n_epochs, "pca_dim": args.pca_dim},
    })
    print(f"embedded {len(emb.ids)} samples -> {args.out}")
    return 0


def _canvas_from_args(args) -> Canvas:
    try:
        w, h = (int(v) for v in args.canvas.lower().split("x"))
    except ValueError:
        raise ParameterError(f"--canvas expects WxH, got {args.canvas!r}")
    return Canvas(width=w, height=h, margin=args.margin, label_diameter=args.diameter)


def cmd_place(args) -> int:
    payload = json.loads(Path(args.embedding).read_text(encoding="utf-8"))
    canvas = _canvas_from_args(args)
    emb = Embedding2D(ids=tuple(payload["ids"]), coords=np.asarray(payload["coords"]),
                      seed=payload.get("seed", 0),
                      n_neighbors=payload["params"]["neighbors"],
                      min_dist=payload["params"]["min_dist"],
                      n_epochs=payload["params"]["epochs"])
    if args.mode == "dr":
        placed = scale_to_canvas(emb, canvas)
        placed, report = resolve_overlaps(placed)
        note = f"relaxed in {report.iterations} iterations"
    else:
        placed = random_placement(list(emb.ids), canvas, seed=args.seed)
        note = "random baseline"
    _write_json(args.out, {
        "ids": list(placed.ids),
        "positions": [[float(x), float(y)] for x, y in placed.positions],
        "canvas": {"w": canvas.width, "h": canvas.height, "margin": canvas.margin,
                   "diameter": canvas.label_diameter},
        "mode": placed.mode, "seed": placed.seed,
    })
    print(f"placed {len(placed.ids)} samples ({note}) -> {args.out}")
    return 0


def cmd_labels(args) -> int:
    placed = json.loads(Path(args.placed).read_text(encoding="utf-8"))
    payload = json.loads(Path(args.features).read_text(encoding="utf-8"))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    ids = placed["ids"]
    if args.mode == "shape":
        profiles = _profiles_from_features(payload)
        shapes = {}
        for sid in ids:
            p = profiles[sid]
            duration = len(p.temporal_envelope) / p.frame_rate
            env = cochlea.resample_envelope(p.temporal_envelope, duration,
                                            labels_mod.SHAPE_POINTS)
            shapes[sid] = [[round(float(x), 6), round(float(y), 6)]
                           for x, y in labels_mod.shape_label(env).polygon]
        _write_json(out_dir / "shapes.json", shapes)
    elif args.mode in ("color-v1", "color-v2"):
        colors = {}
        if args.mode == "color-v1":
            positions = np.asarray(placed["positions"])
            center, max_radius = labels_mod.wheel_calibration(positions)
            for sid, pos in zip(ids, positions):
                c = labels_mod.color_wheel(tuple(pos), center, max_radius)
                colors[sid] = [c.hue, c.saturation, c.lightness]
        else:
            by_id = {item["id"]: item for item in payload["samples"]}
            centroids = [by_id[i]["centroid"] for i in ids]
            calib = (min(centroids), max(centroids))
            for sid in ids:
                desc = cochlea.TimbreDescriptors(
                    spectral_centroid=by_id[sid]["centroid"],
                    spectral_flatness=by_id[sid]["flatness"])
                c = labels_mod.color_descriptor(desc, calib, hue_path=args.hue_path,
                                                saturation_mode=args.saturation)
                colors[sid] = [c.hue, c.saturation, c.lightness]
        _write_json(out_dir / "colors.json", colors)
    else:  # texture
        from PIL import Image

        from .pipeline import load_exemplars

        profiles = _profiles_from_features(payload)
        vectors = concat_features(profiles, d_pca=min(10, len(profiles) - 1))
        medoid_ids = labels_mod.kmedoids(vectors, labels_mod.N_MEDOIDS, seed=args.seed)
        by_id = {v.source_id: v for v in vectors}
        medoid_vecs = [by_id[m] for m in medoid_ids]
        if args.exemplars:
            exemplars = load_exemplars(args.exemplars, args.texture_size)
        else:
            exemplars = labels_mod.builtin_exemplars(args.texture_size, seed=args.seed)
        weights = {}
        for sid in ids:
            w = labels_mod.texture_weights(by_id[sid], medoid_vecs)
            weights[sid] = w.tolist()
            img = labels_mod.synth_texture(w, exemplars, size=args.texture_size,
                                           seed=args.seed + sum(sid.encode()))
            Image.fromarray((np.clip(img, 0, 1) * 255).astype(np.uint8), "L").save(
                out_dir / f"{sid}.png")
        _write_json(out_dir / "weights.json",
                    {"medoids": medoid_ids, "weights": weights})
    print(f"wrote {args.mode} labels for {len(ids)} samples -> {out_dir}")
    return 0


def cmd_serve(args) -> int:
    from .pipeline import build_library_context
    from .server import create_app, serve

    config = load_config(args.config) if args.config else StudyConfig()
    predicate = meta_filter(pitch=config.pitch, velocity=config.velocity)
    result = scan_library(args.library, filter=predicate,
                          target_rate=config.sample_rate)
    print(f"library: {len(result.set)} samples ({result.skipped} skipped); "
          "building features and embedding...")
    if len(result.set) < config.samples_per_task:
        print(f"warning: tasks need {config.samples_per_task} samples; "
              "task requests will fail until the library grows")
    ctx = build_library_context(result.set, config)
    store = ResultStore(args.data)
    app = create_app(ctx, store, config, web_dir=args.web)
    print(f"serving on http://{args.host}:{args.port}")
    serve(app, host=args.host, port=args.port)
    return 0


def cmd_export(args) -> int:
    store = ResultStore(args.data)
    text = store.export_results()
    Path(args.out).write_text(text, encoding="utf-8")
    print(f"exported {len(text.splitlines())} records -> {args.out}")
    return 0


def _format_table(rows: list[dict]) -> str:
    headers = ["measure", "label", "placement", "mean", "95% CI", "n"]
    table = [[r["measure"], r["label_mode"], r["placement_mode"],
              f"{r['mean']:.2f}", f"[{r['ci_low']:.2f}, {r['ci_high']:.2f}]",
              str(r["n"])] for r in rows]
    widths = [max(len(h), *(len(row[i]) for row in table)) for i, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for row in table:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)))
    return "\n".join(lines)


def cmd_stats(args) -> int:
    records = [json.loads(line) for line in
               Path(args.results).read_text(encoding="utf-8").splitlines() if line.strip()]
    questionnaires = []
    if args.questionnaires and Path(args.questionnaires).exists():
        questionnaires = [json.loads(line) for line in
                          Path(args.questionnaires).read_text(encoding="utf-8").splitlines()
                          if line.strip()]
    if args.report == "summary":
        rows = stats_mod.summary_table(records, seed=args.seed, min_group=args.min_group)
        if args.measure != "all":
            rows = [r for r in rows if r["measure"] == args.measure]
        payload = {"report": "summary", "rows": rows}
        if args.text:
            print(_format_table(rows))
    else:
        payload = stats_mod.significance_report(records, questionnaires,
                                                alpha=args.alpha)
        payload["report"] = "significance"
        if args.text:
            for row in payload["measures"]:
                flag = "**" if row["significant"] else "  "
                where = row.get("label_mode") or row.get("placement_mode")
                print(f"{flag} {row['measure']:<9} {row['comparison']:<10} "
                      f"{where:<10} {row['test']:<16} p={row['p']:.4g}")
    if args.out:
        _write_json(args.out, payload)
        print(f"report -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="timbrespace",
                                     description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="index a sample library directory")
    p.add_argument("directory")
    p.add_argument("--pitch", type=int, default=None)
    p.add_argument("--velocity", type=int, default=None)
    p.add_argument("--family", default=None)
    p.add_argument("--rate", type=int, default=16_000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("features", help="extract timbre profiles and descriptors")
    p.add_argument("manifest")
    p.add_argument("--channels", type=int, default=42)
    p.add_argument("--fmin", type=float, default=26.0)
    p.add_argument("--fmax", type=float, default=7800.0)
    p.add_argument("--frame-rate", type=float, default=200.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("embed", help="2D embedding of concatenated profile vectors")
    p.add_argument("features")
    p.add_argument("--neighbors", type=int, default=15)
    p.add_argument("--min-dist", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--pca-dim", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("place", help="map an embedding onto canvas pixels")
    p.add_argument("embedding")
    p.add_argument("--mode", choices=["dr", "random"], default="dr")
    p.add_argument("--canvas", default="800x800")
    p.add_argument("--margin", type=int, default=40)
    p.add_argument("--diameter", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_place)

    p = sub.add_parser("labels", help="generate visual label assets")
    p.add_argument("placed")
    p.add_argument("features")
    p.add_argument("--mode", choices=["shape", "color-v1", "color-v2", "texture"],
                   required=True)
    p.add_argument("--exemplars", default=None)
    p.add_argument("--texture-size", type=int, default=256)
    p.add_argument("--hue-path", choices=["green", "magenta"], default="green")
    p.add_argument("--saturation", choices=["inverted", "direct"], default="inverted")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_labels)

    p = sub.add_parser("serve", help="run the study HTTP service")
    p.add_argument("--library", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--data", default="study-data")
    p.add_argument("--web", default=None, help="static frontend directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export", help="dump the results log")
    p.add_argument("--data", default="study-data")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("stats", help="analyze logged results")
    p.add_argument("results")
    p.add_argument("--questionnaires", default=None)
    p.add_argument("--measure", choices=["time", "hovered", "distance", "all"],
                   default="all")
    p.add_argument("--report", choices=["summary", "significance"], default="summary")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-group", type=int, default=10)
    p.add_argument("--text", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TimbrespaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
