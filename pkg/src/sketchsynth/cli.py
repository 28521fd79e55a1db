"""Command line entry point: ``sketchsynth <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from . import embedding, metrics, plotting, shapes, tokenizer
from .dataset import DatasetManifest, ManifestEntry, generate_dataset, read_manifest, write_manifest
from .mesh import load_mesh, save_obj
from .pipeline import PipelineParams, run_pipeline
from .sketch import load_sketch, save_sketch, truncate

PIPELINE_FLAGS = {
    "samples": ("--samples", int),
    "sharp_threshold_deg": ("--sharp-threshold-deg", float),
    "salient_spacing": ("--salient-spacing", float),
    "link_radius": ("--link-radius", float),
    "min_seg_len": ("--min-seg-len", int),
    "fit_rms_max": ("--fit-rms-max", float),
    "cull_cos_dist": ("--cull-cos-dist", float),
    "merge_threshold": ("--merge-threshold", float),
    "skip_prob": ("--skip-prob", float),
    "knn": ("--knn", int),
}


def _add_pipeline_flags(p):
    defaults = PipelineParams()
    for name, (flag, typ) in PIPELINE_FLAGS.items():
        p.add_argument(flag, dest=name, type=typ, default=getattr(defaults, name))
    p.add_argument("--seed", type=int, default=0)


def _params(args) -> PipelineParams:
    return PipelineParams(**{f.name: getattr(args, f.name) for f in fields(PipelineParams) if hasattr(args, f.name)})


def cmd_generate(args):
    mesh = load_mesh(args.mesh, args.format)
    result = run_pipeline(mesh, _params(args), args.seed, mesh_id=Path(args.mesh).name)
    save_sketch(result.sketch, args.out)
    if args.figure:
        plotting.render_sketch(result.sketch, args.figure, title=Path(args.mesh).name)
    print(json.dumps({"out": str(args.out), **result.stats}))


def cmd_batch(args):
    manifest = read_manifest(args.manifest)
    report = generate_dataset(manifest, _params(args), args.seed, force=args.force, workers=args.workers)
    report_dir = Path(args.report_dir) if args.report_dir else Path(args.manifest).parent
    csv_path, json_path = report.write(report_dir)
    if args.figures:
        plotting.plot_report(report.rows, report_dir / "figures")
        for row in report.rows:
            if row["status"] == "ok":
                sk = load_sketch(manifest.resolve(row["sketch_path"]))
                plotting.render_sketch(sk, report_dir / "figures" / (Path(row["sketch_path"]).stem + ".png"), row["mesh_path"])
    print(json.dumps({"report": str(csv_path), **report.summary()}))
    return 1 if report.failed else 0


def cmd_truncate(args):
    save_sketch(truncate(load_sketch(args.inp), args.keep), args.out)


def cmd_tokenize(args):
    seq = tokenizer.tokenize(load_sketch(args.inp))
    tokenizer.save_tokens(seq, args.out)
    print(json.dumps({"tokens": len(seq), "strokes": seq.stroke_count}))


def cmd_augment(args):
    rates = {"stroke_drop": args.stroke_drop, "point_drop": args.point_drop, "stroke_swap": args.stroke_swap}
    seq = tokenizer.augment(tokenizer.load_tokens(args.inp), rates, args.seed)
    tokenizer.save_tokens(seq, args.out)


def cmd_complete(args):
    seq = tokenizer.build_completion_input(tokenizer.load_tokens(args.inp), args.keep, args.pad_to, args.seed)
    tokenizer.save_tokens(seq, args.out)


def cmd_make_weights(args):
    cfg = embedding.reference_config(args.L, args.D, args.hidden, args.seed)
    embedding.save_weights(cfg, args.out)


def cmd_embed(args):
    cfg = embedding.load_weights(args.weights) if args.weights else embedding.reference_config()
    seq = tokenizer.load_tokens(args.inp)
    mat = embedding.embed(seq, cfg)
    mat.astype("<f4").tofile(args.out)
    print(json.dumps({"out": str(args.out), "shape": list(mat.shape), "dtype": "float32-le"}))


def cmd_evaluate(args):
    report = metrics.evaluate(load_mesh(args.pred), load_mesh(args.gt), args.n, args.seed, args.delta, args.gt_seed)
    text = json.dumps(report.to_dict(), indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)


def cmd_fidelity(args):
    sk = load_sketch(args.sketch)
    cd = metrics.sketch_to_shape(sk, load_mesh(args.mesh), args.n, args.seed)
    print(json.dumps({"cd_sketch_to_shape": cd, "cd_x1000": cd * 1000, "conventions": metrics.CONVENTIONS}))


def cmd_make_meshes(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for name, make in shapes.PROCEDURAL.items():
        save_obj(make(), out / f"{name}.obj")
        entries.append(ManifestEntry(f"{name}.obj", f"sketches/{name}.json", name, "synthetic-train"))
    write_manifest(DatasetManifest(entries, root=out), out / "manifest.csv")
    print(json.dumps({"meshes": [e.mesh_path for e in entries], "manifest": str(out / "manifest.csv")}))


def cmd_plot(args):
    plotting.render_sketch(load_sketch(args.inp), args.out, title=Path(args.inp).name)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sketchsynth", description="Synthetic 3D sketches from triangle meshes.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="mesh -> ordered sketch JSON")
    p.add_argument("--mesh", required=True)
    p.add_argument("--format", default="auto", choices=["auto", "obj", "off", "ply"])
    p.add_argument("--out", required=True)
    p.add_argument("--figure", help="also render the sketch to this image file")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("batch", help="generate every entry of a CSV manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--force", action="store_true", help="regenerate existing sketch files")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--report-dir")
    p.add_argument("--figures", action="store_true", help="write timing/count plots and sketch renders")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("truncate", help="keep a temporal prefix of a sketch")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--keep", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_truncate)

    p = sub.add_parser("tokenize", help="sketch JSON -> token JSON")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tokenize)

    p = sub.add_parser("augment", help="apply training augmentations to a token file")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--stroke-drop", type=float, default=0.15)
    p.add_argument("--point-drop", type=float, default=0.30)
    p.add_argument("--stroke-swap", type=float, default=0.20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("complete", help="build a completion input (prefix + MASK padding + EOS)")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--keep", type=float, required=True)
    p.add_argument("--pad-to", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("make-weights", help="write the reference embedding weights")
    p.add_argument("--out", required=True)
    p.add_argument("--L", type=int, default=10)
    p.add_argument("--D", type=int, default=256)
    p.add_argument("--hidden", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_make_weights)

    p = sub.add_parser("embed", help="token JSON -> float32 embedding matrix")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--weights", help="weight file; defaults to the reference config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("evaluate", help="Chamfer / F-score between two meshes")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--delta", type=float, default=0.02)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gt-seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("fidelity", help="asymmetric sketch-to-shape Chamfer")
    p.add_argument("--sketch", required=True)
    p.add_argument("--mesh", required=True)
    p.add_argument("--n", type=int, default=4096)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("make-meshes", help="write the procedural test meshes and a manifest")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_make_meshes)

    p = sub.add_parser("plot", help="render a sketch to an image")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args) or 0
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
