"""Command-line entry point.

Every subcommand prints one machine-readable JSON summary to stdout and logs
to stderr; the exit code is 0 iff no hard error.  Output files are written
atomically (temp + rename).  Flag precedence: flags > config file > defaults.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .errors import Lm2FaceError, ValidationError
from .heatmap import DEFAULT_SIGMA_PX
from .landmarks import LandmarkSet

log = logging.getLogger("lm2face")

SUMMARY_SCHEMA = 1


def _emit(summary: dict) -> None:
    summary = {"schema": SUMMARY_SCHEMA, **summary}
    json.dump(summary, sys.stdout, indent=1, sort_keys=True)
    sys.stdout.write("\n")


def _atomic_bytes(path, data: bytes) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def cmd_preprocess(args) -> dict:
    """Convert an image+landmark directory tree into a 64x64 crop corpus and
    a JSON-lines manifest."""
    from PIL import Image
    from .data import crop_and_normalize, write_manifest

    genders = {}
    if args.genders:
        with open(args.genders) as fh:
            genders = json.load(fh)

    entries = []
    for root, _, files in os.walk(args.raw_dir):
        for fname in sorted(files):
            if os.path.splitext(fname)[1].lower() not in (".png", ".jpg", ".jpeg"):
                continue
            img_path = os.path.join(root, fname)
            lm_path = os.path.splitext(img_path)[0] + ".json"
            if not os.path.isfile(lm_path):
                log.warning("no landmark file for %s; skipped", img_path)
                continue
            rel = os.path.relpath(img_path, args.raw_dir)
            gender = genders.get(rel) or genders.get(os.path.dirname(rel))
            if gender not in ("M", "F"):
                log.warning("no gender label for %s; skipped", rel)
                continue
            entries.append((img_path, lm_path, rel, gender))
    if not entries:
        raise ValidationError(f"no usable records under {args.raw_dir}")

    os.makedirs(os.path.join(args.out_dir, "faces"), exist_ok=True)
    rng = np.random.Generator(np.random.PCG64(args.seed))
    test_pick = rng.random(len(entries)) < args.test_fraction
    records = []
    skipped = 0
    for i, (img_path, lm_path, rel, gender) in enumerate(entries):
        try:
            with Image.open(img_path) as img:
                rgb = np.asarray(img.convert("RGB"))
            with open(lm_path) as fh:
                lm_obj = json.load(fh)
            pts = np.asarray(lm_obj["points"], dtype=np.float64)
            if lm_obj.get("coordinates", "normalized") == "pixel":
                pass  # already absolute
            else:
                pts = pts * [rgb.shape[1], rgb.shape[0]]
            if args.bbox_mode == "landmarks":
                x0, y0 = pts.min(axis=0)
                x1, y1 = pts.max(axis=0)
                mx, my = (x1 - x0) * 0.2, (y1 - y0) * 0.2
                bbox = (x0 - mx, y0 - my, (x1 - x0) + 2 * mx, (y1 - y0) + 2 * my)
            else:
                bbox = (0, 0, rgb.shape[1], rgb.shape[0])
            result = crop_and_normalize(rgb, pts, bbox)
        except Exception as exc:
            skipped += 1
            log.warning("skipping %s: %s", rel, exc)
            continue
        split = "test" if test_pick[i] else "train"
        stem = f"faces/{split}_{i:06d}"
        png = result.face.to_png_bytes()
        _atomic_bytes(os.path.join(args.out_dir, f"{stem}.png"), png)
        _atomic_bytes(os.path.join(args.out_dir, f"{stem}.json"),
                      result.landmarks.to_json().encode())
        records.append({"image": f"{stem}.png", "landmarks": f"{stem}.json",
                        "gender": gender, "split": split})
    manifest_path = os.path.join(args.out_dir, "manifest.jsonl")
    write_manifest(manifest_path, records, source=args.raw_dir, preprocessing="v1")
    return {"command": "preprocess", "manifest": manifest_path,
            "records": len(records), "skipped": skipped}


def cmd_fixtures(args) -> dict:
    """Generate the bundled synthetic fixture corpus."""
    from .fixtures import FixtureSpec, generate_corpus

    manifest = generate_corpus(args.out_dir, FixtureSpec(
        n_train=args.n_train, n_test=args.n_test, seed=args.seed))
    return {"command": "fixtures", "manifest": manifest.path,
            "records": len(manifest)}


def _train_config(args):
    from .losses import LossWeights
    from .training import TrainConfig

    base = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    weights = base.pop("weights", {})
    overrides = {
        "epochs": args.epochs, "batch_size": args.batch_size, "seed": args.seed,
        "lr_g": args.lr_g, "lr_d": args.lr_d, "sigma_px": args.sigma,
        "generator_preset": args.generator_preset,
        "discriminator_preset": args.discriminator_preset,
        "checkpoint_every": args.checkpoint_every,
        "backbone_weights": args.backbone_weights,
        "literal_gender_formula": args.literal_gender_formula or None,
        "hard_gender_labels": args.hard_gender_labels or None,
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    for name, value in (("lambda_p", args.lambda_p), ("lambda_c", args.lambda_c),
                        ("lambda_1", args.lambda_1)):
        if value is not None:
            weights[name] = value
    return TrainConfig(**base, weights=LossWeights(**weights))


def cmd_train(args) -> dict:
    from .data import load_manifest, make_pairs
    from .training import train

    cfg = _train_config(args)
    manifest = load_manifest(args.data)
    pairs, skipped = make_pairs(manifest, split=args.split, sigma_px=cfg.sigma_px,
                                seed=cfg.seed)
    result = train(cfg, pairs, out_dir=args.out_dir)
    last = result.epoch_summaries[-1]
    return {
        "command": "train",
        "epochs": last.epoch,
        "steps": sum(s.n_steps for s in result.epoch_summaries),
        "final_l_l1": last.mean_l_l1,
        "final_l_total": last.mean_l_total,
        "checkpoints": result.checkpoints,
        "log": result.log_path,
        "skipped_records": skipped,
    }


def cmd_synthesize(args) -> dict:
    from .data import load_manifest
    from .synthesis import load_generator, synthesize_faces

    net = load_generator(args.checkpoint)
    if args.landmarks:
        with open(args.landmarks) as fh:
            sets = [LandmarkSet.from_json(fh.read())]
        names = [os.path.splitext(os.path.basename(args.landmarks))[0]]
    elif args.manifest:
        manifest = load_manifest(args.manifest)
        records = manifest.split_records(args.split)
        if not records:
            raise ValidationError(f"manifest has no records in split {args.split!r}")
        sets = [r.load_landmarks() for r in records]
        names = [os.path.splitext(os.path.basename(r.image))[0] for r in records]
    else:
        raise ValidationError("one of --landmarks or --manifest is required")

    faces = synthesize_faces(net, sets, sigma_px=args.sigma)
    os.makedirs(args.out_dir, exist_ok=True)
    written = []
    for name, face in zip(names, faces):
        out_path = os.path.join(args.out_dir, f"{name}_synth.png")
        _atomic_bytes(out_path, face.to_png_bytes())
        written.append(out_path)
    return {"command": "synthesize", "images": len(written), "out_dir": args.out_dir,
            "files": written[:16]}


def cmd_evaluate(args) -> dict:
    from .data import load_manifest
    from .evaluation import RecognitionProtocol, recognition_report

    manifest = load_manifest(args.manifest)
    protocol = RecognitionProtocol(n_folds=args.folds, seed=args.seed,
                                   sigma_px=args.sigma,
                                   lbp_train_source=args.lbp_train_source)
    report = recognition_report(args.checkpoint, manifest, protocol,
                                dataset_name=args.dataset_name)
    os.makedirs(args.out_dir, exist_ok=True)
    json_path = os.path.join(args.out_dir, "report.json")
    csv_path = os.path.join(args.out_dir, "report.csv")
    _atomic_bytes(json_path, report.to_json().encode())
    _atomic_bytes(csv_path, report.to_csv().encode())
    return {
        "command": "evaluate",
        "report_json": json_path,
        "report_csv": csv_path,
        "results": {r.method: {"mean": r.mean, "std": r.std} for r in report.results},
    }


def cmd_serve(args) -> dict:
    from .service import serve_forever

    serve_forever(args.checkpoint, host=args.host, port=args.port,
                  static_dir=args.static_dir, default_sigma=args.sigma)
    return {"command": "serve", "stopped": True}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lm2face",
                                     description="Landmark-to-face synthesis toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="convert a raw image+landmark tree to a manifest")
    p.add_argument("--raw-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--genders", help="JSON map of relative path (or directory) to M/F")
    p.add_argument("--bbox-mode", choices=("full", "landmarks"), default="full")
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("fixtures", help="generate the synthetic fixture corpus")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n-train", type=int, default=200)
    p.add_argument("--n-test", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fixtures)

    p = sub.add_parser("train", help="train the generator/discriminator pair")
    p.add_argument("--data", required=True, help="manifest path")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config", help="JSON config file (TrainConfig fields)")
    p.add_argument("--split", default="train")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--lr-g", type=float)
    p.add_argument("--lr-d", type=float)
    p.add_argument("--lambda-p", type=float, dest="lambda_p")
    p.add_argument("--lambda-c", type=float, dest="lambda_c")
    p.add_argument("--lambda-1", type=float, dest="lambda_1")
    p.add_argument("--sigma", type=float, help="heatmap sigma in pixels")
    p.add_argument("--generator-preset", choices=("paper", "small", "tiny"))
    p.add_argument("--discriminator-preset", choices=("paper", "small", "tiny"))
    p.add_argument("--checkpoint-every", type=int)
    p.add_argument("--backbone-weights", help="VGG-16 weight asset directory")
    p.add_argument("--literal-gender-formula", action="store_true")
    p.add_argument("--hard-gender-labels", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("synthesize", help="render faces for landmark sets")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--landmarks", help="single landmark JSON file")
    p.add_argument("--manifest", help="manifest path (synthesize a whole split)")
    p.add_argument("--split", default="test")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--sigma", type=float, default=DEFAULT_SIGMA_PX)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("evaluate", help="gender-recognition report")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=float, default=DEFAULT_SIGMA_PX)
    p.add_argument("--lbp-train-source", choices=("synth", "real"), default="synth")
    p.add_argument("--dataset-name", default="fixture")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("serve", help="start the HTTP inference service")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--static-dir", help="directory with the editor bundle")
    p.add_argument("--sigma", type=float, default=DEFAULT_SIGMA_PX)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        summary = args.func(args)
    except Lm2FaceError as exc:
        log.error("%s", exc)
        _emit({"command": args.command, "error": str(exc)})
        return 2
    except OSError as exc:
        log.error("%s", exc)
        _emit({"command": args.command, "error": str(exc)})
        return 2
    _emit(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
