"""Command-line front end.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np
from PIL import Image

from . import engines, evaluation
from .background import DEFAULT_BANDWIDTH, DEFAULT_BG_SCALE, DEFAULT_SIGMA2
from .classifiers import (AreaFractionOracle, Blob, ConstantOracle, TwoBlobOracle,
                          open_external, open_interchange)
from .difference import DifferenceFunction
from .errors import RegPDError
from .imagery import load_image, load_mask, overlay, read_saliency, save_saliency
from .segmentation import DEFAULT_COMPACTNESS, boundary_overlay, segment

MANIFEST_NAME = "manifest.txt"

# manifest key -> argparse dest, where they differ
_KEY_TO_DEST = {"class": "class_id"}
_DEST_TO_KEY = {v: k for k, v in _KEY_TO_DEST.items()}


class UsageError(Exception):
    pass


def positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {value}")
    return value


def class_selector(text):
    if text == "argmax":
        return text
    try:
        return nonneg_int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a class id or 'argmax', got {text!r}")


def color_triple(text):
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected R,G,B, got {text!r}")
    return tuple(parts)


# --- manifests ---------------------------------------------------------------

def read_manifest(path):
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def write_manifest(path, entries):
    lines = [f"{key} = {'' if value is None else value}" for key, value in entries.items()]
    Path(path).write_text("\n".join(lines) + "\n")


def _manifest_from_args(args, keys):
    out = {"command": args.command}
    for dest in keys:
        value = getattr(args, dest, None)
        if isinstance(value, tuple):
            value = ",".join(f"{v:g}" for v in value)
        out[_DEST_TO_KEY.get(dest, dest)] = value
    return out


# --- classifier specs --------------------------------------------------------

def build_classifier(args, corpus_params=None):
    """Instantiate the classifier named by ``--classifier``."""
    spec = args.classifier
    kind, _, rest = spec.partition(":")
    if kind == "oracle":
        if rest == "area-fraction":
            params = dict(corpus_params or {})
            color = args.target_color or params.get("target_color", (255.0, 0.0, 0.0))
            tol = args.color_tol if args.color_tol is not None else params.get("tolerance", 30.0)
            ref = (args.ref_fraction if args.ref_fraction is not None
                   else params.get("reference_fraction", 0.1))
            return AreaFractionOracle(color, tol, ref)
        if rest == "constant":
            probs = [float(p) for p in (args.probs or "0.5,0.5").split(",")]
            return ConstantOracle(probs)
        if rest == "two-blob":
            if not args.blobs:
                raise UsageError("oracle:two-blob needs --blobs 'R,G,B:tol:ref;R,G,B:tol:ref'")
            blobs = []
            for part in args.blobs.split(";"):
                color, tol, ref = part.split(":")
                blobs.append(Blob(color_triple(color), float(tol), float(ref)))
            return TwoBlobOracle(blobs)
        raise UsageError(f"unknown oracle {rest!r}; use area-fraction, constant or two-blob")
    if kind == "external":
        if not rest:
            raise UsageError("external: needs a command")
        return open_external(rest, args.num_classes)
    if kind == "interchange":
        return open_interchange(rest)
    raise UsageError(f"bad --classifier {spec!r}; use oracle:<kind>, external:<cmd> "
                     "or interchange:<path>")


# --- subcommands -------------------------------------------------------------

_CLASSIFIER_KEYS = ["classifier", "target_color", "color_tol", "ref_fraction", "probs", "blobs",
                    "num_classes"]
_REGIONAL_KEYS = ["r", "g", "seed", "bandwidth", "sigma2", "bg_scale", "compactness",
                  "colorspace"]


def _regional_config(args):
    return engines.PDConfig(r=args.r, g=DifferenceFunction(args.g), seed=args.seed,
                            bandwidth=args.bandwidth, sigma2=args.sigma2, bg_scale=args.bg_scale,
                            compactness=args.compactness, colorspace=args.colorspace,
                            workers=args.workers)


def _baseline_config(args):
    return engines.BaselineConfig(k=args.k, l=args.l, samples=args.samples,
                                  g=DifferenceFunction(args.g), seed=args.seed)


def cmd_explain(args):
    start = time.perf_counter()
    image = load_image(args.image)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with build_classifier(args) as f:
        trace = engines.regional_pd_trace(f, image, args.class_id, _regional_config(args))
        calls = f.calls
        desc = f.describe()
    outputs = ["fused.pfm", "fused.png"]
    save_saliency(trace.fused, out / "fused.pfm", "raw")
    save_saliency(trace.fused, out / "fused.png", "heatmap")
    for k, smap in zip([2 ** j for j in range(1, args.r + 1)], trace.scales):
        name = f"scale_{k:03d}.png"
        save_saliency(smap, out / name, "heatmap")
        outputs.append(name)
    Image.fromarray(overlay(image, trace.fused)).save(out / "overlay.png")
    outputs.append("overlay.png")
    manifest = _manifest_from_args(args, ["image", "class_id"] + _CLASSIFIER_KEYS
                                   + _REGIONAL_KEYS + ["out_dir"])
    manifest.update(engine="regional", backend=desc, target_class=trace.target_class,
                    baseline_prob=f"{trace.baseline[trace.target_class]:.6f}",
                    background_mu=",".join(f"{v:.4f}" for v in trace.model.mu),
                    region_counts=",".join(str(s.region_count) for s in trace.segmentations),
                    outputs=",".join(outputs), calls=calls,
                    wall_time=f"{time.perf_counter() - start:.3f}")
    write_manifest(out / MANIFEST_NAME, manifest)
    print(f"wrote {len(outputs)} files to {out} ({calls} classifier calls)")
    return 0


def cmd_baseline(args):
    start = time.perf_counter()
    image = load_image(args.image)
    cfg = _baseline_config(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with build_classifier(args) as f:
        smap = engines.pixelwise_pd(f, image, args.class_id, cfg)
        calls = f.calls
        desc = f.describe()
    save_saliency(smap, out / "saliency.pfm", "raw")
    save_saliency(smap, out / "saliency.png", "heatmap")
    Image.fromarray(overlay(image, smap)).save(out / "overlay.png")
    manifest = _manifest_from_args(args, ["image", "class_id"] + _CLASSIFIER_KEYS
                                   + ["k", "l", "samples", "g", "seed", "out_dir"])
    manifest.update(engine="pixelwise", backend=desc,
                    outputs="saliency.pfm,saliency.png,overlay.png", calls=calls,
                    wall_time=f"{time.perf_counter() - start:.3f}")
    write_manifest(out / MANIFEST_NAME, manifest)
    print(f"wrote saliency map to {out} ({calls} classifier calls)")
    return 0


def cmd_segment(args):
    image = load_image(args.image)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seg = segment(image, args.scale, args.seed, compactness=args.compactness,
                  colorspace=args.colorspace)
    if seg.region_count > 65535:
        raise RegPDError("too many regions for a 16-bit label image")
    Image.fromarray(seg.labels.astype(np.uint16)).save(out / "labels.png")
    Image.fromarray(boundary_overlay(image, seg)).save(out / "boundaries.png")
    manifest = _manifest_from_args(args, ["image", "scale", "seed", "compactness", "colorspace",
                                          "out_dir"])
    manifest.update(region_count=seg.region_count, outputs="labels.png,boundaries.png")
    write_manifest(out / MANIFEST_NAME, manifest)
    print(f"{seg.region_count} regions")
    return 0


def _corpus_pairs(root):
    root = Path(root)
    images = root / "images"
    masks = root / "masks"
    if not images.is_dir() or not masks.is_dir():
        raise UsageError(f"{root} needs images/ and masks/ subdirectories")
    mask_stems = {p.stem: p for p in masks.iterdir() if p.is_file()}
    pairs = [(p.stem, p, mask_stems[p.stem]) for p in sorted(images.iterdir())
             if p.is_file() and p.stem in mask_stems]
    if not pairs:
        raise UsageError(f"no (image, mask) pairs found under {root}")
    return pairs


def cmd_evaluate(args):
    start = time.perf_counter()
    pairs = _corpus_pairs(args.corpus)
    meta_path = Path(args.corpus) / "corpus.json"
    meta = json.loads(meta_path.read_text()) if meta_path.is_file() else {}
    out = Path(args.out_dir)
    (out / "curves").mkdir(parents=True, exist_ok=True)
    curves, calls = [], 0
    for stem, image_path, mask_path in pairs:
        truth = load_mask(mask_path)
        if args.maps:
            smap = read_saliency(Path(args.maps) / f"{stem}.pfm")
        else:
            image = load_image(image_path)
            with build_classifier(args, meta.get(stem)) as f:
                if args.engine == "regional":
                    smap = engines.regional_pd(f, image, args.class_id, _regional_config(args))[0]
                else:
                    smap = engines.pixelwise_pd(f, image, args.class_id, _baseline_config(args))
                calls += f.calls
        curve = evaluation.sweep(smap, truth, args.steps, args.beta)
        curve.write_csv(out / "curves" / f"{stem}.csv")
        curves.append(curve)
    mean = evaluation.mean_curve(curves)
    mean.write_csv(out / "mean.csv")
    p, r, fm = mean.at(0.5)
    manifest = _manifest_from_args(args, ["corpus", "maps", "engine", "class_id"]
                                   + _CLASSIFIER_KEYS + _REGIONAL_KEYS
                                   + ["k", "l", "samples", "steps", "beta", "out_dir"])
    manifest.update(images=len(curves), calls=calls, mean_f_at_0_5=f"{fm:.6f}",
                    wall_time=f"{time.perf_counter() - start:.3f}")
    write_manifest(out / MANIFEST_NAME, manifest)
    print(f"{len(curves)} images; mean at t=0.5: precision={p:.4f} recall={r:.4f} F={fm:.4f}")
    return 0


def cmd_calls(args):
    height = args.height or args.n
    width = args.width or args.n
    pixelwise = engines.pixelwise_call_budget(height, width, args.samples)
    low, high = engines.regional_call_budget(args.r)
    print(f"image = {width}x{height}")
    print(f"pixelwise_calls = {pixelwise}")
    print(f"regional_calls_exact = {low}")
    print(f"regional_calls_max = {high}")
    print(f"ratio = {pixelwise / high:.3f}")
    return 0


# --- parser ------------------------------------------------------------------

def _add_classifier_flags(p):
    p.add_argument("--classifier", default="oracle:area-fraction",
                   help="oracle:<area-fraction|constant|two-blob>, external:<cmd> "
                        "or interchange:<model.onnx>")
    p.add_argument("--oracle", default=None, choices=["area-fraction", "constant", "two-blob"],
                   help="shorthand for --classifier oracle:<kind>")
    p.add_argument("--class", dest="class_id", type=class_selector, default="argmax",
                   help="target class id or 'argmax' (default)")
    p.add_argument("--target-color", type=color_triple, default=None)
    p.add_argument("--color-tol", type=float, default=None)
    p.add_argument("--ref-fraction", type=positive_float, default=None)
    p.add_argument("--probs", default=None, help="constant oracle output, e.g. 0.3,0.7")
    p.add_argument("--blobs", default=None, help="two-blob oracle: 'R,G,B:tol:ref;...'")
    p.add_argument("--num-classes", type=positive_int, default=2,
                   help="class count expected from an external classifier")


def _add_common(p, image=True):
    p.add_argument("--config", default=None, help="key = value file read at lower precedence "
                                                  "than flags; run manifests can be replayed")
    if image:
        p.add_argument("--image", required=True)
    p.add_argument("--seed", type=nonneg_int, default=0)
    p.add_argument("--out-dir", default="out")
    p.add_argument("--g", default="sub", choices=["sub", "woe", "info"])


def _add_segment_flags(p):
    p.add_argument("--compactness", type=positive_float, default=DEFAULT_COMPACTNESS)
    p.add_argument("--colorspace", default="rgb", choices=["rgb", "lab"])


def _add_regional_flags(p):
    p.add_argument("--r", type=positive_int, default=5)
    p.add_argument("--bandwidth", type=positive_float, default=DEFAULT_BANDWIDTH)
    p.add_argument("--sigma2", type=positive_float, default=DEFAULT_SIGMA2)
    p.add_argument("--bg-scale", type=positive_int, default=DEFAULT_BG_SCALE)
    p.add_argument("--workers", type=positive_int, default=1)
    _add_segment_flags(p)


def _add_baseline_flags(p, defaults=(10, 14, 10)):
    p.add_argument("--k", type=positive_int, default=defaults[0])
    p.add_argument("--l", type=positive_int, default=defaults[1])
    p.add_argument("--samples", type=positive_int, default=defaults[2])


def build_parser():
    parser = argparse.ArgumentParser(prog="regpd", description="Prediction-difference saliency "
                                     "maps for black-box image classifiers.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("explain", help="regional multi-scale saliency map")
    _add_common(p)
    _add_classifier_flags(p)
    _add_regional_flags(p)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("baseline", help="pixel-wise conditional-sampling saliency map")
    _add_common(p)
    _add_classifier_flags(p)
    _add_baseline_flags(p)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("segment", help="superpixel labels and boundary overlay")
    _add_common(p)
    p.add_argument("--scale", type=positive_int, default=16, help="target region count")
    _add_segment_flags(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("evaluate", help="precision/recall/F curves over a corpus")
    _add_common(p, image=False)
    p.add_argument("--corpus", required=True,
                   help="directory with images/ and masks/ matched by file stem")
    p.add_argument("--maps", default=None,
                   help="directory of precomputed <stem>.pfm maps; skips the engine")
    p.add_argument("--engine", default="regional", choices=["regional", "pixelwise"])
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--beta", type=positive_float, default=1.0)
    _add_classifier_flags(p)
    _add_regional_flags(p)
    _add_baseline_flags(p, defaults=(5, 9, 4))
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("calls", help="classifier-call budgets of both engines")
    p.add_argument("--n", type=positive_int, default=256, help="square image side")
    p.add_argument("--height", type=positive_int, default=None)
    p.add_argument("--width", type=positive_int, default=None)
    p.add_argument("--samples", type=positive_int, default=10)
    p.add_argument("--r", type=positive_int, default=5)
    p.set_defaults(func=cmd_calls)
    return parser


def _apply_config(parser, argv):
    """Parse ``argv`` with any ``--config`` entries as subcommand defaults."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    subparsers = parser._subparsers._group_actions[0].choices
    if not known.config or known.command not in subparsers:
        return parser.parse_args(argv)
    try:
        entries = read_manifest(known.config)
    except OSError as exc:
        parser.error(f"cannot read config {known.config}: {exc}")
    sub = subparsers[known.command]
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in entries.items():
        dest = _KEY_TO_DEST.get(key, key)
        if dest not in actions or dest in ("config", "help") or value in ("", "None"):
            continue
        action = actions[dest]
        action.required = False
        try:
            defaults[dest] = action.type(value) if action.type else value
        except (argparse.ArgumentTypeError, ValueError) as exc:
            parser.error(f"config {known.config}: bad value for {key}: {exc}")
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None):
    parser = build_parser()
    args = _apply_config(parser, argv)
    if getattr(args, "oracle", None):
        args.classifier = f"oracle:{args.oracle}"
    if args.command == "baseline" and not args.l > args.k:
        parser.error(f"need l > k, got k={args.k}, l={args.l}")
    if args.command == "evaluate" and args.steps < 2:
        parser.error("--steps must be >= 2")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (RegPDError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
