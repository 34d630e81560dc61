"""Command-line interface: detect, synth, warp, bench, repeat.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numeric or
configuration error. Diagnostics go to stderr; data goes to files or
stdout only.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .detector import DetectorConfig, config_hash, detect
from .errors import (
    ConfigurationError,
    GaborCornerError,
    ImageFormatError,
    UsageError,
)
from .evaluation import (
    COORDINATE_NOTE,
    FAMILIES,
    benchmark_csv,
    match_corners,
    run_transform_benchmark,
)
from .filtering import apply_bank
from .image_io import (
    OverlayStyle,
    load_ground_truth,
    load_image,
    save_ground_truth,
    save_image,
    save_overlay,
    write_kernel_dump,
    write_response_dump,
)
from .evaluation import GroundTruth
from .models import AffineSpec, affine_warp, classify_model, preset_model, render_model, RasterSpec

THREADS_ENV = "GABOR_CORNER_THREADS"

_FAMILY_ALIASES = {
    "rot": "rotation",
    "scale": "uniform-scale",
    "nscale": "non-uniform-scale",
    "shear": "shear",
    "jpeg": "jpeg",
    "noise": "gaussian-noise",
}

_CONFIG_KEYS = (
    "frequencies",
    "directions",
    "gamma",
    "eta",
    "window_span",
    "nms_rows",
    "nms_cols",
    "threshold",
    "guard",
    "boundary",
    "seed",
)


@dataclass(frozen=True)
class RunConfig:
    detector: DetectorConfig
    seed: int = 0


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigurationError(f"bad numeric list {text!r}: {exc}") from exc


def parse_config_file(path) -> dict:
    """Flat key=value detector configuration, '#' starts a comment."""
    values: dict[str, object] = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ImageFormatError(f"cannot read config {path}: {exc}") from exc
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{number}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigurationError(f"{path}:{number}: unknown config key {key!r}")
        if key == "frequencies":
            values[key] = _parse_floats(value)
        elif key in ("directions", "window_span", "nms_rows", "nms_cols", "seed"):
            try:
                values[key] = int(value)
            except ValueError as exc:
                raise ConfigurationError(f"{path}:{number}: {exc}") from exc
        elif key == "boundary":
            values[key] = value
        else:
            try:
                values[key] = float(value)
            except ValueError as exc:
                raise ConfigurationError(f"{path}:{number}: {exc}") from exc
    return values


def _resolve_config(args) -> RunConfig:
    values: dict[str, object] = {}
    if getattr(args, "config", None):
        values.update(parse_config_file(args.config))
    overrides = {
        "frequencies": _parse_floats(args.frequencies) if getattr(args, "frequencies", None) else None,
        "directions": getattr(args, "directions", None),
        "gamma": getattr(args, "gamma", None),
        "eta": getattr(args, "eta", None),
        "window_span": getattr(args, "window_span", None),
        "nms_rows": getattr(args, "nms_rows", None),
        "nms_cols": getattr(args, "nms_cols", None),
        "threshold": getattr(args, "threshold", None),
        "guard": getattr(args, "guard", None),
        "boundary": getattr(args, "boundary", None),
        "seed": getattr(args, "seed", None),
    }
    values.update({key: value for key, value in overrides.items() if value is not None})
    seed = int(values.pop("seed", 0))
    defaults = DetectorConfig()
    detector = DetectorConfig(
        frequencies=tuple(values.get("frequencies", defaults.frequencies)),
        directions=int(values.get("directions", defaults.directions)),
        gamma=float(values.get("gamma", defaults.gamma)),
        eta=float(values.get("eta", defaults.eta)),
        window_span=int(values.get("window_span", defaults.window_span)),
        nms_size=(
            int(values.get("nms_rows", defaults.nms_size[0])),
            int(values.get("nms_cols", defaults.nms_size[1])),
        ),
        threshold=float(values.get("threshold", defaults.threshold)),
        guard=float(values.get("guard", defaults.guard)),
        boundary=str(values.get("boundary", defaults.boundary)),
    )
    return RunConfig(detector=detector, seed=seed)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_config_flags(parser) -> None:
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--frequencies", help="comma-separated scale frequencies")
    parser.add_argument("--directions", type=int)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--eta", type=float)
    parser.add_argument("--window-span", dest="window_span", type=int)
    parser.add_argument("--nms-rows", dest="nms_rows", type=int)
    parser.add_argument("--nms-cols", dest="nms_cols", type=int)
    parser.add_argument("--threshold", type=float)
    parser.add_argument("--guard", type=float)
    parser.add_argument("--boundary", choices=("reflect", "replicate", "zero"))
    parser.add_argument("--seed", type=int)


def build_parser() -> _Parser:
    parser = _Parser(prog="gaborcorner", description="Gabor structure-tensor corner detector")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_detect = sub.add_parser("detect", help="detect corners in an image")
    p_detect.add_argument("image")
    p_detect.add_argument("--out", help="corners file (.json or .csv); stdout JSON otherwise")
    p_detect.add_argument("--overlay", help="write a marker overlay PNG")
    p_detect.add_argument("--dump-responses", dest="dump_responses", help="directory for response planes")
    p_detect.add_argument("--dump-kernels", dest="dump_kernels", help="directory for kernel grids")
    _add_config_flags(p_detect)

    p_synth = sub.add_parser("synth", help="render a synthetic corner model")
    p_synth.add_argument("--model", required=True, choices=("step", "L", "Y", "T", "X", "star"))
    p_synth.add_argument("--grays", help="comma-separated region gray values")
    p_synth.add_argument("--angles", help="comma-separated region start angles (radians)")
    p_synth.add_argument("--size", type=int, default=129, help="odd raster side, >= 65")
    p_synth.add_argument("--out", required=True, help="output image (.png or .pgm)")
    p_synth.add_argument("--gt", help="write vertex ground truth JSON")

    p_warp = sub.add_parser("warp", help="apply an affine transform")
    p_warp.add_argument("image")
    p_warp.add_argument("--rotate", type=float, help="rotation in degrees")
    p_warp.add_argument("--scale", help="sx or sx,sy")
    p_warp.add_argument("--shear", type=float, help="horizontal shear factor")
    p_warp.add_argument("--out", required=True)
    p_warp.add_argument("--map", dest="map_path", help="write the forward 2x3 map as JSON")

    p_bench = sub.add_parser("bench", help="score detections against ground truth")
    p_bench.add_argument("image")
    p_bench.add_argument("--gt", required=True)
    p_bench.add_argument("--tau", type=float, default=4.0)
    p_bench.add_argument("--report", help="report JSON path; stdout otherwise")
    _add_config_flags(p_bench)

    p_repeat = sub.add_parser("repeat", help="repeatability under the transform suite")
    p_repeat.add_argument("image")
    p_repeat.add_argument(
        "--families",
        help="comma-separated subset of rot,scale,nscale,shear,jpeg,noise",
    )
    p_repeat.add_argument("--report", help="report JSON path; stdout otherwise")
    p_repeat.add_argument("--csv", help="also write a CSV flattening")
    _add_config_flags(p_repeat)

    return parser


def _emit_json(payload: dict, path) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _corners_payload(image_path, image, config: DetectorConfig, corners) -> dict:
    return {
        "image": str(image_path),
        "coordinates": COORDINATE_NOTE,
        "width": image.shape[1],
        "height": image.shape[0],
        "config": config.as_dict(),
        "config_hash": config_hash(config),
        "corners": [
            {"x": c.x, "y": c.y, "score": c.score, "measures": list(c.measures)}
            for c in corners
        ],
    }


def _cmd_detect(args) -> int:
    run = _resolve_config(args)
    image = load_image(args.image)
    corners = detect(image, run.detector)
    if args.out and args.out.endswith(".csv"):
        lines = ["x,y,score"] + [f"{c.x},{c.y},{c.score!r}" for c in corners]
        Path(args.out).write_text("\n".join(lines) + "\n")
    else:
        _emit_json(_corners_payload(args.image, image, run.detector, corners), args.out)
    if args.overlay:
        save_overlay(image, corners, OverlayStyle(), args.overlay)
    if args.dump_kernels:
        write_kernel_dump(run.detector.bank(), args.dump_kernels)
    if args.dump_responses:
        stack = apply_bank(image, run.detector.bank(), boundary=run.detector.boundary)
        write_response_dump(stack, args.dump_responses)
    return 0


def _cmd_synth(args) -> int:
    model = preset_model(
        args.model,
        grays=_parse_floats(args.grays) if args.grays else None,
        angles=_parse_floats(args.angles) if args.angles else None,
    )
    image, vertex = render_model(model, RasterSpec(side=args.size))
    save_image(image, args.out)
    if args.gt:
        save_ground_truth(
            GroundTruth(corners=((float(vertex[0]), float(vertex[1])),)),
            args.gt,
            extra={
                "kind": classify_model(model),
                "regions": [[gray, angle] for gray, angle in model.regions],
                "vertex": [vertex[0], vertex[1]],
            },
        )
    return 0


def _cmd_warp(args) -> int:
    chosen = [flag for flag in (args.rotate, args.scale, args.shear) if flag is not None]
    if len(chosen) != 1:
        raise UsageError("pass exactly one of --rotate, --scale, --shear")
    image = load_image(args.image)
    if args.rotate is not None:
        spec = AffineSpec(rotation=math.radians(args.rotate))
    elif args.scale is not None:
        parts = _parse_floats(args.scale)
        if len(parts) == 1:
            spec = AffineSpec(scale_x=parts[0], scale_y=parts[0])
        elif len(parts) == 2:
            spec = AffineSpec(scale_x=parts[0], scale_y=parts[1])
        else:
            raise UsageError("--scale takes sx or sx,sy")
    else:
        spec = AffineSpec(shear=args.shear)
    warped, matrix = affine_warp(image, spec)
    save_image(warped, args.out)
    if args.map_path:
        payload = {
            "matrix": [list(map(float, row)) for row in matrix],
            "width": warped.shape[1],
            "height": warped.shape[0],
        }
        Path(args.map_path).write_text(json.dumps(payload, indent=2) + "\n")
    return 0


def _cmd_bench(args) -> int:
    run = _resolve_config(args)
    image = load_image(args.image)
    truth = load_ground_truth(args.gt)
    corners = detect(image, run.detector)
    result = match_corners(corners, truth.corners, tau=args.tau)
    payload = {
        "image": str(args.image),
        "coordinates": COORDINATE_NOTE,
        "config": run.detector.as_dict(),
        "config_hash": config_hash(run.detector),
        "tau": args.tau,
        "ground_truth_count": len(truth.corners),
        "detected_count": len(corners),
        "matched_count": result.matched,
        "missed": result.missed,
        "false_alarms": result.false_alarms,
        "localization_error": result.localization_error,
        "pairs": [[list(detected), list(reference)] for detected, reference in result.pairs],
    }
    _emit_json(payload, args.report)
    return 0


def _threads_cap() -> int | None:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return None
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ConfigurationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise ConfigurationError(f"{THREADS_ENV} must be >= 1, got {cap}")
    return cap


def _cmd_repeat(args) -> int:
    run = _resolve_config(args)
    image = load_image(args.image)
    families = None
    if args.families:
        families = []
        for name in args.families.split(","):
            name = name.strip()
            if not name:
                continue
            if name not in _FAMILY_ALIASES and name not in FAMILIES:
                raise UsageError(f"unknown family {name!r}; use {','.join(_FAMILY_ALIASES)}")
            families.append(_FAMILY_ALIASES.get(name, name))
    report = run_transform_benchmark(
        image,
        config=run.detector,
        seed=run.seed,
        families=families,
        workers=_threads_cap(),
        image_id=str(args.image),
    )
    _emit_json(report, args.report)
    if args.csv:
        Path(args.csv).write_text(benchmark_csv(report))
    return 0


_HANDLERS = {
    "detect": _cmd_detect,
    "synth": _cmd_synth,
    "warp": _cmd_warp,
    "bench": _cmd_bench,
    "repeat": _cmd_repeat,
}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except ImageFormatError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except GaborCornerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
