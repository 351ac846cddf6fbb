"""Command-line front door: warp, synth, eval and serve subcommands.

Exit codes: 0 success, 2 invalid flags or dimension mismatch, 3 decode/IO
failure, 4 near-singular transform matrix.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

from .dataset import TransformRanges, synth_dataset
from .errors import (
    BadDimsError,
    DimMismatchError,
    IoError,
    NearSingularError,
    OmnizoomError,
)
from .geometry import MobiusMatrix, SphericalCoord, ViewControls
from .image import load_png, save_png
from .metrics import ws_psnr, ws_ssim
from .pipeline import WarpOrder, WarpRequest, warp
from .resample import ResampleKernel, resolve_threads

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_SINGULAR = 4


def _parse_matrix(text: str) -> MobiusMatrix:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 8:
        raise ValueError(f"--matrix needs 8 comma-separated floats, got {len(parts)}")
    return MobiusMatrix.from_floats([float(p) for p in parts])


def _parse_zoom_center(text: str) -> SphericalCoord:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 2:
        raise ValueError("--zoom-center needs 'theta,phi'")
    return SphericalCoord(float(parts[0]), float(parts[1]))


def _view_from_args(args) -> MobiusMatrix | ViewControls:
    if args.matrix is not None:
        return _parse_matrix(args.matrix)
    center = _parse_zoom_center(args.zoom_center) if args.zoom_center else SphericalCoord(0.0, 0.0)
    return ViewControls(yaw=args.yaw, pitch=args.pitch,
                        zoom_center=center, zoom_factor=args.zoom)


def cmd_warp(args) -> int:
    try:
        view = _view_from_args(args)
        req = WarpRequest(view=view,
                          scale=args.scale,
                          kernel=ResampleKernel.from_name(args.kernel),
                          order=WarpOrder.from_name(args.order))
    except NearSingularError as exc:
        print(f"error: singular matrix: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        src = load_png(args.input)
    except IoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    start = time.perf_counter()
    try:
        out = warp(src, req, threads=resolve_threads(args.threads))
    except NearSingularError as exc:
        print(f"error: singular matrix: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    elapsed = time.perf_counter() - start

    try:
        save_png(out, args.output, bit_depth=args.bit_depth)
    except (IoError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"{out.width}x{out.height}x{out.channels}  {elapsed * 1000.0:.1f} ms")
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        ranges = TransformRanges.from_json(args.config) if args.config else TransformRanges()
        records = synth_dataset(args.hr_dir, args.out_dir, scale=args.scale,
                                count_per_image=args.count_per_image, seed=args.seed,
                                ranges=ranges, bit_depth=args.bit_depth,
                                threads=resolve_threads(args.threads))
    except (IoError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (BadDimsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not records:
        print("warning: no PNG images found in hr-dir; wrote empty manifest",
              file=sys.stderr)
    print(f"wrote {len(records)} records to {args.out_dir}")
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        pred = load_png(args.pred)
        gt = load_png(args.gt)
    except IoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    report: dict = {}
    try:
        if args.metric in ("ws-psnr", "both"):
            v = ws_psnr(pred, gt, peak=args.peak)
            report["ws_psnr"] = "inf" if math.isinf(v) else v
        if args.metric in ("ws-ssim", "both"):
            report["ws_ssim"] = ws_ssim(pred, gt, peak=args.peak)
    except (DimMismatchError, OmnizoomError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report["peak"] = args.peak
    report["dims"] = [pred.height, pred.width, pred.channels]
    print(json.dumps(report))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    try:
        app = create_app(panorama_dir=args.panorama_dir,
                         threads=resolve_threads(args.threads))
    except (IoError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="omnizoom",
                                     description="Conformal panorama warping toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("warp", help="warp one ERP image")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--matrix", help="8 comma-separated floats: "
                                    "a.re,a.im,b.re,b.im,c.re,c.im,d.re,d.im")
    p.add_argument("--yaw", type=float, default=0.0)
    p.add_argument("--pitch", type=float, default=0.0)
    p.add_argument("--zoom", type=float, default=1.0)
    p.add_argument("--zoom-center", help="'theta,phi' in radians")
    p.add_argument("--scale", type=int, default=1)
    p.add_argument("--kernel", default="spherical",
                   choices=["spherical", "nearest", "bilinear", "bicubic"])
    p.add_argument("--order", default="up-first", choices=["up-first", "transform-first"])
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--bit-depth", type=int, default=8, choices=[8, 16])
    p.set_defaults(func=cmd_warp)

    p = sub.add_parser("synth", help="synthesize LR/GT training pairs")
    p.add_argument("--hr-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--scale", type=int, required=True)
    p.add_argument("--count-per-image", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--config", help="JSON file overriding transform ranges")
    p.add_argument("--bit-depth", type=int, default=8, choices=[8, 16])
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="score a prediction against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--metric", default="both", choices=["ws-psnr", "ws-ssim", "both"])
    p.add_argument("--peak", type=float, default=1.0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the HTTP warp service")
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--panorama-dir", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    return args.func(args)


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
