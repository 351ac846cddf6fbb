"""Synthesis of paired training/eval data: LR input, transform, warped HR target.

Every record pins the exact transform used on the HR image, so any model or
pipeline can be supervised against gt or scored later. The whole synthesis
is deterministic in (seed, config): per-record seeds are derived with
SeedSequence(base_seed, image_index, variant_index).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import IoError
from .geometry import (
    SphericalCoord,
    SpherePoint,
    ViewControls,
    canonicalize,
    from_controls,
    from_rotation,
    map_sphere,
    sp_inv,
)
from .image import ErpImage, load_png, save_png
from .pipeline import WarpRequest, downsample, warp
from .resample import ResampleKernel


@dataclass(frozen=True)
class TransformRanges:
    """Sampling ranges for random view parameters; all overridable via config."""

    yaw: tuple[float, float] = (-math.pi, math.pi)
    pitch: tuple[float, float] = (-math.pi / 4, math.pi / 4)
    zoom: tuple[float, float] = (0.8, 1.5)

    @classmethod
    def from_json(cls, path) -> "TransformRanges":
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
        kwargs = {k: tuple(v) for k, v in raw.items() if k in ("yaw", "pitch", "zoom")}
        return cls(**kwargs)


DEFAULT_RANGES = TransformRanges()


@dataclass(frozen=True)
class SynthRecord:
    id: str
    hr_path: str
    lr_path: str
    gt_path: str
    matrix: tuple[float, ...]
    controls: dict
    scale: int
    seed: int


def controls_to_dict(v: ViewControls) -> dict:
    return {
        "yaw": v.yaw,
        "pitch": v.pitch,
        "zoom_center_theta": v.zoom_center.theta,
        "zoom_center_phi": v.zoom_center.phi,
        "zoom_factor": v.zoom_factor,
    }


def controls_from_dict(d: dict) -> ViewControls:
    return ViewControls(
        yaw=d["yaw"],
        pitch=d["pitch"],
        zoom_center=SphericalCoord(d["zoom_center_theta"], d["zoom_center_phi"]),
        zoom_factor=d["zoom_factor"],
    )


def sample_transform(seed: int, ranges: TransformRanges = DEFAULT_RANGES) -> ViewControls:
    """Draw random view controls, deterministic in the seed.

    Yaw and pitch are uniform in their ranges; the zoom center is the image
    of the view center (theta = phi = 0) under the sampled rotations, so the
    zoom magnifies what the rotated view looks at.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    yaw = float(rng.uniform(*ranges.yaw))
    pitch = float(rng.uniform(*ranges.pitch))
    zoom = float(rng.uniform(*ranges.zoom))
    rot = from_rotation(SpherePoint(1.0, 0.0, 0.0), pitch)
    center = map_sphere(rot, map_sphere(
        from_rotation(SpherePoint(0.0, 0.0, 1.0), yaw), SpherePoint(1.0, 0.0, 0.0)))
    return ViewControls(yaw=yaw, pitch=pitch, zoom_center=sp_inv(center), zoom_factor=zoom)


def synth_pair(hr: ErpImage, controls: ViewControls, scale: int,
               threads: int | None = None) -> tuple[ErpImage, ErpImage]:
    """LR input by box downsampling; ground truth by warping the HR image
    with the same controls recorded in the manifest."""
    lr = downsample(hr, scale)
    gt = warp(hr, WarpRequest(view=controls, scale=1, kernel=ResampleKernel.SPHERICAL),
              threads=threads)
    return lr, gt


def write_manifest(records: list[SynthRecord], path) -> int:
    """One JSON object per line, stable field order; returns the line count."""
    try:
        with open(path, "w", encoding="utf-8") as f:
            for rec in records:
                f.write(json.dumps(asdict(rec), sort_keys=False) + "\n")
    except OSError as exc:
        raise IoError(str(exc)) from exc
    return len(records)


def read_manifest(path) -> list[SynthRecord]:
    records = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                raw = json.loads(line)
                raw["matrix"] = tuple(raw["matrix"])
                records.append(SynthRecord(**raw))
    return records


def record_seed(base_seed: int, image_index: int, variant: int) -> int:
    """Stable per-record seed derivation."""
    ss = np.random.SeedSequence([int(base_seed), int(image_index), int(variant)])
    return int(ss.generate_state(1, np.uint64)[0])


def synth_dataset(hr_dir, out_dir, scale: int, count_per_image: int, seed: int,
                  ranges: TransformRanges = DEFAULT_RANGES, bit_depth: int = 8,
                  threads: int | None = None) -> list[SynthRecord]:
    """Run the synthesis over every PNG in hr_dir; writes images + manifest.jsonl.

    Output tree: <out_dir>/lr/<stem>_<k>.png, <out_dir>/gt/<stem>_<k>.png.
    Byte-identical across reruns with the same inputs and seed.
    """
    hr_dir = Path(hr_dir)
    out_dir = Path(out_dir)
    (out_dir / "lr").mkdir(parents=True, exist_ok=True)
    (out_dir / "gt").mkdir(parents=True, exist_ok=True)

    records: list[SynthRecord] = []
    for img_idx, hr_path in enumerate(sorted(hr_dir.glob("*.png"))):
        hr = load_png(hr_path)
        for k in range(count_per_image):
            rec_seed = record_seed(seed, img_idx, k)
            controls = sample_transform(rec_seed, ranges)
            lr, gt = synth_pair(hr, controls, scale, threads=threads)
            rec_id = f"{hr_path.stem}_{k}"
            lr_rel = f"lr/{rec_id}.png"
            gt_rel = f"gt/{rec_id}.png"
            save_png(lr, out_dir / lr_rel, bit_depth=bit_depth)
            save_png(gt, out_dir / gt_rel, bit_depth=bit_depth)
            records.append(SynthRecord(
                id=rec_id,
                hr_path=str(hr_path),
                lr_path=lr_rel,
                gt_path=gt_rel,
                matrix=tuple(canonicalize(from_controls(controls)).to_floats()),
                controls=controls_to_dict(controls),
                scale=scale,
                seed=rec_seed,
            ))
    write_manifest(records, out_dir / "manifest.jsonl")
    return records
