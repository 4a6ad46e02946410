"""Synthetic road-scene generator and a color-gate reference detector.

Scenes are flat-shaded: a sky band, a road trapezoid converging to the
horizon, and shoulder ground, with cones, barrier boards, and warning
beacons placed along a simple perspective model: an obstacle at depth d
gets apparent scale 1/d and a foot row that approaches the horizon as d
grows. Shapes rasterize to horizontal pixel runs using pixel-center
coverage; painting far to near with an ownership buffer gives exact
occlusion, per-obstacle visible-pixel counts, and tight ground truth.

Ground-truth boxes cover the full in-frame silhouette, occluded or not;
an obstacle whose every pixel is hidden emits nothing, as does one that
projects to zero pixels. Each emitted annotation is paired with the
obstacle's ObjectMask so downstream tests can verify geometry against
actual pixel coverage. Distribution-sampled scenes keep obstacle boxes
disjoint by rejection, so occlusion only arises in explicitly authored
scenes.

The reference detector inverts the palette: each class owns a disjoint
hue window, gated on saturation and value; connected components above an
area floor become detections. Palette hues sit well inside their windows,
so the clean closed loop detects essentially everything, while
photometric drift pushes pixels out of the gates and detection degrades.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .annotations import (
    DEFAULT_CLASS_NAMES,
    Annotation,
    ClassRegistry,
    PixelBBox,
    serialize_yolo_label,
)
from .augment.pipeline import AugmentPipeline, apply_pipeline
from .errors import DataError
from .evaluation import Prediction
from ._imaging_math import rgb_to_hsv_arrays
from .imaging import Rgb8Image, save_image
from .seeding import derive_seed

CLASS_CONE = 0
CLASS_BARRIER = 1
CLASS_BEACON = 2

# Obstacle palette. Hues: cone ~30, barrier 0, beacon ~47; each sits
# inside its detector window with margin on both sides. The post and the
# white markings are (near-)gray so only the colored body is detectable.
CONE_RGB = (255, 128, 0)
BARRIER_RGB = (205, 30, 30)
BEACON_RGB = (255, 200, 0)
POST_RGB = (60, 60, 60)
MARK_RGB = (245, 245, 245)

# Base sizes in pixels at scale 1 (depth 1.0).
CONE_HEIGHT = 22.0
CONE_BASE_HALF = 7.0
CONE_TOP_HALF = 1.5
BARRIER_WIDTH = 56.0
BARRIER_HEIGHT = 18.0
BEACON_RADIUS = 6.0

# White markings keep this many pixels of body color on each side so a
# single 8-connected body component survives them.
MARK_INSET = 2


@dataclass(frozen=True)
class ObstacleSpec:
    """One obstacle: class, depth in (0, 1], lateral position in [-1, 1].

    Depth 1 is the far end of the placement band; smaller values approach
    the camera. ``jitter`` scales this instance's base size alone.
    """

    class_id: int
    depth: float
    lateral: float
    jitter: float = 1.0

    def __post_init__(self):
        if self.class_id not in (CLASS_CONE, CLASS_BARRIER, CLASS_BEACON):
            raise ValueError(f"bad class id: {self.class_id}")
        if not 0.0 < self.depth <= 1.0:
            raise ValueError(f"depth out of range (0, 1]: {self.depth}")
        if not -1.0 <= self.lateral <= 1.0:
            raise ValueError(f"lateral out of range [-1, 1]: {self.lateral}")
        if not 0.1 <= self.jitter <= 4.0:
            raise ValueError(f"jitter out of range [0.1, 4]: {self.jitter}")


@dataclass(frozen=True)
class SceneSpec:
    """A complete scene description; rendering it is a pure function."""

    width: int = 640
    height: int = 640
    horizon_frac: float = 0.35
    sky_rgb: tuple[int, int, int] = (150, 180, 210)
    road_rgb: tuple[int, int, int] = (70, 70, 75)
    ground_rgb: tuple[int, int, int] = (105, 100, 88)
    obstacles: tuple[ObstacleSpec, ...] = ()
    seed: int = 0

    def __post_init__(self):
        if self.width < 32 or self.height < 32:
            raise ValueError(f"frame too small: {self.width}x{self.height}")
        if not 0.1 <= self.horizon_frac <= 0.8:
            raise ValueError(f"horizon_frac out of range [0.1, 0.8]: {self.horizon_frac}")
        for name in ("sky_rgb", "road_rgb", "ground_rgb"):
            rgb = getattr(self, name)
            if len(rgb) != 3 or not all(isinstance(v, int) and 0 <= v <= 255 for v in rgb):
                raise ValueError(f"bad color for {name}: {rgb!r}")

    @property
    def horizon_y(self) -> int:
        return int(round(self.height * self.horizon_frac))


@dataclass
class ObjectMask:
    """Rasterized silhouette as colored half-open runs (y, x0, x1, rgb).

    Runs tile the full in-frame silhouette, ignoring occlusion, so the
    tight box over the runs is exactly the emitted ground-truth box.
    """

    class_id: int
    depth: float
    runs: list[tuple[int, int, int, tuple[int, int, int]]]

    def pixel_bbox(self) -> PixelBBox:
        ys = [r[0] for r in self.runs]
        return PixelBBox(
            float(min(r[1] for r in self.runs)),
            float(min(ys)),
            float(max(r[2] for r in self.runs)),
            float(max(ys) + 1),
        )

    def pixel_count(self) -> int:
        return sum(x1 - x0 for _, x0, x1, _ in self.runs)


def _row_range(y_top: float, y_bot: float, height: int) -> range:
    """Rows whose centers fall in [y_top, y_bot), clipped to the frame."""
    y0 = max(0, math.ceil(y_top - 0.5))
    y1 = min(height, math.ceil(y_bot - 0.5))
    return range(y0, y1)


def _span(xl: float, xr: float, width: int) -> tuple[int, int]:
    """Pixel columns whose centers fall in [xl, xr), clipped."""
    x0 = max(0, math.ceil(xl - 0.5))
    x1 = min(width, math.ceil(xr - 0.5))
    return x0, x1


def _place(spec: SceneSpec, obs: ObstacleSpec) -> tuple[float, float, float]:
    """(center x, foot row, size scale) for an obstacle in this frame."""
    scale = (1.0 / obs.depth) * obs.jitter
    cx = (0.5 + obs.lateral / 2.0) * spec.width
    span = (spec.height - 1) - spec.horizon_y
    y_base = spec.horizon_y + span * (0.12 / obs.depth)
    return cx, y_base, scale


def _cone_runs(spec, obs):
    cx, y_base, s = _place(spec, obs)
    h = CONE_HEIGHT * s
    y_top = y_base - h
    runs = []
    for y in _row_range(y_top, y_base, spec.height):
        f = ((y + 0.5) - y_top) / h
        half = CONE_TOP_HALF * s + (CONE_BASE_HALF - CONE_TOP_HALF) * s * f
        x0, x1 = _span(cx - half, cx + half, spec.width)
        if x1 <= x0:
            continue
        if 0.45 <= f < 0.65 and x1 - x0 > 2 * MARK_INSET:
            runs.append((y, x0, x0 + MARK_INSET, CONE_RGB))
            runs.append((y, x0 + MARK_INSET, x1 - MARK_INSET, MARK_RGB))
            runs.append((y, x1 - MARK_INSET, x1, CONE_RGB))
        else:
            runs.append((y, x0, x1, CONE_RGB))
    return runs


def _barrier_runs(spec, obs):
    cx, y_base, s = _place(spec, obs)
    w = BARRIER_WIDTH * s
    h = BARRIER_HEIGHT * s
    y_top = y_base - h
    stripe = max(4, int(round(4 * s)))
    top_row = math.ceil(y_top - 0.5)
    runs = []
    for y in _row_range(y_top, y_base, spec.height):
        x0, x1 = _span(cx - w / 2.0, cx + w / 2.0, spec.width)
        if x1 <= x0:
            continue
        row_from_top = y - top_row
        deep = (
            MARK_INSET <= row_from_top < math.floor(h) - MARK_INSET
            and x1 - x0 > 2 * MARK_INSET
        )
        if not deep:
            runs.append((y, x0, x1, BARRIER_RGB))
            continue
        # Red frame, then diagonal white/red bands inside it. The frame
        # keeps the red 8-connected whatever the bands do.
        runs.append((y, x0, x0 + MARK_INSET, BARRIER_RGB))
        x = x0 + MARK_INSET
        inner_end = x1 - MARK_INSET
        while x < inner_end:
            band = (x + y) // stripe
            seg_end = min(inner_end, (band + 1) * stripe - y)
            color = MARK_RGB if band % 2 == 0 else BARRIER_RGB
            runs.append((y, x, seg_end, color))
            x = seg_end
        runs.append((y, x1 - MARK_INSET, x1, BARRIER_RGB))
    return runs


def _beacon_runs(spec, obs):
    cx, y_base, s = _place(spec, obs)
    r = BEACON_RADIUS * s
    yc = y_base - 2.0 * r
    runs = []
    # Lamp disc.
    for y in _row_range(yc - r, yc + r, spec.height):
        dy = (y + 0.5) - yc
        half = math.sqrt(max(0.0, r * r - dy * dy))
        x0, x1 = _span(cx - half, cx + half, spec.width)
        if x1 > x0:
            runs.append((y, x0, x1, BEACON_RGB))
    # Post below the disc, one radius tall; dark, so only the disc is
    # detectable and the disc box keeps IoU 2/3 against the full box.
    post_half = max(1.0, r / 3.0)
    for y in _row_range(y_base - r, y_base, spec.height):
        x0, x1 = _span(cx - post_half, cx + post_half, spec.width)
        if x1 > x0:
            runs.append((y, x0, x1, POST_RGB))
    return runs


_RASTERIZERS = {
    CLASS_CONE: _cone_runs,
    CLASS_BARRIER: _barrier_runs,
    CLASS_BEACON: _beacon_runs,
}


def build_mask(spec: SceneSpec, obs: ObstacleSpec) -> ObjectMask | None:
    """Rasterize one obstacle; None when it covers no in-frame pixel."""
    runs = _RASTERIZERS[obs.class_id](spec, obs)
    if not runs:
        return None
    return ObjectMask(obs.class_id, obs.depth, runs)


def _paint_background(spec: SceneSpec) -> np.ndarray:
    img = np.empty((spec.height, spec.width, 3), dtype=np.uint8)
    img[: spec.horizon_y] = spec.sky_rgb
    img[spec.horizon_y :] = spec.ground_rgb
    # Road trapezoid converging toward the horizon center.
    span = max(1, (spec.height - 1) - spec.horizon_y)
    xc = spec.width / 2.0
    for y in range(spec.horizon_y, spec.height):
        t = (y - spec.horizon_y) / span
        half = (0.02 + 0.43 * t) * spec.width
        x0, x1 = _span(xc - half, xc + half, spec.width)
        img[y, x0:x1] = spec.road_rgb
    # Dashed center line; zero saturation, invisible to the detector.
    cxi = spec.width // 2
    for y in range(spec.horizon_y + 8, spec.height, 20):
        img[y : min(y + 8, spec.height), cxi - 2 : cxi + 2] = MARK_RGB
    return img


@dataclass
class SceneRender:
    image: Rgb8Image
    annotations: list[Annotation]
    masks: list[ObjectMask]
    dropped: list[tuple[int, str]] = field(default_factory=list)


def render_scene_detail(spec: SceneSpec) -> SceneRender:
    """Render with per-obstacle accounting.

    annotations[i] and masks[i] describe the same obstacle. ``dropped``
    lists (obstacle index, reason) for anything that emitted no box.
    """
    img = _paint_background(spec)
    owner = np.full((spec.height, spec.width), -1, dtype=np.int32)

    masks: list[ObjectMask | None] = [build_mask(spec, o) for o in spec.obstacles]
    order = sorted(
        (i for i, m in enumerate(masks) if m is not None),
        key=lambda i: -masks[i].depth,
    )
    for i in order:
        for y, x0, x1, rgb in masks[i].runs:
            img[y, x0:x1] = rgb
            owner[y, x0:x1] = i

    visible = np.bincount(
        owner[owner >= 0].ravel(), minlength=max(len(masks), 1)
    )
    annotations: list[Annotation] = []
    kept_masks: list[ObjectMask] = []
    dropped: list[tuple[int, str]] = []
    for i, mask in enumerate(masks):
        if mask is None:
            dropped.append((i, "projects to zero pixels"))
            continue
        if visible[i] == 0:
            dropped.append((i, "fully occluded"))
            continue
        bbox = mask.pixel_bbox().to_norm(spec.width, spec.height)
        annotations.append(Annotation(mask.class_id, bbox))
        kept_masks.append(mask)
    return SceneRender(Rgb8Image(img), annotations, kept_masks, dropped)


def render_scene(spec: SceneSpec) -> tuple[Rgb8Image, list[Annotation], list[ObjectMask]]:
    """Render a scene; see render_scene_detail for the accounting."""
    r = render_scene_detail(spec)
    return r.image, r.annotations, r.masks


# --- distribution sampling ----------------------------------------------


@dataclass(frozen=True)
class SceneDistribution:
    """Sampling ranges for random scenes.

    Placement rejects any obstacle whose pixel box comes within
    ``min_gap`` pixels of an accepted one, so sampled scenes are
    occlusion-free; an obstacle that cannot be placed within
    ``max_tries`` draws is dropped from the scene.
    """

    min_objects: int = 1
    max_objects: int = 4
    depth_range: tuple[float, float] = (0.25, 1.0)
    lateral_range: tuple[float, float] = (-0.9, 0.9)
    jitter_range: tuple[float, float] = (0.9, 1.1)
    min_gap: float = 2.0
    max_tries: int = 40

    def __post_init__(self):
        if not 0 <= self.min_objects <= self.max_objects:
            raise ValueError("need 0 <= min_objects <= max_objects")
        for name, (lo, hi) in (
            ("depth_range", self.depth_range),
            ("lateral_range", self.lateral_range),
            ("jitter_range", self.jitter_range),
        ):
            if not lo <= hi:
                raise ValueError(f"bad {name}: [{lo}, {hi}]")

    def sample_scene(
        self, rng: np.random.Generator, width: int, height: int, seed: int = 0
    ) -> SceneSpec:
        base = SceneSpec(width=width, height=height)
        n = int(rng.integers(self.min_objects, self.max_objects + 1))
        accepted: list[ObstacleSpec] = []
        boxes: list[PixelBBox] = []
        for _ in range(n):
            class_id = int(rng.integers(0, 3))
            for _try in range(self.max_tries):
                obs = ObstacleSpec(
                    class_id=class_id,
                    depth=float(rng.uniform(*self.depth_range)),
                    lateral=float(rng.uniform(*self.lateral_range)),
                    jitter=float(rng.uniform(*self.jitter_range)),
                )
                mask = build_mask(base, obs)
                if mask is None:
                    continue
                bbox = mask.pixel_bbox()
                if all(not _boxes_close(bbox, b, self.min_gap) for b in boxes):
                    accepted.append(obs)
                    boxes.append(bbox)
                    break
        return SceneSpec(
            width=width, height=height, obstacles=tuple(accepted), seed=seed
        )


def _boxes_close(a: PixelBBox, b: PixelBBox, gap: float) -> bool:
    return (
        a.xmin < b.xmax + gap
        and b.xmin < a.xmax + gap
        and a.ymin < b.ymax + gap
        and b.ymin < a.ymax + gap
    )


# --- dataset generation ----------------------------------------------------


def _generate_one(args) -> tuple[str, dict[str, int], list[str], str | None]:
    (
        image_id,
        master_seed,
        width,
        height,
        dist,
        drift,
        images_dir,
        labels_dir,
        image_format,
        class_names,
    ) = args
    registry = ClassRegistry(class_names)
    seed = derive_seed(master_seed, image_id)
    rng = np.random.Generator(np.random.PCG64(seed))
    scene = dist.sample_scene(rng, width, height, seed=seed)
    render = render_scene_detail(scene)
    img, anns = render.image, render.annotations

    prov_line = None
    if drift is not None:
        img, anns, trace = apply_pipeline(img, anns, drift, image_id)
        prov_line = trace.to_json()

    save_image(Path(images_dir) / f"{image_id}.{image_format}", img)
    (Path(labels_dir) / f"{image_id}.txt").write_text(
        serialize_yolo_label(anns), encoding="utf-8"
    )
    counts: dict[str, int] = {name: 0 for name in registry.names}
    for a in anns:
        counts[registry.name_for(a.class_id)] += 1
    log_lines = [
        f"{image_id}: obstacle {k} ({registry.name_for(scene.obstacles[k].class_id)}) {reason}"
        for k, reason in render.dropped
    ]
    return image_id, counts, log_lines, prov_line


def generate_dataset(
    out_root: Path,
    count: int,
    *,
    master_seed: int = 0,
    width: int = 640,
    height: int = 640,
    distribution: SceneDistribution | None = None,
    drift: AugmentPipeline | None = None,
    drift_name: str | None = None,
    image_format: str = "png",
    workers: int = 1,
) -> dict:
    """Write ``count`` scenes as a flat dataset (images/ + labels/).

    Image ids are scene_00000, scene_00001, ...; each scene draws from
    its own (master_seed, id)-derived stream, so any subset regenerates
    identically and results do not depend on ``workers``. A drift
    pipeline, when given, is applied to every rendered scene and traced
    in provenance.jsonl. manifest.json records counts and seeds;
    generation.log records obstacles that emitted no box.
    """
    if count < 0:
        raise ValueError(f"count must be >= 0: {count}")
    if image_format not in ("png", "ppm"):
        raise DataError(f"unsupported image format: {image_format}")
    dist = distribution or SceneDistribution()
    out_root = Path(out_root)
    images_dir = out_root / "images"
    labels_dir = out_root / "labels"
    images_dir.mkdir(parents=True, exist_ok=True)
    labels_dir.mkdir(parents=True, exist_ok=True)

    registry = ClassRegistry(DEFAULT_CLASS_NAMES)
    jobs = [
        (
            f"scene_{i:05d}",
            master_seed,
            width,
            height,
            dist,
            drift,
            str(images_dir),
            str(labels_dir),
            image_format,
            tuple(registry.names),
        )
        for i in range(count)
    ]
    if workers <= 1:
        results = [_generate_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_generate_one, jobs))

    class_totals = {name: 0 for name in registry.names}
    log_lines: list[str] = []
    prov_lines: list[str] = []
    for _image_id, counts, logs, prov in results:
        for name, n in counts.items():
            class_totals[name] += n
        log_lines.extend(logs)
        if prov is not None:
            prov_lines.append(prov)

    manifest = {
        "images": count,
        "width": width,
        "height": height,
        "master_seed": master_seed,
        "seed_scheme": "per-image stream seeded by hash(master_seed, image_id)",
        "image_format": image_format,
        "objects": class_totals,
        "drift_preset": drift_name,
    }
    (out_root / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (out_root / "generation.log").write_text(
        "".join(line + "\n" for line in log_lines), encoding="utf-8"
    )
    if drift is not None:
        (out_root / "provenance.jsonl").write_text(
            "".join(line + "\n" for line in prov_lines), encoding="utf-8"
        )
    return manifest


# --- reference detector ---------------------------------------------------

# Disjoint hue windows (degrees), half-open; the barrier window wraps
# around 0 to catch red on both sides.
HUE_WINDOWS = {
    CLASS_CONE: (18.0, 40.0),
    CLASS_BEACON: (40.0, 58.0),
}
BARRIER_HUE_BELOW = 12.0
BARRIER_HUE_ABOVE = 348.0

SAT_GATE = 0.45
VAL_GATE = 0.18
MIN_COMPONENT_AREA = 30

# Pixel area of the smallest clean instance per class; detections scale
# confidence against it, saturating at 1.
EXPECTED_MIN_AREA = {
    CLASS_CONE: 150.0,
    CLASS_BARRIER: 450.0,
    CLASS_BEACON: 90.0,
}

_EIGHT_CONN = np.ones((3, 3), dtype=bool)


def reference_detector(img: Rgb8Image) -> list[Prediction]:
    """Hue-window detector for the generator's palette.

    Per class: gate on saturation and value, keep the class hue window,
    take 8-connected components, drop those under MIN_COMPONENT_AREA,
    and report each survivor's tight box with confidence
    min(1, area / EXPECTED_MIN_AREA).
    """
    h, s, v = rgb_to_hsv_arrays(img.pixels)
    gates = (s >= SAT_GATE) & (v >= VAL_GATE)

    class_masks = {
        CLASS_CONE: gates
        & (h >= HUE_WINDOWS[CLASS_CONE][0])
        & (h < HUE_WINDOWS[CLASS_CONE][1]),
        CLASS_BARRIER: gates & ((h < BARRIER_HUE_BELOW) | (h >= BARRIER_HUE_ABOVE)),
        CLASS_BEACON: gates
        & (h >= HUE_WINDOWS[CLASS_BEACON][0])
        & (h < HUE_WINDOWS[CLASS_BEACON][1]),
    }
    preds: list[Prediction] = []
    for class_id, mask in class_masks.items():
        labels, n = ndimage.label(mask, structure=_EIGHT_CONN)
        if n == 0:
            continue
        comp_ids = np.arange(1, n + 1)
        areas = ndimage.sum_labels(mask, labels, comp_ids)
        slices = ndimage.find_objects(labels)
        for comp, area, sl in zip(comp_ids, areas, slices):
            if area < MIN_COMPONENT_AREA or sl is None:
                continue
            ys, xs = sl
            bbox = PixelBBox(
                float(xs.start), float(ys.start), float(xs.stop), float(ys.stop)
            ).to_norm(img.width, img.height)
            conf = min(1.0, float(area) / EXPECTED_MIN_AREA[class_id])
            preds.append(Prediction(class_id, conf, bbox))
    preds.sort(key=lambda p: (p.class_id, -p.confidence, p.bbox.cx, p.bbox.cy))
    return preds
