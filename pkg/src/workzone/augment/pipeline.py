"""Seeded augmentation pipelines with replayable provenance.

Every image gets its own PCG64 stream derived from (master_seed,
image_id), so results never depend on processing order or worker count.
Each applied pipeline step is traced with its resolved parameters; the
trace replays to byte-identical output without touching any RNG.
"""
from __future__ import annotations

import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..annotations import Annotation, ClassRegistry, parse_yolo_label, serialize_yolo_label
from ..configfile import ConfigError, parse_config_lines
from ..imaging import Rgb8Image, load_image, save_image
from ..seeding import derive_seed
from .geometric import DEFAULT_MIN_VISIBILITY, apply_geometric
from .ops import OP_REGISTRY, build_op, is_photometric, op_param_names
from .photometric import apply_photometric

NOISE_SEED_BOUND = 2**63


@dataclass(frozen=True)
class StepSpec:
    """One pipeline step: an op name, parameters, and a fire probability.

    ``fixed`` parameters pass through unchanged; ``ranged`` entries
    (name, lo, hi) are drawn uniformly per image when the step fires.
    """

    op_name: str
    fixed: tuple[tuple[str, float | int], ...] = ()
    ranged: tuple[tuple[str, float, float], ...] = ()
    prob: float = 1.0

    def __post_init__(self):
        if self.op_name not in OP_REGISTRY:
            raise ValueError(f"unknown op: {self.op_name}")
        if not 0.0 <= self.prob <= 1.0:
            raise ValueError(f"prob out of range [0, 1]: {self.prob}")
        allowed = set(op_param_names(OP_REGISTRY[self.op_name]))
        seen = set()
        for name, _ in self.fixed:
            if name not in allowed:
                raise ValueError(f"op {self.op_name}: unknown parameter {name!r}")
            if name in seen:
                raise ValueError(f"op {self.op_name}: duplicate parameter {name!r}")
            seen.add(name)
        for name, lo, hi in self.ranged:
            if name not in allowed:
                raise ValueError(f"op {self.op_name}: unknown parameter {name!r}")
            if name in seen:
                raise ValueError(f"op {self.op_name}: duplicate parameter {name!r}")
            seen.add(name)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise ValueError(f"op {self.op_name}: bad range for {name!r}: [{lo}, {hi}]")

    def resolve(self, rng: np.random.Generator) -> dict | None:
        """Draw this step's parameters, or return None when it does not fire.

        Draw order is fixed: the fire decision, then ranged parameters in
        declaration order, then (for gaussian_noise without an explicit
        seed) the noise seed.
        """
        if not rng.random() < self.prob:
            return None
        params = dict(self.fixed)
        for name, lo, hi in self.ranged:
            params[name] = float(rng.uniform(lo, hi))
        if self.op_name == "gaussian_noise" and "seed" not in params:
            params["seed"] = int(rng.integers(0, NOISE_SEED_BOUND))
        return params


@dataclass(frozen=True)
class AugmentPipeline:
    steps: tuple[StepSpec, ...]
    master_seed: int = 0
    min_visibility: float = DEFAULT_MIN_VISIBILITY

    def __post_init__(self):
        if not 0.0 <= self.min_visibility <= 1.0:
            raise ValueError(f"min_visibility out of range [0, 1]: {self.min_visibility}")


@dataclass
class StepTrace:
    op: str
    fired: bool
    params: dict | None = None


@dataclass
class ImageTrace:
    """Provenance for one augmented image; replays deterministically."""

    image_id: str
    seed: int
    steps: list[StepTrace] = field(default_factory=list)

    def to_json(self) -> str:
        payload = {
            "image_id": self.image_id,
            "seed": self.seed,
            "steps": [
                {"op": s.op, "fired": s.fired, "params": s.params} for s in self.steps
            ],
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "ImageTrace":
        d = json.loads(line)
        return cls(
            image_id=d["image_id"],
            seed=d["seed"],
            steps=[StepTrace(s["op"], s["fired"], s.get("params")) for s in d["steps"]],
        )


def _apply_op(img, anns, op, min_visibility):
    if is_photometric(op):
        return apply_photometric(img, op), anns
    return apply_geometric(img, op, anns, min_visibility=min_visibility)


def apply_pipeline(
    img: Rgb8Image,
    anns: list[Annotation],
    pipeline: AugmentPipeline,
    image_id: str,
) -> tuple[Rgb8Image, list[Annotation], ImageTrace]:
    seed = derive_seed(pipeline.master_seed, image_id)
    rng = np.random.Generator(np.random.PCG64(seed))
    trace = ImageTrace(image_id=image_id, seed=seed)
    for step in pipeline.steps:
        params = step.resolve(rng)
        if params is None:
            trace.steps.append(StepTrace(step.op_name, False))
            continue
        op = build_op(step.op_name, params)
        img, anns = _apply_op(img, anns, op, pipeline.min_visibility)
        trace.steps.append(StepTrace(step.op_name, True, params))
    return img, anns, trace


def replay_trace(
    img: Rgb8Image,
    anns: list[Annotation],
    trace: ImageTrace,
    *,
    min_visibility: float = DEFAULT_MIN_VISIBILITY,
) -> tuple[Rgb8Image, list[Annotation]]:
    """Re-run a recorded trace; no RNG is consulted."""
    for s in trace.steps:
        if not s.fired:
            continue
        op = build_op(s.op, s.params or {})
        img, anns = _apply_op(img, anns, op, min_visibility)
    return img, anns


_PARAM_TOKEN = re.compile(r"\s*([A-Za-z_]\w*)\s*=\s*(\[[^\]]*\]|[^\s\[\]]+)")
_INT_LITERAL = re.compile(r"[+-]?\d+$")


def _parse_step_line(op_name: str, text: str, line: int) -> StepSpec:
    if op_name not in OP_REGISTRY:
        raise ConfigError(f"unknown op: {op_name}", line)
    fixed = []
    ranged = []
    prob = 1.0
    saw_prob = False
    pos = 0
    while pos < len(text):
        m = _PARAM_TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip():
                raise ConfigError(f"bad step parameters: {text[pos:].strip()!r}", line)
            break
        pos = m.end()
        name, spec = m.group(1), m.group(2)
        try:
            if name == "prob":
                if saw_prob:
                    raise ValueError("duplicate prob")
                prob = float(spec)
                saw_prob = True
            elif spec.startswith("["):
                parts = spec[1:-1].split(",")
                if len(parts) != 2:
                    raise ValueError(f"range needs two values: {spec}")
                ranged.append((name, float(parts[0]), float(parts[1])))
            elif _INT_LITERAL.match(spec):
                fixed.append((name, int(spec)))
            else:
                fixed.append((name, float(spec)))
        except ValueError as exc:
            raise ConfigError(f"op {op_name}: {exc}", line) from None
    try:
        return StepSpec(op_name, tuple(fixed), tuple(ranged), prob)
    except ValueError as exc:
        raise ConfigError(str(exc), line) from None


def parse_pipeline_config(text: str) -> AugmentPipeline:
    """Parse the pipeline dialect.

    Top level takes ``master_seed``, ``min_visibility`` and a ``steps``
    block whose children are ``op_name: key=value key=[lo,hi] prob=p``
    lines, applied in file order. The same op may appear more than once.
    """
    nodes = parse_config_lines(text)
    master_seed = 0
    min_visibility = DEFAULT_MIN_VISIBILITY
    steps: list[StepSpec] = []
    seen = set()
    saw_steps = False
    for node in nodes:
        if node.key in seen:
            raise ConfigError(f"duplicate key: {node.key}", node.line)
        seen.add(node.key)
        if node.key == "master_seed":
            try:
                master_seed = int(node.value)
            except ValueError:
                raise ConfigError(f"master_seed must be an integer: {node.value!r}", node.line) from None
        elif node.key == "min_visibility":
            try:
                min_visibility = float(node.value)
            except ValueError:
                raise ConfigError(f"min_visibility must be a number: {node.value!r}", node.line) from None
        elif node.key == "steps":
            saw_steps = True
            if node.value:
                raise ConfigError("steps takes a block, not a value", node.line)
            for child in node.children:
                steps.append(_parse_step_line(child.key, child.value, child.line))
        else:
            raise ConfigError(f"unknown key: {node.key}", node.line)
    if not saw_steps:
        raise ConfigError("missing key: steps")
    try:
        return AugmentPipeline(tuple(steps), master_seed, min_visibility)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _preset(steps, master_seed=0):
    return AugmentPipeline(tuple(steps), master_seed=master_seed)


# Drift presets stack the degradations in acquisition order: lighting
# first, then optics, then sensor noise.
PRESETS = {
    "light_drift": _preset(
        [
            StepSpec("brightness", (("gain", 0.75),)),
            StepSpec("gaussian_blur", (("sigma", 1.0),)),
            StepSpec("gaussian_noise", (("sigma", 8.0),)),
        ]
    ),
    "heavy_drift": _preset(
        [
            StepSpec("brightness", (("gain", 0.4),)),
            StepSpec("gaussian_blur", (("sigma", 3.0),)),
            StepSpec("gaussian_noise", (("sigma", 25.0),)),
        ]
    ),
}


def _augment_one(args) -> str:
    """Worker body: load, transform, write, return the provenance line."""
    image_path_s, label_path_s, out_images_s, out_labels_s, pipeline, class_names = args
    image_path = Path(image_path_s)
    image_id = image_path.stem
    registry = ClassRegistry(class_names)

    img = load_image(image_path)
    anns = parse_yolo_label(Path(label_path_s).read_text(encoding="utf-8"), registry)

    out_img, out_anns, trace = apply_pipeline(img, anns, pipeline, image_id)

    save_image(Path(out_images_s) / image_path.name, out_img)
    (Path(out_labels_s) / f"{image_id}.txt").write_text(
        serialize_yolo_label(out_anns), encoding="utf-8"
    )
    return trace.to_json()


def augment_dataset(
    images_dir: Path,
    labels_dir: Path,
    out_root: Path,
    pipeline: AugmentPipeline,
    *,
    registry: ClassRegistry | None = None,
    workers: int = 1,
) -> dict:
    """Augment a flat dataset into ``out_root`` (images/, labels/,
    provenance.jsonl). Output bytes are independent of ``workers``."""
    from ..dataset import list_image_files, require_label_files

    registry = registry or ClassRegistry.default()
    image_files = list_image_files(images_dir)
    require_label_files(image_files, labels_dir)
    out_images = out_root / "images"
    out_labels = out_root / "labels"
    out_images.mkdir(parents=True, exist_ok=True)
    out_labels.mkdir(parents=True, exist_ok=True)

    jobs = [
        (
            str(p),
            str(labels_dir / f"{p.stem}.txt"),
            str(out_images),
            str(out_labels),
            pipeline,
            tuple(registry.names),
        )
        for p in image_files
    ]
    if workers <= 1:
        lines = [_augment_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            lines = list(pool.map(_augment_one, jobs))

    # Sorted by image id so the file is stable across worker schedules.
    lines.sort(key=lambda s: json.loads(s)["image_id"])
    prov_path = out_root / "provenance.jsonl"
    prov_path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return {"images": len(image_files), "provenance": str(prov_path)}
