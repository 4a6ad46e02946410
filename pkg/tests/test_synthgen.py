import json
import filecmp
from pathlib import Path

import numpy as np
import pytest

from workzone import (
    ClassRegistry,
    PixelBBox,
    iou,
    load_flat_dataset,
    parse_yolo_label,
)
from workzone.augment import PRESETS
from workzone.errors import DataError
from workzone.synthgen import (
    CLASS_BARRIER,
    CLASS_BEACON,
    CLASS_CONE,
    ObstacleSpec,
    SceneDistribution,
    SceneSpec,
    build_mask,
    generate_dataset,
    reference_detector,
    render_scene,
    render_scene_detail,
)


def pixset(mask):
    return {(y, x) for y, x0, x1, _ in mask.runs for x in range(x0, x1)}


class TestSpecs:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(class_id=3, depth=0.5, lateral=0.0),
            dict(class_id=-1, depth=0.5, lateral=0.0),
            dict(class_id=0, depth=0.0, lateral=0.0),
            dict(class_id=0, depth=1.1, lateral=0.0),
            dict(class_id=0, depth=0.5, lateral=-1.01),
            dict(class_id=0, depth=0.5, lateral=0.0, jitter=0.05),
            dict(class_id=0, depth=0.5, lateral=0.0, jitter=4.5),
        ],
    )
    def test_obstacle_rejects(self, kwargs):
        with pytest.raises(ValueError):
            ObstacleSpec(**kwargs)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(width=31),
            dict(height=8),
            dict(horizon_frac=0.05),
            dict(horizon_frac=0.9),
            dict(sky_rgb=(0, 0)),
            dict(road_rgb=(0, 0, 256)),
        ],
    )
    def test_scene_rejects(self, kwargs):
        with pytest.raises(ValueError):
            SceneSpec(**kwargs)

    def test_horizon_row(self):
        assert SceneSpec(width=100, height=200, horizon_frac=0.35).horizon_y == 70

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(min_objects=3, max_objects=2),
            dict(min_objects=-1),
            dict(depth_range=(0.9, 0.3)),
        ],
    )
    def test_distribution_rejects(self, kwargs):
        with pytest.raises(ValueError):
            SceneDistribution(**kwargs)


CLEAR_SCENE = SceneSpec(
    width=160,
    height=120,
    obstacles=(
        ObstacleSpec(CLASS_CONE, 0.5, -0.55),
        ObstacleSpec(CLASS_BARRIER, 0.8, 0.75),
        ObstacleSpec(CLASS_BEACON, 0.35, 0.0),
    ),
)


class TestRendering:
    def test_annotation_box_is_tight_over_mask_pixels(self):
        img, anns, masks = render_scene(CLEAR_SCENE)
        assert len(anns) == len(masks) == 3
        w, h = CLEAR_SCENE.width, CLEAR_SCENE.height
        for ann, mask in zip(anns, masks):
            assert ann.class_id == mask.class_id
            # oracle: rasterize the runs and take the nonzero extent
            canvas = np.zeros((h, w), dtype=bool)
            for y, x0, x1, _rgb in mask.runs:
                canvas[y, x0:x1] = True
            ys, xs = np.nonzero(canvas)
            tight = PixelBBox(
                float(xs.min()), float(ys.min()), float(xs.max() + 1), float(ys.max() + 1)
            )
            assert mask.pixel_bbox() == tight
            assert ann.bbox == tight.to_norm(w, h)

    def test_unoccluded_pixels_show_run_colors(self):
        img, _, masks = render_scene(CLEAR_SCENE)
        sets = [pixset(m) for m in masks]
        for i in range(len(sets)):
            for j in range(i + 1, len(sets)):
                assert not (sets[i] & sets[j])  # fixture must stay overlap-free
        for mask in masks:
            for y, x0, x1, rgb in mask.runs:
                assert (img.pixels[y, x0:x1] == rgb).all()

    def test_perspective_objects_grow_toward_camera(self):
        heights = []
        feet = []
        for depth in (1.0, 0.6, 0.3):
            mask = build_mask(
                SceneSpec(width=200, height=200),
                ObstacleSpec(CLASS_CONE, depth, 0.0),
            )
            box = mask.pixel_bbox()
            heights.append(box.ymax - box.ymin)
            feet.append(box.ymax)
        assert heights[0] < heights[1] < heights[2]
        assert feet[0] < feet[1] < feet[2]  # nearer objects sit lower in frame

    def test_partial_occlusion_keeps_full_silhouette_box(self):
        spec = SceneSpec(
            width=160,
            height=120,
            obstacles=(
                ObstacleSpec(CLASS_BARRIER, 0.9, 0.0),
                ObstacleSpec(CLASS_CONE, 0.45, 0.0),
            ),
        )
        r = render_scene_detail(spec)
        assert [a.class_id for a in r.annotations] == [CLASS_BARRIER, CLASS_CONE]
        assert r.dropped == []
        far, near = r.masks
        far_px, near_px = pixset(far), pixset(near)
        covered = far_px & near_px
        assert covered and (far_px - near_px)  # genuinely partial
        # the far box still spans the hidden pixels
        assert r.annotations[0].bbox == far.pixel_bbox().to_norm(160, 120)
        # painter order: contested pixels display the nearer object
        near_rgb = {(y, x): rgb for y, x0, x1, rgb in near.runs for x in range(x0, x1)}
        for y, x in covered:
            assert tuple(r.image.pixels[y, x]) == near_rgb[(y, x)]

    def test_full_occlusion_drops_with_reason(self):
        spec = SceneSpec(
            width=160,
            height=120,
            obstacles=(
                ObstacleSpec(CLASS_BEACON, 1.0, 0.0),
                ObstacleSpec(CLASS_BARRIER, 0.3, 0.0, 4.0),
            ),
        )
        r = render_scene_detail(spec)
        assert [a.class_id for a in r.annotations] == [CLASS_BARRIER]
        assert r.dropped == [(0, "fully occluded")]

    def test_zero_pixel_projection_drops_with_reason(self):
        tiny = ObstacleSpec(CLASS_BEACON, 1.0, 0.0, 0.1)
        assert build_mask(SceneSpec(width=160, height=120), tiny) is None
        r = render_scene_detail(
            SceneSpec(width=160, height=120, obstacles=(tiny,))
        )
        assert r.annotations == [] and r.dropped == [(0, "projects to zero pixels")]

    def test_empty_scene(self):
        spec = SceneSpec(width=64, height=64)
        img, anns, masks = render_scene(spec)
        assert anns == [] and masks == []
        assert tuple(img.pixels[0, 0]) == spec.sky_rgb
        assert tuple(img.pixels[63, 0]) == spec.ground_rgb
        assert tuple(img.pixels[63, 32]) == spec.road_rgb

    def test_render_is_pure(self):
        a_img, a_anns, _ = render_scene(CLEAR_SCENE)
        b_img, b_anns, _ = render_scene(CLEAR_SCENE)
        assert a_img == b_img and a_anns == b_anns

    def test_sampling_respects_bounds_and_gap(self):
        dist = SceneDistribution(min_objects=2, max_objects=5, min_gap=3.0)
        rng = np.random.default_rng(11)
        for _ in range(20):
            spec = dist.sample_scene(rng, 320, 240, seed=1)
            assert len(spec.obstacles) <= 5
            r = render_scene_detail(spec)
            assert r.dropped == []  # gap rule forbids any occlusion
            sets = [pixset(m) for m in r.masks]
            for i in range(len(sets)):
                for j in range(i + 1, len(sets)):
                    assert not (sets[i] & sets[j])


class TestReferenceDetector:
    def test_single_cone_is_found(self):
        spec = SceneSpec(
            width=160, height=120, obstacles=(ObstacleSpec(CLASS_CONE, 0.5, 0.0),)
        )
        img, anns, _ = render_scene(spec)
        preds = reference_detector(img)
        assert len(preds) == 1
        assert preds[0].class_id == CLASS_CONE
        assert preds[0].confidence == 1.0
        assert iou(preds[0].bbox.corners(), anns[0].bbox.corners()) >= 0.9

    def test_empty_scene_yields_nothing(self):
        img, _, _ = render_scene(SceneSpec(width=96, height=96))
        assert reference_detector(img) == []

    def test_recall_on_sampled_scenes(self):
        rng = np.random.default_rng(5)
        dist = SceneDistribution(min_objects=1, max_objects=3, min_gap=6.0)
        total = 0
        for _ in range(12):
            spec = dist.sample_scene(rng, 320, 320, seed=0)
            img, anns, _ = render_scene(spec)
            preds = reference_detector(img)
            for ann in anns:
                total += 1
                assert any(
                    p.class_id == ann.class_id
                    and iou(p.bbox.corners(), ann.bbox.corners()) >= 0.5
                    for p in preds
                ), f"missed {ann}"
        assert total >= 12  # the loop actually exercised objects


class TestGenerateDataset:
    def test_zero_count_still_writes_manifest(self, tmp_path):
        manifest = generate_dataset(tmp_path / "empty", 0, master_seed=3)
        assert manifest["images"] == 0
        on_disk = json.loads((tmp_path / "empty" / "manifest.json").read_text())
        assert on_disk == manifest
        assert (tmp_path / "empty" / "generation.log").exists()

    def test_negative_count_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            generate_dataset(tmp_path / "x", -1)

    def test_bad_format_rejected(self, tmp_path):
        with pytest.raises(DataError):
            generate_dataset(tmp_path / "x", 1, image_format="jpeg")

    def test_counts_match_written_labels(self, tmp_path, registry):
        root = tmp_path / "ds"
        manifest = generate_dataset(root, 5, master_seed=9, width=160, height=120)
        assert manifest["images"] == 5
        assert manifest["master_seed"] == 9
        assert manifest["width"] == 160 and manifest["height"] == 120
        assert sorted(p.name for p in (root / "images").iterdir()) == [
            f"scene_{i:05d}.png" for i in range(5)
        ]
        counted = {name: 0 for name in registry.names}
        for label in sorted((root / "labels").iterdir()):
            for ann in parse_yolo_label(label.read_text(), registry):
                counted[registry.name_for(ann.class_id)] += 1
        assert manifest["objects"] == counted

    def test_regeneration_is_byte_identical(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        for root in (a, b):
            generate_dataset(root, 4, master_seed=21, width=160, height=120)
        cmp = filecmp.dircmp(a, b)
        assert not cmp.diff_files and not cmp.left_only and not cmp.right_only
        sub = filecmp.dircmp(a / "images", b / "images")
        assert not sub.diff_files
        assert filecmp.cmp(
            a / "labels" / "scene_00000.txt",
            b / "labels" / "scene_00000.txt",
            shallow=False,
        )

    def test_workers_do_not_change_output(self, tmp_path):
        one = tmp_path / "w1"
        many = tmp_path / "w4"
        generate_dataset(one, 6, master_seed=2, width=160, height=120, workers=1)
        generate_dataset(many, 6, master_seed=2, width=160, height=120, workers=4)
        for sub in ("images", "labels"):
            names = sorted(p.name for p in (one / sub).iterdir())
            assert names == sorted(p.name for p in (many / sub).iterdir())
            for name in names:
                assert filecmp.cmp(one / sub / name, many / sub / name, shallow=False)
        assert (one / "manifest.json").read_bytes() == (
            many / "manifest.json"
        ).read_bytes()

    def test_photometric_drift_keeps_labels(self, tmp_path):
        clean = tmp_path / "clean"
        drifted = tmp_path / "drift"
        generate_dataset(clean, 4, master_seed=13, width=160, height=120)
        manifest = generate_dataset(
            drifted,
            4,
            master_seed=13,
            width=160,
            height=120,
            drift=PRESETS["heavy_drift"],
            drift_name="heavy_drift",
        )
        assert manifest["drift_preset"] == "heavy_drift"
        changed = 0
        for i in range(4):
            name = f"scene_{i:05d}"
            assert (clean / "labels" / f"{name}.txt").read_bytes() == (
                drifted / "labels" / f"{name}.txt"
            ).read_bytes()
            if (clean / "images" / f"{name}.png").read_bytes() != (
                drifted / "images" / f"{name}.png"
            ).read_bytes():
                changed += 1
        assert changed == 4
        prov = (drifted / "provenance.jsonl").read_text().splitlines()
        assert len(prov) == 4
        assert [json.loads(line)["image_id"] for line in prov] == [
            f"scene_{i:05d}" for i in range(4)
        ]
        assert not (clean / "provenance.jsonl").exists()

    def test_flat_loader_reads_generated_set(self, tmp_path, registry):
        root = tmp_path / "ds"
        manifest = generate_dataset(root, 3, master_seed=1, width=160, height=120)
        records = load_flat_dataset(root, registry)
        assert [r.image_id for r in records] == [f"scene_{i:05d}" for i in range(3)]
        assert all(r.width == 160 and r.height == 120 for r in records)
        assert sum(len(r.annotations) for r in records) == sum(
            manifest["objects"].values()
        )

    def test_ppm_format(self, tmp_path):
        root = tmp_path / "ppm"
        generate_dataset(root, 2, master_seed=1, width=96, height=96, image_format="ppm")
        files = sorted(p.name for p in (root / "images").iterdir())
        assert files == ["scene_00000.ppm", "scene_00001.ppm"]
