import json
import shutil

import pytest

from workzone.cli import main

PIPELINE_TEXT = """\
master_seed: 5
steps:
  brightness: gain=[0.8,1.2]
  hflip: prob=0.5
"""

CVAT_XML = """\
<?xml version="1.0" encoding="utf-8"?>
<annotations>
  <image id="0" name="frame_000.png" width="100" height="100">
    <box label="cone" xtl="10" ytl="20" xbr="30" ybr="60"/>
  </image>
  <image id="1" name="frame_001.png" width="100" height="100"/>
</annotations>
"""


@pytest.fixture(scope="module")
def flat_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli") / "flat"
    code = main(
        ["gen", str(root), "--count", "6", "--seed", "11",
         "--width", "160", "--height", "120"]
    )
    assert code == 0
    return root


class TestUsageErrors:
    def test_no_arguments(self):
        with pytest.raises(SystemExit) as err:
            main([])
        assert err.value.code == 1

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as err:
            main(["frobnicate"])
        assert err.value.code == 1

    def test_bad_flag_value(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["gen", str(tmp_path / "x"), "--count", "1", "--width", "0"])
        assert err.value.code == 1

    def test_negative_count_is_validation_error(self, tmp_path, capsys):
        assert main(["gen", str(tmp_path / "x"), "--count", "-1"]) == 1
        assert "count" in capsys.readouterr().err

    def test_bad_drift_name(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["gen", str(tmp_path / "x"), "--count", "1", "--drift", "monsoon"])
        assert err.value.code == 1

    def test_augment_requires_exactly_one_source(self, flat_root, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["augment", str(flat_root), str(tmp_path / "o")])
        assert err.value.code == 1


class TestGen:
    def test_writes_dataset(self, flat_root):
        assert sorted(p.name for p in (flat_root / "images").iterdir()) == [
            f"scene_{i:05d}.png" for i in range(6)
        ]
        manifest = json.loads((flat_root / "manifest.json").read_text())
        assert manifest["images"] == 6 and manifest["master_seed"] == 11

    def test_refuses_existing_output(self, flat_root, capsys):
        assert main(["gen", str(flat_root), "--count", "1"]) == 1
        assert "exists" in capsys.readouterr().err

    def test_force_overwrites(self, tmp_path):
        out = tmp_path / "ds"
        assert main(["gen", str(out), "--count", "1", "--width", "96",
                     "--height", "96"]) == 0
        assert main(["gen", str(out), "--count", "2", "--width", "96",
                     "--height", "96", "--force"]) == 0
        assert len(list((out / "images").iterdir())) == 2

    def test_drift_run_keeps_labels(self, tmp_path):
        clean = tmp_path / "clean"
        foggy = tmp_path / "foggy"
        args = ["--count", "3", "--seed", "4", "--width", "96", "--height", "96"]
        assert main(["gen", str(clean)] + args) == 0
        assert main(["gen", str(foggy)] + args + ["--drift", "heavy_drift"]) == 0
        for i in range(3):
            name = f"scene_{i:05d}"
            assert (clean / "labels" / f"{name}.txt").read_bytes() == (
                foggy / "labels" / f"{name}.txt"
            ).read_bytes()
        assert (foggy / "provenance.jsonl").exists()

    def test_reports_summary_line(self, tmp_path, capsys):
        assert main(["gen", str(tmp_path / "s"), "--count", "2",
                     "--width", "96", "--height", "96"]) == 0
        out = capsys.readouterr().out
        assert "2 images" in out


class TestStats:
    def test_table_lists_splits_and_classes(self, flat_root, capsys):
        assert main(["stats", str(flat_root)]) == 0
        out = capsys.readouterr().out
        for word in ("split", "images", "cone", "barrier", "beacon", "total"):
            assert word in out

    def test_json_dump(self, flat_root, tmp_path):
        target = tmp_path / "stats.json"
        assert main(["stats", str(flat_root), "--json", str(target)]) == 0
        data = json.loads(target.read_text())
        assert data["splits"]["all"]["images"] == 6

    def test_missing_root_is_data_error(self, tmp_path, capsys):
        assert main(["stats", str(tmp_path / "void")]) == 2
        assert "error" in capsys.readouterr().err


class TestAugment:
    def test_preset_run(self, flat_root, tmp_path):
        out = tmp_path / "aug"
        assert main(["augment", str(flat_root), str(out),
                     "--preset", "light_drift", "--seed", "3"]) == 0
        assert len(list((out / "images").iterdir())) == 6
        assert len(list((out / "labels").iterdir())) == 6
        prov = (out / "provenance.jsonl").read_text().splitlines()
        assert len(prov) == 6

    def test_config_file_run(self, flat_root, tmp_path):
        config = tmp_path / "pipe.txt"
        config.write_text(PIPELINE_TEXT)
        out = tmp_path / "aug2"
        assert main(["augment", str(flat_root), str(out), "--config", str(config)]) == 0
        assert (out / "provenance.jsonl").exists()

    def test_seed_controls_output(self, flat_root, tmp_path):
        outs = []
        for seed, name in (("3", "a"), ("3", "b"), ("9", "c")):
            out = tmp_path / name
            assert main(["augment", str(flat_root), str(out),
                         "--preset", "heavy_drift", "--seed", seed]) == 0
            outs.append((out / "images" / "scene_00000.png").read_bytes())
        assert outs[0] == outs[1] and outs[0] != outs[2]

    def test_bad_config_is_data_error(self, flat_root, tmp_path, capsys):
        config = tmp_path / "bad.txt"
        config.write_text("steps:\n  warp: a=1\n")
        code = main(["augment", str(flat_root), str(tmp_path / "o"),
                     "--config", str(config)])
        assert code == 2
        assert "warp" in capsys.readouterr().err

    def test_missing_input_is_data_error(self, tmp_path):
        assert main(["augment", str(tmp_path / "void"), str(tmp_path / "o"),
                     "--preset", "light_drift"]) == 2


class TestSplit:
    def test_materializes_layout(self, flat_root, tmp_path):
        out = tmp_path / "split"
        assert main(["split", str(flat_root), str(out),
                     "--ratios", "0.6,0.2,0.2", "--seed", "0"]) == 0
        copied = 0
        for s in ("train", "val", "test"):
            stems = sorted(p.stem for p in (out / "images" / s).iterdir())
            assert stems == sorted(p.stem for p in (out / "labels" / s).iterdir())
            copied += len(stems)
        assert copied == 6
        assert (out / "report.json").exists()

    def test_dry_run_lists_only(self, flat_root, tmp_path, capsys):
        out = tmp_path / "dry"
        assert main(["split", str(flat_root), str(out),
                     "--ratios", "0.6,0.2,0.2", "--dry-run"]) == 0
        assert not (out / "images").exists()
        assert (out / "train.txt").exists()
        assert "target" in capsys.readouterr().out

    def test_bad_ratio_sum(self, flat_root, tmp_path, capsys):
        code = main(["split", str(flat_root), str(tmp_path / "o"),
                     "--ratios", "0.5,0.3,0.3"])
        assert code == 1
        assert "sum" in capsys.readouterr().err

    def test_malformed_ratios_flag(self, flat_root, tmp_path, capsys):
        code = main(["split", str(flat_root), str(tmp_path / "o"),
                     "--ratios", "0.5,0.5"])
        assert code == 1
        assert "ratios" in capsys.readouterr().err


class TestConvert:
    def test_cvat_to_labels(self, tmp_path):
        xml = tmp_path / "task.xml"
        xml.write_text(CVAT_XML)
        out = tmp_path / "converted"
        assert main(["convert", str(xml), str(out)]) == 0
        assert (out / "labels" / "frame_000.txt").read_text() == (
            "0 0.200000 0.400000 0.200000 0.400000\n"
        )
        assert (out / "labels" / "frame_001.txt").read_text() == ""

    def test_malformed_xml_is_data_error(self, tmp_path, capsys):
        xml = tmp_path / "bad.xml"
        xml.write_text("<annotations><image")
        assert main(["convert", str(xml), str(tmp_path / "o")]) == 2
        assert "error" in capsys.readouterr().err

    def test_missing_file_is_io_error(self, tmp_path):
        assert main(["convert", str(tmp_path / "none.xml"), str(tmp_path / "o")]) == 3


class TestFilter:
    def test_partitions_dataset(self, flat_root, tmp_path):
        out = tmp_path / "filtered"
        assert main(["filter", str(flat_root), str(out),
                     "--max-area-frac", "0.8"]) == 0
        kept = {p.stem for p in (out / "kept" / "images").iterdir()}
        removed = {p.stem for p in (out / "removed" / "images").iterdir()}
        assert kept | removed == {f"scene_{i:05d}" for i in range(6)}
        assert not (kept & removed)
        log = (out / "filter_log.txt").read_text()
        assert len(log.splitlines()) == len(removed)

    def test_bad_fraction(self, flat_root, tmp_path):
        code = main(["filter", str(flat_root), str(tmp_path / "o"),
                     "--max-area-frac", "1.5"])
        assert code == 1


@pytest.fixture(scope="module")
def perfect_preds(flat_root, tmp_path_factory):
    preds = tmp_path_factory.mktemp("eval") / "preds"
    preds.mkdir()
    for label in (flat_root / "labels").iterdir():
        lines = []
        for raw in label.read_text().splitlines():
            fields = raw.split()
            lines.append(" ".join([fields[0], "1.000000"] + fields[1:]) + "\n")
        (preds / label.name).write_text("".join(lines))
    return preds


class TestEval:
    def test_perfect_scores(self, flat_root, perfect_preds, capsys):
        assert main(["eval", str(flat_root), str(perfect_preds)]) == 0
        out = capsys.readouterr().out
        assert "ap@0.5" in out
        assert "all" in out and "confusion" in out

    def test_report_artifacts(self, flat_root, perfect_preds, tmp_path):
        out = tmp_path / "report"
        assert main(["eval", str(flat_root), str(perfect_preds),
                     "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["map"] == 1.0 and report["map_avg"] == 1.0
        csv_text = (out / "report.csv").read_text()
        assert csv_text.splitlines()[0].startswith("class,precision,recall")
        curves = list((out / "pr_curves").iterdir())
        assert len(curves) == 30  # 3 classes x 10 thresholds

    def test_custom_thresholds(self, flat_root, perfect_preds, tmp_path):
        out = tmp_path / "r2"
        assert main(["eval", str(flat_root), str(perfect_preds),
                     "--iou", "0.5,0.75", "--out", str(out)]) == 0
        assert len(list((out / "pr_curves").iterdir())) == 6

    def test_missing_predictions_dir(self, flat_root, tmp_path):
        assert main(["eval", str(flat_root), str(tmp_path / "void")]) == 2

    def test_split_layout_eval_defaults_to_test(self, flat_root, tmp_path):
        split_root = tmp_path / "split"
        assert main(["split", str(flat_root), str(split_root),
                     "--ratios", "0.4,0.3,0.3", "--seed", "1"]) == 0
        test_stems = [p.stem for p in (split_root / "labels" / "test").iterdir()]
        preds = tmp_path / "p"
        preds.mkdir()
        for stem in test_stems:
            src = split_root / "labels" / "test" / f"{stem}.txt"
            lines = []
            for raw in src.read_text().splitlines():
                fields = raw.split()
                lines.append(" ".join([fields[0], "1.000000"] + fields[1:]) + "\n")
            (preds / f"{stem}.txt").write_text("".join(lines))
        assert main(["eval", str(split_root), str(preds)]) == 0

    def test_malformed_prediction_line(self, flat_root, tmp_path, capsys):
        preds = tmp_path / "badp"
        preds.mkdir()
        (preds / "scene_00000.txt").write_text("0 0.9 0.5\n")
        assert main(["eval", str(flat_root), str(preds)]) == 2
        err = capsys.readouterr().err
        assert "scene_00000" in err
