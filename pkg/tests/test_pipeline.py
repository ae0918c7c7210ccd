import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from conftest import make_y4m
from entropykf import synthetic
from entropykf.evaluation import EvaluationError
from entropykf.ingest import IngestError, SourceKind, SourceSpec, write_pgm
from entropykf.pipeline import (ConfigError, PipelineConfig,
                                load_report_schema, run_pipeline)


def _config(src_dir, out_dir, **kwargs):
    spec = SourceSpec(kind=SourceKind.PGM_DIR, path=str(src_dir))
    return PipelineConfig(source=spec, output_dir=out_dir, **kwargs)


def _write_run(tmp_path, texture, count):
    src = tmp_path / "frames"
    src.mkdir(exist_ok=True)
    for i in range(count):
        write_pgm(src / f"frame_{i:06d}.pgm", texture)
    return src


class TestSyntheticLayout:
    def test_plan_arithmetic(self):
        layout = synthetic.plan_layout(scenes=3, frames_per_scene=60, width=64,
                                       height=48, seed=1, fade_frames=4)
        assert layout.total_frames == 4 * 60 + 3 * 4
        assert layout.segments == ((0, 0, 60), (1, 64, 124), (2, 128, 188), (0, 192, 252))
        assert layout.fades == ((60, 64), (124, 128), (188, 192))
        assert layout.expected_shots == ((0, 60), (60, 124), (124, 188), (188, 252))
        assert layout.gt_indices == (30, 94, 158)

    def test_no_repeat_no_fade(self):
        layout = synthetic.plan_layout(scenes=2, frames_per_scene=30, width=64,
                                       height=48, seed=1, fade_frames=0,
                                       repeat_first=False)
        assert layout.total_frames == 60
        assert layout.fades == ()
        assert layout.expected_shots == ((0, 30), (30, 60))

    def test_textures_are_deterministic_and_distinct(self):
        a = synthetic.make_textures(np.random.default_rng(5), 3, 64, 48)
        b = synthetic.make_textures(np.random.default_rng(5), 3, 64, 48)
        for ta, tb in zip(a, b):
            assert np.array_equal(ta, tb)
        from entropykf.entropy import dissimilarity, segmented_entropies
        profiles = [segmented_entropies(t) for t in a]
        for i in range(3):
            for j in range(i + 1, 3):
                assert dissimilarity(profiles[i], profiles[j]) > 0.5

    def test_generate_writes_frames_and_gt(self, tmp_path):
        layout = synthetic.generate(tmp_path / "v", tmp_path / "gt.txt",
                                    scenes=2, frames_per_scene=12, width=32,
                                    height=24, seed=3, fade_frames=2)
        files = sorted((tmp_path / "v").iterdir())
        assert len(files) == layout.total_frames == 3 * 12 + 2 * 2
        from entropykf.evaluation import load_ground_truth
        gt = load_ground_truth(tmp_path / "gt.txt")
        assert gt.total_frames == layout.total_frames
        assert gt.keyframe_indices == layout.gt_indices

    def test_generate_is_reproducible(self, tmp_path):
        kwargs = dict(scenes=2, frames_per_scene=8, width=32, height=24,
                      seed=11, fade_frames=2)
        synthetic.generate(tmp_path / "a", None, **kwargs)
        synthetic.generate(tmp_path / "b", None, **kwargs)
        for pa, pb in zip(sorted((tmp_path / "a").iterdir()),
                          sorted((tmp_path / "b").iterdir())):
            assert pa.read_bytes() == pb.read_bytes()


@pytest.fixture(scope="module")
def small_video(tmp_path_factory):
    """252-frame synthetic sequence: 3 scenes + repeat, 4-frame fades."""
    root = tmp_path_factory.mktemp("video")
    layout = synthetic.generate(root / "frames", root / "gt.txt", scenes=3,
                                frames_per_scene=60, width=64, height=48,
                                seed=7, fade_frames=4)
    return root, layout


class TestRunPipeline:
    def test_single_static_scene(self, tmp_path):
        texture = synthetic.make_textures(np.random.default_rng(2), 1, 64, 48)[0]
        src = _write_run(tmp_path, texture, 100)
        report = run_pipeline(_config(src, tmp_path / "out"))
        assert report["shots"] == [{"start": 0, "end": 100}]
        assert report["shot_details"][0]["bins"] == [
            {"key": report["candidates"][0]["bin_key"], "size": 100, "selected": 50}]
        assert [k["frame_index"] for k in report["keyframes"]] == [50]
        assert report["eliminations"] == []
        assert (tmp_path / "out" / "keyframe_000050.pgm").exists()
        assert "evaluation" not in report

    def test_multi_scene_with_dedup_and_eval(self, small_video, tmp_path):
        root, layout = small_video
        config = _config(root / "frames", tmp_path / "out",
                         ground_truth=root / "gt.txt")
        report = run_pipeline(config)
        assert [(s["start"], s["end"]) for s in report["shots"]] == \
            list(layout.expected_shots)
        assert [k["frame_index"] for k in report["keyframes"]] == list(layout.gt_indices)
        assert len(report["eliminations"]) == 1
        elim = report["eliminations"][0]
        assert elim["sd"] == 0.0
        assert elim["kept"] == layout.gt_indices[0]
        ev = report["evaluation"]
        assert ev["matched"] == 3 and ev["missing"] == 0 and ev["redundant"] == 0
        assert ev["deviation"] == 0.0

    def test_keyframe_images_match_report_exactly(self, small_video, tmp_path):
        root, _ = small_video
        out = tmp_path / "out"
        out.mkdir()
        (out / "keyframe_999999.pgm").write_bytes(b"stale")
        report = run_pipeline(_config(root / "frames", out))
        on_disk = {p.name for p in out.glob("keyframe_*.pgm")}
        assert on_disk == {k["image"] for k in report["keyframes"]}

    def test_deterministic_reports(self, small_video, tmp_path):
        root, _ = small_video
        out = tmp_path / "out"
        reports = []
        for _ in range(2):
            run_pipeline(_config(root / "frames", out, seed_report=True))
            reports.append((out / "report.json").read_bytes())
        assert reports[0] == reports[1]

    def test_timestamp_present_unless_seed_report(self, small_video, tmp_path):
        root, _ = small_video
        with_ts = run_pipeline(_config(root / "frames", tmp_path / "t1"))
        without = run_pipeline(_config(root / "frames", tmp_path / "t2",
                                       seed_report=True))
        assert "generated_at" in with_ts
        assert "generated_at" not in without

    def test_memory_stays_constant_in_video_length(self, small_video, tmp_path):
        root, layout = small_video
        report = run_pipeline(_config(root / "frames", tmp_path / "out"))
        peak = report["stats"]["peak_resident_frames"]
        largest_shot = max(e - s for s, e in layout.expected_shots)
        assert peak <= 4
        assert peak < largest_shot

    def test_fallback_keyframe_flag(self, tmp_path):
        textures = synthetic.make_textures(np.random.default_rng(9), 2, 64, 48)
        src = tmp_path / "frames"
        src.mkdir()
        for i in range(15):
            write_pgm(src / f"a_{i:03d}.pgm", textures[0])
        for i in range(15):
            write_pgm(src / f"b_{i:03d}.pgm", textures[1])
        base = dict(min_shot_len=5)
        report = run_pipeline(_config(src, tmp_path / "none", **base))
        assert report["keyframes"] == []
        report = run_pipeline(_config(src, tmp_path / "fb", fallback_keyframe=True, **base))
        assert [k["frame_index"] for k in report["keyframes"]] == [7, 22]
        assert all(k["fallback"] for k in report["keyframes"])

    def test_report_validates_against_shipped_schema(self, small_video, tmp_path):
        root, _ = small_video
        report = run_pipeline(_config(root / "frames", tmp_path / "out"))
        schema = load_report_schema()
        jsonschema.validate(report, schema)
        broken = dict(report)
        del broken["shots"]
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate(broken, schema)

    def test_missing_source_is_ingest_error(self, tmp_path):
        with pytest.raises(IngestError):
            run_pipeline(_config(tmp_path / "nope", tmp_path / "out"))

    def test_empty_ground_truth_is_evaluation_error(self, small_video, tmp_path):
        root, _ = small_video
        gt = tmp_path / "empty_gt.txt"
        gt.write_text("total_frames=252\n# no picks\n")
        with pytest.raises(EvaluationError, match="no key-frames"):
            run_pipeline(_config(root / "frames", tmp_path / "out", ground_truth=gt))

    def test_bad_threshold_is_config_error(self, small_video, tmp_path):
        root, _ = small_video
        with pytest.raises(ConfigError):
            run_pipeline(_config(root / "frames", tmp_path / "out", cut_threshold=0.0))

    def test_tiny_frames_rejected(self, tmp_path):
        src = tmp_path / "frames"
        src.mkdir()
        write_pgm(src / "f.pgm", np.zeros((4, 4), dtype=np.uint8))
        spec = SourceSpec(kind=SourceKind.PGM_DIR, path=str(src))
        with pytest.raises(IngestError, match="8x8"):
            run_pipeline(PipelineConfig(source=spec, output_dir=tmp_path / "out"))

    def test_inconsistent_frame_sizes_rejected(self, tmp_path):
        src = tmp_path / "frames"
        src.mkdir()
        write_pgm(src / "a.pgm", np.zeros((16, 16), dtype=np.uint8))
        write_pgm(src / "b.pgm", np.zeros((16, 24), dtype=np.uint8))
        with pytest.raises(IngestError, match="expected 16x16"):
            run_pipeline(_config(src, tmp_path / "out"))


def _cli(*args, **kwargs):
    return subprocess.run([sys.executable, "-m", "entropykf.cli", *args],
                          capture_output=True, **kwargs)


class TestCli:
    def test_extract_pgm_dir(self, small_video, tmp_path):
        root, layout = small_video
        out = tmp_path / "out"
        result = _cli("extract", "--input", str(root / "frames"),
                      "--format", "pgm-dir", "--out", str(out),
                      "--gt", str(root / "gt.txt"), "--seed-report")
        assert result.returncode == 0, result.stderr
        assert b"keyframes: 3" in result.stdout
        report = json.loads((out / "report.json").read_text())
        assert [k["frame_index"] for k in report["keyframes"]] == list(layout.gt_indices)

    def test_extract_raw_from_stdin(self, tmp_path):
        textures = synthetic.make_textures(np.random.default_rng(21), 2, 32, 16)
        raw = b"".join(t.tobytes() for t in textures for _ in range(30))
        out = tmp_path / "out"
        result = _cli("extract", "--input", "-", "--format", "raw",
                      "--width", "32", "--height", "16", "--out", str(out),
                      input=raw)
        assert result.returncode == 0, result.stderr
        report = json.loads((out / "report.json").read_text())
        assert [(s["start"], s["end"]) for s in report["shots"]] == [(0, 30), (30, 60)]
        assert len(report["keyframes"]) == 2

    def test_extract_raw_file(self, tmp_path):
        textures = synthetic.make_textures(np.random.default_rng(23), 2, 32, 16)
        raw_path = tmp_path / "video.raw"
        raw_path.write_bytes(b"".join(t.tobytes() for t in textures for _ in range(25)))
        out = tmp_path / "out"
        result = _cli("extract", "--input", str(raw_path), "--format", "raw",
                      "--width", "32", "--height", "16", "--out", str(out))
        assert result.returncode == 0, result.stderr
        report = json.loads((out / "report.json").read_text())
        assert len(report["keyframes"]) == 2

    def test_extract_y4m_file(self, tmp_path):
        textures = synthetic.make_textures(np.random.default_rng(27), 2, 32, 16)
        planes = [t for t in textures for _ in range(25)]
        y4m_path = tmp_path / "video.y4m"
        y4m_path.write_bytes(make_y4m(32, 16, planes))
        out = tmp_path / "out"
        result = _cli("extract", "--input", str(y4m_path), "--format", "y4m",
                      "--out", str(out))
        assert result.returncode == 0, result.stderr
        report = json.loads((out / "report.json").read_text())
        assert report["total_frames"] == 50
        assert len(report["keyframes"]) == 2

    def test_bad_config_exits_2(self, small_video, tmp_path):
        root, _ = small_video
        result = _cli("extract", "--input", str(root / "frames"),
                      "--format", "pgm-dir", "--out", str(tmp_path / "o"),
                      "--cut-threshold", "0")
        assert result.returncode == 2
        assert b"bad configuration" in result.stderr

    def test_raw_without_dimensions_exits_2(self, tmp_path):
        result = _cli("extract", "--input", "-", "--format", "raw",
                      "--out", str(tmp_path / "o"), input=b"")
        assert result.returncode == 2

    def test_missing_input_exits_3(self, tmp_path):
        result = _cli("extract", "--input", str(tmp_path / "absent"),
                      "--format", "pgm-dir", "--out", str(tmp_path / "o"))
        assert result.returncode == 3
        assert b"ingest error" in result.stderr

    def test_empty_gt_exits_4(self, small_video, tmp_path):
        root, _ = small_video
        gt = tmp_path / "gt.txt"
        gt.write_text("total_frames=252\n")
        result = _cli("extract", "--input", str(root / "frames"),
                      "--format", "pgm-dir", "--out", str(tmp_path / "o"),
                      "--gt", str(gt))
        assert result.returncode == 4
        assert b"evaluation error" in result.stderr

    def test_generate_synthetic_cli(self, tmp_path):
        result = _cli("generate-synthetic", "--scenes", "2",
                      "--frames-per-scene", "10", "--size", "32x24",
                      "--seed", "5", "--fade-frames", "2",
                      "--out", str(tmp_path / "v"), "--gt-out", str(tmp_path / "gt.txt"))
        assert result.returncode == 0, result.stderr
        assert len(list((tmp_path / "v").iterdir())) == 3 * 10 + 2 * 2
        assert (tmp_path / "gt.txt").read_text().startswith("total_frames=34")
