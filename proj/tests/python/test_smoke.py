import json
import os
import subprocess

import numpy as np
import pytest

import pipefuse


def test_diou_cases():
    assert pipefuse.diou_3d((0, 0, 0), (1, 1, 1), (0, 0, 0), (1, 1, 1)) == pytest.approx(1.0, abs=1e-12)
    assert pipefuse.diou_3d((0, 0, 0), (1, 1, 1), (2, 2, 2), (3, 3, 3)) == pytest.approx(-12 / 27, abs=1e-12)
    assert pipefuse.diou_3d((0, 0, 0), (1, 1, 1), (0.5, 0, 0), (1.5, 1, 1)) == pytest.approx(0.274510, abs=1e-6)
    assert pipefuse.iou_3d((0, 0, 0), (1, 1, 1), (0.5, 0, 0), (1.5, 1, 1)) == pytest.approx(1 / 3)


def test_depth():
    assert pipefuse.depth_from_apex(0.0, 26.0) == pytest.approx(1.3)
    assert pipefuse.depth_eq8(0.0, 26.0) == 0.5 * pipefuse.depth_from_apex(0.0, 26.0)
    with pytest.raises(pipefuse.Error):
        pipefuse.depth_eq8(5.0, 1.0)


def test_match_ground_truth():
    scene = pipefuse.generate_scene(3, 4)
    dets = pipefuse.truth_detections(scene)
    result = pipefuse.match(dets)
    truth = {(p["b"]["id"], p["c"]["id"], p["d"]["id"]) for p in scene["truth"]["pipelines"]}
    found = {(d["b_id"], d["c_id"], d["d_id"]) for d in result["detections"]}
    assert found == truth
    assert pipefuse.match(dets, matching_diou_threshold=1.01)["detections"] == []
    with pytest.raises(pipefuse.ParameterError):
        pipefuse.match(dets, pairwise_mode="sideways")


def test_missing_view():
    dets = pipefuse.truth_detections(pipefuse.generate_scene(1, 2))
    del dets["views"]["D"]
    with pytest.raises(pipefuse.DataError, match="D-scan"):
        pipefuse.match(dets)


def test_preprocess_and_entropy():
    raw = pipefuse.corpus_bscan(0)
    assert raw.shape == (301, 600)
    full = pipefuse.preprocess(raw, ["gain", "background", "lowpass"])
    assert full.shape == raw.shape
    assert np.array_equal(pipefuse.preprocess(raw, []), raw)
    assert pipefuse.information_entropy(full) > pipefuse.information_entropy(raw)
    with pytest.raises(pipefuse.UsageError):
        pipefuse.preprocess(raw, ["median"])


def test_footprint(tmp_path):
    f = pipefuse.footprint(tmp_path)
    assert f["image_pipeline"]["mb"] == 300.0
    assert 0.052 <= f["ratio"]["image_mb_over_volume_mib"] <= 0.057
    assert (tmp_path / "footprint.json").exists()


@pytest.mark.skipif("PIPEFUSE_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_round_trip(tmp_path):
    cli = os.environ["PIPEFUSE_CLI"]
    subprocess.run([cli, "--seed", "1", "--out", str(tmp_path), "synth", "--scenes", "2"], check=True)
    subprocess.run([cli, "--out", str(tmp_path), "match", str(tmp_path), "--truth", str(tmp_path)], check=True)
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["evaluation"]["recall"] == 1.0
    bad = subprocess.run([cli, "preprocess", "--corpus", "1", "--steps", "median"], capture_output=True)
    assert bad.returncode == 1
