import json

import numpy as np
import pytest

import reptex


def tiled(size=128, seed=3, blocks=0):
    tile = reptex.make_brick_tile(32, seed)
    return reptex.generate_tiled_image(tile, size // 32, size // 32, jitter=0.02, blocks=blocks, seed=seed)


def test_image_round_trip(tmp_path):
    img = np.zeros((3, 5, 3), dtype=np.uint8)
    img[1, 2] = (10, 20, 30)
    reptex.save_image(img, tmp_path / "a.png")
    back = reptex.load_image(tmp_path / "a.png")
    assert back.shape == (3, 5, 3)
    assert np.array_equal(back, img)


def test_missing_file_raises():
    with pytest.raises(reptex.ReptexError) as err:
        reptex.load_image("/nonexistent/x.png")
    assert err.value.args[1] == "UnreadableFile"


def test_synthetic_image_and_ncc():
    s = tiled(blocks=2)
    assert s["image"].shape == (128, 128, 3)
    assert s["noise_mask"].sum() == 2 * 16 * 16
    assert reptex.ncc_score(s["truth_tile"], s["truth_tile"]) == pytest.approx(1.0)


def test_sampler_respects_geometry():
    img = tiled()["image"]
    cands = reptex.sample_candidates(img, samples=50, seed=1)
    assert len(cands) == 50
    for c in cands:
        x, y, w, h = c["rect"]
        assert 16 <= c["side"] <= 48
        assert x >= 0 and y >= 0 and x + w <= 128 and y + h <= 128
        assert c["patch"].shape == (c["side"], c["side"], 3)


def test_selector_factors():
    assert reptex.width_factor(48, 48) == 1 / 48
    assert reptex.boundary_factor(np.full((8, 8, 3), 90, dtype=np.uint8)) == 1.0


def test_kmeans_and_dbi():
    rng = np.random.default_rng(0)
    pts = np.concatenate([rng.normal(c, 0.1, size=(20, 2)) for c in ((0, 0), (5, 5), (0, 5))])
    model = reptex.kmeans(pts, 3, seed=2)
    assert sorted(np.bincount(model["assignments"])) == [20, 20, 20]
    assert reptex.davies_bouldin(pts, model["assignments"], 3) == pytest.approx(model["dbi"])
    assert reptex.select_k(pts, [2, 3, 4], seed=2)["k"] == 3


def test_descriptor_embed_shape():
    v = reptex.descriptor_embed(np.full((16, 16, 3), 50, dtype=np.uint8))
    assert v.shape == (1, 64)


def test_extract_descriptor():
    img = tiled()["image"]
    regions = reptex.extract(img, samples=200, embedder="descriptor", seed=4)
    assert len(regions) == 1
    r = regions[0]
    assert r["candidate_count"] == 200
    assert r["selected_k"] in (3, 4, 5, 6)
    assert r["texture_weighted"].ndim == 3


def test_run_pipeline_writes_report(tmp_path):
    reptex.save_image(tiled()["image"], tmp_path / "img.png")
    status = reptex.run_pipeline(tmp_path / "img.png", tmp_path / "out", samples=200, embedder="descriptor", seed=1)
    assert status == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["status"] == "ok"
    assert (tmp_path / "out" / "texture_weighted_0.png").exists()


def test_run_pipeline_reports_failure(tmp_path):
    status = reptex.run_pipeline(tmp_path / "missing.png", tmp_path / "out", embedder="descriptor")
    assert status == 2
    assert json.loads((tmp_path / "out" / "report.json").read_text())["status"] == "error"
