import numpy as np
import pytest

import hodet


def test_iou_and_children():
    a = hodet.Box(0, 0, 10, 10)
    b = hodet.Box(5, 0, 15, 10)
    assert hodet.iou(a, b) == pytest.approx(50 / 150)
    kids = hodet.children(hodet.Box(0, 0, 64, 64), "overlapped")
    assert len(kids) == 5
    assert kids[0] == hodet.Box(0, 0, 48, 48)
    assert all(hodet.Box(0, 0, 64, 64).contains(k) for k in kids)


def test_invalid_box_raises():
    with pytest.raises(hodet._core.Error):
        hodet.Box(5, 5, 1, 1)


def test_generate_returns_images_and_boxes():
    scenes = hodet.generate(num_scenes=3, max_depth=2, seed=4)
    assert len(scenes) == 3
    img = scenes[0].image
    assert img.shape == (64, 64, 1)
    assert img.dtype == np.float32
    assert 0.0 <= img.min() and img.max() <= 1.0
    assert len(scenes[0].objects) == 1


def test_scene_from_numpy():
    image = np.full((32, 32), 0.5, dtype=np.float32)
    scene = hodet.Scene("s", image, [hodet.GroundTruth(hodet.Box(0, 0, 32, 32))])
    assert scene.image.shape == (32, 32, 1)


def test_train_evaluate_and_baselines(tmp_path):
    scenes = hodet.generate(num_scenes=6, max_depth=2, seed=2)
    net, log = hodet.train(scenes, epochs=2, hidden=16, batch_size=8, seed=3, checkpoint_dir=str(tmp_path))
    assert [e["epoch"] for e in log] == [1, 2]
    assert (tmp_path / "epoch_002.hqdn").exists()
    result = hodet.evaluate_agent(scenes, net)
    assert 0.0 <= result["average_precision"] <= 1.0
    assert len(result["precision"]) == len(result["recall"])
    oracle = hodet.oracle_upper_bound(scenes)
    assert oracle["average_precision"] == pytest.approx(1.0)
    rnd = hodet.random_baseline(scenes, seed=5)
    assert rnd["average_precision"] <= oracle["average_precision"]
    path = tmp_path / "net.hqdn"
    net.save(str(path))
    assert hodet.load_checkpoint(str(path)).sizes == net.sizes


def test_cli_entry_point(tmp_path):
    code, out, _ = hodet.run_cli(["generate", "--out_dir", str(tmp_path), "--num_scenes", "2"])
    assert code == 0
    assert (tmp_path / "manifest.csv").exists()
    code, _, err = hodet.run_cli(["train", "--epochs", "x"])
    assert code == 1
