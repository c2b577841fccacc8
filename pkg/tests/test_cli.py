import subprocess
import sys

import numpy as np
import pytest
from PIL import Image

from regpd.cli import main, read_manifest
from regpd.imagery import BinaryMask, read_raw, save_mask, save_image, write_raw

STUB = f"{sys.executable} -m regpd.classifiers.stub --mode area-fraction --color 255,0,0"


def run(*argv):
    """Exit code of the CLI, treating argparse's SystemExit as a return value."""
    try:
        return main([str(a) for a in argv])
    except SystemExit as exc:
        return exc.code


def explain(data_dir, out, *extra):
    return run("explain", "--image", data_dir / "disk.png", "--oracle", "area-fraction",
               "--class", 1, "--r", 5, "--seed", 7, "--out-dir", out, *extra)


@pytest.fixture
def tiny_image(tmp_path):
    pixels = np.full((8, 8, 3), 255.0)
    pixels[2:6, 3:6] = [255.0, 0.0, 0.0]
    path = tmp_path / "tiny.png"
    save_image(pixels, path)
    return path


def test_explain_outputs(data_dir, tmp_path):
    assert explain(data_dir, tmp_path) == 0
    files = sorted(p.name for p in tmp_path.iterdir())
    scales = [f"scale_{k:03d}.png" for k in (2, 4, 8, 16, 32)]
    assert files == sorted(["fused.pfm", "fused.png", "overlay.png", "manifest.txt"] + scales)
    manifest = read_manifest(tmp_path / "manifest.txt")
    assert manifest["calls"] == "63"
    assert manifest["r"] == "5" and manifest["seed"] == "7"
    assert manifest["region_counts"] == "2,4,8,16,32"
    fused = read_raw(tmp_path / "fused.pfm")
    assert fused.shape == (64, 64) and fused.min() >= 0


def test_explain_is_byte_identical(data_dir, tmp_path):
    assert explain(data_dir, tmp_path / "a") == 0
    assert explain(data_dir, tmp_path / "b") == 0
    for name in ("fused.pfm", "fused.png", "scale_016.png"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_manifest_replay(data_dir, tmp_path):
    assert explain(data_dir, tmp_path / "a", "--g", "woe") == 0
    assert run("explain", "--config", tmp_path / "a" / "manifest.txt",
               "--out-dir", tmp_path / "b") == 0
    replay = read_manifest(tmp_path / "b" / "manifest.txt")
    assert replay["g"] == "woe"
    assert (tmp_path / "a" / "fused.pfm").read_bytes() == \
        (tmp_path / "b" / "fused.pfm").read_bytes()


def test_explain_usage_and_runtime_errors(data_dir, tmp_path):
    assert explain(data_dir, tmp_path, "--r", 0) == 2
    assert run("explain", "--image", tmp_path / "missing.png", "--out-dir", tmp_path) == 1
    assert run("explain", "--image", data_dir / "disk.png", "--classifier", "bogus",
               "--out-dir", tmp_path) == 2


def test_explain_external_classifier(data_dir, tmp_path):
    assert run("explain", "--image", data_dir / "disk.png", "--classifier", f"external:{STUB}",
               "--class", 1, "--r", 2, "--out-dir", tmp_path / "ext") == 0
    assert run("explain", "--image", data_dir / "disk.png", "--oracle", "area-fraction",
               "--ref-fraction", 0.1, "--class", 1, "--r", 2, "--out-dir", tmp_path / "own") == 0
    ext = read_raw(tmp_path / "ext" / "fused.pfm")
    own = read_raw(tmp_path / "own" / "fused.pfm")
    assert np.allclose(ext, own, atol=1e-5)
    assert read_manifest(tmp_path / "ext" / "manifest.txt")["calls"] == "7"


def test_baseline_defaults_in_manifest(tmp_path):
    path = tmp_path / "img.png"
    save_image(np.full((14, 14, 3), 200.0), path)
    assert run("baseline", "--image", path, "--oracle", "constant", "--samples", 1,
               "--out-dir", tmp_path / "out") == 0
    manifest = read_manifest(tmp_path / "out" / "manifest.txt")
    assert (manifest["k"], manifest["l"]) == ("10", "14")
    assert run("baseline", "--image", path, "--oracle", "constant",
               "--out-dir", tmp_path / "out2", "--k", 3, "--l", 5) == 0
    assert read_manifest(tmp_path / "out2" / "manifest.txt")["samples"] == "10"


def test_baseline_call_count(tiny_image, tmp_path):
    assert run("baseline", "--image", tiny_image, "--k", 3, "--l", 5, "--samples", 2,
               "--class", 1, "--out-dir", tmp_path / "out") == 0
    manifest = read_manifest(tmp_path / "out" / "manifest.txt")
    assert manifest["calls"] == "129"
    assert sorted(p.name for p in (tmp_path / "out").iterdir()) == \
        ["manifest.txt", "overlay.png", "saliency.pfm", "saliency.png"]


@pytest.mark.parametrize("k,l", [(5, 5), (6, 4)])
def test_baseline_requires_l_above_k(tiny_image, tmp_path, k, l):
    assert run("baseline", "--image", tiny_image, "--k", k, "--l", l,
               "--out-dir", tmp_path) == 2


def test_segment(data_dir, tmp_path):
    assert run("segment", "--image", data_dir / "disk.png", "--scale", 16,
               "--out-dir", tmp_path) == 0
    labels = np.array(Image.open(tmp_path / "labels.png"))
    count = int(read_manifest(tmp_path / "manifest.txt")["region_count"])
    assert labels.shape == (64, 64)
    assert 16 <= count <= 32 and labels.max() + 1 == count
    assert (tmp_path / "boundaries.png").is_file()


def _perfect_corpus(root):
    truth = np.zeros((16, 16), dtype=bool)
    truth[4:10, 5:12] = True
    (root / "images").mkdir(parents=True)
    (root / "masks").mkdir()
    (root / "maps").mkdir()
    save_image(np.where(truth[..., None], [255.0, 0, 0], 255.0), root / "images" / "a.png")
    save_mask(BinaryMask(truth), root / "masks" / "a.png")
    write_raw(truth.astype(np.float32), root / "maps" / "a.pfm")


def test_evaluate_perfect_map(tmp_path):
    _perfect_corpus(tmp_path / "c")
    assert run("evaluate", "--corpus", tmp_path / "c", "--maps", tmp_path / "c" / "maps",
               "--steps", 11, "--out-dir", tmp_path / "out") == 0
    rows = np.loadtxt(tmp_path / "out" / "mean.csv", delimiter=",", skiprows=1)
    assert rows.shape == (11, 4)
    assert np.all(rows[1:, 3] == 1.0)
    assert (tmp_path / "out" / "curves" / "a.csv").is_file()


def test_evaluate_runs_engine(tmp_path):
    _perfect_corpus(tmp_path / "c")
    assert run("evaluate", "--corpus", tmp_path / "c", "--r", 2, "--class", 1,
               "--out-dir", tmp_path / "out") == 0
    manifest = read_manifest(tmp_path / "out" / "manifest.txt")
    assert manifest["images"] == "1" and 5 <= int(manifest["calls"]) <= 13


def test_evaluate_empty_corpus(tmp_path):
    (tmp_path / "images").mkdir()
    (tmp_path / "masks").mkdir()
    assert run("evaluate", "--corpus", tmp_path, "--out-dir", tmp_path / "out") == 2
    assert run("evaluate", "--corpus", tmp_path / "nowhere", "--out-dir", tmp_path / "o") == 2
    assert run("evaluate", "--corpus", tmp_path, "--steps", 1, "--out-dir", tmp_path / "o") == 2


def _calls(capsys, *argv):
    assert run("calls", *argv) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    return dict(line.split(" = ") for line in lines)


def test_calls(capsys):
    out = _calls(capsys, "--n", 256, "--samples", 10, "--r", 5)
    assert out["pixelwise_calls"] == "655361"
    assert out["regional_calls_exact"] == "63" and out["regional_calls_max"] == "125"
    assert float(out["ratio"]) >= 5000
    assert _calls(capsys, "--n", 1, "--samples", 7)["pixelwise_calls"] == "8"
    assert int(_calls(capsys, "--r", 1)["regional_calls_max"]) <= 5


def test_console_script_exit_codes(tmp_path):
    cmd = [sys.executable, "-m", "regpd.cli"]
    ok = subprocess.run(cmd + ["calls", "--n", "4"], capture_output=True, text=True)
    assert ok.returncode == 0 and "pixelwise_calls = 161" in ok.stdout
    bad = subprocess.run(cmd + ["calls", "--r", "0"], capture_output=True, text=True)
    assert bad.returncode == 2
    missing = subprocess.run(cmd + ["segment", "--image", str(tmp_path / "x.png"),
                                    "--out-dir", str(tmp_path)], capture_output=True, text=True)
    assert missing.returncode == 1 and "error" in missing.stderr
