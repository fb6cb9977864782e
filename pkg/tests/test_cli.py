import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from conftest import hard_edge, soft_disk, smooth_image
from mattekit import combine, losses, rosta
from mattekit.cli import run
from mattekit.datasets import ManifestEntry, read_manifest, write_manifest
from mattekit.imgcore import io


def _stderr_records(text):
    return [json.loads(line) for line in text.splitlines() if line.startswith("{")]


@pytest.fixture
def alpha_png(tmp_path):
    return io.write_gray(tmp_path / "alpha.png", hard_edge(128))


def test_rosta_hard_edge_band(tmp_path, alpha_png):
    out = tmp_path / "tt.png"
    assert run(["rosta", "--kind", "tt", "--kernel", "25", "--alpha", str(alpha_png), "--out", str(out)]) == 0
    trimap = io.read_gray_u8(out)
    assert np.flatnonzero(trimap[0] == 128).tolist() == list(range(52, 76))
    assert np.array_equal(trimap, rosta.to_trimap(rosta.make_tt(hard_edge(128), 25)))
    sidecar = json.loads(Path(str(out) + ".json").read_text())
    assert sidecar["kind"] == "TT" and sidecar["kernel"] == 25 and sidecar["delta"] == rosta.DELTA


def test_rosta_default_kernels(tmp_path, alpha_png):
    out = tmp_path / "ft.png"
    assert run(["rosta", "--kind", "ft", "--alpha", str(alpha_png), "--out", str(out)]) == 0
    assert json.loads(Path(str(out) + ".json").read_text())["kernel"] == 51


def test_config_precedence_and_logging(tmp_path, alpha_png, capsys, monkeypatch):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\nseed = 5\n\n[rosta]\nkernel = 13\n")
    out = tmp_path / "a.png"
    args = ["rosta", "--kind", "tt", "--alpha", str(alpha_png), "--out", str(out)]
    assert run(args + ["--config", str(cfg)]) == 0
    assert json.loads(Path(str(out) + ".json").read_text())["kernel"] == 13
    effective = next(r for r in _stderr_records(capsys.readouterr().err) if r["msg"] == "effective config")
    assert effective["args"]["seed"] == 5 and effective["from_config"]["kernel"] == "13"

    monkeypatch.setenv("MATTEKIT_CONFIG", str(cfg))
    assert run(args + ["--kernel", "7"]) == 0
    assert json.loads(Path(str(out) + ".json").read_text())["kernel"] == 7


def test_config_unknown_key_is_rejected(tmp_path, alpha_png):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[rosta]\nkernal = 13\n")
    assert run(["rosta", "--kind", "tt", "--alpha", str(alpha_png), "--out", str(tmp_path / "o.png"), "--config", str(cfg)]) == 1


def test_usage_errors_exit_1(tmp_path, capsys):
    assert run(["rosta", "--bogus"]) == 1
    assert run(["nosuchcommand"]) == 1
    assert run(["rosta", "--kind", "tt", "--alpha", str(tmp_path / "missing.png"), "--out", str(tmp_path / "o.png")]) == 1


def test_eval_identical_dirs_gives_zero_summary(tmp_path):
    d = tmp_path / "mattes"
    for i in range(3):
        io.write_gray(d / f"m{i}.png", soft_disk(48, radius=10 + i, band=4))
    out = tmp_path / "eval.jsonl"
    assert run(["eval", "--pred-dir", str(d), "--gt-dir", str(d), "--out", str(out), "--workers", "1"]) == 0
    rows = [json.loads(line) for line in out.read_text().splitlines()]
    summary = rows[-1]
    assert summary["id"] == "__mean__" and summary["count"] == 3
    assert all(summary[k] == 0.0 for k in ("sad", "mse", "mad", "grad", "conn", "sad_tran", "sad_fg", "sad_bg"))


def test_eval_missing_prediction_exit_2(tmp_path):
    gt, pred = tmp_path / "gt", tmp_path / "pred"
    io.write_gray(gt / "a.png", soft_disk(32, radius=8))
    io.write_gray(gt / "b.png", soft_disk(32, radius=9))
    io.write_gray(pred / "a.png", soft_disk(32, radius=8))
    assert run(["eval", "--pred-dir", str(pred), "--gt-dir", str(gt), "--out", str(tmp_path / "e.jsonl")]) == 2


def _compose_fixture(tmp_path, n_items, size=24, n_bg=7):
    rng = np.random.default_rng(0)
    entries = []
    for i in range(n_items):
        image_id = f"fg{i:03d}"
        role = "original" if i % 5 == 0 else "foreground"
        img = io.write_image(tmp_path / "in" / f"{image_id}.png", rng.random((size, size, 3)))
        alpha = io.write_gray(tmp_path / "in" / f"{image_id}_a.png", soft_disk(size, radius=size / 3, band=3))
        entries.append(ManifestEntry(image_id, role, str(img), size, size))
        entries.append(ManifestEntry(image_id, "alpha", str(alpha), size, size))
    for j in range(n_bg):
        io.write_image(tmp_path / "bg" / f"bg{j}.png", smooth_image(j, size + 8, size + 16))
    return write_manifest(tmp_path / "manifest.jsonl", entries)


def _dir_bytes(d):
    return {p.name: p.read_bytes() for p in sorted(Path(d).iterdir())}


def test_compose_twice_byte_identical(tmp_path):
    manifest = _compose_fixture(tmp_path, 4)
    common = ["compose", "--manifest", str(manifest), "--bg-dir", str(tmp_path / "bg"), "--seed", "7"]
    assert run(common + ["--out-dir", str(tmp_path / "o1"), "--workers", "1"]) == 0
    assert run(common + ["--out-dir", str(tmp_path / "o2"), "--workers", "2"]) == 0
    a, b = _dir_bytes(tmp_path / "o1"), _dir_bytes(tmp_path / "o2")
    assert a == b and len(a) == 4 * 5 + 1
    recipes = [json.loads(line) for line in (tmp_path / "o1" / "recipes.jsonl").read_text().splitlines()]
    assert {r["composite"] for r in recipes} == {f"fg{i:03d}_{k}.png" for i in range(4) for k in range(5)}
    assert all(r["master_seed"] == 7 and r["noise_sigma"] == 10.0 for r in recipes)


def test_compose_gates_off_matches_library_blend(tmp_path):
    manifest = _compose_fixture(tmp_path, 1)
    out = tmp_path / "o"
    args = ["compose", "--manifest", str(manifest), "--bg-dir", str(tmp_path / "bg"), "--k", "2",
            "--no-denoise", "--no-blur", "--no-noise", "--out-dir", str(out), "--workers", "1"]
    assert run(args) == 0
    from mattekit.rssn import alpha_blend, fit_background, estimate_foreground

    rec = json.loads((out / "recipes.jsonl").read_text().splitlines()[0])
    img = io.read_image(tmp_path / "in" / "fg000.png")
    alpha = io.read_gray(tmp_path / "in" / "fg000_a.png")
    fg = estimate_foreground(img, alpha)[0]
    bg = fit_background(io.read_image(rec["background_path"]), 24, 24)
    expected = io.quantize(alpha_blend(fg, alpha, bg), 8)
    assert np.array_equal(io.read_image(out / rec["composite"]), expected / 255.0)


def test_compose_partial_failure_exit_2(tmp_path):
    manifest = _compose_fixture(tmp_path, 2)
    entries = read_manifest(manifest)
    entries.append(ManifestEntry("ghost", "foreground", str(tmp_path / "nope.png"), 24, 24))
    entries.append(ManifestEntry("ghost", "alpha", str(tmp_path / "nope_a.png"), 24, 24))
    write_manifest(manifest, entries)
    out = tmp_path / "o"
    code = run(["compose", "--manifest", str(manifest), "--bg-dir", str(tmp_path / "bg"), "--k", "2",
                "--out-dir", str(out), "--workers", "1"])
    assert code == 2
    recipes = [json.loads(line) for line in (out / "recipes.jsonl").read_text().splitlines()]
    assert sum("error" in r for r in recipes) == 2 and len(list(out.glob("*.png"))) == 4


def test_merge_ensemble_hybrid_match_library(tmp_path):
    rng = np.random.default_rng(1)
    alpha = soft_disk(96, radius=30, band=10)
    tt = rosta.make_tt(alpha)
    trimap = io.write_u8(tmp_path / "trimap.png", rosta.to_trimap(tt))
    focus = io.write_gray(tmp_path / "focus.png", alpha, bits=16)
    assert run(["merge", "--kind", "tt", "--glance", str(trimap), "--focus", str(focus),
                "--out", str(tmp_path / "m.png"), "--bits", "16"]) == 0
    expected = combine.cm_merge_tt(tt.one_hot(), io.read_gray(focus))
    assert np.array_equal(io.read_gray(tmp_path / "m.png"), io.quantize(expected, 16) / 65535.0)

    probs = rng.random((96, 96, 2))
    np.save(tmp_path / "g.npy", probs)
    assert run(["merge", "--kind", "ft", "--glance", str(tmp_path / "g.npy"), "--focus", str(focus),
                "--out", str(tmp_path / "ft.png")]) == 0
    expected = combine.cm_merge_ft(probs, io.read_gray(focus))
    assert np.array_equal(io.read_gray_u8(tmp_path / "ft.png"), io.quantize(expected, 8))

    paths = [io.write_gray(tmp_path / f"e{i}.png", rng.random((20, 20))) for i in range(3)]
    assert run(["ensemble", "--inputs", *map(str, paths), "--out", str(tmp_path / "med.png")]) == 0
    expected = combine.ensemble_median(*(io.read_gray(p) for p in paths))
    assert np.array_equal(io.read_gray_u8(tmp_path / "med.png"), io.quantize(expected, 8))

    init = io.write_gray(tmp_path / "init.png", rng.random((20, 30)))
    tmask = np.zeros((20, 30), dtype=bool)
    tmask[5:15, 8:20] = True
    tpath = io.write_mask(tmp_path / "t.png", tmask)
    foc = io.write_gray(tmp_path / "foc.png", rng.random((30, 45)))
    out = tmp_path / "hy.png"
    assert run(["hybrid", "--initial", str(init), "--transition", str(tpath), "--transition-format", "mask",
                "--focus", str(foc), "--width", "60", "--height", "40", "--out", str(out)]) == 0
    expected = combine.hybrid_merge(io.read_gray(init), tmask, io.read_gray(foc), 60, 40)
    assert np.array_equal(io.read_gray_u8(out), io.quantize(expected, 8))
    sidecar = json.loads(Path(str(out) + ".json").read_text())
    assert sidecar["d1"] == "1/3" and sidecar["d2"] == "1/2"
    assert sidecar["pass_sizes"] == {"glance": [20, 13], "focus": [30, 20]}


def test_hybrid_rejects_bad_ratios(tmp_path):
    p = io.write_gray(tmp_path / "x.png", np.zeros((4, 4)))
    assert run(["hybrid", "--initial", str(p), "--transition", str(p), "--focus", str(p), "--width", "8",
                "--height", "8", "--d1", "1/2", "--d2", "1/3", "--out", str(tmp_path / "o.png")]) == 1


def test_losses_command(tmp_path, capsys):
    gt = soft_disk(32, radius=10, band=4)
    pred = np.clip(gt + np.random.default_rng(2).normal(0, 0.05, gt.shape), 0, 1)
    tt = rosta.make_tt(gt, 5)
    gt_p = io.write_gray(tmp_path / "gt.png", gt, bits=16)
    pred_p = io.write_gray(tmp_path / "pred.png", pred, bits=16)
    tri = io.write_u8(tmp_path / "tri.png", rosta.to_trimap(tt))
    assert run(["losses", "--pred", str(pred_p), "--gt", str(gt_p), "--trimap", str(tri)]) == 0
    record = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    g, p = io.read_gray(gt_p), io.read_gray(pred_p)
    ref = losses.loss_total(rosta.make_tt(p).one_hot(), tt.labels, p, g, tt.transition, p,
                            np.ones((32, 32, 3)), np.zeros((32, 32, 3)))
    assert record["l_total"] == ref.l_total
    assert record["weights"] == {"lambda1": 0.25, "lambda2": 0.25, "lambda3": 0.25}


def test_dataset_commands(tmp_path):
    src = tmp_path / "src"
    io.write_image(src / "a.png", smooth_image(0, 1080, 1200))
    io.write_image(src / "b.png", smooth_image(0, 1080, 1200))
    io.write_image(src / "c.png", smooth_image(5, 1100, 1100))
    io.write_image(src / "tiny.png", smooth_image(1, 100, 100))
    m = tmp_path / "bg.jsonl"
    assert run(["ingest", "--src-dir", str(src), "--out-dir", str(tmp_path / "norm"), "--manifest", str(m),
                "--errors", str(tmp_path / "err.jsonl"), "--workers", "1"]) == 0
    assert sorted(e.id for e in read_manifest(m)) == ["a", "b", "c"]
    assert "tiny.png" in (tmp_path / "err.jsonl").read_text()

    d = tmp_path / "dedup.jsonl"
    assert run(["dedup", "--manifest", str(m), "--out", str(d), "--workers", "1"]) == 0
    assert [e.id for e in read_manifest(d)] == ["a", "c"]

    s = tmp_path / "split.jsonl"
    assert run(["split", "--manifest", str(m), "--out", str(s), "--train", "2", "--val", "1", "--seed", "3"]) == 0
    assert sorted(e.split for e in read_manifest(s)) == ["train", "train", "val"]

    sb = tmp_path / "table.jsonl"
    assert run(["sample-bg", "--manifest", str(m), "--n", "4", "--k", "3", "--out", str(sb)]) == 0
    rows = [json.loads(line) for line in sb.read_text().splitlines()]
    assert len(rows) == 4 and all(sorted(r["backgrounds"]) == ["a", "b", "c"] for r in rows)
    assert run(["sample-bg", "--manifest", str(m), "--n", "1", "--k", "4", "--out", str(sb)]) == 1


def test_tracks_command(tmp_path):
    entries = [ManifestEntry(f"i{i}", "original", f"/p/{i}.png", 10, 10, category=f"c{i % 2}") for i in range(20)]
    m = write_manifest(tmp_path / "m.jsonl", entries)
    assert run(["tracks", "--manifest", str(m), "--out-dir", str(tmp_path / "tracks")]) == 0
    ori = read_manifest(tmp_path / "tracks" / "ORI.jsonl")
    assert sum(e.split == "train" for e in ori) == 18
    assert (tmp_path / "tracks" / "COMP-RSSN.jsonl").exists()


def test_console_script_help():
    proc = subprocess.run([sys.executable, "-m", "mattekit.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for name in ("rosta", "compose", "merge", "ensemble", "hybrid", "eval", "losses", "ingest", "dedup",
                 "split", "tracks", "sample-bg"):
        assert name in proc.stdout
