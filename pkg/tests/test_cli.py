import csv
import json
import shutil

import numpy as np
import pytest
import yaml
from helpers import textured_frame, translate

from erqa import load_frame, save_frame
from erqa.cli import main
from erqa.matching import ABLATION_STAGES


def make_sequence(root, n=3, size=(48, 64), shift=None, name="gt"):
    d = root / name
    d.mkdir()
    for k in range(n):
        frame = textured_frame(100 + k, size)
        if shift is not None:
            frame = translate(frame, *shift, seed=k)
        save_frame(frame, d / f"frame_{k:03d}.png")
    return d


def write_manifest(path, **fields):
    data = {"gt_dir": "gt", "dist_dirs": {"copy": "copy"}}
    data.update(fields)
    path.write_text(yaml.safe_dump(data))
    return path


@pytest.fixture
def workspace(tmp_path):
    gt = make_sequence(tmp_path)
    shutil.copytree(gt, tmp_path / "copy")
    return tmp_path


def test_score_identity_json(workspace):
    manifest = write_manifest(workspace / "run.yaml", metrics=["psnr", "ssim"])
    assert main(["score", str(manifest), "--workers", "1"]) == 0
    report = json.loads((workspace / "erqa_report.json").read_text())
    assert report["columns"] == ["ERQAv1.1", "PSNR", "SSIM"]
    block = report["models"]["copy"]["full"]
    assert len(block["frames"]) == 3
    assert all(v["ERQAv1.1"] == 1.0 for v in block["frames"].values())
    assert block["pooled"] == {"ERQAv1.1": 1.0, "PSNR": "inf", "SSIM": 1.0}


def test_score_rows_per_region_csv(tmp_path):
    gt = make_sequence(tmp_path, n=30, size=(40, 40))
    make_sequence(tmp_path, n=30, size=(40, 40), shift=(1, 0), name="model")
    manifest = write_manifest(tmp_path / "run.yaml", dist_dirs={"model": "model"},
                              regions={"left": [0, 0, 20, 40], "right": {"x": 20, "y": 0,
                                                                          "w": 20, "h": 40}})
    out = tmp_path / "r.csv"
    assert main(["score", str(manifest), "--format", "csv", "-o", str(out),
                 "--workers", "1"]) == 0
    rows = list(csv.DictReader(out.open()))
    for region in ("left", "right"):
        mine = [r for r in rows if r["region"] == region]
        assert len(mine) == 31
        assert sum(r["frame"] == "mean" for r in mine) == 1
        values = [float(r["ERQAv1.1"]) for r in mine if r["frame"] != "mean"]
        pooled = float(next(r["ERQAv1.1"] for r in mine if r["frame"] == "mean"))
        assert pooled == pytest.approx(np.mean(values), abs=1e-6)
    assert gt.exists()


def test_score_ablation_columns(workspace):
    manifest = write_manifest(workspace / "run.yaml")
    out = workspace / "abl.json"
    assert main(["score", str(manifest), "--ablation", "-o", str(out), "--workers", "1"]) == 0
    report = json.loads(out.read_text())
    assert report["columns"] == [
        "Without compensation (baseline)",
        "+ Compensation of global shift",
        "+ Compensation of local shift (v1.0)",
        "+ Penalize false wide edges (v1.1)",
    ]
    assert report["columns"] == list(ABLATION_STAGES)


def test_score_pool_option(workspace):
    manifest = write_manifest(workspace / "run.yaml")
    out = workspace / "p.csv"
    assert main(["score", str(manifest), "--pool", "min", "--format", "csv", "-o", str(out),
                 "--workers", "1"]) == 0
    assert any(r["frame"] == "min" for r in csv.DictReader(out.open()))


def test_score_missing_frame_exit_2(workspace, capsys):
    (workspace / "copy" / "frame_001.png").unlink()
    manifest = write_manifest(workspace / "run.yaml")
    assert main(["score", str(manifest)]) == 2
    assert "frame_001.png" in capsys.readouterr().err


def test_score_bad_manifest_exit_2(workspace):
    bad = workspace / "bad.yaml"
    bad.write_text("gt_dir: gt\n")
    assert main(["score", str(bad)]) == 2
    manifest = write_manifest(workspace / "run.yaml", config={"version": "1.1",
                                                             "local_tolerance": False})
    assert main(["score", str(manifest)]) == 2


def test_score_decode_error_exit_3(workspace):
    (workspace / "copy" / "frame_000.png").write_bytes(b"garbage")
    manifest = write_manifest(workspace / "run.yaml")
    assert main(["score", str(manifest), "--workers", "1"]) == 3


def test_score_region_outside_frame_exit_2(workspace):
    manifest = write_manifest(workspace / "run.yaml", regions={"r": [60, 0, 20, 20]})
    assert main(["score", str(manifest), "--workers", "1"]) == 2


def test_score_flags_override_config(workspace):
    manifest = write_manifest(workspace / "run.yaml")
    out = workspace / "o.json"
    assert main(["score", str(manifest), "--version", "1.0", "--no-global-shift",
                 "--canny-low", "50", "--canny-high", "150", "--shift-radius", "2",
                 "-o", str(out), "--workers", "1"]) == 0
    report = json.loads(out.read_text())
    assert report["columns"] == ["ERQAv1.0"]
    assert report["config"]["global_shift"] is False
    assert report["config"]["canny_low"] == 50.0
    assert report["config"]["shift_radius"] == 2


def test_score_deterministic_across_workers(workspace):
    make_sequence(workspace, shift=(2, -1), name="shifted")
    manifest = write_manifest(workspace / "run.yaml",
                              dist_dirs={"copy": "copy", "shifted": "shifted"},
                              metrics=["psnr*", "ssim"])
    a, b = workspace / "a.json", workspace / "b.json"
    assert main(["score", str(manifest), "--workers", "1", "-o", str(a)]) == 0
    assert main(["score", str(manifest), "--workers", "3", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_visualize_identical(workspace, capsys):
    f = workspace / "gt" / "frame_000.png"
    out = workspace / "vis.png"
    assert main(["visualize", str(f), str(f), str(out)]) == 0
    printed = capsys.readouterr().out
    assert "fp=0 fn=0" in printed and "f1=1.000000" in printed
    img = load_frame(out)
    colored = np.all(img == 255, axis=-1)
    assert colored.any()
    others = img[~colored]
    assert not np.any(np.all(others == (255, 0, 0), axis=-1))
    assert not np.any(np.all(others == (0, 0, 255), axis=-1))


def test_visualize_hand_trace(tmp_path, capsys):
    gt = np.zeros((12, 12), np.uint8)
    gt[5, 5] = 255
    dist = gt.copy()
    dist[5, 6] = 255
    save_frame(gt, tmp_path / "gt.png")
    save_frame(dist, tmp_path / "dist.png")
    out = tmp_path / "vis.png"
    for version, expected in (("1.1", "tp=1 fp=1 fn=0"), ("1.0", "tp=2 fp=0 fn=0")):
        assert main(["visualize", str(tmp_path / "gt.png"), str(tmp_path / "dist.png"),
                     str(out), "--edge-maps", "--version", version]) == 0
        assert expected in capsys.readouterr().out
    img = load_frame(out)
    assert tuple(img[5, 5]) == (255, 255, 255)


def test_visualize_missing_path(tmp_path):
    assert main(["visualize", str(tmp_path / "a.png"), str(tmp_path / "b.png"),
                 str(tmp_path / "o.png")]) == 3


def test_edges_and_shift_grid(workspace, capsys):
    f = workspace / "gt" / "frame_000.png"
    out = workspace / "e.png"
    assert main(["edges", str(f), str(out)]) == 0
    assert set(np.unique(load_frame(out))) <= {0, 255}
    grid = workspace / "grid.csv"
    assert main(["shift-grid", str(f), str(f), "-o", str(grid)]) == 0
    rows = list(csv.reader(grid.open()))
    assert len(rows) == 8 and len(rows[0]) == 8
    assert rows[4][4] == "inf"
    assert "dx=0 dy=0" in capsys.readouterr().err


def test_panel_command(workspace, capsys):
    f = workspace / "gt" / "frame_000.png"
    assert main(["panel", str(f), str(f), "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "metric,raw,compensated"
    assert len(lines) == 5


# ---------------------------------------------------------------- correlate


def write_scores(path, rows):
    path.write_text("region,item,metric,value\n" + "".join(",".join(map(str, r)) + "\n"
                                                         for r in rows))


def test_correlate_self(tmp_path):
    subj = tmp_path / "subj.csv"
    subj.write_text("region,item,score\n" + "".join(f"r,m{k},{v}\n" for k, v in
                                                    enumerate([0.1, 0.4, 0.2, 0.3])))
    scores = tmp_path / "s.csv"
    write_scores(scores, [("r", f"m{k}", "self", v) for k, v in enumerate([0.1, 0.4, 0.2, 0.3])])
    out = tmp_path / "c.json"
    assert main(["correlate", "--scores", str(scores), "--subjective", str(subj),
                 "-o", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["srcc"]["self"] == {"r": 1.0, "mean": 1.0}
    assert data["plcc"]["self"] == {"r": 1.0, "mean": 1.0}


def test_correlate_two_regions_csv(tmp_path):
    subj = tmp_path / "subj.csv"
    subj.write_text("region,item,score\n" + "".join(
        f"{r},m{k},{k}\n" for r in ("a", "b") for k in range(5)))
    scores = tmp_path / "s.csv"
    write_scores(scores, [("a", f"m{k}", "X", v) for k, v in enumerate([1, 3, 2, 4, 5])]
                 + [("b", f"m{k}", "X", v) for k, v in enumerate([2, 1, 5, 3, 4])])
    out = tmp_path / "c.csv"
    assert main(["correlate", "--scores", str(scores), "--subjective", str(subj),
                 "--format", "csv", "-o", str(out)]) == 0
    rows = {(r["metric"], r["coefficient"]): r for r in csv.DictReader(out.open())}
    srcc_row = rows[("X", "srcc")]
    assert float(srcc_row["a"]) == pytest.approx(0.9)
    assert float(srcc_row["b"]) == pytest.approx(0.6)
    for row in rows.values():
        assert float(row["mean"]) == pytest.approx((float(row["a"]) + float(row["b"])) / 2,
                                                   abs=1e-6)


def test_correlate_votes_two_items(tmp_path, capsys):
    votes = tmp_path / "votes.csv"
    votes.write_text("item_a,item_b,winner\n" + "A,B,a\n" * 3 + "A,B,b\n")
    scores = tmp_path / "s.csv"
    write_scores(scores, [("r", "A", "X", 1), ("r", "B", "X", 2)])
    fitted = tmp_path / "bt.csv"
    # two items cannot be correlated, but the fitted scores are written first
    code = main(["correlate", "--scores", str(scores), "--votes", str(votes),
                 "--save-subjective", str(fitted)])
    assert "r,A,0.750000" in capsys.readouterr().out
    assert fitted.read_text().splitlines()[1:] == ["r,A,0.750000", "r,B,0.250000"]
    assert code == 4


def test_correlate_votes_end_to_end(tmp_path):
    votes = tmp_path / "votes.csv"
    votes.write_text("item_a,item_b,winner\n" + "A,B,a\nA,B,a\nB,A,b\nA,C,a\nC,A,a\n"
                     "B,C,a\nB,C,tie\nC,B,b\n")
    scores = tmp_path / "s.csv"
    write_scores(scores, [("r", "A", "ERQA", 0.9), ("r", "B", "ERQA", 0.7),
                          ("r", "C", "ERQA", 0.2)])
    out = tmp_path / "c.json"
    assert main(["correlate", "--scores", str(scores), "--votes", str(votes),
                 "-o", str(out)]) == 0
    assert json.loads(out.read_text())["srcc"]["ERQA"]["r"] == 1.0


def test_correlate_alignment_exit_4(tmp_path):
    subj = tmp_path / "subj.csv"
    subj.write_text("region,item,score\nr,a,1\nr,b,2\nr,c,3\n")
    scores = tmp_path / "s.csv"
    write_scores(scores, [("r", "a", "X", 1), ("r", "b", "X", 2), ("r", "zzz", "X", 3)])
    assert main(["correlate", "--scores", str(scores), "--subjective", str(subj)]) == 4


def test_correlate_from_score_report(workspace):
    make_sequence(workspace, shift=(2, 0), name="shifted")
    make_sequence(workspace, shift=(0, 3), name="down")
    manifest = write_manifest(workspace / "run.yaml",
                              dist_dirs={"copy": "copy", "shifted": "shifted", "down": "down"},
                              config={"global_shift": False})
    report = workspace / "rep.json"
    assert main(["score", str(manifest), "-o", str(report), "--workers", "1"]) == 0
    subj = workspace / "subj.csv"
    subj.write_text("region,item,score\nfull,copy,0.6\nfull,shifted,0.3\nfull,down,0.1\n")
    out = workspace / "c.json"
    assert main(["correlate", "--report", str(report), "--subjective", str(subj),
                 "-o", str(out)]) == 0
    data = json.loads(out.read_text())
    assert "ERQAv1.1" in data["srcc"]
