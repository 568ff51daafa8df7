from __future__ import annotations

import json

import pytest

from mcosstream.cli import main

from conftest import EXAMPLE_FRAMES


@pytest.fixture
def example_csv(tmp_path):
    path = tmp_path / "t1.csv"
    rows = ["fid,id,class"] + [f"{f},{o},car" for f, objs in enumerate(EXAMPLE_FRAMES) for o in objs]
    path.write_text("\n".join(rows) + "\n")
    return path


@pytest.fixture
def queries(tmp_path):
    path = tmp_path / "q.txt"
    path.write_text("# demo\nany: (car >= 1) WINDOW 4 DURATION 3\n")
    return path


def read_jsonl(path):
    return [json.loads(line) for line in path.read_text().splitlines()]


@pytest.mark.parametrize("engine", ["naive", "mfs", "ssg"])
def test_run_writes_matches_and_metrics(tmp_path, example_csv, queries, engine, capsys):
    out = tmp_path / f"{engine}.jsonl"
    assert main(["run", "--input", str(example_csv), "--queries", str(queries), "--engine", engine, "--out", str(out)]) == 0
    assert read_jsonl(out) == [
        {"frame": 2, "qid": "any", "mcos": ["B"], "frames": [0, 1, 2]},
        {"frame": 3, "qid": "any", "mcos": ["A", "B"], "frames": [1, 2, 3]},
        {"frame": 3, "qid": "any", "mcos": ["B"], "frames": [0, 1, 2, 3]},
        {"frame": 4, "qid": "any", "mcos": ["A", "B"], "frames": [1, 2, 3, 4]},
    ]
    metrics = json.loads(capsys.readouterr().out)
    assert metrics["engine"] == engine and metrics["matches"] == 4


def test_run_with_prune_on_non_monotone_query_fails(tmp_path, example_csv, capsys):
    q = tmp_path / "q.txt"
    q.write_text("(car <= 2) WINDOW 4 DURATION 3\n")
    code = main(["run", "--input", str(example_csv), "--queries", str(q), "--prune", "--out", str(tmp_path / "o")])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_missing_input_is_reported(tmp_path, queries, capsys):
    code = main(["run", "--input", str(tmp_path / "nope.csv"), "--queries", str(queries), "--out", str(tmp_path / "o")])
    assert code == 2 and "error:" in capsys.readouterr().err


def test_generate_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.jsonl"
    assert main(["generate", "--preset", "V1", "--seed", "3", "--occlusion", "1", "--out", str(a)]) == 0
    assert main(["generate", "--preset", "V1", "--seed", "3", "--occlusion", "1", "--out", str(b)]) == 0
    assert main(["generate", "--preset", "V1", "--seed", "3", "--occlusion", "1", "--out", str(tmp_path / "c.csv")]) == 0
    assert a.read_text() == (tmp_path / "c.csv").read_text()
    assert a.read_text().startswith("fid,id,class\n")
    assert len(a.read_text().splitlines()) - 1 == len(b.read_text().splitlines())


def test_generate_from_config(tmp_path):
    cfg = tmp_path / "feed.cfg"
    cfg.write_text("n_frames = 50\nmean_objects_per_frame = 3\nseed = 1\n")
    out = tmp_path / "f.csv"
    assert main(["generate", "--config", str(cfg), "--out", str(out)]) == 0
    fids = {int(line.split(",")[0]) for line in out.read_text().splitlines()[1:]}
    assert max(fids) <= 49


def test_bench_writes_csv_and_figures(tmp_path):
    cfg = tmp_path / "bench.cfg"
    cfg.write_text("preset = M2\nn_frames = 120\nwindows = 30, 60\ndurations = 20\n")
    out = tmp_path / "bench.csv"
    assert main(["bench", "--config", str(cfg), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1 + 2 * 3
    assert "intersections_computed" in lines[0]
    pngs = sorted(p.name for p in tmp_path.glob("*.png"))
    assert pngs == [
        "bench_intersections_computed_vs_w.png",
        "bench_states_live_max_vs_w.png",
        "bench_wall_time_vs_w.png",
    ]
    assert all((tmp_path / p).read_bytes().startswith(b"\x89PNG") for p in pngs)


def test_bench_without_figures(tmp_path):
    cfg = tmp_path / "bench.cfg"
    cfg.write_text("engines = mfs\npreset = D1\nn_frames = 60\nwindows = 20\ndurations = 10\nocclusions = 0,1\n")
    out = tmp_path / "b.csv"
    assert main(["bench", "--config", str(cfg), "--out", str(out), "--no-figures"]) == 0
    assert not list(tmp_path.glob("*.png"))
    assert len(out.read_text().splitlines()) == 3


def test_oracle_subcommand(example_csv, capsys):
    assert main(["oracle", "--input", str(example_csv), "--window", "4", "--duration", "3", "--at", "4"]) == 0
    assert json.loads(capsys.readouterr().out) == {"frame": 4, "mcos": ["A", "B"], "frames": [1, 2, 3, 4]}
    assert main(["oracle", "--input", str(example_csv), "--window", "4", "--at", "9"]) == 2
