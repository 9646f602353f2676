import json

import numpy as np
import pytest

from tsfmap.cli import main


def call(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def pipeline(tmp_path, capsys):
    gen, trn, chk = tmp_path / "gen", tmp_path / "train", tmp_path / "chunk"
    assert call(capsys, "generate", "--env", "BAL", "--steps", "20000", "--seed", "1",
                "--out", str(gen))[0] == 0
    assert call(capsys, "train", "--input", str(gen / "sequence.txt"), "--seed", "3",
                "--snapshot-every", "50000", "--out", str(trn))[0] == 0
    assert call(capsys, "chunk", "--weights", str(trn / "weights_200000.csv"),
                "--out", str(chk))[0] == 0
    return gen, trn, chk


def test_generate_outputs(pipeline):
    gen, _, _ = pipeline
    seq = (gen / "sequence.txt").read_text().split()
    assert len(seq) == 20000
    truth = json.loads((gen / "truth.json").read_text())
    assert truth["levels"] == [[0, 0, 0, 0, 1, 1, 1, 1]]
    assert truth["phases"][0]["start"] == 0
    manifest = json.loads((gen / "manifest.json").read_text())
    assert manifest["command"] == "generate"
    assert set(manifest["outputs"]) == {"sequence.txt", "truth.json"}
    assert len(manifest["outputs"]["sequence.txt"]) == 64


def test_train_snapshots(pipeline):
    _, trn, _ = pipeline
    names = sorted(p.name for p in trn.glob("weights_*.csv"))
    assert names == ["weights_100000.csv", "weights_150000.csv", "weights_200000.csv",
                     "weights_50000.csv"]
    w = np.loadtxt(trn / "weights_200000.csv", delimiter=",")
    assert w.shape == (8, 5)


def test_chunk_and_eval(pipeline, capsys):
    gen, _, chk = pipeline
    data = json.loads((chk / "chunks.json").read_text())
    assert set(data) == {"levels", "kept_ids", "method"}
    assert (chk / "linkage.csv").read_text().startswith("a,b,dist,size")
    code, out, _ = call(capsys, "-v", "eval", "--pred", str(chk / "chunks.json"),
                        "--truth", str(gen / "truth.json"))
    assert code == 0
    assert float(out.splitlines()[0]) == 1.0
    assert out.splitlines()[1].startswith("level 0:")


def test_replay_reproduces(pipeline, tmp_path, capsys):
    _, trn, _ = pipeline
    again = tmp_path / "again"
    assert call(capsys, "replay", str(trn / "manifest.json"), "--out", str(again))[0] == 0
    for p in trn.glob("weights_*.csv"):
        assert (again / p.name).read_bytes() == p.read_bytes()


def test_analyze(pipeline, capsys, tmp_path):
    _, trn, _ = pipeline
    code, out, _ = call(capsys, "analyze", "--run", str(trn), "--phase", "--rank")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "step,rate,rank" and len(lines) == 5
    dest = tmp_path / "an"
    assert call(capsys, "analyze", "--run", str(trn), "--rank", "--out", str(dest))[0] == 0
    assert (dest / "analysis.csv").exists()


def test_outputs_stay_in_out_dir(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    out = tmp_path / "o"
    assert call(capsys, "generate", "--env", "HB", "--steps", "500", "--seed", "0",
                "--out", str(out))[0] == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["o"]


def test_experiment(tmp_path, capsys):
    out = tmp_path / "exp"
    code, text, _ = call(capsys, "experiment", "--env", "BAL", "--method", "tp", "--seeds", "2",
                         "--seed", "0", "--steps", "4000", "--eval-every", "1000",
                         "--out", str(out))
    assert code == 0 and "final score" in text
    rows = (out / "results.csv").read_text().splitlines()
    assert rows[0] == "seed,step,score,score_smoothed" and len(rows) == 9
    assert (out / "summary.csv").read_text().startswith("step,mean,std")


def test_graph_source(tmp_path, capsys):
    g = tmp_path / "g.txt"
    g.write_text("0 1\n1 2\n2 0\n2 3\n3 4\n4 5\n5 3\n")
    out = tmp_path / "gg"
    assert call(capsys, "generate", "--graph", str(g), "--steps", "100", "--seed", "0",
                "--out", str(out))[0] == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert len(manifest["inputs"]) == 1


def test_usage_errors_exit_1(tmp_path, capsys):
    assert call(capsys, "generate", "--env", "BAL", "--out", str(tmp_path / "x"))[0] == 1
    assert call(capsys, "bogus")[0] == 1
    assert call(capsys, "analyze", "--run", str(tmp_path))[0] in (1, 2)


def test_data_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("0\nzz\n")
    code, _, err = call(capsys, "train", "--input", str(bad), "--seed", "0",
                        "--out", str(tmp_path / "t"))
    assert code == 2 and ":2:" in err
    assert call(capsys, "generate", "--env", "NOPE", "--seed", "0",
                "--out", str(tmp_path / "g"))[0] == 2
    assert call(capsys, "eval", "--pred", str(tmp_path / "missing.json"),
                "--truth", str(tmp_path / "missing.json"))[0] == 2
