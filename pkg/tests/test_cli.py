import csv
import subprocess
import sys

import numpy as np
import pytest

from plastream import cli
from plastream import evaluate as ev
from plastream.exceptions import IllegalPairing


def run(*argv):
    return cli.main([str(a) for a in argv])


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def series(tmp_path):
    rng = np.random.default_rng(3)
    path = tmp_path / "series.csv"
    t = np.arange(0, 500, dtype=float)
    a = np.cumsum(rng.normal(0, 0.3, 500))
    b = np.sin(t / 30)
    with open(path, "w") as fh:
        fh.write("time,a,b\n")
        for row in zip(t, a, b):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    return path, t, a, b


@pytest.mark.parametrize("method, proto", [("disjoint", "two-streams"), ("swing", "implicit"), ("linear", "single-stream-v")])
def test_compress_decompress_round_trip(tmp_path, series, method, proto):
    path, t, a, _ = series
    prefix = tmp_path / "out"
    assert run("compress", "--method", method, "--protocol", proto, "--epsilon", 0.2,
               "--input", path, "--t-col", "time", "--y-col", "a", "--output", prefix) == 0
    files = sorted(tmp_path.glob("out.*.pla"))
    assert len(files) == (2 if proto == "two-streams" else 1)
    dec = tmp_path / "dec.csv"
    assert run("decompress", *files, "--timestamps", path, "--t-col", "time", "--y-col", "a",
               "--verify", "--output", dec) == 0
    rows = read_rows(dec)
    assert [float(r["t"]) for r in rows] == t.tolist()
    assert np.abs(np.array([float(r["y"]) for r in rows]) - a).max() < 0.2


def test_recompress_of_decoded_output(tmp_path, series):
    path, *_ = series
    args = ["--method", "angle", "--protocol", "single-stream", "--epsilon", 0.2]
    run("compress", *args, "--input", path, "--y-col", "1", "--output", tmp_path / "x")
    first = (tmp_path / "x.main.pla").read_bytes()
    run("decompress", tmp_path / "x.main.pla", "--timestamps", path, "--output", tmp_path / "d.csv")
    run("compress", *args, "--input", tmp_path / "d.csv", "--output", tmp_path / "y")
    second = (tmp_path / "y.main.pla").read_bytes()
    assert second[:16] == first[:16]
    # decoded values sit on the lines; the second pass only has to stay within eps of them
    assert run("decompress", tmp_path / "y.main.pla", "--timestamps", tmp_path / "d.csv",
               "--y-col", "1", "--verify", "--output", tmp_path / "e.csv") == 0


def test_multi_channel(tmp_path, series, capsys):
    path, *_ = series
    assert run("compress", "--method", "disjoint", "--protocol", "single-stream", "--epsilon", 0.1,
               "--input", path, "--t-col", "time", "--y-col", "a", "--y-col", "b",
               "--output", tmp_path / "m") == 0
    assert (tmp_path / "m.a.main.pla").exists() and (tmp_path / "m.b.main.pla").exists()


def test_generated_stream(tmp_path):
    spec = "random_walk:2000:sigma=0.4"
    assert run("compress", "--method", "angle", "--protocol", "implicit", "--epsilon", 1,
               "--generate", spec, "--seed", 4, "--output", tmp_path / "g") == 0
    assert run("decompress", tmp_path / "g.main.pla", "--generate", spec, "--seed", 4,
               "--verify", "--output", tmp_path / "g.csv") == 0


def test_verify_detects_wrong_values(tmp_path):
    run("compress", "--method", "angle", "--protocol", "single-stream", "--epsilon", 1,
        "--generate", "random_walk:500", "--seed", 1, "--output", tmp_path / "g")
    assert run("decompress", tmp_path / "g.main.pla", "--generate", "random_walk:500", "--seed", 2,
               "--verify", "--output", tmp_path / "g.csv") == cli.EXIT_VIOLATION


def test_evaluate_default_matrix(tmp_path, capsys):
    out = tmp_path / "stats.csv"
    assert run("evaluate", "--generate", "random_walk:400", "--epsilon", 0.5, 1, "--output", out) == 0
    rows = read_rows(out)
    assert len(rows) == len(ev.KEYED_PAIRINGS) * 2 * 3
    keys = {r["run_id"].split(":")[0] for r in rows}
    assert keys == {p.key for p in ev.KEYED_PAIRINGS}
    err = capsys.readouterr().err
    assert "C (Optimal Continuous)" in err and "M (MixedPLA)" in err


def test_evaluate_constant_stream_has_zero_error(tmp_path):
    out = tmp_path / "stats.csv"
    assert run("evaluate", "--method", "disjoint", "--generate", "constant:50:value=3",
               "--epsilon", 0.1, "--output", out) == 0
    rows = [r for r in read_rows(out) if r["metric"] == "error"]
    assert len(rows) == 4
    assert all(float(r[c]) == 0 for r in rows for c in ("mean", "p25", "p75", "whisker_hi", "max"))


def test_evaluate_all_legal(tmp_path):
    out = tmp_path / "stats.csv"
    assert run("evaluate", "--all", "--generate", "ramp:100:noise=0.1", "--epsilon", 0.5, "--output", out) == 0
    assert len(read_rows(out)) == 13 * 3


def test_illegal_pairing_is_usage_error(capsys):
    assert run("evaluate", "--method", "swing", "--protocol", "single-stream",
               "--generate", "constant:5", "--epsilon", 1) == cli.EXIT_USAGE
    with pytest.raises(IllegalPairing):
        ev.run_evaluate([ev.RunConfig("swing", "single-stream", 1.0)], [])


def test_violation_exit_code(tmp_path, monkeypatch):
    real = ev.decode_bytes
    monkeypatch.setattr(ev, "decode_bytes", lambda t, *b: real(t, *b) + 2.0)
    assert run("evaluate", "--method", "angle", "--protocol", "single-stream", "--generate",
               "random_walk:100", "--epsilon", 1, "--output", tmp_path / "s.csv") == cli.EXIT_VIOLATION


def test_data_error_exit_code(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,5\n1,6\n")
    assert run("compress", "--method", "angle", "--protocol", "single-stream", "--epsilon", 1,
               "--input", bad, "--output", tmp_path / "o") == cli.EXIT_DATA
    assert run("compress", "--method", "angle", "--protocol", "single-stream", "--epsilon", 1,
               "--input", tmp_path / "missing.csv", "--output", tmp_path / "o") == cli.EXIT_DATA


def test_corrupt_stream_exit_code(tmp_path):
    blob = tmp_path / "c.pla"
    blob.write_bytes(b"XXXX" + bytes(12))
    ts = tmp_path / "t.csv"
    ts.write_text("1\n")
    assert run("decompress", blob, "--timestamps", ts) == cli.EXIT_DATA


@pytest.mark.parametrize(
    "argv",
    [[], ["compress"], ["compress", "--method", "nope"], ["evaluate", "--epsilon", "1"],
     ["compress", "--method", "angle", "--protocol", "implicit", "--epsilon", "-1",
      "--generate", "constant:3", "--output", "x"]],
)
def test_usage_errors(argv):
    try:
        code = cli.main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == cli.EXIT_USAGE


def test_console_script(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "plastream.cli", "evaluate", "--method", "linear", "--protocol", "two-streams",
         "--generate", "random_walk:200", "--epsilon", "1"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0].startswith("run_id,method,protocol,epsilon,metric")
