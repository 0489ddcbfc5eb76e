import json

import pytest

from asced.cli import EXIT_BUDGET, EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from asced.families import bch_pcm, hamming_pcm
from asced.io import load_json, write_pcm


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    write_pcm(hamming_pcm(3), "h.alist")
    write_pcm(bch_pcm(4, 2), "b15.txt")
    return tmp_path


def _ensemble(workdir):
    assert main(["gen-subcode", "--pcm", "h.alist", "--dc", "3", "--rows", "1", "--seed", "1", "--out", "s.json"]) == 0
    assert main(["build-ensemble", "--code-pcm", "h.alist", "--batches", "s.json", "--out", "e.json"]) == 0


def test_gen_subcode_reports_delta(workdir, capsys):
    rc = main(["gen-subcode", "--pcm", "h.alist", "--dc", "6", "--rows", "1", "--seed", "1", "--out", "sub.json"])
    assert rc == EXIT_OK
    doc = load_json("sub.json")
    assert doc["delta"] == 1 and len(doc["appended_rows"]) == 1 and doc["row_weights"] == [6]
    err = capsys.readouterr().err
    assert '"seed": 1' in err and "delta=1" in err


def test_missing_pcm_is_usage_error(workdir, capsys):
    assert main(["gen-subcode", "--dc", "6", "--seed", "1", "--out", "x.json"]) == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_missing_seed_and_unknown_flag(workdir):
    assert main(["simulate", "--spec", "e.json", "--snr", "3"]) == EXIT_USAGE
    assert main(["cycle-stats", "--pcm", "h.alist", "--bogus"]) == EXIT_USAGE
    assert main(["build-ensemble", "--code-pcm", "h.alist", "--batches", "x", "--optimize", "--out", "e"]) == EXIT_USAGE


def test_data_errors(workdir):
    assert main(["cycle-stats", "--pcm", "missing.alist"]) == EXIT_DATA
    (workdir / "bad.alist").write_text("3 2\n1 1\n")
    assert main(["cycle-stats", "--pcm", "bad.alist"]) == EXIT_DATA


def test_budget_exhaustion(workdir):
    (workdir / "rep.txt").write_text("110\n011\n")
    assert main(["gen-subcode", "--pcm", "rep.txt", "--dc", "2", "--seed", "0", "--out", "x.json"]) == EXIT_BUDGET


def test_simulate_sweep_rows_and_determinism(workdir):
    _ensemble(workdir)
    base = ["simulate", "--spec", "e.json", "--snr", "2:0.5:5", "--min-fe", "20", "--seed", "7", "--chunk", "250"]
    assert main(base + ["--threads", "1", "--out", "r1.csv"]) == 0
    assert main(base + ["--threads", "4", "--out", "r4.csv"]) == 0
    assert main(base + ["--threads", "1", "--out", "r1b.csv"]) == 0
    r1 = (workdir / "r1.csv").read_bytes()
    assert r1 == (workdir / "r4.csv").read_bytes() == (workdir / "r1b.csv").read_bytes()
    assert len(r1.decode().splitlines()) == 1 + 7


def test_cover_check(workdir, capsys):
    _ensemble(workdir)
    capsys.readouterr()
    assert main(["cover-check", "--code-pcm", "h.alist", "--spec", "e.json"]) == 0
    assert json.loads(capsys.readouterr().out)["covered"] is True


def test_cycle_stats(workdir, capsys):
    assert main(["cycle-stats", "--pcm", "h.alist"]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats == {"rows": 3, "cols": 7, "rank": 3, "weight": 12, "four_cycles": 3, "girth_at_least_6": False}


def test_build_sspcm_and_optimized_ensemble(workdir):
    assert main(["build-sspcm", "--pcm", "b15.txt", "--seed", "1", "--wmax", "200",
                 "--out", "ss.alist", "--report", "rep.json"]) == 0
    rep = load_json("rep.json")
    assert rep["search_space"]["complete"] and rep["sspcm_2"]["rank"] == 8
    assert main(["gen-subcode", "--pcm", "b15.txt", "--dc", "4,6", "--rows", "1", "--seed", "3", "--out", "s.json"]) == 0
    assert main(["build-ensemble", "--code-pcm", "b15.txt", "--batches", "s.json", "--optimize", "--seed", "2",
                 "--wmax", "300", "--out", "e.json"]) == 0
    doc = load_json("e.json")
    assert (workdir / doc["batches"][0]["sspcm"]["pcm_file"]).exists()
    assert main(["cover-check", "--code-pcm", "b15.txt", "--spec", "e.json"]) == 0
    assert main(["simulate", "--spec", "e.json", "--snr", "3", "--min-fe", "5", "--seed", "1",
                 "--threads", "1", "--out", "r.csv"]) == 0
    assert main(["simulate", "--spec", "e.json", "--snr", "3", "--min-fe", "5", "--seed", "1",
                 "--allzero", "--linear-only", "--threads", "1", "--out", "z.csv"]) == 0


def test_ml_oracle(workdir):
    assert main(["ml-oracle", "--code-pcm", "h.alist", "--snr", "3", "--min-fe", "20", "--seed", "1",
                 "--threads", "1", "--out", "ml.csv"]) == 0
    assert (workdir / "ml.csv").read_text().startswith("snr_db,")
