import json
import shutil

import pytest
from click.testing import CliRunner

from automaticity.bounds import theorem1_lower
from automaticity.cli import SWEEP_COLUMNS, main


@pytest.fixture
def run():
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(main, [str(a) for a in args], catch_exceptions=False)
    return invoke


def test_census_example(run, tmp_path):
    r = run("census", "--base", 2, "--n", 4, "--m", 2, "--set", "primes", "--mode", "paper",
            "--outdir", tmp_path)
    assert r.exit_code == 0
    summary = json.loads(r.output)
    assert summary["N"] == 3 and summary["sum_sizes"] == 4
    assert summary["partition_identity"]["passed"]
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert sorted(manifest["outputs"]) == ["census.csv", "census_summary.json"]
    assert "timestamp" in manifest and "timestamp" not in r.output
    header = (tmp_path / "census.csv").read_text().splitlines()[0]
    assert header == "w_value,w_digits,class_id,residual_cardinality"


def test_census_json_only(run, tmp_path):
    r = run("census", "--base", 2, "--n", 6, "--m", 3, "--out", "json", "--outdir", tmp_path)
    assert r.exit_code == 0
    assert not (tmp_path / "census.csv").exists()


def test_census_missing_m(run):
    r = run("census", "--base", 2, "--n", 4)
    assert r.exit_code == 2 and "Usage" in r.output


def test_census_missing_file(run):
    r = run("census", "--base", 2, "--n", 4, "--m", 2, "--set", "file:missing.txt")
    assert r.exit_code == 1 and "missing.txt" in r.output


@pytest.mark.parametrize("bad", [["--set", "cubes"], ["--mode", "odd"], ["--m", 4]])
def test_census_usage_errors(run, bad):
    args = ["census", "--base", 2, "--n", 4, "--m", 2]
    i = args.index(bad[0]) if bad[0] in args else None
    if i is not None:
        args[i + 1] = bad[1]
    else:
        args += bad
    assert run(*args).exit_code == 2


def test_census_explicit_file(run, tmp_path):
    path = tmp_path / "set.txt"
    path.write_text("1\n5\n9\n13\n")
    r = run("census", "--base", 2, "--n", 4, "--m", 2, "--set", f"file:{path}", "--mode", "full")
    assert r.exit_code == 0
    assert json.loads(r.output)["N"] == 2  # A_1 = {0,1,2,3}, others empty


def test_automaton_sandwich(run):
    r = run("automaton", "sandwich", "--base", 2, "--n", 6, "--set", "primes")
    assert r.exit_code == 0
    out = json.loads(r.output)
    assert out["lower"] <= out["upper"] <= out["trie_size"] and out["consistent"]


def test_automaton_construct_squares(run):
    r = run("automaton", "construct-squares", "--base", 3, "--n", 4)
    assert r.exit_code == 0 and json.loads(r.output)["verified"] is True


@pytest.mark.parametrize("base, n", [(4, 4), (3, 5)])
def test_automaton_construct_squares_usage(run, base, n):
    assert run("automaton", "construct-squares", "--base", base, "--n", n).exit_code == 2


def test_automaton_construct_primes(run):
    r = run("automaton", "construct-primes", "--base", 2, "--n", 10, "--m", 5)
    out = json.loads(r.output)
    assert r.exit_code == 0 and out["verified"] and out["within_bound"]


def test_automaton_exact_guard(run):
    r = run("automaton", "exact", "--base", 2, "--n", 12)
    assert r.exit_code == 0
    assert json.loads(r.output)["status"] == "not_attempted"


def test_automaton_verify_round_trip(run, tmp_path):
    r = run("automaton", "sandwich", "--base", 2, "--n", 8, "--outdir", tmp_path)
    assert r.exit_code == 0
    dfa_path = tmp_path / "automaton.json"
    ok = run("automaton", "verify", "--base", 2, "--n", 8, "--dfa", dfa_path)
    assert ok.exit_code == 0 and json.loads(ok.output)["verify"]["passed"]
    data = json.loads(dfa_path.read_text())
    data["accepting"] = data["accepting"][1:]
    bad_path = tmp_path / "bad.json"
    bad_path.write_text(json.dumps(data))
    bad = run("automaton", "verify", "--base", 2, "--n", 8, "--dfa", bad_path)
    assert bad.exit_code == 1
    assert json.loads(bad.output)["verify"]["witness"] is not None


def test_bounds_theorem1(run):
    r = run("bounds", "theorem1", "--x", "1e6", "--c", 1)
    assert r.exit_code == 0
    assert json.loads(r.output)["result"]["value"] == pytest.approx(theorem1_lower(10**6), rel=1e-15)


def test_bounds_select(run):
    r = run("bounds", "select", "--x", "1e19", "--base", 2)
    out = json.loads(r.output)["result"]
    assert r.exit_code == 0
    assert {"K", "ln_y0", "m"} <= set(out["values"]) and len(out["conditions"]) == 4
    assert out["log_base"] == "e"


def test_bounds_mertens(run):
    out = json.loads(run("bounds", "mertens", "--z", 10).output)
    assert out["result"]["value"] == 4.375  # exact product over 2, 3, 5, 7


def test_bounds_domain_is_data(run):
    r = run("bounds", "ck", "--k", 2, "--x", "7.389", "--y", 1)
    assert r.exit_code == 0 and "domain" in json.loads(r.output)


def test_bounds_missing_input(run):
    assert run("bounds", "ck", "--k", 2).exit_code == 2


def test_bounds_config_and_override(run, tmp_path):
    cfg = tmp_path / "b.cfg"
    cfg.write_text("D1 = 3\n")
    a = json.loads(run("bounds", "ck", "--k", 2, "--x", "2^64", "--y", "2^16",
                       "--config", cfg).output)
    b = json.loads(run("bounds", "ck", "--k", 2, "--x", "2^64", "--y", "2^16",
                       "--config", cfg, "--D1", 6).output)
    assert b["result"]["value"] == pytest.approx(2 * a["result"]["value"])
    assert a["config"]["D1"] == 3


@pytest.mark.parametrize("args", [["subsetbound", "--base", 2, "--m", 3],
                                  ["lasteq", "--x", "2^64"],
                                  ["eq1", "--base", 2, "--n", 12, "--m", 6],
                                  ["lemma2", "--n", 12, "--m", 6, "--words", "1,3"]])
def test_bounds_other_actions(run, args):
    r = run("bounds", *args)
    assert r.exit_code == 0
    assert "result" in json.loads(r.output)


def test_sweep_empty_range(run):
    r = run("sweep", "--base", 2, "--n-min", 6, "--n-max", 4)
    assert r.exit_code == 0
    assert r.output == ",".join(SWEEP_COLUMNS) + "\n"


def test_sweep_primes_sandwich(run):
    r = run("sweep", "--base", 2, "--n-min", 8, "--n-max", 16, "--n-step", 4)
    assert r.exit_code == 0
    lines = r.output.splitlines()[1:]
    assert len(lines) == 3
    for line in lines:
        row = dict(zip(SWEEP_COLUMNS, line.split(",")))
        assert int(row["lower"]) <= int(row["upper"]) and row["error"] == ""


def test_sweep_row_error_exit_1(run):
    r = run("sweep", "--base", 2, "--n-min", 4, "--n-max", 4, "--set", "file:/nonexistent")
    assert r.exit_code == 1 and "FileNotFoundError" in r.output


def test_replay_reproduces_bytes(run, tmp_path):
    out = tmp_path / "run"
    r = run("sweep", "--base", 3, "--n-min", 4, "--n-max", 6, "--n-step", 2, "--set", "squares",
            "--outdir", out)
    assert r.exit_code == 0
    first = (out / "sweep.csv").read_bytes()
    saved = tmp_path / "manifest.json"
    shutil.copy(out / "manifest.json", saved)
    (out / "sweep.csv").unlink()
    again = run("replay", saved)
    assert again.exit_code == 0
    assert (out / "sweep.csv").read_bytes() == first


def test_version(run):
    assert run("--version").exit_code == 0
