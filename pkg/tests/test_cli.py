"""End-to-end checks of the ``cic`` command line client.

All verbs run against the in-process service (no socket), which is the
default when ``--server`` is omitted.  The contract under test: stdout is
canonical JSON (sorted keys, two-space indent, trailing newline), repeated
runs are byte-identical, and exit codes are 0 / 1 (falsified property) /
2 (bad input or transport failure).
"""

import json

import pytest
from click.testing import CliRunner

from cicregions.cli import canonical_json, main
from cicregions.config import save_instance
from cicregions.instances import inst_a

RATES_OK = "0.125,0.125,0.125,0.125,0.125,0.125"


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def inst_a_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "inst_a.json"
    save_instance(inst_a(), path)
    return str(path)


def run_ok(runner, args):
    res = runner.invoke(main, args)
    assert res.exit_code == 0, res.output
    return res


# ---------------------------------------------------------------- region

def test_region_stdout_is_canonical_json(runner, inst_a_path):
    res = run_ok(runner, ["region", "--config", inst_a_path, "--system", "corrected"])
    doc = json.loads(res.stdout)
    assert res.stdout == canonical_json(doc)
    assert doc["instance_name"] == "inst-a"
    assert doc["area"] == pytest.approx(0.5112527651585901, abs=1e-9)
    assert doc["constraints"]["kind"] == "corrected"
    ids = {row["id"] for row in doc["constraints"]["inequalities"]}
    assert {"3.1", "3.16", "nonneg:Rp2p"} <= ids
    assert len(doc["polygon"]["vertices"]) == 5


def test_region_dmt_differs_from_corrected(runner, inst_a_path):
    dmt = json.loads(run_ok(
        runner, ["region", "--config", inst_a_path, "--system", "dmt"]).stdout)
    assert dmt["constraints"]["kind"] == "dmt"
    assert dmt["area"] == pytest.approx(0.31334323812740805, abs=1e-9)


def test_region_csv_out(runner, inst_a_path, tmp_path):
    out = tmp_path / "poly.csv"
    res = run_ok(runner, ["region", "--config", inst_a_path,
                          "--system", "corrected", "--out", str(out)])
    doc = json.loads(res.stdout)
    lines = out.read_text().splitlines()
    assert lines[0] == "r1,r2"
    assert len(lines) == 1 + len(doc["polygon"]["vertices"])
    r1, r2 = (float(part) for part in lines[1].split(","))
    assert [r1, r2] == doc["polygon"]["vertices"][0]


def test_region_json_out_matches_stdout(runner, inst_a_path, tmp_path):
    out = tmp_path / "region.json"
    res = run_ok(runner, ["region", "--config", inst_a_path,
                          "--system", "dmt", "--out", str(out)])
    assert out.read_text() == res.stdout


def test_region_rejects_unknown_system(runner, inst_a_path):
    res = runner.invoke(main, ["region", "--config", inst_a_path,
                               "--system", "classic"])
    assert res.exit_code == 2
    assert "Invalid value" in res.stderr


# ---------------------------------------------------------------- compare

def test_compare_config_reports_inclusion(runner, inst_a_path):
    res = run_ok(runner, ["compare", "--config", inst_a_path])
    doc = json.loads(res.stdout)
    assert doc["inclusion"] is True
    assert doc["corrected_area"] >= doc["dmt_area"]
    assert len(doc["gaps"]) == 16
    assert doc["gaps"]["3.9"] == pytest.approx(0.5310044064107187, abs=1e-9)


def test_compare_random_batch(runner):
    res = run_ok(runner, ["compare", "--random", "3", "--seed", "7",
                          "--q-card", "2"])
    doc = json.loads(res.stdout)
    assert doc["count"] == 3
    assert doc["all_included"] is True
    assert doc["failures"] == []
    assert [row["index"] for row in doc["results"]] == [0, 1, 2]


def test_compare_needs_exactly_one_source(runner, inst_a_path):
    both = runner.invoke(main, ["compare", "--config", inst_a_path,
                                "--random", "2"])
    neither = runner.invoke(main, ["compare"])
    for res in (both, neither):
        assert res.exit_code == 2
        assert "exactly one of --config or --random" in res.stderr


def test_compare_out_file(runner, inst_a_path, tmp_path):
    out = tmp_path / "cmp.json"
    res = run_ok(runner, ["compare", "--config", inst_a_path, "--out", str(out)])
    assert out.read_text() == res.stdout


# ------------------------------------------------------- check-identities

def test_check_identities_config(runner, inst_a_path):
    res = run_ok(runner, ["check-identities", "--config", inst_a_path])
    doc = json.loads(res.stdout)
    assert doc["all_ok"] is True
    assert doc["max_residual"] <= 1e-9
    assert len(doc["entries"]) == 7


def test_check_identities_random(runner):
    res = run_ok(runner, ["check-identities", "--random", "2", "--seed", "5"])
    doc = json.loads(res.stdout)
    assert doc["count"] == 2
    assert doc["all_ok"] is True


def test_check_identities_needs_exactly_one_source(runner):
    res = runner.invoke(main, ["check-identities"])
    assert res.exit_code == 2
    assert "exactly one of --config or --random" in res.stderr


# --------------------------------------------------------------- simulate

def test_simulate_runs_and_echoes_rates(runner, inst_a_path):
    res = run_ok(runner, ["simulate", "--config", inst_a_path, "--n", "8",
                          "--trials", "5", "--seed", "14",
                          "--rates", RATES_OK])
    doc = json.loads(res.stdout)
    assert doc["trials"] == 5
    assert doc["n"] == 8
    assert doc["rates"]["R1p"] == 0.125
    assert doc["instance_name"] == "inst-a"


def test_simulate_byte_identical_and_jobs_invariant(runner, inst_a_path):
    base = ["simulate", "--config", inst_a_path, "--n", "8",
            "--trials", "5", "--seed", "14", "--rates", RATES_OK]
    first = run_ok(runner, base).stdout
    again = run_ok(runner, base).stdout
    jobs2 = run_ok(runner, base + ["--jobs", "2"]).stdout
    assert first == again
    assert first == jobs2


def test_simulate_sweep_and_csv(runner, inst_a_path, tmp_path):
    rep = tmp_path / "rep.json"
    csv = tmp_path / "sweep.csv"
    res = run_ok(runner, ["simulate", "--config", inst_a_path, "--n", "12",
                          "--trials", "10", "--seed", "3",
                          "--sweep-rp2c", "0.0:0.3:0.1",
                          "--out", str(rep), "--sweep-out", str(csv)])
    doc = json.loads(res.stdout)
    assert [row["rp2c"] for row in doc["rows"]] == [0.0, 0.1, 0.2, 0.3]
    assert doc["rows"][0]["bin_size"] == 1
    assert rep.read_text() == res.stdout
    lines = csv.read_text().splitlines()
    assert lines[0] == "rp2c,success_rate,n,bin_size,successes"
    assert len(lines) == 5
    assert lines[1].split(",")[2] == "12"


def test_simulate_usage_errors(runner, inst_a_path):
    base = ["simulate", "--config", inst_a_path, "--n", "8", "--trials", "5"]
    cases = [
        (base + ["--rates", "0.1,0.2"], "needs 6 comma-separated values"),
        (base + ["--rates", "a,b,c,d,e,f"], "--rates:"),
        (base + ["--sweep-rp2c", "0.0-0.3"], "must look like lo:hi:step"),
        (base + ["--sweep-rp2c", "0.0:0.3:0.0"], "step > 0 and hi >= lo"),
        (base + ["--sweep-rp2c", "0.5:0.1:0.1"], "step > 0 and hi >= lo"),
        (base, "--rates is required unless --sweep-rp2c"),
        (base + ["--rates", RATES_OK, "--sweep-out", "x.csv"],
         "--sweep-out needs --sweep-rp2c"),
    ]
    for args, fragment in cases:
        res = runner.invoke(main, args)
        assert res.exit_code == 2, args
        assert fragment in res.stderr, args


def test_simulate_budget_guard_maps_to_exit_2(runner, inst_a_path):
    res = runner.invoke(main, ["simulate", "--config", inst_a_path,
                               "--n", "64", "--trials", "1",
                               "--rates", "0.5,0,0,0,0,0"])
    assert res.exit_code == 2
    assert "desk-scale" in res.stderr
    assert "budgets" in res.stderr


# ----------------------------------------------------------- config input

def test_malformed_config_file(runner, tmp_path):
    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    res = runner.invoke(main, ["region", "--config", str(bad),
                               "--system", "dmt"])
    assert res.exit_code == 2
    assert "cannot read instance config" in res.stderr


def test_missing_config_file(runner, tmp_path):
    res = runner.invoke(main, ["region", "--config",
                               str(tmp_path / "nope.json"), "--system", "dmt"])
    assert res.exit_code == 2
    assert "does not exist" in res.stderr


def test_invalid_factor_reported_from_service(runner, tmp_path):
    doc = inst_a().to_dict()
    doc["p_u1c_given_q"] = [[0.49, 0.49]]
    path = tmp_path / "warped.json"
    path.write_text(json.dumps(doc))
    res = runner.invoke(main, ["region", "--config", str(path),
                               "--system", "dmt"])
    assert res.exit_code == 2
    assert "sums to 0.98" in res.stderr


# ------------------------------------------------------ remote and serve

def test_unreachable_server_exits_2(runner, inst_a_path):
    res = runner.invoke(main, ["--server", "http://127.0.0.1:1",
                               "region", "--config", inst_a_path,
                               "--system", "dmt"])
    assert res.exit_code == 2
    assert "request to /v1/region failed" in res.stderr


def test_serve_hands_app_to_uvicorn(runner, monkeypatch):
    import uvicorn
    from fastapi import FastAPI

    calls = []
    monkeypatch.setattr(uvicorn, "run",
                        lambda app, **kw: calls.append((app, kw)))
    run_ok(runner, ["serve", "--host", "0.0.0.0", "--port", "9100"])
    (app, kw), = calls
    assert isinstance(app, FastAPI)
    assert kw == {"host": "0.0.0.0", "port": 9100}


def test_log_env_is_accepted(runner, inst_a_path):
    import logging

    res = runner.invoke(main, ["compare", "--config", inst_a_path],
                        env={"CIC_LOG": "warning"})
    assert res.exit_code == 0
    for handler in logging.root.handlers[:]:
        logging.root.removeHandler(handler)
