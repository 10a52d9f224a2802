import json

import pytest

from boolperc.cli import main, parse_measure
from boolperc.measures import RadiusMeasure


def run_cli(args):
    return main(args)


def test_parse_measure_kinds():
    assert parse_measure("dirac:1.5", 2).atoms == ((1.5, 1.0),)
    assert parse_measure("mix:1=0.5,2=0.25", 2).atoms == ((1.0, 0.5), (2.0, 0.25))
    mud = parse_measure("mud:1.5", 4)
    assert mud.atoms[0] == (1.0, 1.0)
    assert mud.atoms[1][1] == pytest.approx(1.5**-4)


def test_parse_measure_errors():
    from boolperc.cli import ConfigError

    with pytest.raises(ConfigError):
        parse_measure("nope:1", 2)
    with pytest.raises(ConfigError):
        parse_measure("dirac:abc", 2)


def bytes_of(path):
    return path.read_bytes()


def test_sample_is_deterministic_and_csv(tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sample", "--d", "2", "--measure", "dirac:1", "--intensity", "0.3",
            "--L", "8", "--seed", "5"]
    assert run_cli(args + ["--out", str(out1)]) == 0
    assert run_cli(args + ["--out", str(out2)]) == 0
    assert bytes_of(out1) == bytes_of(out2)
    lines = out1.read_text().splitlines()
    assert lines[0].startswith("# {")
    config = json.loads(lines[0][2:])
    assert config["seed"] == 5 and "version" in config
    assert lines[1] == "x_1,x_2,radius"


def test_clusters_outputs_rows(tmp_path):
    out = tmp_path / "c.csv"
    assert run_cli(["clusters", "--d", "2", "--measure", "dirac:1", "--intensity",
                    "0.4", "--L", "8", "--seed", "2", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[1] == "cluster_id,size,crossing"
    assert len(lines) > 2


def test_gw_rows_all_subcritical_below_boundary(tmp_path):
    out = tmp_path / "gw.json"
    assert run_cli(["gw", "--rho", "1.5", "--kappa", "0.9", "--d-max", "100",
                    "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    rows = payload["results"]
    assert len(rows) == 100
    assert all(r["class"] == "subcritical" for r in rows if r["d"] >= 20)
    assert payload["config"]["kappa"] == 0.9


def test_threshold_json_csv_and_thread_invariance(tmp_path):
    base = ["threshold", "--d", "2", "--measure", "dirac:1", "--L", "8",
            "--replicates", "40", "--seed", "3"]
    j1, c1 = tmp_path / "t1.json", tmp_path / "t1.csv"
    j2, c2 = tmp_path / "t2.json", tmp_path / "t2.csv"
    j8 = tmp_path / "t8.json"
    assert run_cli(base + ["--out", str(j1), "--csv", str(c1), "--threads", "1"]) == 0
    assert run_cli(base + ["--out", str(j2), "--csv", str(c2), "--threads", "1"]) == 0
    assert bytes_of(j1) == bytes_of(j2)
    assert bytes_of(c1) == bytes_of(c2)
    assert run_cli(base + ["--out", str(j8), "--threads", "8"]) == 0
    a = json.loads(j1.read_text())
    b = json.loads(j8.read_text())
    assert a["results"]["lambda_hat"] == b["results"]["lambda_hat"]
    assert a["results"]["curve"] == b["results"]["curve"]
    header = c1.read_text().splitlines()[1].split(",")
    assert header == ["d", "rho", "alpha", "lambda_hat", "lambda_lo", "lambda_hi",
                      "lambda_tilde", "c_hat", "L", "replicates", "seed"]


def test_sweep_rows(tmp_path):
    out, csv_out = tmp_path / "s.json", tmp_path / "s.csv"
    assert run_cli(["sweep", "--d", "2", "--rho", "2", "--alphas", "0,1",
                    "--L", "6", "--replicates", "30", "--seed", "4",
                    "--out", str(out), "--csv", str(csv_out)]) == 0
    payload = json.loads(out.read_text())
    assert [row["alpha"] for row in payload["results"]] == [0.0, 1.0]
    lines = csv_out.read_text().splitlines()
    assert len(lines) == 4  # config comment + header + two rows


def test_embed_volumes_and_bounds(tmp_path):
    vols = tmp_path / "v.json"
    assert run_cli(["embed-volumes", "--rho", "1.5", "--d", "10,100", "--out", str(vols)]) == 0
    rows = json.loads(vols.read_text())["results"]
    assert [r["d"] for r in rows] == [10, 100]
    bounds = tmp_path / "b.json"
    assert run_cli(["embed-bounds", "--rho", "1.5", "--kappa", "0.99",
                    "--d", "100,200,400,800", "--out", str(bounds)]) == 0
    rows = json.loads(bounds.read_text())["results"]
    etas = [r["log_eta"] for r in rows]
    intf = [r["log_interference"] for r in rows]
    assert all(b > a for a, b in zip(etas, etas[1:]))
    assert all(b < a for a, b in zip(intf, intf[1:]))
    assert all(r["inclusion1"] and r["inclusion2"] for r in rows)


def test_embed_gplus_runs(tmp_path):
    out = tmp_path / "g.json"
    assert run_cli(["embed-gplus", "--d", "6", "--rho", "1.5", "--kappa", "1.5",
                    "--replicates", "300", "--seed", "1", "--out", str(out)]) == 0
    res = json.loads(out.read_text())["results"]
    assert 0.0 <= res["p_hat"] <= 1.0
    assert res["replicates"] == 300


def test_oriented_bernoulli_and_embedded(tmp_path):
    out = tmp_path / "o.json"
    args = ["oriented", "--mode", "bernoulli", "--p", "0.3,0.9", "--n-max", "50",
            "--runs", "80", "--seed", "2", "--out", str(out)]
    assert run_cli(args) == 0
    rows = json.loads(out.read_text())["results"]
    assert rows[0]["frequency"] < rows[1]["frequency"]
    out2, out3 = tmp_path / "oe.json", tmp_path / "oe2.json"
    eargs = ["oriented", "--mode", "embedded", "--d", "6", "--rho", "1.5",
             "--kappa", "2.0", "--p-floor", "0.2", "--n-max", "5", "--seed", "3"]
    assert run_cli(eargs + ["--out", str(out2)]) == 0
    assert run_cli(eargs + ["--out", str(out3)]) == 0
    assert bytes_of(out2) == bytes_of(out3)
    res = json.loads(out2.read_text())["results"]
    assert res["chain_verified"] is True
    assert res["leftmost_path"][0] == [0, 0]


def test_config_file_precedence(tmp_path):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"kappa": 0.5, "rho": 1.5, "d_max": 3}))
    out = tmp_path / "gw.json"
    # CLI --kappa overrides the file; file d_max overrides the default
    assert run_cli(["gw", "--config", str(conf), "--kappa", "0.7", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["config"]["kappa"] == 0.7
    assert payload["config"]["d_max"] == 3
    assert len(payload["results"]) == 3


def test_unknown_config_key_is_config_error(tmp_path):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"bogus": 1}))
    assert run_cli(["gw", "--config", str(conf)]) == 2


def test_bad_measure_exits_config_error(tmp_path):
    assert run_cli(["threshold", "--d", "2", "--measure", "bogus:1",
                    "--out", str(tmp_path / "x.json")]) == 2


def test_sizing_refusal_exits_three(tmp_path):
    assert run_cli(["sample", "--d", "2", "--measure", "dirac:1", "--intensity",
                    "1e8", "--L", "30", "--out", str(tmp_path / "x.csv")]) == 3


def test_degenerate_embedding_exits_config_error(tmp_path):
    assert run_cli(["embed-volumes", "--rho", "1.5", "--d", "3",
                    "--out", str(tmp_path / "x.json")]) == 2


def test_version_flag():
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
