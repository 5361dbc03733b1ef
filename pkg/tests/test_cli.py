import json
import math

import pytest

from dagledger.cli import build_parser, main
from dagledger.experiments import FAIRNESS_HEADER


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def fairness_doc(**over):
    doc = {
        "experiment": "fairness-grid",
        "trials": 2,
        "turns": 4,
        "eta": 2,
        "lambda": 2,
        "k_values": [1],
        "q0_values": [0.2],
        "q1_values": [0.0, 1.0],
        "h1_values": [0.25],
        "workers": 1,
    }
    doc.update(over)
    return doc


def test_parser_rejects_bad_k_and_format():
    parser = build_parser()
    with pytest.raises(SystemExit):
        parser.parse_args(["simulate", "--config", "x", "--k", "two"])
    with pytest.raises(SystemExit):
        parser.parse_args(["simulate", "--config", "x", "--k", "0"])
    with pytest.raises(SystemExit):
        parser.parse_args(["simulate", "--config", "x", "--format", "yaml"])
    args = parser.parse_args(["efficiency-q", "--config", "x", "--k", "inf"])
    assert args.k == math.inf


def test_simulate_prints_metrics_and_writes_trace(tmp_path, capsys):
    config = write_config(
        tmp_path,
        {
            "experiment": "single-run",
            "turns": 6,
            "eta": 2,
            "lambda": 2,
            "n_miners": 2,
            "seed": 3,
        },
    )
    trace_path = tmp_path / "trace.json"
    code = main(["simulate", "--config", config, "--out", str(trace_path)])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["turns"] == 6
    assert 0.0 <= summary["pow_efficiency"] <= 1.0
    assert len(summary["shares"]) == 2

    trace = json.loads(trace_path.read_text())
    assert trace["blocks"][0]["id"] == 0 and trace["blocks"][0]["owner"] is None
    assert len(trace["blocks"]) == 7
    ids = {b["id"] for b in trace["blocks"]}
    for block in trace["blocks"]:
        assert all(p in ids and p < block["id"] for p in block["pointers"])
    tx_ids = {tuple(t["id"]) for t in trace["transactions"]}
    for tx in trace["transactions"]:
        assert tx["turn"] == tx["id"][0]
        assert all(tuple(d) in tx_ids for d in tx["deps"])
    for block in trace["blocks"]:
        assert all(tuple(t) in tx_ids for t in block["txs"])


def test_simulate_seed_flag_changes_run(tmp_path, capsys):
    config = write_config(
        tmp_path,
        {"experiment": "single-run", "turns": 8, "n_miners": 3, "miners": [
            {"hash": 0.5, "info": 0.2},
            {"hash": 0.5, "info": 0.9, "kind": "atomic"},
        ]},
    )
    assert main(["simulate", "--config", config, "--seed", "1"]) == 0
    first = capsys.readouterr().out
    assert main(["simulate", "--config", config, "--seed", "1"]) == 0
    replay = capsys.readouterr().out
    assert replay == first
    assert main(["simulate", "--config", config, "--seed", "2"]) == 0
    other = capsys.readouterr().out
    assert other != first


def test_fairness_grid_end_to_end(tmp_path, capsys):
    config = write_config(tmp_path, fairness_doc())
    out = tmp_path / "grid"
    code = main(["fairness-grid", "--config", config, "--out", str(out),
                 "--format", "both", "--pgm"])
    assert code == 0
    csv_text = (tmp_path / "grid.csv").read_text()
    lines = csv_text.splitlines()
    assert lines[0] == FAIRNESS_HEADER
    assert len(lines) == 3
    doc = json.loads((tmp_path / "grid.json").read_text())
    assert len(doc["records"]) == 2
    assert (tmp_path / "grid_k1_q00.2.pgm").exists()


def test_flags_override_config(tmp_path):
    config = write_config(tmp_path, fairness_doc(trials=2, turns=4))
    out = tmp_path / "o"
    code = main([
        "fairness-grid", "--config", config, "--out", str(out),
        "--trials", "3", "--turns", "6", "--eta", "1", "--lambda", "1",
        "--alpha", "0.25", "--seed", "9",
    ])
    assert code == 0
    row = (tmp_path / "o.csv").read_text().splitlines()[1].split(",")
    header = FAIRNESS_HEADER.split(",")
    cell = dict(zip(header, row))
    assert cell["T"] == "6" and cell["trials"] == "3"
    assert cell["eta"] == "1" and cell["lambda"] == "1"
    assert cell["alpha"] == "0.25"


def test_k_flag_narrows_grid(tmp_path):
    config = write_config(tmp_path, fairness_doc(k_values=[1, 2]))
    out = tmp_path / "narrow"
    assert main(["fairness-grid", "--config", config, "--out", str(out),
                 "--k", "2"]) == 0
    lines = (tmp_path / "narrow.csv").read_text().splitlines()
    assert len(lines) == 3
    assert all(line.startswith("2,") for line in lines[1:])


def test_dump_trials_flag_adds_json(tmp_path):
    config = write_config(tmp_path, fairness_doc())
    out = tmp_path / "d"
    assert main(["fairness-grid", "--config", config, "--out", str(out),
                 "--dump-trials"]) == 0
    doc = json.loads((tmp_path / "d.json").read_text())
    assert all("trial_values" in r for r in doc["records"])
    assert (tmp_path / "d.csv").exists()


def test_experiment_command_mismatch_fails(tmp_path, capsys):
    config = write_config(tmp_path, fairness_doc())
    code = main(["efficiency-q", "--config", config])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_unbounded_k_fairness_fails_cleanly(tmp_path, capsys):
    config = write_config(tmp_path, fairness_doc(k_values=["inf"]))
    code = main(["fairness-grid", "--config", config, "--out", str(tmp_path / "x")])
    assert code == 2
    assert "finite" in capsys.readouterr().err


def test_missing_config_fails_cleanly(tmp_path, capsys):
    code = main(["simulate", "--config", str(tmp_path / "absent.json")])
    assert code == 2
    assert "absent.json" in capsys.readouterr().err


def test_efficiency_commands(tmp_path):
    qdoc = {
        "experiment": "efficiency-q",
        "trials": 1,
        "turns": 4,
        "k_values": [1, "inf"],
        "q_values": [0.5],
        "n_miners": 2,
        "workers": 1,
    }
    config = write_config(tmp_path, qdoc, "q.json")
    out = tmp_path / "eq"
    assert main(["efficiency-q", "--config", config, "--out", str(out)]) == 0
    lines = (tmp_path / "eq.csv").read_text().splitlines()
    assert lines[1].startswith("1,2,0.5,") and lines[2].startswith("inf,2,0.5,")

    ndoc = {
        "experiment": "efficiency-n",
        "trials": 1,
        "turns": 4,
        "k_values": [1],
        "n_values": [1, 2],
        "workers": 1,
    }
    config = write_config(tmp_path, ndoc, "n.json")
    out = tmp_path / "en"
    assert main(["efficiency-n", "--config", config, "--out", str(out)]) == 0
    lines = (tmp_path / "en.csv").read_text().splitlines()
    assert lines[1].split(",")[1] == "1" and lines[2].split(",")[1] == "2"
