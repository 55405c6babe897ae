from __future__ import annotations

import json
import subprocess
import sys

import pytest

from untrusted_advice import __version__
from untrusted_advice.cli import main
from untrusted_advice.core import AdviceMode, ExperimentRecord


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip() == f"untrusted-advice {__version__} (git unknown)"


def test_examples(capsys):
    code, out, _ = run(capsys, "bidding", "pareto", "--w", "4", "--u", "9")
    assert code == 0 and out.strip() == "m*=2 bids [3, 9] r=1.3333"
    code, out, _ = run(capsys, "skirental", "pair", "--B", "10", "--k", "5")
    assert code == 0 and out.strip() == "(1.4, 2.8)"
    code, _, err = run(capsys, "sweep", "--spec", "missing.json")
    assert code == 2 and "missing.json" in err


def test_usage_errors(capsys):
    assert run(capsys, "skirental", "pair", "--B", "10")[0] == 2
    assert run(capsys, "skirental", "pair", "--B", "10", "--k", "11")[0] == 2
    assert run(capsys, "bidding", "pareto", "--w", "3", "--u", "9")[0] == 2
    assert run(capsys, "bidding", "pareto", "--w", "four", "--u", "9")[0] == 2
    assert run(capsys, "binpack", "run", "--alg", "rrc", "--alpha", "1.5")[0] == 2
    assert run(capsys, "listupdate", "run", "--alg", "toggle", "--m", "4", "--n", "10", "--beta", "0.9")[0] == 2
    assert run(capsys, "nothing")[0] == 2


def test_jsonl_stdout_is_records_only(capsys):
    code, out, _ = run(capsys, "skirental", "pair", "--B", "10", "--k", "5", "--format", "jsonl")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 2
    recs = [ExperimentRecord.from_json(json.loads(line)) for line in lines]
    assert [float(r.ratio) for r in recs] == [1.4, 2.8]


@pytest.mark.parametrize("argv", [
    ["skirental", "frontier", "--B", "5"],
    ["bidding", "kbit", "--w", "4", "--k", "1", "--grid-max", "1024"],
    ["bidding", "randomized", "--w", "5", "--grid-max", "1024"],
    ["binpack", "run", "--alg", "rrc", "--alpha", "0.5", "--family", "dense-triples", "--n", "12", "--seed", "3"],
    ["binpack", "run", "--alg", "ff", "--n", "30"],
    ["binpack", "run", "--alg", "rc", "--family", "critical-heavy", "--n", "20", "--seed", "1"],
    ["listupdate", "run", "--alg", "toggle", "--m", "4", "--beta", "0.25", "--advice", "mtfo",
     "--family", "zipf", "--n", "2000", "--seed", "2"],
    ["listupdate", "run", "--alg", "ts", "--m", "3", "--n", "100"],
])
def test_quiet_writes_data_file(tmp_path, capsys, argv):
    out_path = tmp_path / "out.jsonl"
    code, out, _ = run(capsys, *argv, "--quiet", "--out", str(out_path))
    assert code == 0 and out == ""
    lines = out_path.read_text().splitlines()
    assert lines
    for line in lines:
        ExperimentRecord.from_json(json.loads(line))
    assert run(capsys, "audit", "--in", str(out_path), "--quiet")[0] == 0


def test_csv_format(tmp_path, capsys):
    path = tmp_path / "k.csv"
    code, _, _ = run(capsys, "bidding", "kbit", "--w", "4", "--k", "2", "--grid-max", "4096",
                     "--format", "csv", "--out", str(path))
    assert code == 0
    header, row = path.read_text().splitlines()
    assert header == "parameter,value,r_hat,w_hat"
    assert float(row.split(",")[2]) <= 2**1.25 + 1e-6


def test_listupdate_ledger(tmp_path, capsys):
    ledger = tmp_path / "phases.jsonl"
    code, out, _ = run(capsys, "listupdate", "run", "--alg", "toggle", "--m", "3", "--beta", "0.5",
                       "--advice", "mtfe", "--n", "800", "--ledger", str(ledger))
    assert code == 0
    rows = [json.loads(x) for x in ledger.read_text().splitlines()]
    assert rows[0]["kind"] == "trusting" and rows[1]["kind"] == "ignoring"
    assert all(r["paid_cost"] < 9 for r in rows)


def test_binpack_items_and_audit(tmp_path, capsys):
    items = tmp_path / "items.json"
    items.write_text("[0.6, 0.25]")
    code, out, _ = run(capsys, "binpack", "run", "--alg", "rrc", "--items", str(items))
    assert code == 0 and out.startswith("rrc: 1 bins")
    seqs = tmp_path / "seqs.jsonl"
    seqs.write_text('[0.2, 0.2, 0.2]\n{"items": [0.3, 0.3, 0.3, 0.3], "alpha": 0.5, "k": 1, "gamma": 0.5}\n')
    code, out, _ = run(capsys, "binpack", "audit", "--in", str(seqs))
    assert code == 0 and "audited 2 sequences, 0 failed" in out


def test_sweep_command(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"problem": "skirental", "grid": {"k": [1, 2, 3]}, "fixed": {"B": 5}}))
    first, second = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    summary = tmp_path / "s.csv"
    assert run(capsys, "sweep", "--spec", str(spec), "--out", str(first), "--summary", str(summary))[0] == 0
    assert run(capsys, "sweep", "--spec", str(spec), "--out", str(second), "--quiet")[0] == 0
    assert first.read_bytes() == second.read_bytes()
    assert summary.read_text().startswith("cell,params,r_hat,w_hat")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "sweep", "--spec", str(bad))[0] == 2
    bad.write_text(json.dumps({"problem": "binpack", "grid": {"alpha": [1]}, "families": ["x"]}))
    assert run(capsys, "sweep", "--spec", str(bad))[0] == 2


def test_audit_flags_bad_records(tmp_path, capsys):
    path = tmp_path / "r.jsonl"
    rec = ExperimentRecord("skirental", "A_1", {}, "x", 0, 10, 5, None, AdviceMode.trusted())
    good = rec.to_jsonl()
    tampered = json.loads(good)
    tampered["ratio"] = 3.0
    path.write_text(good + "\n" + json.dumps(tampered) + "\n")
    code, _, err = run(capsys, "audit", "--in", str(path))
    assert code == 1 and "record.schema" in err


def test_invariant_failure_exit_code(monkeypatch, capsys):
    import untrusted_advice.ski_rental as sr
    from untrusted_advice.core import CompetitivePair

    monkeypatch.setattr(sr, "ak_pair", lambda k, B: CompetitivePair(0, 0))
    code, _, err = run(capsys, "skirental", "pair", "--B", "10", "--k", "5")
    assert code == 1 and "ski.ak_pair" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "untrusted_advice", "skirental", "pair", "--B", "4", "--k", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "(1.25, 2.5)"
