import csv
import json

import pytest

from vpwave.cli import EXIT_COMPUTE, EXIT_INPUT, EXIT_OK, main


def synth_file(tmp_path, name="bessel.csv", *extra):
    path = tmp_path / name
    args = ["synth", "--noise", "0.03", "--seed", "1", "--out", str(path), *extra]
    assert main(args) == EXIT_OK
    return path


def test_synth_is_deterministic(tmp_path):
    a = synth_file(tmp_path, "a.csv")
    b = synth_file(tmp_path, "b.csv")
    assert a.read_bytes() == b.read_bytes()
    c = synth_file(tmp_path, "c.csv", "--seed", "2")
    assert c.read_bytes() != a.read_bytes()


def test_synth_to_stdout(capsys):
    assert main(["synth", "--trades", "10"]) == EXIT_OK
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[0] == "timestamp,price,volume" and len(lines) == 61  # at least one trade per level


def test_fit_ladder_writes_json_and_manifest(tmp_path, capsys):
    trades = synth_file(tmp_path)
    out, manifest, plot = tmp_path / "fit.json", tmp_path / "run.json", tmp_path / "plot.csv"
    code = main(["--manifest", str(manifest), "fit", str(trades), "--out", str(out), "--plot-data", str(plot)])
    assert code == EXIT_OK
    printed = capsys.readouterr().out
    assert "bessel:" in printed and "chosen: bessel" in printed
    report = json.loads(out.read_text())
    assert report["chosen_label"] == "bessel"
    run = json.loads(manifest.read_text())
    assert run["command"] == "fit" and str(out) in run["outputs"]
    rows = list(csv.reader(plot.open()))
    assert rows[0] == ["price", "empirical_p", "model_p", "residual"] and len(rows) == 61


def test_fit_single_family_and_kummer_order_zero(tmp_path, capsys):
    trades = tmp_path / "k.csv"
    assert main(["synth", "--family", "kummer", "--m", "0", "--sqrt-a", "20", "--out", str(trades)]) == EXIT_OK
    assert main(["fit", str(trades), "--family", "kummer", "--kummer-order", "0"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("kummer-0:")


def test_bad_inputs_exit_two(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["fit", str(empty)]) == EXIT_INPUT
    assert main(["fit", str(tmp_path / "missing.csv")]) == EXIT_INPUT
    assert main(["batch", str(tmp_path / "nothing")]) == EXIT_INPUT
    assert main(["synth", "--family", "superposition"]) == EXIT_INPUT
    err = capsys.readouterr().err
    assert "EmptyInput" in err or "empty" in err.lower()


def test_unknown_family_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["fit", "x.csv", "--family", "gaussian"])
    assert info.value.code == 2


def test_batch(tmp_path, capsys):
    folder = tmp_path / "in"
    folder.mkdir()
    for seed in range(3):
        main(["synth", "--noise", "0.05", "--seed", str(seed), "--out", str(folder / f"s{seed}.csv")])
    (folder / "broken.csv").write_text("price,volume\nabc,1\n")
    out = tmp_path / "batch.csv"
    assert main(["batch", str(folder), "--jobs", "1", "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[-1].startswith("# significant_fraction=0.750000")
    rows = list(csv.DictReader(lines[:-1]))
    assert [r["status"] for r in rows] == ["error", "ok", "ok", "ok"]
    assert all(r["schema_version"] == "1" for r in rows)
    assert "3/4 samples significant" in capsys.readouterr().out


def test_batch_all_failing_is_computation_error(tmp_path):
    folder = tmp_path / "in"
    folder.mkdir()
    (folder / "bad.csv").write_text("price,volume\nabc,1\n")
    assert main(["batch", str(folder), "--jobs", "1", "--out", str(tmp_path / "o.csv")]) == EXIT_COMPUTE


def test_oracle_modes(tmp_path, capsys):
    out = tmp_path / "o.json"
    assert main(["oracle", "--mode", "bessel", "--omega", "2", "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text())["max_abs_residual"] < 1e-6
    assert main(["oracle", "--mode", "eigen", "--m", "1", "--E", "3"]) == EXIT_OK
    assert "A_1 = " in capsys.readouterr().out
    assert main(["oracle", "--mode", "kummer", "--m", "1", "--E", "-1"]) == EXIT_INPUT


def test_dynamics(tmp_path, capsys):
    trades = synth_file(tmp_path)
    fit_json = tmp_path / "fit.json"
    main(["fit", str(trades), "--family", "bessel", "--out", str(fit_json)])
    out = tmp_path / "dyn.csv"
    assert main(["dynamics", "--in", str(fit_json), "--trades", str(trades), "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# schema_version=1")
    assert lines[1].startswith("price,") and len(lines) == 63
    kummer = tmp_path / "k.json"
    main(["fit", str(trades), "--family", "kummer", "--out", str(kummer)])
    assert main(["dynamics", "--in", str(kummer), "--trades", str(trades)]) == EXIT_INPUT
    assert "NotBesselFit" in capsys.readouterr().err
