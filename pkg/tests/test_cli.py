import os

import pytest

from shockhash import cli
from shockhash.keys import synthetic_keys


def run(argv):
    return cli.main(argv)


def test_build_and_verify_synthetic(tmp_path, capsys):
    out = tmp_path / "d.mph"
    assert run(["build", "--synthetic", "2000", "--b", "200", "--n", "16", "--out", str(out)]) == cli.EXIT_OK
    text = capsys.readouterr().out
    assert "keys: 2000" in text
    assert "bits/key" in text
    assert run(["verify", str(out), "--synthetic", "2000"]) == cli.EXIT_OK
    assert "verified: 2000" in capsys.readouterr().out


def test_build_and_verify_file(tmp_path, capsys):
    keyfile = tmp_path / "keys.txt"
    keyfile.write_bytes(b"\n".join(synthetic_keys(500, 3)) + b"\n")
    out = tmp_path / "d.mph"
    assert run(["build", "--input", str(keyfile), "--b", "100", "--n", "12", "--out", str(out)]) == cli.EXIT_OK
    assert run(["verify", str(out), "--input", str(keyfile)]) == cli.EXIT_OK
    capsys.readouterr()


def test_verify_wrong_keys_fails(tmp_path, capsys):
    out = tmp_path / "d.mph"
    run(["build", "--synthetic", "500", "--out", str(out), "--n", "12", "--b", "100"])
    # different generator seed -> different key set, same count
    rc = run(["verify", str(out), "--synthetic", "500", "--gen-seed", "1"])
    assert rc == cli.EXIT_VERIFY
    rc = run(["verify", str(out), "--synthetic", "400"])
    assert rc == cli.EXIT_VERIFY
    capsys.readouterr()


def test_verify_bit_flip_fails(tmp_path, capsys):
    out = tmp_path / "d.mph"
    run(["build", "--synthetic", "1000", "--out", str(out), "--n", "16", "--b", "100"])
    blob = bytearray(out.read_bytes())
    # flip one bit in the middle of the seed stream
    blob[len(blob) // 2] ^= 0x10
    out.write_bytes(bytes(blob))
    assert run(["verify", str(out), "--synthetic", "1000"]) == cli.EXIT_VERIFY
    capsys.readouterr()


def test_duplicate_keys_exit_code(tmp_path, capsys):
    keyfile = tmp_path / "keys.txt"
    keyfile.write_bytes(b"aaa\nbbb\naaa\n")
    rc = run(["build", "--input", str(keyfile), "--b", "100", "--n", "8", "--out", str(tmp_path / "d.mph")])
    assert rc == cli.EXIT_DUPLICATE
    assert "duplicate" in capsys.readouterr().err


def test_missing_input_exit_code(tmp_path, capsys):
    rc = run(["build", "--input", str(tmp_path / "missing.txt"), "--out", str(tmp_path / "d.mph")])
    assert rc == cli.EXIT_IO
    capsys.readouterr()


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as ei:
        run(["build", "--synthetic", "10"])  # missing --out
    assert ei.value.code == cli.EXIT_USAGE
    capsys.readouterr()


def test_bad_leaf_size_exit_code(tmp_path, capsys):
    rc = run(["build", "--synthetic", "100", "--n", "80", "--b", "100", "--out", str(tmp_path / "d")])
    assert rc == cli.EXIT_USAGE
    capsys.readouterr()


def test_experiment_trials_csv(tmp_path, capsys):
    csvf = tmp_path / "t.csv"
    rc = run(["experiment", "trials", "--n", "4..6", "--reps", "50", "--csv", str(csvf)])
    assert rc == cli.EXIT_OK
    out = capsys.readouterr().out
    assert out.splitlines()[0].startswith("n,mode,reps")
    lines = csvf.read_text().strip().splitlines()
    assert len(lines) == 3  # header + n=4 + n=6


def test_experiment_enumerate(capsys):
    rc = run(["experiment", "enumerate", "--n", "1..3..1"])
    assert rc == cli.EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("n,pf_probability")
    assert len(out) == 4


def test_experiment_filter(capsys):
    rc = run(["experiment", "filter", "--n", "8", "--trials", "2000"])
    assert rc == cli.EXIT_OK
    capsys.readouterr()


def test_experiment_component(capsys):
    rc = run(["experiment", "component", "--n", "8", "--trials", "2000"])
    assert rc == cli.EXIT_OK
    capsys.readouterr()


def test_bad_range(capsys):
    rc = run(["experiment", "trials", "--n", "9..5", "--reps", "10"])
    assert rc == cli.EXIT_USAGE
    capsys.readouterr()


def test_bench(capsys):
    rc = run(["bench", "--n", "10", "--reps", "5"])
    assert rc == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "backend,op,n,reps" in out
