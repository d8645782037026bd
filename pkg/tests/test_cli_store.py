import json
import os

import numpy as np
import pytest
from click.testing import CliRunner

from extremal_lab.cli import main
from extremal_lab.config import CACHE_ENV, RunConfig, Tolerances
from extremal_lab.errors import InvalidConfig
from extremal_lab.minima import candidates_dual, default_grid, profile
from extremal_lab.store import (CandidateCache, atomic_write_text, profile_text, read_profile,
                                rows_csv, write_plot_data, write_profile)

SMALL = ["--zeta", "fib:1,2", "--n", "2", "--q-max", "6", "--bits", "256"]


@pytest.fixture
def runner():
    return CliRunner()


def test_config_defaults_validate():
    cfg = RunConfig().validate()
    assert cfg.q_max == 60 and cfg.precision_bits == 2048 and cfg.tolerances == Tolerances()


@pytest.mark.parametrize("field,value,message", [
    ("q_max", -1.0, "q_max must be positive"),
    ("grid_step", 0.0, "grid_step must be positive"),
    ("precision_bits", 64, "precision_bits must be at least 128"),
    ("n", 5, "n must be in 1..4"),
    ("backend", "magic", "unknown backend"),
])
def test_config_rejects(field, value, message):
    with pytest.raises(InvalidConfig) as exc:
        RunConfig.from_sources(None, **{field: value})
    assert exc.value.message == message
    assert exc.value.to_dict()["code"] == "invalid-config"


def test_config_file_merge(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"n": 2, "q_max": 30, "tolerances": {"tol_eq": 0.05}}))
    cfg = RunConfig.from_sources(p, q_max=40.0, eps_band=0.2)
    assert (cfg.n, cfg.q_max) == (2, 40.0)
    assert cfg.tolerances.tol_eq == 0.05 and cfg.tolerances.eps_band == 0.2
    p.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(InvalidConfig):
        RunConfig.from_sources(p)
    with pytest.raises(InvalidConfig):
        RunConfig.from_sources(None, tol_eq=-1.0)


def test_config_key_ignores_output_fields():
    a, b = RunConfig(), RunConfig(out_dir="elsewhere", output_format="json")
    assert a.key() == b.key()
    assert a.key() != RunConfig(q_max=61).key()


def test_cache_dir_env_override(monkeypatch, tmp_path):
    monkeypatch.setenv(CACHE_ENV, str(tmp_path))
    assert RunConfig(cache_dir="/nowhere").resolved_cache_dir() == tmp_path


@pytest.fixture(scope="module")
def small_profile(fib_ctx):
    return profile(candidates_dual(fib_ctx, 2, 50, "brute"), default_grid(5.0), allow_missing=True,
                   zeta_spec="fib:1,2", bits=2048)


def test_profile_file_roundtrip(tmp_path, small_profile):
    p = tmp_path / "prof.csv"
    write_profile(small_profile, p)
    back = read_profile(p)
    assert back.n == 2 and back.side == "dual" and back.zeta_spec == "fib:1,2"
    assert np.allclose(back.grid, small_profile.grid)
    assert np.allclose(back.values, small_profile.values, atol=1e-11)
    assert np.array_equal(back.witnesses, small_profile.witnesses)
    assert profile_text(back).splitlines()[2:] == p.read_text().splitlines()[2:]


def test_plot_series(tmp_path, small_profile):
    files = write_plot_data(small_profile, tmp_path, "s")
    assert [f.name for f in files] == ["s_L1.csv", "s_L2.csv", "s_L3.csv"]
    assert files[0].read_text().startswith("q,L\n0.05,")


def test_rows_csv_fixed_digits():
    assert rows_csv(["a", "b"], [(1, 1 / 3)]) == "a,b\n1,0.333333333333\n"


def test_atomic_write_leaves_no_temp(tmp_path):
    p = tmp_path / "sub" / "f.txt"
    atomic_write_text(p, "one")
    atomic_write_text(p, "two")
    assert p.read_text() == "two"
    assert os.listdir(p.parent) == ["f.txt"]


def test_cache_roundtrip(tmp_path, fib_ctx):
    cache = CandidateCache(tmp_path)
    calls = []

    def build():
        calls.append(1)
        return candidates_dual(fib_ctx, 1, 20, "brute")

    a = cache.get_or_build("k", build)
    b = cache.get_or_build("k", build)
    assert len(calls) == 1
    assert a.vectors == b.vectors and np.array_equal(a.log_error, b.log_error)
    assert a.certified == b.certified
    assert CandidateCache(None).get("k") is None


def test_cli_minima_validation_exit(runner):
    res = runner.invoke(main, ["minima", "--q-max", "-1"])
    assert res.exit_code == 2
    err = json.loads(res.stderr)
    assert err["code"] == "invalid-config" and err["message"] == "q_max must be positive"


def test_cli_computation_error_json(runner, tmp_path):
    res = runner.invoke(main, ["roy", "--zeta", "fib:1,1", "--out", str(tmp_path)])
    assert res.exit_code == 1
    assert json.loads(res.stderr)["code"] == "invalid-spec"


def test_cli_minima_deterministic_and_cached(runner, tmp_path):
    outs = []
    for run in range(3):
        out = tmp_path / f"o{run}"
        args = ["minima", *SMALL, "--side", "dual", "--backend", "structured+reduced",
                "--out", str(out), "--plot-data"]
        if run:
            args += ["--cache-dir", str(tmp_path / "cache")]
        res = runner.invoke(main, args)
        assert res.exit_code == 0, res.stderr
        outs.append(out)
    names = sorted(os.listdir(outs[0]))
    assert "profile_dual_n2.csv" in names and "profile_dual_n2.json" in names
    assert "profile_dual_n2_L3.csv" in names
    assert len(os.listdir(tmp_path / "cache")) == 1
    for name in names:
        ref = (outs[0] / name).read_bytes()
        assert all((o / name).read_bytes() == ref for o in outs[1:])
    data = json.loads((outs[0] / "profile_dual_n2.json").read_text())
    assert len(data["L"]) == 3 and len(data["q"]) == 120


def test_cli_exponents_and_roy(runner, tmp_path):
    res = runner.invoke(main, ["exponents", "--zeta", "fib:1,2", "--n", "2", "--q-max", "40",
                               "--out", str(tmp_path)])
    assert res.exit_code == 0, res.stderr
    rep = json.loads((tmp_path / "exponents_n2.json").read_text())
    assert len(rep["w"]) == 3
    assert (tmp_path / "transference_n2.csv").read_text().startswith("check,lower,value,upper,pass")
    res = runner.invoke(main, ["roy", "--h-max", "1000000", "--out", str(tmp_path)])
    assert res.exit_code == 0, res.stderr
    roy = json.loads((tmp_path / "roy.json").read_text())
    assert [r["height"] for r in roy][:4] == [2, 3, 13, 68]


def test_cli_segments_needs_n3(runner, tmp_path):
    res = runner.invoke(main, ["segments", "--n", "2", "--out", str(tmp_path)])
    assert res.exit_code == 2


def test_cli_cubic(runner, tmp_path):
    res = runner.invoke(main, ["cubic", "--h-max", str(10**40), "--generations", "3",
                               "--out", str(tmp_path)])
    assert res.exit_code == 0, res.stderr
    ws = json.loads((tmp_path / "cubic_witnesses.json").read_text())
    assert ws and all(len(w["coeffs"]) == 4 for w in ws)
    assert (tmp_path / "cubic_summary.csv").exists() and (tmp_path / "cubic_scan.json").exists()
