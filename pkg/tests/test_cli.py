# -*- coding: utf-8 -*-
import json
import math
from pathlib import Path
from unittest.mock import patch
import pandas as pd
import pytest
from pellmoments.checks import CheckResult
from pellmoments.cli import (
    EXIT_INVARIANT,
    EXIT_OK,
    EXIT_VALIDATION,
    RunConfig,
    main,
    parse_args,
    run,
)
from conftest import RUN10_TRIPLES
from pellmoments.pell import EnumerationRun, cache_read, cache_write
from pellmoments.util import ValidationError

__author__ = "pellmoments developers"
__copyright__ = "Copyright (c) 2020 pellmoments developers"
__license__ = "mit"


def test_parse_args_defaults():
    namespace = parse_args(["density"])
    assert namespace.command == "density"
    assert namespace.x == 10**4
    assert namespace.tau_grid == [1.0, 1.3, 1.6]
    assert namespace.mode == "auto"
    assert namespace.timings
    assert namespace.loglevel is None


def test_parse_args_options():
    namespace = parse_args(["tail", "--x", "500", "--tau", "0.8", "1.2", "--no-timings", "-q", "--cache", "c.txt"])
    assert namespace.x == 500
    assert namespace.tau_grid == [0.8, 1.2]
    assert not namespace.timings
    assert namespace.cache_path == Path("c.txt")


def test_parse_args_rejects_bad_values():
    for args in (["density", "--mode", "guess"], ["nonsense"], [], ["density", "--x", "ten"]):
        with pytest.raises(SystemExit) as info:
            parse_args(args)
        assert info.value.code == EXIT_VALIDATION


def test_version():
    with pytest.raises(SystemExit) as info:
        parse_args(["--version"])
    assert info.value.code == 0


def test_run_config_validate():
    assert RunConfig("density").validate().x == 10**4
    bad = [
        RunConfig("density", x=2),
        RunConfig("density", x=10**8),
        RunConfig("density", k=-1),
        RunConfig("density", m=0),
        RunConfig("density", y=1),
        RunConfig("tail", tau_grid=[1.0, 0.3]),
        RunConfig("density", threads=0),
        RunConfig("density", output="xml"),
        RunConfig("density", mode="guess"),
        RunConfig("density", P=999),
        RunConfig("constants", k=20, P=2000),
        RunConfig("charsum-verify", m_max=0),
        RunConfig("plot"),
    ]
    for config in bad:
        with pytest.raises(ValidationError):
            config.validate()


def test_report_path(tmp_path):
    assert RunConfig("density").report_path() == Path("density.csv")
    assert RunConfig("density", output="json").report_path("_ni") == Path("density_ni.json")
    config = RunConfig("charsum-verify", out_path=tmp_path / "cs.csv")
    assert config.report_path("_ni") == tmp_path / "cs_ni.csv"


def test_enumerate(tmp_path, run10, capsys):
    out = tmp_path / "run10.cache"
    assert main(["enumerate", "--x", "10", "--out", str(out)]) == EXIT_OK
    assert cache_read(out) == run10
    assert "10 discriminants" in capsys.readouterr().out


def test_density(tmp_path, run200):
    out = tmp_path / "density.csv"
    assert main(["density", "--x", "200", "--out", str(out)]) == EXIT_OK
    df = pd.read_csv(out)
    assert list(df.columns) == ["x", "count", "pairs", "non_fundamental", "large_u", "density", "predicted"]
    assert df["count"][0] == len(run200)
    assert df["pairs"][0] == run200.pair_count
    assert df["density"][0] == pytest.approx(len(run200) / 200)
    assert df["predicted"][0] == 2.1875


def test_density_uses_cache(tmp_path, run200):
    cache = tmp_path / "run200.cache"
    cache_write(run200, cache)
    with patch("pellmoments.cli.enumerate_run", side_effect=AssertionError("cache ignored")):
        assert main(["density", "--x", "200", "--cache", str(cache), "--out", str(tmp_path / "d.csv")]) == EXIT_OK
        args = ["density", "--x", "300", "--cache", str(cache), "--out", str(tmp_path / "e.csv")]
        assert main(args) == EXIT_VALIDATION


def test_density_cache_without_pairs(tmp_path, caplog):
    cache = cache_write(EnumerationRun.from_triples(10, RUN10_TRIPLES, None), tmp_path / "run10.cache")
    out = tmp_path / "density.csv"
    assert main(["density", "--x", "10", "--cache", str(cache), "--out", str(out)]) == EXIT_OK
    df = pd.read_csv(out)
    assert df["count"][0] == 10
    assert pd.isna(df["pairs"][0])
    assert pd.isna(df["non_fundamental"][0])
    assert "no pair count" in caplog.text
    out = tmp_path / "density.json"
    assert main(["density", "--x", "10", "--cache", str(cache), "--output", "json", "--out", str(out)]) == EXIT_OK
    row = json.loads(out.read_text())[0]
    assert row["pairs"] is None
    assert row["non_fundamental"] is None


def test_density_non_ascii_cache(tmp_path, run10):
    cache = cache_write(run10, tmp_path / "run10.cache")
    cache.write_bytes(cache.read_bytes().replace(b"21,5,1", b"21,5,1\xe9"))
    assert main(["density", "--x", "10", "--cache", str(cache), "--out", str(tmp_path / "d.csv")]) == EXIT_VALIDATION


def test_density_writes_cache(tmp_path, run200):
    cache = tmp_path / "fresh.cache"
    assert main(["density", "--x", "200", "--cache", str(cache), "--out", str(tmp_path / "d.csv")]) == EXIT_OK
    assert cache_read(cache) == run200


def test_invalid_x_exits_1(tmp_path):
    assert main(["density", "--x", "2", "--out", str(tmp_path / "d.csv")]) == EXIT_VALIDATION
    assert not (tmp_path / "d.csv").exists()


def test_moments_is_deterministic(tmp_path, run200):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (first, second):
        args = ["moments", "--x", "200", "--k", "1", "--mode", "exact", "--no-timings", "--out", str(out)]
        assert main(args) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    df = pd.read_csv(first)
    assert df["exact_h_count"][0] == len(run200)
    assert df["formula_h_count"][0] == 0
    assert df["seconds"][0] == 0


def test_moments_json(tmp_path):
    out = tmp_path / "moments.json"
    assert main(["moments", "--x", "200", "--k", "0", "--output", "json", "--out", str(out)]) == EXIT_OK
    rows = json.loads(out.read_text())
    assert rows[0]["k"] == 0
    assert rows[0]["predicted"] == pytest.approx(2.1875 * 200, rel=1e-10)


def test_twisted(tmp_path):
    out = tmp_path / "twisted.csv"
    assert main(["twisted", "--x", "200", "--k", "0", "--m", "3", "--out", str(out)]) == EXIT_OK
    df = pd.read_csv(out)
    assert df["m"][0] == 3
    assert df["predicted"][0] == pytest.approx(-7 / 12 * 200, rel=1e-10)


def test_charsum_verify(tmp_path):
    out = tmp_path / "cs.csv"
    args = ["charsum-verify", "--m-max", "12", "--u-max", "3", "--ni-u-max", "20", "--out", str(out)]
    assert main(args) == EXIT_OK
    assert pd.read_csv(out)["match"].all()
    assert len(pd.read_csv(tmp_path / "cs_ni.csv")) == 20


def test_charsum_verify_counterexample(tmp_path, capsys):
    bad = pd.DataFrame(
        [(1, 3, 1, 1, 1, 0, False)],
        columns=["m", "a", "u", "closed_num", "closed_den", "brute", "match"],
    )
    with patch("pellmoments.cli.verify_grid", return_value=bad):
        args = ["charsum-verify", "--ni-u-max", "4", "--out", str(tmp_path / "cs.csv")]
        assert main(args) == EXIT_INVARIANT
    assert "counterexample" in capsys.readouterr().out


def test_constants(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["constants", "--k", "0", "--out", str(out)]) == EXIT_OK
    df = pd.read_csv(out)
    assert list(df.columns) == ["k", "C", "H", "logH", "logH_asymp", "residual", "tail_bound", "P"]
    assert df["C"][0] == pytest.approx(35 / 16, abs=1e-10)
    assert pd.isna(df["H"][0])
    assert main(["constants", "--k", "12", "--P", "2000", "--out", str(out)]) == EXIT_OK
    df = pd.read_csv(out)
    assert df["P"][0] == 2000
    assert df["logH"][0] > 0
    assert not pd.isna(df["logH_asymp"][0])
    assert df["residual"][0] == pytest.approx((df["logH"][0] - df["logH_asymp"][0]) * math.log(12) ** 2 / 12, abs=1e-9)
    assert main(["constants", "--k", "20", "--P", "2000", "--out", str(out)]) == EXIT_VALIDATION


def test_tail(tmp_path):
    out = tmp_path / "tail.csv"
    assert main(["tail", "--x", "2000", "--mode", "exact", "--tau", "0.5", "1.0", "--out", str(out)]) == EXIT_OK
    df = pd.read_csv(out)
    assert df["tau"].tolist() == [0.5, 1.0]
    assert (df["total"] > 0).all()


def test_extremes(tmp_path):
    out = tmp_path / "extremes.csv"
    assert main(["extremes", "--x", "2000", "--mode", "exact", "--top", "5", "--out", str(out)]) == EXIT_OK
    df = pd.read_csv(out)
    assert df["rank"].tolist() == [1, 2, 3, 4, 5]


def test_selftest_failure_exits_2(capsys):
    failing = [CheckResult("arith.examples", True, "9 values", 0.0), CheckResult("pell.examples", False, "broken", 0.0)]
    with patch("pellmoments.cli.run_selftest", return_value=failing):
        assert run(RunConfig("selftest")) == EXIT_INVARIANT
    out = capsys.readouterr().out
    assert "FAIL pell.examples" in out
    assert "counterexample: pell.examples" in out
