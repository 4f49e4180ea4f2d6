import os
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfound.cli import main
from qfound.config import ChshConfig, ConfigError, ThreePolConfig, from_mapping, load_ini, require_valid, validate
from qfound.experiments import grid, run
from qfound.io import ResultTable, config_from_header, format_cell, read_csv, to_csv


def test_imperfectness_above_half_is_rejected():
    problems = validate(ChshConfig(imperfectness=0.7))
    assert "imperfectness must be < 0.5" in problems


def test_zero_pairs_is_rejected():
    assert any("n_pairs" in p for p in validate(ChshConfig(n_pairs=0)))


def test_default_configs_are_valid():
    from qfound.config import CONFIG_TYPES

    for cls in CONFIG_TYPES.values():
        assert validate(cls()) == []


def test_all_violations_are_reported_together():
    c = ChshConfig(imperfectness=0.7, n_pairs=0, realign=2.0, seed=-1)
    problems = validate(c)
    assert len(problems) == 4
    with pytest.raises(ConfigError) as err:
        require_valid(c)
    assert err.value.violations == problems


def test_unknown_field_and_bad_number():
    with pytest.raises(ConfigError):
        from_mapping("chsh-scan", {"nonsense": "1"})
    with pytest.raises(ConfigError):
        from_mapping("chsh-scan", {"n_pairs": "many"})


def test_ini_common_section_and_override():
    text = "[common]\nseed = 5\n[three-pol]\nalpha_step = 30\nmodel = hv\n"
    c = load_ini(text, "three-pol")
    assert isinstance(c, ThreePolConfig)
    assert (c.seed, c.alpha_step, c.model) == (5, 30.0, "hv")


def test_grid_is_inclusive():
    assert grid(0.0, 90.0, 5.0)[-1] == 90.0
    assert len(grid(0.0, 90.0, 5.0)) == 19
    assert grid(0.0, 1.0, 0.1)[-1] == pytest.approx(1.0)


@settings(max_examples=60)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_cells_round_trip_exactly(x):
    assert float(format_cell(x)) == x


def test_ragged_table_is_refused():
    with pytest.raises(ValueError):
        ResultTable(["a", "b"], [(1, 2), (3,)])


def test_header_reproduces_table():
    c = from_mapping("chsh-scan", {"n_pairs": "20000", "seed": "11", "source": "CommonHiddenAngle"})
    text = to_csv(run(c))
    again = config_from_header(text)
    assert again == c
    assert to_csv(run(again)) == text


def test_main_exit_codes(tmp_path, capsys):
    assert main(["chsh-scan", "--set", "imperfectness=0.7", "--set", "n_pairs=0"]) == 2
    err = capsys.readouterr().err
    assert "imperfectness must be < 0.5" in err and "n_pairs" in err
    assert main(["chsh-scan", "--set", "bogus"]) == 2
    assert main(["three-pol", "--config", str(tmp_path / "missing.ini")]) == 2


def test_main_writes_csv_log_and_plot(tmp_path):
    out = tmp_path / "scan.csv"
    assert main(["three-pol", "--set", "alpha_step=15", "--out", str(out), "--emit-plot"]) == 0
    meta, cols, rows = read_csv(out.read_text())
    assert cols == ["alpha", "beta_star", "model", "n", "p_min", "p_copenhagen"]
    assert len(rows) == 7
    assert (tmp_path / "scan.csv.log").read_text().startswith("experiment = three-pol")
    gp = (tmp_path / "scan.gp").read_text()
    assert "multiplot" in gp and "scan.csv" in gp
    # the header must not depend on where the file was written
    assert not any("out =" in m for m in meta)


def test_chsh_example_reaches_tsirelson(tmp_path):
    out = tmp_path / "chsh.csv"
    assert main(["chsh-scan", "--seed", "3", "--set", "n_pairs=200000", "--out", str(out)]) == 0
    _, cols, rows = read_csv(out.read_text())
    b = dict((r[0], r) for r in rows)["B"]
    value, se = b[cols.index("value")], b[cols.index("stderr")]
    assert abs(value - 2 * 2**0.5) < 4 * se


def test_bohm_identity_example(tmp_path):
    out = tmp_path / "id.csv"
    assert main(["bohm", "--set", "mode=identity", "--out", str(out)]) == 0
    _, cols, rows = read_csv(out.read_text())
    dev = [r[cols.index("max_deviation")] for r in rows]
    assert dev[0] < 1e-5 and max(dev) < 1e-4


def _cli(args, threads, cwd):
    env = dict(os.environ, QFOUND_THREADS=str(threads))
    return subprocess.run([sys.executable, "-m", "qfound.cli", *args], env=env, cwd=cwd, capture_output=True, check=True)


@pytest.mark.parametrize(
    "args",
    [
        ["chsh-scan", "--seed", "9", "--set", "n_pairs=150000", "--set", "source=CommonHiddenAngle"],
        ["three-pol", "--set", "model=hv", "--set", "alpha_step=30", "--set", "n_photons=20000"],
    ],
)
def test_output_is_byte_identical_across_runs_and_threads(args, tmp_path):
    a = _cli(args, 1, tmp_path).stdout
    b = _cli(args, 4, tmp_path).stdout
    c = _cli(args, 4, tmp_path).stdout
    assert a == b == c
