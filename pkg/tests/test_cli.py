import json
import math
import time
from pathlib import Path

import pytest

from risbeam.cli import main
from risbeam.config import build_config, defaults, parse_text, validate_config
from risbeam.experiments import PRESETS, ExperimentSpec, parse_sweep, run_preset

ROOT = Path(__file__).resolve().parents[1]
DEFAULT_CFG = ROOT / "configs" / "default.cfg"


def _write(tmp_path, text, name="s.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_default_config_validates():
    ec, errors = validate_config(DEFAULT_CFG)
    assert errors == [] and ec is not None
    echo = ec.echo()
    assert echo["derived.wavelength_m"] == pytest.approx(0.010707, abs=1e-6)
    assert echo["derived.estimation_overhead_s"] == pytest.approx(40e-6)


def test_default_file_matches_builtin_defaults():
    ec, _ = validate_config(DEFAULT_CFG)
    assert ec.values == build_config({})[0].values


def test_pinned_scenario_defaults():
    ec, _ = validate_config(DEFAULT_CFG)
    v = ec.values
    assert v["system.carrier_frequency"] == 28e9
    assert v["system.tx_power"] == 15.0
    assert v["system.num_bs_antennas"] == 16
    assert v["system.num_unit_cells"] == 3600
    assert v["channel.K_i"] == v["channel.K_r"] == 4
    assert v["channel.C_i"] == v["channel.C_r"] == 6
    assert v["timing.frame_factor"] == 0.15
    assert ec.timing.estimation_overhead == pytest.approx(40 * ec.timing.pilot_symbol_duration)
    assert ec.timing.feedback_delay == pytest.approx(1e-4)
    for preset in PRESETS:
        if preset != "custom":
            assert ExperimentSpec(preset=preset).config.values == v


def test_units_normalized(tmp_path):
    p = _write(tmp_path, "timing.velocity = 36 km/h\ntiming.feedback_delay = 250 us\nsystem.carrier_frequency = 30 GHz\n")
    ec, errors = validate_config(p)
    assert not errors
    assert ec.timing.velocity == pytest.approx(10.0)
    assert ec.timing.feedback_delay == pytest.approx(250e-6)
    assert ec.system.wavelength == pytest.approx(299792458 / 30e9)


def test_non_square_q(tmp_path):
    _, errors = validate_config(_write(tmp_path, "system.num_unit_cells = 3601\n"))
    assert any("Q must be a perfect square" in e for e in errors)


def test_negative_tau_names_key(tmp_path):
    _, errors = validate_config(_write(tmp_path, "timing.ris_response_time = -1 us\n"))
    assert any("timing.ris_response_time" in e for e in errors)


def test_errors_are_exhaustive(tmp_path):
    text = "system.num_unit_cells = 3601\ntiming.ris_response_time = -1 us\nbogus.key = 3\ntiming.velocity = 3 furlongs\n"
    _, errors = validate_config(_write(tmp_path, text))
    assert len(errors) == 4
    assert any("unknown key" in e for e in errors)
    assert any("unit" in e for e in errors)


def test_parse_text_comments_and_blank_lines():
    values, errors = parse_text("# comment\n\ncodebook.L = 3  # levels\n")
    assert errors == [] and values == {"codebook.L": 3}


def test_sweep_parsing():
    key, vals = parse_sweep("timing.ris_response_time=1 us:1 ms:4:log")
    assert key == "timing.ris_response_time"
    assert vals == pytest.approx([1e-6, 1e-5, 1e-4, 1e-3])
    assert parse_sweep("codebook.L=1:3:3")[1] == [1, 2, 3]
    for bad in ("timing.velocity=1:2:0", "nope=1:2:3", "timing.velocity", "timing.velocity=1:2:3:lin"):
        with pytest.raises(ValueError):
            parse_sweep(bad)


def test_empty_sweep_writes_nothing(tmp_path):
    out = tmp_path / "out"
    assert main(["--sweep", "timing.velocity=1:2:0", "--out", str(out), "--quiet"]) == 2
    assert not out.exists()


def test_custom_without_sweep_rejected(tmp_path):
    assert main(["--out", str(tmp_path / "o"), "--quiet"]) == 2


def test_bad_config_exit_code(tmp_path, capsys):
    p = _write(tmp_path, "system.num_unit_cells = 3601\n")
    assert main(["--config", str(p), "--validate"]) == 2
    assert "perfect square" in capsys.readouterr().err


def test_validate_echo(capsys):
    assert main(["--config", str(DEFAULT_CFG), "--validate"]) == 0
    out = capsys.readouterr().out
    assert "derived.wavelength_m" in out and "system.num_unit_cells = 3600" in out


def test_unknown_strategy(tmp_path):
    assert main(["--preset", "fig4_overhead_bound", "--strategies", "fs,xs", "--out", str(tmp_path), "--quiet"]) == 2


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["--preset", "fig4_overhead_bound", "--out", str(blocker / "sub"), "--quiet"]) == 3


def test_fig4_fast_and_analytic(tmp_path):
    t0 = time.perf_counter()
    assert main(["--preset", "fig4_overhead_bound", "--out", str(tmp_path), "--quiet"]) == 0
    assert time.perf_counter() - t0 < 1.0
    report = json.loads((tmp_path / "fig4_overhead_bound_report.json").read_text())
    assert {c["id"] for c in report["criteria"]} >= {"4_vbar_tau1us", "4_vbar_tau1ms"}
    csvs = sorted(tmp_path.glob("fig4_overhead_bound_*.csv"))
    assert csvs
    for path in csvs:
        header = path.read_text().splitlines()[0].split(",")
        assert len(header) == 3 and header[2] == "half_width"


def _small_custom(tmp_path, name):
    cfg = _write(tmp_path, "codebook.L = 2\nsim.max_frames = 3\nsim.draws = 2\nsim.pilots = 2\n", name + ".cfg")
    out = tmp_path / name
    rc = main(["--config", str(cfg), "--sweep", "timing.ris_response_time=1 us:1 ms:3:log",
               "--out", str(out), "--seed", "5", "--quiet"])
    assert rc == 0
    return {p.name: p.read_bytes() for p in sorted(out.iterdir())}


def test_reruns_byte_identical(tmp_path):
    a = _small_custom(tmp_path, "a")
    b = _small_custom(tmp_path, "b")
    assert a == b
    assert "custom_rate_FS.csv" in a and "custom_report.json" in a
    rows = a["custom_rate_FS.csv"].decode().splitlines()
    assert rows[0] == "timing.ris_response_time,R_eff,half_width" and len(rows) == 4


def test_strict_mode_flags_infeasible(tmp_path):
    cfg = _write(tmp_path, "codebook.L = 2\nsim.max_frames = 2\nsim.draws = 1\nsim.pilots = 1\n"
                           "timing.velocity = 200 km/h\n")
    args = ["--config", str(cfg), "--sweep", "timing.ris_response_time=5 ms:10 ms:2", "--strategies", "fs",
            "--out", str(tmp_path / "o"), "--quiet"]
    assert main(args) == 0
    assert main(args + ["--strict"]) == 4
