"""Command-line surface: artifacts, exit codes, rendering."""

import json
import math

import numpy as np
import pytest

from nestedmz import __version__
from nestedmz._config import merge_settings, serialize_settings
from nestedmz.cli import main, render_spectrum, run_scenario
from nestedmz.errors import DomainError
from nestedmz.weakmeas import PowerSpectrum

# 2048 samples at 8192 Hz -> 4 Hz bins; every tone stays bin-centered
FAST_CONFIG = """\
plan.n_samples = 2048
dither.A.frequency = 280.0
dither.B.frequency = 296.0
dither.C.frequency = 308.0
dither.E.frequency = 320.0
dither.F.frequency = 332.0
"""


@pytest.fixture()
def fast_config(tmp_path):
    path = tmp_path / "fast.cfg"
    path.write_text(FAST_CONFIG, encoding="utf-8")
    return path


def _run(tmp_path, fast_config, scenario, *extra):
    out = tmp_path / scenario.replace(":", "_")
    rc = main(
        ["run", scenario, "--config", str(fast_config), "--out", str(out), *extra]
    )
    return rc, out


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_scenarios_listing(capsys):
    assert main(["scenarios"]) == 0
    out = capsys.readouterr().out
    for name in (
        "aligned",
        "destructive",
        "gap",
        "blocked:",
        "dce-whichway",
        "dce-bothways",
        "ti-weights",
        "firstorder-check",
    ):
        assert name in out


def test_unknown_scenario_exits_2(capsys):
    assert main(["run", "mystery", "--out", "/tmp/unused-nmz"]) == 2
    assert "error:" in capsys.readouterr().err


def test_missing_config_exits_2(tmp_path, capsys):
    rc = main(
        ["run", "gap", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path)]
    )
    assert rc == 2
    assert "cannot read config" in capsys.readouterr().err


def test_malformed_config_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("sigma == 1\n", encoding="utf-8")
    rc = main(["run", "gap", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 2
    assert "line 1" in capsys.readouterr().err


def test_infeasible_plan_exits_3(tmp_path, capsys):
    cfg = tmp_path / "nyq.cfg"
    cfg.write_text("dither.A.frequency = 5000.0\n", encoding="utf-8")
    rc = main(["run", "destructive", "--config", str(cfg), "--out", str(tmp_path)])
    assert rc == 3
    assert "error:" in capsys.readouterr().err


def test_run_destructive_artifacts(tmp_path, fast_config, capsys):
    rc, out = _run(tmp_path, fast_config, "destructive")
    assert rc == 0
    stdout = capsys.readouterr().out
    assert "scenario      destructive" in stdout

    report = json.loads((out / "report.json").read_text())
    assert report["scenario"] == "destructive"
    assert report["tool_version"] == __version__
    assert report["csv_schema_version"] == 1
    assert report["csv_schemas"]["spectrum.csv"] == "freq_hz,power"
    assert report["verdicts"] == {
        "A": "present",
        "B": "present",
        "C": "present",
        "E": "absent",
        "F": "absent",
    }
    assert report["reference_mirror"] in {"A", "B", "C"}
    assert len(report["input_digest"]) == 64

    ts = (out / "timeseries.csv").read_text().splitlines()
    assert ts[0] == "t,signal"
    assert len(ts) == 1 + 2048
    sp = (out / "spectrum.csv").read_text().splitlines()
    assert sp[0] == "freq_hz,power"
    assert len(sp) == 1 + 1025

    cfg_text = (out / "effective_config.cfg").read_text()
    assert merge_settings(None, cfg_text) is not None


def test_effective_config_round_trips(tmp_path, fast_config):
    _, out = _run(tmp_path, fast_config, "gap")
    text = (out / "effective_config.cfg").read_text()
    settings = merge_settings(None, text)
    assert serialize_settings(settings) == text


def test_gap_scenario_only_outer_signal(tmp_path, fast_config):
    rc, out = _run(tmp_path, fast_config, "gap")
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert report["verdicts"] == {
        "A": "absent",
        "B": "absent",
        "C": "present",
        "E": "absent",
        "F": "absent",
    }


def test_blocked_scenario_suppresses_one_mirror(tmp_path, fast_config):
    rc, out = _run(tmp_path, fast_config, "blocked:B-out")
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert report["verdicts"]["B"] == "absent"
    for m in ("A", "C", "E", "F"):
        assert report["verdicts"][m] == "present"


def test_threshold_override_flags_everything(tmp_path, fast_config):
    rc, out = _run(tmp_path, fast_config, "destructive", "--threshold-db", "-150")
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert all(v == "present" for v in report["verdicts"].values())
    assert report["effective_config"]["threshold_db"] == "-150.0"


def test_detector_override_recorded(tmp_path, fast_config):
    rc, out = _run(tmp_path, fast_config, "destructive", "--detector", "quadcell")
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert report["detector"] == "quadcell"
    assert report["verdicts"]["A"] == "present"
    assert report["verdicts"]["E"] == "absent"


def test_repeat_runs_byte_identical(tmp_path, fast_config):
    _, first = _run(tmp_path, fast_config, "destructive")
    out2 = tmp_path / "again"
    rc = main(
        [
            "run",
            "destructive",
            "--config",
            str(fast_config),
            "--out",
            str(out2),
        ]
    )
    assert rc == 0
    for name in ("timeseries.csv", "spectrum.csv", "report.json", "effective_config.cfg"):
        assert (first / name).read_bytes() == (out2 / name).read_bytes()


def test_whichway_run(tmp_path, fast_config):
    rc, out = _run(tmp_path, fast_config, "dce-whichway")
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert report["weights"]["A"] == pytest.approx(0.5, abs=1e-12)
    assert report["weights"]["B"] == pytest.approx(0.5, abs=1e-12)
    assert report["born_rule_deviation"] < 1e-12
    tx = json.loads((out / "transactions.json").read_text())
    assert [t["absorber"] for t in tx] == ["A", "B"]
    assert all("projector_diagonal" in t for t in tx)


def test_bothways_run(tmp_path, fast_config):
    rc, out = _run(tmp_path, fast_config, "dce-bothways")
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert report["n_screen_points"] == 64
    assert report["total_weight"] == pytest.approx(1.0, abs=1e-10)
    assert report["visibility"] == pytest.approx(1.0, abs=1e-10)


def test_ti_weights_run(tmp_path, fast_config):
    rc, out = _run(tmp_path, fast_config, "ti-weights")
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert report["port_weights"]["D"] == pytest.approx(1 / 9, abs=1e-12)
    assert report["port_weights"]["dark_outer"] == pytest.approx(2 / 9, abs=1e-12)
    assert report["port_weights"]["dark_inner"] == pytest.approx(2 / 3, abs=1e-12)
    assert report["weak_values"]["A"] == [pytest.approx(1.0), pytest.approx(0.0)]
    assert report["weak_values"]["B"] == [pytest.approx(-1.0), pytest.approx(0.0)]
    assert report["weak_values"]["E"] == [pytest.approx(0.0), pytest.approx(0.0)]


def test_firstorder_run(tmp_path, fast_config):
    rc, out = _run(tmp_path, fast_config, "firstorder-check")
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert len(report["kappa_levels"]) == 3
    assert len(report["ratios"]) == 2
    rows = (out / "convergence.csv").read_text().splitlines()
    assert rows[0] == "kappa_max,discrepancy,ratio"
    assert len(rows) == 4
    # each halving of the tilt shrinks the discrepancy
    d = report["discrepancies"]
    assert d[0] > d[1] > d[2] > 0.0


def test_render_from_artifacts(tmp_path, fast_config, capsys):
    _, out = _run(tmp_path, fast_config, "destructive")
    capsys.readouterr()
    rc = main(
        [
            "render",
            str(out / "spectrum.csv"),
            "--config",
            str(out / "effective_config.cfg"),
        ]
    )
    assert rc == 0
    chart = capsys.readouterr().out
    lines = chart.splitlines()
    assert "dB" in lines[0]
    assert len(lines) == 6
    for line in lines[1:]:
        assert "Hz" in line and "|" in line
    # three strong verdicts, two deeply suppressed tones
    strong = [ln for ln in lines[1:] if _db_of(ln) > -40.0]
    weak = [ln for ln in lines[1:] if _db_of(ln) <= -80.0]
    assert len(strong) == 3
    assert len(weak) == 2


def _db_of(line: str) -> float:
    if "floor" in line:
        return -math.inf
    return float(line.rsplit(" dB", 1)[0].rsplit(None, 1)[-1])


def test_render_rejects_narrow_width(tmp_path, fast_config, capsys):
    _, out = _run(tmp_path, fast_config, "destructive")
    capsys.readouterr()
    rc = main(["render", str(out / "spectrum.csv"), "--width", "39"])
    assert rc == 3
    assert "width" in capsys.readouterr().err


def test_render_missing_file(tmp_path, capsys):
    rc = main(["render", str(tmp_path / "ghost.csv")])
    assert rc == 2


def test_render_rejects_foreign_csv(tmp_path, capsys):
    bad = tmp_path / "other.csv"
    bad.write_text("a,b\n1,2\n", encoding="utf-8")
    rc = main(["render", str(bad)])
    assert rc == 2
    assert "spectrum" in capsys.readouterr().err


def test_render_spectrum_floor_marks():
    freqs = np.arange(0.0, 2049.0, 4.0)
    power = np.zeros_like(freqs)
    power[70] = 1.0  # 280 Hz
    spec = PowerSpectrum(freqs=freqs, power=power)
    marks = {"A": 280.0, "B": 296.0}
    chart = render_spectrum(spec, marks=marks)
    lines = chart.splitlines()
    assert len(lines) == 3
    a_line = next(ln for ln in lines if ln.lstrip().startswith("A"))
    b_line = next(ln for ln in lines if ln.lstrip().startswith("B"))
    assert "0.0 dB" in a_line
    assert "floor" in b_line


def test_render_spectrum_width_validation():
    spec = PowerSpectrum(freqs=np.array([0.0, 1.0]), power=np.array([0.0, 0.0]))
    with pytest.raises(DomainError):
        render_spectrum(spec, width=10)


def test_run_scenario_api_returns_report(tmp_path):
    settings = merge_settings("ti-weights")
    report = run_scenario(settings, tmp_path / "api")
    assert report["scenario"] == "ti-weights"
    assert (tmp_path / "api" / "report.json").exists()
