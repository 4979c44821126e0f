"""Scenario runner: named presets, CSV/JSON artifacts, ASCII spectra.

Every run resolves to one canonical flat config whose SHA-256 is the
run's identity; artifacts are plain text with fixed schemas so repeated
runs are byte-identical and diff-friendly.

    nestedmz run destructive --out results/
    nestedmz render results/spectrum.csv
    nestedmz scenarios
"""

import argparse
import csv
import hashlib
import json
import math
import sys
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import __version__
from ._config import (
    DEFAULT_FREQUENCIES,
    SCENARIO_DCE_BOTHWAYS,
    SCENARIO_DCE_WHICHWAY,
    SCENARIO_DESCRIPTIONS,
    SCENARIO_FIRSTORDER,
    SCENARIO_TI_WEIGHTS,
    RunSettings,
    is_spectral_scenario,
    merge_settings,
    serialize_settings,
    settings_values,
)
from .errors import ConfigParseError, DomainError, NestedMzError
from .interferometer import PORT_BRIGHT, propagate
from .modes import centroid, default_grid
from .transactional import (
    SLIT_LABELS,
    bothways_transactions,
    equal_superposition,
    interference_visibility,
    total_weight,
    weights_born_rule_check,
    whichway_transactions,
    mirror_weak_values,
    port_transactions,
)
from .weakmeas import (
    DETECTOR_CENTROID,
    DETECTOR_QUADCELL,
    PowerSpectrum,
    classify_signals,
    power_spectrum,
    simulate,
)

CSV_SCHEMAS = {
    "timeseries.csv": "t,signal",
    "spectrum.csv": "freq_hz,power",
    "convergence.csv": "kappa_max,discrepancy,ratio",
}
CSV_SCHEMA_VERSION = 1

RENDER_FLOOR_DB = -120.0
RENDER_MIN_WIDTH = 40


def _fmt(x) -> str:
    return repr(float(x))


def _pair(z) -> list[float]:
    c = complex(z)
    return [c.real, c.imag]


def _finite_or_none(x: float):
    return float(x) if math.isfinite(x) else None


def render_spectrum(
    spectrum: PowerSpectrum,
    width: int = 72,
    marks: Mapping[str, float] | None = None,
    threshold_db: float = -40.0,
    floor_db: float = RENDER_FLOOR_DB,
) -> str:
    """Log-scale ASCII bar chart of the marked frequencies.

    One bar per mark, scaled in dB relative to the strongest marked
    peak, clipped at floor_db; the column of '|' characters sits at
    threshold_db.  Pure function of its inputs.
    """
    if width < RENDER_MIN_WIDTH:
        raise DomainError(f"width must be at least {RENDER_MIN_WIDTH}, got {width}")
    if not marks:
        marks = DEFAULT_FREQUENCIES
    freqs = np.asarray(spectrum.freqs, dtype=np.float64)
    power = np.asarray(spectrum.power, dtype=np.float64)
    if len(freqs) < 2:
        raise DomainError("spectrum too short to render")
    df = freqs[1] - freqs[0]

    peaks = {}
    for label in sorted(marks, key=lambda lab: marks[lab]):
        idx = int(round(marks[label] / df))
        lo, hi = max(idx - 1, 0), min(idx + 2, len(power))
        peaks[label] = float(np.max(power[lo:hi])) if lo < hi else 0.0
    ref = max(peaks.values(), default=0.0)

    label_w = max((len(lab) for lab in peaks), default=1)
    prefix_w = label_w + 13
    bar_w = max(10, width - prefix_w - 12)
    span = -floor_db

    def column(db: float) -> int:
        frac = (db - floor_db) / span
        return int(round(max(0.0, min(1.0, frac)) * (bar_w - 1)))

    t_col = column(threshold_db)
    lines = [
        f"marked peaks, dB re strongest (floor {floor_db:g} dB, '|' at "
        f"{threshold_db:g} dB)"
    ]
    for label, peak in peaks.items():
        if ref > 0.0 and peak > 0.0:
            db = 10.0 * math.log10(peak / ref)
        else:
            db = floor_db
        db = max(db, floor_db)
        filled = column(db)
        bar = ["#" if i <= filled and db > floor_db else "." for i in range(bar_w)]
        bar[t_col] = "|"
        db_text = f"{db:8.1f} dB" if db > floor_db else "   floor  "
        lines.append(
            f"{label:>{label_w}} {marks[label]:8.1f} Hz  {''.join(bar)} {db_text}"
        )
    return "\n".join(lines) + "\n"


def _write_text(path: Path, text: str):
    path.write_text(text, encoding="utf-8")


def _csv_text(header: str, rows) -> str:
    lines = [header]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def _json_text(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _transactions_payload(transactions) -> list[dict]:
    return [
        {
            "absorber": t.absorber,
            "weight": t.weight,
            "amplitude": _pair(t.amplitude),
            "projector_diagonal": {k: _pair(v) for k, v in t.projector.diagonal().items()},
        }
        for t in transactions
    ]


def _run_spectral(settings: RunSettings, out_dir: Path, report: dict):
    series = simulate(
        settings.network(), settings.dithers, settings.plan, settings.sigma
    )
    spectrum = power_spectrum(series, settings.plan)
    verdict = classify_signals(
        spectrum,
        settings.dithers,
        threshold_db=settings.threshold_db,
        detector=settings.plan.detector,
    )

    dt = 1.0 / settings.plan.sample_rate
    ts_rows = ((_fmt(i * dt), _fmt(v)) for i, v in enumerate(series))
    _write_text(out_dir / "timeseries.csv", _csv_text(CSV_SCHEMAS["timeseries.csv"], ts_rows))
    sp_rows = (
        (_fmt(f), _fmt(p)) for f, p in zip(spectrum.freqs, spectrum.power)
    )
    _write_text(out_dir / "spectrum.csv", _csv_text(CSV_SCHEMAS["spectrum.csv"], sp_rows))

    report["artifacts"]["timeseries"] = "timeseries.csv"
    report["artifacts"]["spectrum"] = "spectrum.csv"
    report["detector"] = settings.plan.detector
    report["verdicts"] = {
        m: ("present" if verdict.present[m] else "absent") for m in verdict.present
    }
    report["levels_db"] = {
        m: _finite_or_none(db) for m, db in verdict.level_db.items()
    }
    report["reference_mirror"] = verdict.reference
    return verdict


def _run_whichway(settings: RunSettings, out_dir: Path, report: dict):
    transactions = whichway_transactions()
    _write_text(
        out_dir / "transactions.json", _json_text(_transactions_payload(transactions))
    )
    report["artifacts"]["transactions"] = "transactions.json"
    report["weights"] = {t.absorber: t.weight for t in transactions}
    report["born_rule_deviation"] = weights_born_rule_check(
        equal_superposition(SLIT_LABELS), SLIT_LABELS
    )


def _run_bothways(settings: RunSettings, out_dir: Path, report: dict):
    transactions = bothways_transactions()
    _write_text(
        out_dir / "transactions.json", _json_text(_transactions_payload(transactions))
    )
    report["artifacts"]["transactions"] = "transactions.json"
    report["n_screen_points"] = len(transactions)
    report["total_weight"] = total_weight(transactions)
    report["visibility"] = interference_visibility(transactions)


def _run_ti_weights(settings: RunSettings, out_dir: Path, report: dict):
    transactions = port_transactions()
    _write_text(
        out_dir / "transactions.json", _json_text(_transactions_payload(transactions))
    )
    report["artifacts"]["transactions"] = "transactions.json"
    report["port_weights"] = {t.absorber: t.weight for t in transactions}
    report["weak_values"] = {m: _pair(v) for m, v in mirror_weak_values().items()}


def _run_firstorder(settings: RunSettings, out_dir: Path, report: dict):
    # Tilt pattern exercising every mirror; scaled down level by level.
    pattern = {"A": 1.0, "B": -0.4, "C": 0.2, "E": 0.3, "F": -0.7}
    network = settings.network()
    rows = []
    discrepancies = []
    scales = []
    for level in range(settings.levels):
        scale = settings.kappa_base * settings.sigma / (2.0**level)
        tilts = {m: scale * w for m, w in pattern.items()}
        state = propagate(network, tilts, sigma=settings.sigma)[PORT_BRIGHT]
        grid = default_grid(state, n_points=settings.plan.grid_points)
        measured = centroid(state, grid)
        predicted = tilts["C"] + tilts["A"] - tilts["B"]
        disc = abs(measured - predicted)
        scales.append(scale)
        discrepancies.append(disc)
        ratio = discrepancies[-2] / disc if level > 0 and disc > 0.0 else None
        rows.append((_fmt(scale), _fmt(disc), "" if ratio is None else _fmt(ratio)))
    _write_text(
        out_dir / "convergence.csv", _csv_text(CSV_SCHEMAS["convergence.csv"], rows)
    )
    report["artifacts"]["convergence"] = "convergence.csv"
    report["kappa_levels"] = [float(s) for s in scales]
    report["discrepancies"] = [float(d) for d in discrepancies]
    report["ratios"] = [
        discrepancies[i - 1] / discrepancies[i] if discrepancies[i] > 0.0 else None
        for i in range(1, len(discrepancies))
    ]


def run_scenario(settings: RunSettings, out_dir: Path) -> dict:
    """Execute one scenario, write its artifacts, return the report."""
    out_dir.mkdir(parents=True, exist_ok=True)
    canonical = serialize_settings(settings)
    digest = hashlib.sha256(canonical.encode("utf-8")).hexdigest()
    _write_text(out_dir / "effective_config.cfg", canonical)

    report: dict = {
        "scenario": settings.scenario,
        "tool_version": __version__,
        "input_digest": digest,
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "csv_schemas": dict(CSV_SCHEMAS),
        "effective_config": settings_values(settings),
        "artifacts": {"config": "effective_config.cfg"},
    }

    if is_spectral_scenario(settings.scenario):
        _run_spectral(settings, out_dir, report)
    elif settings.scenario == SCENARIO_DCE_WHICHWAY:
        _run_whichway(settings, out_dir, report)
    elif settings.scenario == SCENARIO_DCE_BOTHWAYS:
        _run_bothways(settings, out_dir, report)
    elif settings.scenario == SCENARIO_TI_WEIGHTS:
        _run_ti_weights(settings, out_dir, report)
    elif settings.scenario == SCENARIO_FIRSTORDER:
        _run_firstorder(settings, out_dir, report)
    else:  # pragma: no cover - validate_scenario precedes dispatch
        raise ConfigParseError(f"unknown scenario {settings.scenario!r}")

    _write_text(out_dir / "report.json", _json_text(report))
    return report


def _read_spectrum_csv(path: Path) -> PowerSpectrum:
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_SCHEMAS["spectrum.csv"].split(","):
            raise ConfigParseError(
                f"{path} does not look like a spectrum file "
                f"(expected header {CSV_SCHEMAS['spectrum.csv']!r})"
            )
        freqs, power = [], []
        for row_no, row in enumerate(reader, 2):
            if len(row) != 2:
                raise ConfigParseError(f"malformed row in {path}", row_no)
            try:
                freqs.append(float(row[0]))
                power.append(float(row[1]))
            except ValueError:
                raise ConfigParseError(f"non-numeric row in {path}", row_no) from None
    return PowerSpectrum(freqs=np.array(freqs), power=np.array(power))


def _summary_lines(report: dict) -> list[str]:
    lines = [
        f"scenario      {report['scenario']}",
        f"input digest  {report['input_digest'][:16]}",
    ]
    if "verdicts" in report:
        marks = ", ".join(f"{m} {v}" for m, v in sorted(report["verdicts"].items()))
        lines.append(f"verdicts      {marks}")
    if "weights" in report:
        marks = ", ".join(f"{k} {v:.6g}" for k, v in sorted(report["weights"].items()))
        lines.append(f"weights       {marks}")
    if "port_weights" in report:
        marks = ", ".join(
            f"{k} {v:.6g}" for k, v in sorted(report["port_weights"].items())
        )
        lines.append(f"port weights  {marks}")
    if "visibility" in report:
        lines.append(f"visibility    {report['visibility']:.12f}")
        lines.append(f"total weight  {report['total_weight']:.12f}")
    if "ratios" in report:
        ratios = ", ".join(
            "n/a" if r is None else f"{r:.3f}" for r in report["ratios"]
        )
        lines.append(f"step ratios   {ratios}")
    lines.append(f"artifacts     {', '.join(sorted(report['artifacts'].values()))}")
    return lines


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nestedmz",
        description="Nested-interferometer weak-measurement simulator.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a named scenario and write artifacts")
    p_run.add_argument("scenario", help="scenario name; see the scenarios command")
    p_run.add_argument("--config", metavar="FILE", help="flat key = value config file")
    p_run.add_argument(
        "--out", metavar="DIR", default=".", help="artifact directory (default: .)"
    )
    p_run.add_argument(
        "--threshold-db",
        type=float,
        default=None,
        metavar="X",
        help="presence threshold in dB relative to the strongest mirror peak",
    )
    p_run.add_argument(
        "--detector",
        choices=(DETECTOR_CENTROID, DETECTOR_QUADCELL),
        default=None,
        help="detector readout model",
    )

    p_render = sub.add_parser("render", help="ASCII chart of a spectrum.csv")
    p_render.add_argument("spectrum", help="path to a spectrum.csv artifact")
    p_render.add_argument("--width", type=int, default=72, help="chart width, >= 40")
    p_render.add_argument(
        "--config", metavar="FILE", help="config file supplying the marked frequencies"
    )
    p_render.add_argument(
        "--threshold-db", type=float, default=-40.0, help="threshold marker position"
    )

    sub.add_parser("scenarios", help="list scenario names")
    return parser


def _cmd_run(args) -> int:
    try:
        text = Path(args.config).read_text(encoding="utf-8") if args.config else None
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    overrides = {}
    if args.threshold_db is not None:
        overrides["threshold_db"] = repr(args.threshold_db)
    if args.detector is not None:
        overrides["plan.detector"] = args.detector
    try:
        settings = merge_settings(args.scenario, text, overrides)
    except ConfigParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        report = run_scenario(settings, Path(args.out))
    except NestedMzError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    for line in _summary_lines(report):
        print(line)
    return 0


def _cmd_render(args) -> int:
    try:
        spectrum = _read_spectrum_csv(Path(args.spectrum))
        marks = None
        if args.config:
            text = Path(args.config).read_text(encoding="utf-8")
            settings = merge_settings(None, text)
            marks = {d.mirror: d.frequency for d in settings.dithers}
    except ConfigParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        print(render_spectrum(spectrum, width=args.width, marks=marks,
                              threshold_db=args.threshold_db), end="")
    except NestedMzError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


def _cmd_scenarios() -> int:
    name_w = max(len(name) for name in SCENARIO_DESCRIPTIONS)
    for name, text in SCENARIO_DESCRIPTIONS.items():
        print(f"{name:<{name_w}}  {text}")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "render":
        return _cmd_render(args)
    return _cmd_scenarios()


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
