"""Flat `key = value` run configuration: parsing, defaults, canonical form.

The format is deliberately dumb: one assignment per line, full-line
comments starting with `#`, dotted keys for grouping.  The full key set
is fixed, so unknown keys are rejected with their line number instead
of silently ignored, and the serializer always emits every key in
sorted order.  That canonical text is what gets digested for run
provenance: same bytes, same run.

Precedence when assembling a run: built-in scenario defaults, then the
config file, then explicit command-line overrides.
"""

import math
from dataclasses import dataclass
from typing import Mapping

from .errors import ConfigParseError
from .interferometer import (
    MIRRORS,
    SEG_F_D,
    SEGMENTS,
    TUNING_CONSTRUCTIVE,
    TUNING_DESTRUCTIVE,
    NetworkConfig,
)
from .weakmeas import (
    DETECTOR_CENTROID,
    DETECTOR_QUADCELL,
    MirrorDither,
    SimPlan,
)

DEFAULT_FREQUENCIES = {"A": 282.0, "B": 296.0, "C": 307.0, "E": 318.0, "F": 332.0}
DEFAULT_AMPLITUDE_FRACTION = 0.001

SCENARIO_ALIGNED = "aligned"
SCENARIO_DESTRUCTIVE = "destructive"
SCENARIO_GAP = "gap"
SCENARIO_BLOCKED_PREFIX = "blocked:"
SCENARIO_DCE_WHICHWAY = "dce-whichway"
SCENARIO_DCE_BOTHWAYS = "dce-bothways"
SCENARIO_TI_WEIGHTS = "ti-weights"
SCENARIO_FIRSTORDER = "firstorder-check"

SCENARIO_DESCRIPTIONS = {
    SCENARIO_ALIGNED: "loop tuned constructively: every mirror tone reaches the bright port",
    SCENARIO_DESTRUCTIVE: "loop tuned destructively: entrance/exit tones vanish at the bright port",
    SCENARIO_GAP: "destructive tuning with the loop-exit-to-detector segment fully blocked",
    SCENARIO_BLOCKED_PREFIX + "<segment>": "destructive tuning with one named segment fully blocked",
    SCENARIO_DCE_WHICHWAY: "two-slit handshakes with slit-resolving absorbers (no fringes)",
    SCENARIO_DCE_BOTHWAYS: "two-slit handshakes on a 64-point screen (cos^2 fringes)",
    SCENARIO_TI_WEIGHTS: "weak values per mirror and Born weights per exit port",
    SCENARIO_FIRSTORDER: "centroid error against the first-order shift as tilts shrink",
}

_SPECTRAL_SCENARIOS = (
    SCENARIO_ALIGNED,
    SCENARIO_DESTRUCTIVE,
    SCENARIO_GAP,
)


def scenario_names() -> tuple[str, ...]:
    return tuple(SCENARIO_DESCRIPTIONS)


def is_spectral_scenario(name: str) -> bool:
    """Whether the scenario runs the dithered-detector pipeline."""
    return name in _SPECTRAL_SCENARIOS or name.startswith(SCENARIO_BLOCKED_PREFIX)


def validate_scenario(name: str):
    if name in (
        SCENARIO_ALIGNED,
        SCENARIO_DESTRUCTIVE,
        SCENARIO_GAP,
        SCENARIO_DCE_WHICHWAY,
        SCENARIO_DCE_BOTHWAYS,
        SCENARIO_TI_WEIGHTS,
        SCENARIO_FIRSTORDER,
    ):
        return
    if name.startswith(SCENARIO_BLOCKED_PREFIX):
        segment = name[len(SCENARIO_BLOCKED_PREFIX) :]
        if segment in SEGMENTS:
            return
        raise ConfigParseError(
            f"unknown segment {segment!r} in scenario {name!r}; "
            f"segments are {', '.join(SEGMENTS)}"
        )
    raise ConfigParseError(
        f"unknown scenario {name!r}; run the scenarios command for the list"
    )


@dataclass(frozen=True)
class RunSettings:
    """Everything one scenario run needs, fully resolved."""

    scenario: str
    sigma: float
    threshold_db: float
    inner_tuning: str
    transmissions: tuple[tuple[str, float], ...]
    dithers: tuple[MirrorDither, ...]
    plan: SimPlan
    epsilon: float
    y_points: int
    kappa_base: float
    levels: int

    def network(self) -> NetworkConfig:
        return NetworkConfig(
            inner_tuning=self.inner_tuning,
            transmissions=dict(self.transmissions),
        )


def parse_config_text(text: str) -> list[tuple[int, str, str]]:
    """Syntax pass: (line_no, key, value) triples, comments stripped.

    Grammar: blank lines and lines starting with `#` are skipped; every
    other line must be `key = value`.  Values run to end of line, so
    there are no trailing comments and no quoting rules to remember.
    """
    entries = []
    seen: dict[str, int] = {}
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigParseError("expected `key = value`", line_no)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigParseError("empty key", line_no)
        if any(ch.isspace() for ch in key):
            raise ConfigParseError(f"key {key!r} contains whitespace", line_no)
        if not value:
            raise ConfigParseError(f"empty value for key {key!r}", line_no)
        if key in seen:
            raise ConfigParseError(
                f"duplicate key {key!r} (first set on line {seen[key]})", line_no
            )
        seen[key] = line_no
        entries.append((line_no, key, value))
    return entries


def _parse_float(key: str, value: str, line_no) -> float:
    try:
        out = float(value)
    except ValueError:
        raise ConfigParseError(f"{key} expects a number, got {value!r}", line_no) from None
    if not math.isfinite(out):
        raise ConfigParseError(f"{key} must be finite, got {value!r}", line_no)
    return out


def _parse_int(key: str, value: str, line_no) -> int:
    try:
        return int(value, 10)
    except ValueError:
        raise ConfigParseError(f"{key} expects an integer, got {value!r}", line_no) from None


def _parse_choice(key: str, value: str, choices, line_no) -> str:
    if value not in choices:
        raise ConfigParseError(
            f"{key} must be one of {', '.join(choices)}; got {value!r}", line_no
        )
    return value


def _default_values(scenario: str, sigma: float) -> dict[str, str]:
    tuning = TUNING_CONSTRUCTIVE if scenario == SCENARIO_ALIGNED else TUNING_DESTRUCTIVE
    values = {
        "scenario": scenario,
        "sigma": repr(float(sigma)),
        "threshold_db": repr(-40.0),
        "network.inner_tuning": tuning,
        "plan.sample_rate": repr(8192.0),
        "plan.n_samples": "16384",
        "plan.detector": DETECTOR_CENTROID,
        "plan.grid_points": "4096",
        "plan.noise_rms": repr(0.0),
        "plan.noise_seed": "0",
        "leakage.epsilon": repr(0.01),
        "leakage.y_points": "4097",
        "firstorder.kappa_base": repr(0.04),
        "firstorder.levels": "3",
    }
    for segment in SEGMENTS:
        values[f"transmission.{segment}"] = repr(1.0)
    if scenario == SCENARIO_GAP:
        values[f"transmission.{SEG_F_D}"] = repr(0.0)
    elif scenario.startswith(SCENARIO_BLOCKED_PREFIX):
        blocked = scenario[len(SCENARIO_BLOCKED_PREFIX) :]
        values[f"transmission.{blocked}"] = repr(0.0)
    for mirror in MIRRORS:
        values[f"dither.{mirror}.amplitude"] = repr(DEFAULT_AMPLITUDE_FRACTION * sigma)
        values[f"dither.{mirror}.frequency"] = repr(DEFAULT_FREQUENCIES[mirror])
        values[f"dither.{mirror}.phase"] = repr(0.0)
    return values


def _known_keys() -> set[str]:
    return set(_default_values(SCENARIO_DESTRUCTIVE, 1.0))


def merge_settings(
    scenario: str | None,
    config_text: str | None = None,
    overrides: Mapping[str, str] | None = None,
) -> RunSettings:
    """Resolve defaults, file, and overrides into one RunSettings.

    `scenario` may come from the caller, the file, or both; when both
    are given they must agree.  Override values are strings exactly as
    a file would carry them, so both paths share one validation pass.
    """
    entries = parse_config_text(config_text) if config_text else []
    lines = {key: line_no for line_no, key, _ in entries}
    file_values = {key: value for _, key, value in entries}

    known = _known_keys()
    for line_no, key, _ in entries:
        if key not in known:
            raise ConfigParseError(f"unknown key {key!r}", line_no)

    file_scenario = file_values.get("scenario")
    if scenario is None and file_scenario is None:
        raise ConfigParseError("no scenario given (argument or `scenario =` line)")
    if scenario is not None and file_scenario is not None and scenario != file_scenario:
        raise ConfigParseError(
            f"scenario argument {scenario!r} conflicts with config value "
            f"{file_scenario!r}",
            lines.get("scenario"),
        )
    name = scenario if scenario is not None else file_scenario
    validate_scenario(name)

    sigma = _parse_float(
        "sigma", file_values.get("sigma", "1.0"), lines.get("sigma")
    )
    if sigma <= 0.0:
        raise ConfigParseError(f"sigma must be positive, got {sigma}", lines.get("sigma"))

    values = _default_values(name, sigma)
    values.update(file_values)
    values["scenario"] = name
    for key, value in (overrides or {}).items():
        if key not in known:
            raise ConfigParseError(f"unknown override key {key!r}")
        values[key] = value

    def fval(key: str) -> float:
        return _parse_float(key, values[key], lines.get(key))

    def ival(key: str) -> int:
        return _parse_int(key, values[key], lines.get(key))

    threshold_db = fval("threshold_db")
    tuning = _parse_choice(
        "network.inner_tuning",
        values["network.inner_tuning"],
        (TUNING_DESTRUCTIVE, TUNING_CONSTRUCTIVE),
        lines.get("network.inner_tuning"),
    )
    detector = _parse_choice(
        "plan.detector",
        values["plan.detector"],
        (DETECTOR_CENTROID, DETECTOR_QUADCELL),
        lines.get("plan.detector"),
    )
    plan = SimPlan(
        sample_rate=fval("plan.sample_rate"),
        n_samples=ival("plan.n_samples"),
        detector=detector,
        grid_points=ival("plan.grid_points"),
        noise_rms=fval("plan.noise_rms"),
        noise_seed=ival("plan.noise_seed"),
    )
    transmissions = []
    for segment in SEGMENTS:
        key = f"transmission.{segment}"
        tau = fval(key)
        if not 0.0 <= tau <= 1.0:
            raise ConfigParseError(
                f"{key} must lie in [0, 1], got {tau}", lines.get(key)
            )
        transmissions.append((segment, tau))
    transmissions = tuple(transmissions)
    dithers = tuple(
        MirrorDither(
            mirror=mirror,
            amplitude=fval(f"dither.{mirror}.amplitude"),
            frequency=fval(f"dither.{mirror}.frequency"),
            phase=fval(f"dither.{mirror}.phase"),
        )
        for mirror in MIRRORS
    )
    epsilon = fval("leakage.epsilon")
    if not 0.0 <= epsilon <= 0.5:
        raise ConfigParseError(
            f"leakage.epsilon must lie in [0, 0.5], got {epsilon}",
            lines.get("leakage.epsilon"),
        )
    y_points = ival("leakage.y_points")
    if y_points < 2:
        raise ConfigParseError(
            f"leakage.y_points must be at least 2, got {y_points}",
            lines.get("leakage.y_points"),
        )
    kappa_base = fval("firstorder.kappa_base")
    if kappa_base <= 0.0:
        raise ConfigParseError(
            f"firstorder.kappa_base must be positive, got {kappa_base}",
            lines.get("firstorder.kappa_base"),
        )
    levels = ival("firstorder.levels")
    if levels < 1:
        raise ConfigParseError(
            f"firstorder.levels must be at least 1, got {levels}",
            lines.get("firstorder.levels"),
        )
    return RunSettings(
        scenario=name,
        sigma=sigma,
        threshold_db=threshold_db,
        inner_tuning=tuning,
        transmissions=transmissions,
        dithers=dithers,
        plan=plan,
        epsilon=epsilon,
        y_points=y_points,
        kappa_base=kappa_base,
        levels=levels,
    )


def settings_values(settings: RunSettings) -> dict[str, str]:
    """The full effective key -> value map, every value in file syntax."""
    values = {
        "scenario": settings.scenario,
        "sigma": repr(settings.sigma),
        "threshold_db": repr(settings.threshold_db),
        "network.inner_tuning": settings.inner_tuning,
        "plan.sample_rate": repr(settings.plan.sample_rate),
        "plan.n_samples": str(settings.plan.n_samples),
        "plan.detector": settings.plan.detector,
        "plan.grid_points": str(settings.plan.grid_points),
        "plan.noise_rms": repr(settings.plan.noise_rms),
        "plan.noise_seed": str(settings.plan.noise_seed),
        "leakage.epsilon": repr(settings.epsilon),
        "leakage.y_points": str(settings.y_points),
        "firstorder.kappa_base": repr(settings.kappa_base),
        "firstorder.levels": str(settings.levels),
    }
    for segment, value in settings.transmissions:
        values[f"transmission.{segment}"] = repr(value)
    for d in settings.dithers:
        values[f"dither.{d.mirror}.amplitude"] = repr(d.amplitude)
        values[f"dither.{d.mirror}.frequency"] = repr(d.frequency)
        values[f"dither.{d.mirror}.phase"] = repr(d.phase)
    return values


def serialize_settings(settings: RunSettings) -> str:
    """Canonical text form: every key, sorted, one per line.

    Parsing this text back (with no overrides) reproduces the settings
    exactly, and its bytes are the run's identity for digest purposes.
    """
    values = settings_values(settings)
    lines = [f"{key} = {values[key]}" for key in sorted(values)]
    return "\n".join(lines) + "\n"
