"""Dithered-mirror weak measurement: time series, spectra, verdicts.

Each mirror oscillates at its own audio-band frequency with an amplitude
far below the beam width, so every bounce writes a faint, frequency-
tagged momentum kick onto the transverse profile.  A split or centroid
detector at the bright port turns that into a time series whose power
spectrum shows one peak per mirror the light "felt".
"""

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import ConfigError, DomainError, PlanError
from .interferometer import (
    MIRRORS,
    PORT_BRIGHT,
    NetworkConfig,
    path_table,
)
from .modes import DEFAULT_GRID_HALFWIDTH_SIGMAS, DEFAULT_GRID_POINTS, Grid

DETECTOR_CENTROID = "centroid"
DETECTOR_QUADCELL = "quadcell"
_DETECTORS = (DETECTOR_CENTROID, DETECTOR_QUADCELL)

DEFAULT_SAMPLE_RATE = 8192.0
DEFAULT_N_SAMPLES = 16384

# Amplitudes above this fraction of the beam width leave the weak-kick
# regime; the simulation still runs but warns.
_WEAK_AMPLITUDE_FRACTION = 0.1


@dataclass(frozen=True)
class MirrorDither:
    """Sinusoidal tilt kappa(t) = amplitude * sin(2 pi frequency t + phase)."""

    mirror: str
    amplitude: float
    frequency: float
    phase: float = 0.0

    def __post_init__(self):
        if self.mirror not in MIRRORS:
            raise ConfigError(f"unknown mirror label {self.mirror!r}")
        if not (self.amplitude >= 0.0 and math.isfinite(self.amplitude)):
            raise ConfigError("dither amplitude must be finite and non-negative")
        if not (self.frequency > 0.0 and math.isfinite(self.frequency)):
            raise ConfigError("dither frequency must be finite and positive")
        if not math.isfinite(self.phase):
            raise ConfigError("dither phase must be finite")


@dataclass(frozen=True)
class SimPlan:
    """Sampling plan and detector model for one run."""

    sample_rate: float = DEFAULT_SAMPLE_RATE
    n_samples: int = DEFAULT_N_SAMPLES
    detector: str = DETECTOR_CENTROID
    grid_points: int = DEFAULT_GRID_POINTS
    noise_rms: float = 0.0
    noise_seed: int = 0

    def __post_init__(self):
        if not (self.sample_rate > 0.0 and math.isfinite(self.sample_rate)):
            raise PlanError("sample_rate must be finite and positive")
        n = self.n_samples
        if n < 2 or (n & (n - 1)) != 0:
            raise PlanError(f"n_samples must be a power of two >= 2, got {n}")
        if self.detector not in _DETECTORS:
            raise PlanError(f"detector must be one of {_DETECTORS}, got {self.detector!r}")
        if self.grid_points < 16:
            raise PlanError("grid_points must be at least 16")
        if self.noise_rms < 0.0 or not math.isfinite(self.noise_rms):
            raise PlanError("noise_rms must be finite and non-negative")

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate

    @property
    def bin_width(self) -> float:
        return self.sample_rate / self.n_samples


def _validate_dithers(dithers: Sequence[MirrorDither]):
    mirrors = [d.mirror for d in dithers]
    if len(set(mirrors)) != len(mirrors):
        raise ConfigError("each mirror may carry at most one dither")
    freqs = [d.frequency for d in dithers]
    if len(set(freqs)) != len(freqs):
        raise ConfigError("dithered mirrors must use distinct frequencies")


def tilts_at(dithers: Sequence[MirrorDither], t: float) -> dict[str, float]:
    """Instantaneous tilt of every dithered mirror at time t."""
    _validate_dithers(dithers)
    return {
        d.mirror: d.amplitude * math.sin(2.0 * math.pi * d.frequency * t + d.phase)
        for d in dithers
    }


def simulation_grid(sigma: float, max_shift: float, n_points: int) -> Grid:
    """Fixed detector grid wide enough for every instantaneous shift."""
    half = DEFAULT_GRID_HALFWIDTH_SIGMAS * sigma + max_shift
    return Grid(-half, half, n_points)


def simulate(
    config: NetworkConfig,
    dithers: Sequence[MirrorDither],
    plan: SimPlan,
    sigma: float = 1.0,
) -> np.ndarray:
    """Detector time series at the bright port.

    Deterministic: the same inputs always produce the same samples.  The
    optional noise hook (plan.noise_rms > 0) draws from a fixed-seed
    generator and is off by default.
    """
    _validate_dithers(dithers)
    for d in dithers:
        if d.frequency * 2.0 >= plan.sample_rate:
            raise PlanError(
                f"dither at {d.frequency} Hz violates the Nyquist limit "
                f"for sample_rate {plan.sample_rate}"
            )
        if d.amplitude > _WEAK_AMPLITUDE_FRACTION * sigma:
            warnings.warn(
                f"dither amplitude {d.amplitude} exceeds "
                f"{_WEAK_AMPLITUDE_FRACTION} * sigma; readings leave the weak regime",
                stacklevel=2,
            )

    paths = path_table(config)[PORT_BRIGHT]
    if not paths:
        raise ConfigError("bright port receives no amplitude; nothing to detect")

    coeffs = np.array([amp for amp, _ in paths], dtype=np.complex128)
    member = np.zeros((len(paths), len(dithers)))
    for b, (_, mirrors) in enumerate(paths):
        for m, d in enumerate(dithers):
            member[b, m] = mirrors.count(d.mirror)

    amps = np.array([d.amplitude for d in dithers])
    freqs = np.array([d.frequency for d in dithers])
    phases = np.array([d.phase for d in dithers])
    max_shift = float(np.max(member @ amps, initial=0.0))
    grid = simulation_grid(sigma, max_shift, plan.grid_points)
    w = grid.weights

    series = _kernels.dither_series(
        coeffs,
        member,
        amps,
        freqs,
        phases,
        sigma,
        grid.points,
        w.w_prob,
        w.w_first,
        w.w_signed,
        plan.n_samples,
        1.0 / plan.sample_rate,
        0 if plan.detector == DETECTOR_CENTROID else 1,
    )
    if plan.noise_rms > 0.0:
        rng = np.random.default_rng(plan.noise_seed)
        series = series + plan.noise_rms * rng.standard_normal(plan.n_samples)
    return series


@dataclass(frozen=True)
class PowerSpectrum:
    """One-sided power spectrum with window bookkeeping.

    Normalized so the powers sum to the Hann-weighted mean square of the
    (mean-removed) series: sum(power) = sum(w^2 x^2) / sum(w^2).
    """

    freqs: np.ndarray
    power: np.ndarray
    window: str = "hann"

    def __post_init__(self):
        if len(self.freqs) != len(self.power):
            raise DomainError("freqs and power must have equal length")


def hann_window(n: int) -> np.ndarray:
    """Periodic Hann window; confines a bin-centered tone to three bins."""
    if n < 1:
        raise DomainError("window length must be positive")
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def power_spectrum(series: np.ndarray, plan: SimPlan) -> PowerSpectrum:
    """Windowed one-sided spectrum of a detector series (mean removed)."""
    x = np.asarray(series, dtype=np.float64)
    if x.shape != (plan.n_samples,):
        raise DomainError(
            f"series length {x.shape} does not match plan n_samples {plan.n_samples}"
        )
    n = plan.n_samples
    w = hann_window(n)
    xw = w * (x - x.mean())
    spec = np.fft.rfft(xw)
    power = (np.abs(spec) ** 2) / (n * float(w @ w))
    power[1:-1] *= 2.0
    freqs = np.fft.rfftfreq(n, d=1.0 / plan.sample_rate)
    return PowerSpectrum(freqs=freqs, power=power)


@dataclass(frozen=True)
class SignalVerdict:
    """Per-mirror presence calls with peak levels in dB re the strongest."""

    present: dict[str, bool]
    level_db: dict[str, float]
    threshold_db: float
    reference: str = ""
    detector: str = DETECTOR_CENTROID


def peak_power(spectrum: PowerSpectrum, frequency: float) -> float:
    """Largest power within one bin of the target frequency."""
    freqs = spectrum.freqs
    if len(freqs) < 2:
        raise DomainError("spectrum too short")
    df = freqs[1] - freqs[0]
    idx = int(round(frequency / df))
    lo = max(idx - 1, 0)
    hi = min(idx + 2, len(freqs))
    if lo >= hi:
        raise DomainError(f"frequency {frequency} outside the spectrum")
    return float(np.max(spectrum.power[lo:hi]))


def classify_signals(
    spectrum: PowerSpectrum,
    dithers: Sequence[MirrorDither],
    threshold_db: float = -40.0,
    detector: str = DETECTOR_CENTROID,
) -> SignalVerdict:
    """Call each dithered mirror present or absent from its spectral peak.

    A mirror is present when its peak rises above the strongest mirror
    peak by more than threshold_db (a negative number of dB).
    """
    _validate_dithers(dithers)
    if not dithers:
        raise ConfigError("no dithers to classify")
    if threshold_db >= 0.0:
        raise DomainError("threshold_db must be negative")
    df = float(spectrum.freqs[1] - spectrum.freqs[0])
    nyquist = float(spectrum.freqs[-1])
    bins = {}
    for d in dithers:
        if d.frequency >= nyquist:
            raise PlanError(f"dither frequency {d.frequency} exceeds the spectrum range")
        bins[d.mirror] = d.frequency / df
    labels = sorted(bins)
    for i, a in enumerate(labels):
        for b in labels[i + 1 :]:
            if abs(bins[a] - bins[b]) < 3.0:
                raise ConfigError(
                    f"dither tones for {a} and {b} are closer than three bins; "
                    "peaks would not resolve"
                )

    peaks = {d.mirror: peak_power(spectrum, d.frequency) for d in dithers}
    ref_mirror = max(sorted(peaks), key=lambda m: peaks[m])
    ref = peaks[ref_mirror]
    if ref <= 0.0:
        # Nothing above the numerical floor anywhere: call everything absent.
        level_db = {m: -math.inf for m in peaks}
        present = {m: False for m in peaks}
        return SignalVerdict(present, level_db, threshold_db, ref_mirror, detector)
    with np.errstate(divide="ignore"):
        level_db = {
            m: float(10.0 * np.log10(p / ref)) if p > 0.0 else -math.inf
            for m, p in peaks.items()
        }
    present = {m: level_db[m] > threshold_db for m in peaks}
    return SignalVerdict(present, level_db, threshold_db, ref_mirror, detector)
