"""Beam-splitter network of the nested interferometer.

Layout: an unbalanced splitter sends amplitude ``outer_split[0]`` down a
lone reference arm (mirror C) and ``outer_split[1]`` into a balanced
two-arm loop (mirror E in, mirrors A and B inside, mirror F out).  The
loop's output and the reference arm recombine on a final splitter with
the same ratio as the first, which is what places exactly one third of
the input amplitude on each mirror path toward the bright port D.

With ``inner_tuning="destructive"`` the loop output toward F carries
(A - B)/sqrt(2), so the two inner paths cancel at zero tilt and only
their imbalance leaks out; ``"constructive"`` carries (A + B)/sqrt(2)
and routes everything to D.

Propagation is exact and symbolic: each network path contributes one
Gaussian branch whose coefficient is the product of splitter amplitudes,
the inner-merge sign, and per-segment transmissions, and whose momentum
shift is the sum of the tilts of the mirrors it bounced off.
"""

import math
from dataclasses import dataclass, replace
from typing import Mapping

from .errors import ConfigError, DomainError
from .modes import GaussianBranch, TransverseState, centroid, default_grid, total_probability

MIRRORS = ("A", "B", "C", "E", "F")

PORT_BRIGHT = "D"
PORT_DARK_OUTER = "dark_outer"
PORT_DARK_INNER = "dark_inner"
PORTS = (PORT_BRIGHT, PORT_DARK_OUTER, PORT_DARK_INNER)

SEG_E_INNER = "E-inner"
SEG_A_OUT = "A-out"
SEG_B_OUT = "B-out"
SEG_F_D = "F-D"
SEG_C_D = "C-D"
SEGMENTS = (SEG_E_INNER, SEG_A_OUT, SEG_B_OUT, SEG_F_D, SEG_C_D)

TUNING_DESTRUCTIVE = "destructive"
TUNING_CONSTRUCTIVE = "constructive"
_TUNINGS = (TUNING_DESTRUCTIVE, TUNING_CONSTRUCTIVE)

# TiltAssignment: mapping mirror label -> transverse momentum kick.
# Missing mirrors are untilted.
TiltAssignment = Mapping[str, float]


def _full_transmissions(overrides: Mapping[str, float] | None) -> dict[str, float]:
    trans = {seg: 1.0 for seg in SEGMENTS}
    if overrides:
        for seg, value in overrides.items():
            if seg not in trans:
                raise ConfigError(f"unknown segment label {seg!r}")
            v = float(value)
            if not (0.0 <= v <= 1.0) or not math.isfinite(v):
                raise ConfigError(f"transmission for {seg} must lie in [0, 1], got {value}")
            trans[seg] = v
    return trans


@dataclass(frozen=True)
class NetworkConfig:
    """Splitter ratios, inner-loop tuning, and per-segment transmissions."""

    outer_split: tuple[float, float] = (1.0 / math.sqrt(3.0), math.sqrt(2.0 / 3.0))
    inner_split: tuple[float, float] = (1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0))
    inner_tuning: str = "destructive"
    transmissions: Mapping[str, float] = None  # type: ignore[assignment]

    def __post_init__(self):
        for name, pair in (("outer_split", self.outer_split), ("inner_split", self.inner_split)):
            a, b = pair
            if abs(a * a + b * b - 1.0) > 1e-12:
                raise ConfigError(f"{name} amplitudes must satisfy a^2 + b^2 = 1")
        if self.inner_tuning not in _TUNINGS:
            raise ConfigError(
                f"inner_tuning must be one of {_TUNINGS}, got {self.inner_tuning!r}"
            )
        object.__setattr__(self, "transmissions", _full_transmissions(self.transmissions))

    @property
    def lossy(self) -> bool:
        return any(v < 1.0 for v in self.transmissions.values())


def set_gap(config: NetworkConfig, segment: str, transmission: float) -> NetworkConfig:
    """New configuration with one segment's transmission replaced."""
    if segment not in SEGMENTS:
        raise ConfigError(f"unknown segment label {segment!r}")
    if not (0.0 <= transmission <= 1.0):
        raise DomainError(f"transmission must lie in [0, 1], got {transmission}")
    new = dict(config.transmissions)
    new[segment] = transmission
    return replace(config, transmissions=new)


def path_table(config: NetworkConfig) -> dict[str, list[tuple[float, tuple[str, ...]]]]:
    """Exit-port decomposition into (amplitude, mirrors traversed) paths.

    Zero-amplitude paths (from a fully blocked segment) are dropped, so a
    gap removes its paths from the table entirely.
    """
    o0, o1 = config.outer_split
    i0, i1 = config.inner_split
    t = config.transmissions
    merge = 1.0 / math.sqrt(2.0)
    sign_b = -1.0 if config.inner_tuning == "destructive" else 1.0

    # Amplitudes arriving at the final splitter from each feed.
    ref = o0 * t[SEG_C_D]
    loop_a = o1 * t[SEG_E_INNER] * i0 * t[SEG_A_OUT] * merge * t[SEG_F_D]
    loop_b = sign_b * o1 * t[SEG_E_INNER] * i1 * t[SEG_B_OUT] * merge * t[SEG_F_D]
    # Inner-merge dark port (never reaches the final splitter); it takes
    # the combination orthogonal to the one sent toward F.
    dark_a = o1 * t[SEG_E_INNER] * i0 * t[SEG_A_OUT] * merge
    dark_b = -sign_b * o1 * t[SEG_E_INNER] * i1 * t[SEG_B_OUT] * merge

    table = {
        PORT_BRIGHT: [
            (o0 * ref, ("C",)),
            (o1 * loop_a, ("E", "A", "F")),
            (o1 * loop_b, ("E", "B", "F")),
        ],
        PORT_DARK_OUTER: [
            (o1 * ref, ("C",)),
            (-o0 * loop_a, ("E", "A", "F")),
            (-o0 * loop_b, ("E", "B", "F")),
        ],
        PORT_DARK_INNER: [
            (dark_a, ("E", "A")),
            (dark_b, ("E", "B")),
        ],
    }
    return {
        port: [(amp, mirrors) for amp, mirrors in paths if amp != 0.0]
        for port, paths in table.items()
    }


def _tilt(tilts: TiltAssignment, mirror: str) -> float:
    v = float(tilts.get(mirror, 0.0))
    if not math.isfinite(v):
        raise ConfigError(f"tilt for mirror {mirror} must be finite")
    return v


def propagate(
    config: NetworkConfig, tilts: TiltAssignment, sigma: float = 1.0
) -> dict[str, TransverseState]:
    """Exact exit states of all three ports for the given mirror tilts."""
    for mirror in tilts:
        if mirror not in MIRRORS:
            raise ConfigError(f"unknown mirror label {mirror!r}")
    out = {}
    for port, paths in path_table(config).items():
        branches = tuple(
            GaussianBranch(amp, sum(_tilt(tilts, m) for m in mirrors))
            for amp, mirrors in paths
        )
        out[port] = TransverseState(sigma=sigma, branches=branches)
    return out


@dataclass(frozen=True)
class ConservationReport:
    total: float
    lossy: bool


def conservation_report(
    config: NetworkConfig, tilts: TiltAssignment, sigma: float = 1.0
) -> ConservationReport:
    """Summed exit-port probability; equals 1 for a lossless network."""
    ports = propagate(config, tilts, sigma=sigma)
    total = 0.0
    for state in ports.values():
        if state.branches:
            total += total_probability(state)
    return ConservationReport(total=total, lossy=config.lossy)


def first_order_state(tilts: TiltAssignment, sigma: float = 1.0) -> TransverseState:
    """Small-tilt approximation of the bright port: one branch shifted by
    the C tilt plus the inner-arm imbalance."""
    shift = _tilt(tilts, "C") + _tilt(tilts, "A") - _tilt(tilts, "B")
    return TransverseState(
        sigma=sigma, branches=(GaussianBranch(1.0 / 3.0, shift),)
    )


def bright_port_centroid(
    config: NetworkConfig, tilts: TiltAssignment, sigma: float = 1.0
) -> float:
    """Centroid of the bright-port state (helper for convergence studies)."""
    state = propagate(config, tilts, sigma=sigma)[PORT_BRIGHT]
    return centroid(state, default_grid(state))
