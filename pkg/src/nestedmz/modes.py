"""Transverse photon modes: Gaussian branches in the momentum representation.

A photon leaving the interferometer is described here as a superposition
of identical Gaussian momentum profiles, each displaced by the small
kick it picked up from tilted mirrors:

    psi(k) = Sum_b c_b * N * exp(-((k - s_b) / sigma)^2)

with N chosen so a single unit branch has unit L2 norm,
N = (2/pi)^(1/4) / sqrt(sigma).  States are kept in this closed form;
nothing is sampled onto a grid until a detector functional (probability,
centroid, quad-cell difference) forces it.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from ._kernels import quadrature_weights
from .errors import DomainError, TailTruncationError, UndefinedCentroidError

DEFAULT_GRID_POINTS = 4096
DEFAULT_GRID_HALFWIDTH_SIGMAS = 8.0

# Estimated probability mass outside the grid above this aborts the
# quadrature rather than silently returning a truncated integral.
_TAIL_MASS_LIMIT = 1e-10


def gaussian_norm(sigma: float) -> float:
    """Normalization constant N of the unit Gaussian profile."""
    if not (sigma > 0.0) or not math.isfinite(sigma):
        raise DomainError(f"sigma must be positive and finite, got {sigma}")
    return (2.0 / math.pi) ** 0.25 / math.sqrt(sigma)


def gaussian_eval(k_y, sigma: float):
    """Unit-norm Gaussian profile N exp(-(k_y/sigma)^2); real valued.

    Accepts a scalar or an array of transverse momenta.
    """
    n = gaussian_norm(sigma)
    k = np.asarray(k_y, dtype=np.float64)
    if not np.all(np.isfinite(k)):
        raise DomainError("k_y must be finite")
    out = n * np.exp(-((k / sigma) ** 2))
    return float(out) if np.isscalar(k_y) else out


@dataclass(frozen=True)
class GaussianBranch:
    """One displaced copy of the base profile: coeff * Psi(k - shift)."""

    coeff: complex
    shift: float

    def __post_init__(self):
        c = complex(self.coeff)
        if not (math.isfinite(c.real) and math.isfinite(c.imag)):
            raise DomainError("branch coefficient must be finite")
        if not math.isfinite(self.shift):
            raise DomainError("branch shift must be finite")
        object.__setattr__(self, "coeff", c)
        object.__setattr__(self, "shift", float(self.shift))


@dataclass(frozen=True)
class TransverseState:
    """A finite superposition of shifted Gaussian branches with common width."""

    sigma: float
    branches: tuple[GaussianBranch, ...]

    def __post_init__(self):
        if not (self.sigma > 0.0) or not math.isfinite(self.sigma):
            raise DomainError(f"sigma must be positive and finite, got {self.sigma}")
        object.__setattr__(self, "branches", tuple(self.branches))
        for b in self.branches:
            if not isinstance(b, GaussianBranch):
                raise DomainError("branches must be GaussianBranch instances")

    def coefficient_array(self) -> np.ndarray:
        return np.array([b.coeff for b in self.branches], dtype=np.complex128)

    def shift_array(self) -> np.ndarray:
        return np.array([b.shift for b in self.branches], dtype=np.float64)


def make_state(sigma: float, branches) -> TransverseState:
    """Convenience constructor from (coeff, shift) pairs."""
    return TransverseState(
        sigma=sigma,
        branches=tuple(GaussianBranch(c, s) for c, s in branches),
    )


@dataclass(frozen=True)
class Grid:
    """Uniform quadrature grid over [k_min, k_max] with n_points samples."""

    k_min: float
    k_max: float
    n_points: int = DEFAULT_GRID_POINTS

    def __post_init__(self):
        if not (math.isfinite(self.k_min) and math.isfinite(self.k_max)):
            raise DomainError("grid limits must be finite")
        if not self.k_max > self.k_min:
            raise DomainError("grid requires k_max > k_min")
        if self.n_points < 2:
            raise DomainError("grid requires at least two points")

    @cached_property
    def points(self) -> np.ndarray:
        return np.linspace(self.k_min, self.k_max, self.n_points)

    @cached_property
    def weights(self) -> _kernels.QuadWeights:
        return quadrature_weights(self.points)

    @property
    def spacing(self) -> float:
        return (self.k_max - self.k_min) / (self.n_points - 1)


def default_grid(state: TransverseState, n_points: int = DEFAULT_GRID_POINTS) -> Grid:
    """Grid spanning +-8 sigma, widened to keep every branch center covered."""
    shifts = state.shift_array()
    lo = float(min(0.0, shifts.min())) if shifts.size else 0.0
    hi = float(max(0.0, shifts.max())) if shifts.size else 0.0
    half = DEFAULT_GRID_HALFWIDTH_SIGMAS * state.sigma
    return Grid(lo - half, hi + half, n_points)


def state_eval(state: TransverseState, k_y):
    """Amplitude of the state at one or many momenta (closed form)."""
    k = np.asarray(k_y, dtype=np.float64)
    if not np.all(np.isfinite(k)):
        raise DomainError("k_y must be finite")
    n = gaussian_norm(state.sigma)
    coeffs = state.coefficient_array()
    shifts = state.shift_array()
    z = (k[..., None] - shifts) / state.sigma
    out = np.einsum("...b,b->...", np.exp(-z * z), coeffs) * n
    return complex(out) if np.isscalar(k_y) else out


def _density(state: TransverseState, grid: Grid) -> np.ndarray:
    prof = _kernels.profile(
        state.coefficient_array(), state.shift_array(), state.sigma, grid.points
    )
    return prof.real**2 + prof.imag**2


def _check_tails(state: TransverseState, grid: Grid, dens: np.ndarray):
    # Crude but conservative: density at either edge times one sigma
    # estimates the mass the grid fails to cover.
    tail = (dens[0] + dens[-1]) * state.sigma
    if tail > _TAIL_MASS_LIMIT:
        raise TailTruncationError(
            f"grid [{grid.k_min}, {grid.k_max}] truncates the state; "
            f"estimated edge mass {tail:.3e}"
        )


def total_probability(state: TransverseState, grid: Grid | None = None) -> float:
    """Integral of |psi|^2 over the grid (trapezoid quadrature)."""
    if grid is None:
        grid = default_grid(state)
    dens = _density(state, grid)
    _check_tails(state, grid, dens)
    return float(dens @ grid.weights.w_prob)


def centroid(state: TransverseState, grid: Grid | None = None) -> float:
    """Mean transverse momentum <k> of the normalized detection density."""
    if grid is None:
        grid = default_grid(state)
    dens = _density(state, grid)
    _check_tails(state, grid, dens)
    prob = float(dens @ grid.weights.w_prob)
    if prob < 1e-30:
        raise UndefinedCentroidError("state carries no probability; centroid undefined")
    return float(dens @ grid.weights.w_first) / prob


def quadcell(state: TransverseState, grid: Grid | None = None) -> float:
    """Signed half-line difference P(k_y > 0) - P(k_y < 0), unnormalized.

    Left unnormalized on purpose: attenuation upstream of the detector
    should show up in the reading instead of being divided away.
    """
    if grid is None:
        grid = default_grid(state)
    dens = _density(state, grid)
    _check_tails(state, grid, dens)
    if float(dens @ grid.weights.w_prob) < 1e-30:
        raise UndefinedCentroidError("state carries no probability; reading undefined")
    return float(dens @ grid.weights.w_signed)
