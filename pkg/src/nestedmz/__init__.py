"""Nested Mach-Zehnder weak-measurement simulator.

Layers, bottom to top: `modes` holds the transverse Gaussian algebra
and detector quadrature; `interferometer` the splitter network and
propagation; `weakmeas` the dithered time series, spectra, and signal
verdicts; `transactional` the offer/confirmation bookkeeping; `cli`
the scenario runner.  Heavy per-sample loops dispatch to a compiled
kernel when available (see `kernel_backend`), with a pure-NumPy
fallback producing the same numbers to tight tolerance.
"""

from . import _kernels
from .errors import (
    ConfigError,
    ConfigParseError,
    DomainError,
    NestedMzError,
    PlanError,
    TailTruncationError,
    UndefinedCentroidError,
    UndefinedWeakValueError,
)
from .modes import (
    GaussianBranch,
    Grid,
    TransverseState,
    centroid,
    default_grid,
    gaussian_eval,
    gaussian_norm,
    make_state,
    quadcell,
    state_eval,
    total_probability,
)
from .interferometer import (
    MIRRORS,
    PORT_BRIGHT,
    PORT_DARK_INNER,
    PORT_DARK_OUTER,
    SEGMENTS,
    TUNING_CONSTRUCTIVE,
    TUNING_DESTRUCTIVE,
    ConservationReport,
    NetworkConfig,
    conservation_report,
    first_order_state,
    path_table,
    propagate,
    set_gap,
)
from .weakmeas import (
    DETECTOR_CENTROID,
    DETECTOR_QUADCELL,
    MirrorDither,
    PowerSpectrum,
    SignalVerdict,
    SimPlan,
    classify_signals,
    hann_window,
    power_spectrum,
    simulate,
    tilts_at,
)
from .transactional import (
    AttenuatedOffer,
    CoVector,
    IncipientTransaction,
    PathOperator,
    PathVector,
    TwoStateVector,
    adjoint,
    attenuated_offer,
    both_ways_screen_transactions,
    bothways_transactions,
    bright_port_confirmation,
    confirmation,
    detection_born_weight,
    equal_superposition,
    incipient_transactions,
    inner_entry_pair,
    inner_exit_pair,
    interference_visibility,
    leakage_path_state,
    mirror_stage_offer,
    mirror_stage_pair,
    mirror_weak_values,
    offer_component,
    phase_ramp_screen,
    port_absorbers,
    port_transactions,
    total_weight,
    weak_value,
    weights_born_rule_check,
    whichway_transactions,
)

__version__ = "0.1.0"


def kernel_backend() -> str:
    """Name of the active numeric backend: compiled or portable."""
    return _kernels.BACKEND_NAME
