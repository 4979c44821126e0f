"""Offer/confirmation bookkeeping over discrete path labels.

The direct-action picture treats a detection event as a completed
handshake: the source emits an offer wave, every absorber the offer
reaches returns a time-reversed confirmation (echo), and each
offer/echo pair defines an incipient transaction whose weight is the
Born probability of that outcome.  This module implements that
bookkeeping exactly, for small path spaces: amplitudes live on
string-labeled paths and everything reduces to finite sums.

Phase convention: beam-splitter reflections carry a quarter-wave
factor i, so the forward state inside the nested loop reads
(i|A> + i|B> + |C>)/sqrt(3) and the bright-port functional reads
(-i<A| + i<B| + <C|)/sqrt(3).  Weak values of path projectors and all
transaction weights are invariant under per-path phase choices, so
these objects agree numerically with the real-amplitude convention
used by the interferometer layer.
"""

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import DomainError, UndefinedWeakValueError
from .modes import TransverseState

_DENOMINATOR_FLOOR = 1e-12


def _check_finite(label, z: complex):
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"non-finite amplitude on path {label!r}")


class PathVector:
    """Ket over discrete path labels with complex amplitudes."""

    def __init__(self, amplitudes: Mapping[str, complex]):
        self._amp = {str(k): complex(v) for k, v in amplitudes.items()}
        for label, a in self._amp.items():
            _check_finite(label, a)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(sorted(self._amp))

    def amplitude(self, label: str) -> complex:
        return self._amp.get(label, 0j)

    def items(self):
        return tuple(sorted(self._amp.items()))

    def norm_sq(self) -> float:
        return sum((a.conjugate() * a).real for a in self._amp.values())

    def is_normalized(self, tol: float = 1e-12) -> bool:
        """Whether this ket qualifies as a preparation state."""
        return abs(self.norm_sq() - 1.0) <= tol

    def normalized(self) -> "PathVector":
        n = math.sqrt(self.norm_sq())
        if n <= 0.0:
            raise DomainError("cannot normalize a zero vector")
        return PathVector({k: v / n for k, v in self._amp.items()})

    def dagger(self) -> "CoVector":
        return CoVector({k: v.conjugate() for k, v in self._amp.items()})

    def __add__(self, other: "PathVector") -> "PathVector":
        out = dict(self._amp)
        for k, v in other._amp.items():
            out[k] = out.get(k, 0j) + v
        return PathVector(out)

    def __sub__(self, other: "PathVector") -> "PathVector":
        return self + (-1.0) * other

    def __mul__(self, scalar) -> "PathVector":
        s = complex(scalar)
        return PathVector({k: s * v for k, v in self._amp.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, PathVector):
            return NotImplemented
        keys = set(self._amp) | set(other._amp)
        return all(self.amplitude(k) == other.amplitude(k) for k in keys)

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {v:.6g}" for k, v in self.items())
        return f"PathVector({{{body}}})"


class CoVector:
    """Bra over path labels; components are stored already conjugated."""

    def __init__(self, components: Mapping[str, complex]):
        self._comp = {str(k): complex(v) for k, v in components.items()}
        for label, a in self._comp.items():
            _check_finite(label, a)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(sorted(self._comp))

    def component(self, label: str) -> complex:
        return self._comp.get(label, 0j)

    def items(self):
        return tuple(sorted(self._comp.items()))

    def norm_sq(self) -> float:
        return sum((a.conjugate() * a).real for a in self._comp.values())

    def dagger(self) -> PathVector:
        return PathVector({k: v.conjugate() for k, v in self._comp.items()})

    def apply(self, ket: PathVector) -> complex:
        """Contraction <phi|psi> over the shared labels."""
        return sum(v * ket.amplitude(k) for k, v in self._comp.items())

    __matmul__ = apply
    __call__ = apply

    def __add__(self, other: "CoVector") -> "CoVector":
        out = dict(self._comp)
        for k, v in other._comp.items():
            out[k] = out.get(k, 0j) + v
        return CoVector(out)

    def __mul__(self, scalar) -> "CoVector":
        s = complex(scalar)
        return CoVector({k: s * v for k, v in self._comp.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoVector):
            return NotImplemented
        keys = set(self._comp) | set(other._comp)
        return all(self.component(k) == other.component(k) for k in keys)

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {v:.6g}" for k, v in self.items())
        return f"CoVector({{{body}}})"


def adjoint(obj):
    """Dagger of a ket or a bra; an involution."""
    if isinstance(obj, (PathVector, CoVector)):
        return obj.dagger()
    raise DomainError(f"adjoint is defined for kets and bras, not {type(obj).__name__}")


class PathOperator:
    """Sparse operator on path labels, entries keyed (row, column)."""

    def __init__(self, entries: Mapping[tuple, complex]):
        self._ent = {}
        for (r, c), v in entries.items():
            z = complex(v)
            _check_finite((r, c), z)
            self._ent[(str(r), str(c))] = z

    @classmethod
    def projector(cls, label: str) -> "PathOperator":
        return cls({(label, label): 1.0})

    @classmethod
    def identity(cls, labels: Iterable[str]) -> "PathOperator":
        return cls({(lab, lab): 1.0 for lab in labels})

    def entry(self, row: str, col: str) -> complex:
        return self._ent.get((row, col), 0j)

    def items(self):
        return tuple(sorted(self._ent.items()))

    def diagonal(self) -> dict[str, complex]:
        return {r: v for (r, c), v in sorted(self._ent.items()) if r == c}

    def apply(self, ket: PathVector) -> PathVector:
        out: dict[str, complex] = {}
        for (r, c), v in self._ent.items():
            a = ket.amplitude(c)
            if a != 0j:
                out[r] = out.get(r, 0j) + v * a
        return PathVector(out)

    def compose(self, other: "PathOperator") -> "PathOperator":
        out: dict[tuple, complex] = {}
        for (r, m), v in self._ent.items():
            for (m2, c), w in other._ent.items():
                if m == m2:
                    key = (r, c)
                    out[key] = out.get(key, 0j) + v * w
        return PathOperator(out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PathOperator):
            return NotImplemented
        keys = set(self._ent) | set(other._ent)
        return all(self.entry(*k) == other.entry(*k) for k in keys)

    def __repr__(self) -> str:
        body = ", ".join(
            f"({r}, {c}): {v:.6g}" for (r, c), v in sorted(self._ent.items())
        )
        return f"PathOperator({{{body}}})"


@dataclass(frozen=True)
class TwoStateVector:
    """Ordered (pre-selection ket, post-selection bra) pair.

    Deliberately kept as two separate vectors: the pair is a
    conditioning device, not an inner product, and contracting it
    early would lose the per-operator numerators.
    """

    pre: PathVector
    post: CoVector

    def overlap(self) -> complex:
        return self.post.apply(self.pre)

    def weak_value(self, operator: PathOperator) -> complex:
        return weak_value(self, operator)


def weak_value(tsv: TwoStateVector, operator: PathOperator) -> complex:
    """<post|O|pre> / <post|pre>; complex in general.

    Raises UndefinedWeakValueError when the pre and post states are
    orthogonal (overlap magnitude at or below 1e-12).
    """
    den = tsv.post.apply(tsv.pre)
    if abs(den) <= _DENOMINATOR_FLOOR:
        raise UndefinedWeakValueError(
            f"post-selection overlap {abs(den):.3e} is below {_DENOMINATOR_FLOOR}"
        )
    return tsv.post.apply(operator.apply(tsv.pre)) / den


def equal_superposition(labels: Sequence[str]) -> PathVector:
    labs = list(labels)
    if not labs:
        raise DomainError("need at least one label")
    if len(set(labs)) != len(labs):
        raise DomainError("labels must be distinct")
    a = 1.0 / math.sqrt(len(labs))
    return PathVector({lab: a for lab in labs})


def _check_label(label):
    if not isinstance(label, str) or not label:
        raise DomainError(f"absorber label must be a non-empty string, got {label!r}")


def offer_component(psi: PathVector, absorber: str) -> PathVector:
    """Offer-wave component reaching one absorber: <L|psi> |L>.

    Orthogonal absorbers receive the zero ket; that is a valid outcome,
    not an error.
    """
    _check_label(absorber)
    return PathVector({absorber: psi.amplitude(absorber)})


def confirmation(psi: PathVector, absorber: str) -> CoVector:
    """Adjoint echo the absorber returns: <psi|L> <L|.

    Entry-by-entry the adjoint of offer_component(psi, absorber).
    """
    _check_label(absorber)
    return CoVector({absorber: psi.amplitude(absorber).conjugate()})


@dataclass(frozen=True)
class IncipientTransaction:
    """One candidate handshake: absorber, Born weight, outcome projector."""

    absorber: str
    weight: float
    projector: PathOperator
    amplitude: complex = 0j

    def __post_init__(self):
        if not math.isfinite(self.weight):
            raise DomainError("transaction weight must be finite")


def incipient_transactions(
    psi: PathVector,
    absorbers: Sequence[str],
) -> tuple[IncipientTransaction, ...]:
    """Candidate handshakes for an offer against projective absorbers.

    Each absorber label L contributes weight |<L|psi>|^2 and projector
    |L><L|, in the caller's order.  The weight is the echo-offer
    contraction, so probabilities arise from the handshake itself
    rather than from a separate postulate.
    """
    labs = list(absorbers)
    if len(set(labs)) != len(labs):
        raise DomainError("absorber labels must be distinct")
    out = []
    for lab in labs:
        amp = psi.amplitude(lab)
        w = (confirmation(psi, lab).apply(offer_component(psi, lab))).real
        out.append(
            IncipientTransaction(lab, float(w), PathOperator.projector(lab), amp)
        )
    return tuple(out)


def total_weight(transactions: Sequence[IncipientTransaction]) -> float:
    return float(sum(t.weight for t in transactions))


def weights_born_rule_check(psi: PathVector, absorbers: Sequence[str]) -> float:
    """Distance of the transaction weights from a probability measure.

    Returns |sum of weights - 1|.  Zero (to rounding) when the absorber
    set spans the support of a normalized offer; an incomplete set
    reports the missing mass as a diagnostic, not a failure.
    """
    return abs(total_weight(incipient_transactions(psi, absorbers)) - 1.0)


def interference_visibility(transactions: Sequence[IncipientTransaction]) -> float:
    """Michelson visibility (max-min)/(max+min) of the weight pattern."""
    weights = [t.weight for t in transactions]
    if not weights:
        raise DomainError("no transactions")
    hi, lo = max(weights), min(weights)
    if hi + lo <= 0.0:
        raise DomainError("pattern carries no weight")
    return (hi - lo) / (hi + lo)


# -- two-slit screen models -------------------------------------------------

SLIT_LABELS = ("A", "B")
DEFAULT_SCREEN_POINTS = 64


def both_ways_screen_transactions(
    psi: PathVector,
    screen: Sequence[tuple],
) -> tuple[IncipientTransaction, ...]:
    """Unmarked-screen transactions for a two-slit offer.

    `screen` rows are (position, amp_a, amp_b): the amplitudes with
    which that screen element catches each slit.  The offer must be
    supported on the two slit labels only.  Weight at a position is
    |psi_A * amp_a + psi_B * amp_b|^2, the coherent both-slits sum, so
    the pattern interferes; a which-way marker never enters.
    """
    extra = [lab for lab in psi.labels if lab not in SLIT_LABELS and psi.amplitude(lab) != 0j]
    if extra:
        raise DomainError(f"offer must be supported on {SLIT_LABELS}, found {extra}")
    positions = [str(row[0]) for row in screen]
    if len(set(positions)) != len(positions):
        raise DomainError("screen positions must be distinct")
    a_amp = psi.amplitude("A")
    b_amp = psi.amplitude("B")
    out = []
    for row in screen:
        pos, amp_a, amp_b = str(row[0]), complex(row[1]), complex(row[2])
        received = a_amp * amp_a + b_amp * amp_b
        w = (received.conjugate() * received).real
        out.append(
            IncipientTransaction(pos, float(w), PathOperator.projector(pos), received)
        )
    return tuple(out)


def phase_ramp_screen(m_points: int = DEFAULT_SCREEN_POINTS) -> list[tuple]:
    """Screen rows with opposite linear phase ramps, one per element.

    Each slit illuminates all m elements with magnitude 1/sqrt(m) and
    phase +/- pi j / m, the discrete stand-in for the two path lengths.
    The two amplitude columns are orthonormal, so the both-ways weights
    total exactly 1 and trace a full-contrast cos^2 fringe.
    """
    if m_points < 2:
        raise DomainError("need at least two screen points")
    scale = 1.0 / math.sqrt(m_points)
    width = len(str(m_points - 1))
    rows = []
    for j in range(m_points):
        phase = math.pi * j / m_points
        rows.append(
            (
                f"x{j:0{width}d}",
                scale * cmath.exp(1j * phase),
                scale * cmath.exp(-1j * phase),
            )
        )
    return rows


def whichway_transactions() -> tuple[IncipientTransaction, ...]:
    """Marked configuration: the absorbers resolve the slit.

    The confirmations return from two distinguishable channels, so
    there are exactly two incipient transactions, weight 1/2 each, and
    no position-dependent pattern exists anywhere.
    """
    return incipient_transactions(equal_superposition(SLIT_LABELS), SLIT_LABELS)


def bothways_transactions(
    m_points: int = DEFAULT_SCREEN_POINTS,
) -> tuple[IncipientTransaction, ...]:
    """Unmarked configuration on the default phase-ramp screen."""
    return both_ways_screen_transactions(
        equal_superposition(SLIT_LABELS), phase_ramp_screen(m_points)
    )


# -- nested-interferometer two-state pairs ----------------------------------

_INV_SQRT3 = 1.0 / math.sqrt(3.0)
_SQRT_2_3 = math.sqrt(2.0 / 3.0)

LOOP_DARK = "dark_inner"


def mirror_stage_offer() -> PathVector:
    """Forward state when the photon straddles the three tilting mirrors."""
    return PathVector({"A": 1j * _INV_SQRT3, "B": 1j * _INV_SQRT3, "C": _INV_SQRT3})


def bright_port_confirmation() -> CoVector:
    """Bright-port functional pulled back to the mirror stage.

    The inner-merge convention expands the loop-exit bra onto the inner
    paths as <F| = (1/sqrt(2))(<A| - <B|) up to the reflection phase,
    which is what makes the A and B components enter with opposite
    signs.
    """
    return CoVector({"A": -1j * _INV_SQRT3, "B": 1j * _INV_SQRT3, "C": _INV_SQRT3})


def mirror_stage_pair() -> TwoStateVector:
    return TwoStateVector(pre=mirror_stage_offer(), post=bright_port_confirmation())


def inner_entry_pair() -> TwoStateVector:
    """Two-state pair at the stage where the loop entrance mirror acts.

    Destructive tuning sends nothing from the loop entrance on to the
    bright port, so the backward functional has no entrance component.
    """
    ket = PathVector({"E": 1j * _SQRT_2_3, "C": _INV_SQRT3})
    bra = CoVector({"C": _INV_SQRT3})
    return TwoStateVector(pre=ket, post=bra)


def inner_exit_pair() -> TwoStateVector:
    """Two-state pair at the loop exit mirror.

    Forward, the loop interferes destructively toward the exit mirror
    and all loop amplitude leaves through the inner dark port; backward,
    the bright-port functional does reach the exit mirror.
    """
    ket = PathVector({"C": _INV_SQRT3, LOOP_DARK: 1j * _SQRT_2_3})
    bra = CoVector({"C": _INV_SQRT3, "F": _SQRT_2_3})
    return TwoStateVector(pre=ket, post=bra)


def mirror_weak_values() -> dict[str, complex]:
    """Weak value of each mirror's path projector, by mirror label.

    Computed from the stage pairs, not hardcoded: the inner mirrors
    give +1 and -1, the reference arm +1, the loop entrance and exit 0.
    """
    pairs = {
        "A": mirror_stage_pair(),
        "B": mirror_stage_pair(),
        "C": mirror_stage_pair(),
        "E": inner_entry_pair(),
        "F": inner_exit_pair(),
    }
    return {
        label: pair.weak_value(PathOperator.projector(label))
        for label, pair in pairs.items()
    }


def port_absorbers() -> dict[str, CoVector]:
    """Exit-port functionals pulled back to the mirror stage."""
    s6 = 1.0 / math.sqrt(6.0)
    s2 = 1.0 / math.sqrt(2.0)
    return {
        "D": bright_port_confirmation(),
        "dark_outer": CoVector({"A": 1j * s6, "B": -1j * s6, "C": _SQRT_2_3}),
        "dark_inner": CoVector({"A": s2, "B": s2}),
    }


def port_transactions() -> tuple[IncipientTransaction, ...]:
    """Exit-port handshakes for the untilted network: weights 1/9, 2/9, 2/3.

    The port functionals form an orthonormal triple, so re-expressing
    the mirror-stage offer in the port basis and letting each port
    absorb projectively reproduces the Born weights of the three exits.
    """
    offer = mirror_stage_offer()
    bras = port_absorbers()
    in_port_basis = PathVector({name: bras[name].apply(offer) for name in bras})
    return incipient_transactions(in_port_basis, sorted(bras))


# -- attenuated-loop detection chain -----------------------------------------

_MAX_LEAKAGE = 0.5


def leakage_path_state(epsilon: float) -> PathVector:
    """Path part of the offer when the loop arms leak amplitude epsilon.

    The state epsilon|A> - epsilon|B> + (1 - epsilon^2)|C> is the raw
    output of the attenuation chain; its squared norm is 1 + epsilon^4
    and it is kept unnormalized on purpose so detection weights stay in
    the same units as the unattenuated run.
    """
    if not (0.0 <= epsilon <= _MAX_LEAKAGE) or not math.isfinite(epsilon):
        raise DomainError(f"epsilon must lie in [0, {_MAX_LEAKAGE}], got {epsilon}")
    return PathVector({"A": epsilon, "B": -epsilon, "C": 1.0 - epsilon * epsilon})


@dataclass(frozen=True)
class AttenuatedOffer:
    """Joint offer: discrete path part tensor-tagged with a beam profile."""

    path: PathVector
    transverse: TransverseState

    def __post_init__(self):
        if not isinstance(self.transverse, TransverseState):
            raise DomainError("transverse must be a TransverseState")


def attenuated_offer(epsilon: float, transverse: TransverseState) -> AttenuatedOffer:
    """Offer wave with the loop attenuated to amplitude epsilon.

    At epsilon = 0 this is the pure reference-arm state carrying the
    beam profile; the loop amplitudes are always equal in magnitude and
    opposite in sign.
    """
    return AttenuatedOffer(path=leakage_path_state(epsilon), transverse=transverse)


def detection_born_weight(offer: AttenuatedOffer, y_amp: complex):
    """Bright-port handshake weight at one transverse absorber element.

    y_amp is the beam-profile amplitude at the element.  Returns the
    confirmation bra (the adjoint-scaled echo, descriptive output whose
    intermediate normalization is not a tested quantity) and the weight
    |<D| (x) <y| applied to the joint offer|^2.  At epsilon = 0 the
    weight is exactly (1/3)|y_amp|^2, and it deviates from that value
    only at second order in the leakage amplitude.
    """
    y = complex(y_amp)
    _check_finite("y", y)
    bra = bright_port_confirmation()
    path_amp = bra.apply(offer.path)
    received = path_amp * y
    weight = (received.conjugate() * received).real
    echo = received.conjugate() * bra
    return echo, float(weight)
