"""Path network: splitters, tuning, gaps, conservation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from nestedmz.errors import ConfigError, DomainError
from nestedmz.interferometer import (
    MIRRORS,
    PORT_BRIGHT,
    PORT_DARK_INNER,
    PORT_DARK_OUTER,
    SEG_C_D,
    SEG_F_D,
    SEGMENTS,
    NetworkConfig,
    bright_port_centroid,
    conservation_report,
    first_order_state,
    path_table,
    propagate,
    set_gap,
)
from nestedmz.modes import centroid, state_eval, total_probability

THIRD = 1.0 / 3.0


def test_default_config_values():
    c = NetworkConfig()
    assert c.outer_split == pytest.approx((1 / math.sqrt(3), math.sqrt(2 / 3)), abs=1e-15)
    assert c.inner_split == pytest.approx((1 / math.sqrt(2), 1 / math.sqrt(2)), abs=1e-15)
    assert c.inner_tuning == "destructive"
    assert all(c.transmissions[s] == 1.0 for s in SEGMENTS)


def test_config_rejects_nonunitary_split():
    with pytest.raises(ConfigError):
        NetworkConfig(outer_split=(0.8, 0.7))
    with pytest.raises(ConfigError):
        NetworkConfig(inner_split=(1.0, 0.1))


def test_config_rejects_unknown_tuning():
    with pytest.raises(ConfigError):
        NetworkConfig(inner_tuning="sideways")


def test_config_rejects_bad_transmission_keys():
    with pytest.raises(ConfigError):
        NetworkConfig(transmissions={"X-Y": 1.0})


def test_bright_path_table_destructive():
    table = path_table(NetworkConfig())[PORT_BRIGHT]
    got = {mirrors: coeff for coeff, mirrors in table}
    assert set(got) == {("C",), ("E", "A", "F"), ("E", "B", "F")}
    assert got[("C",)] == pytest.approx(THIRD, abs=1e-15)
    assert got[("E", "A", "F")] == pytest.approx(THIRD, abs=1e-15)
    assert got[("E", "B", "F")] == pytest.approx(-THIRD, abs=1e-15)


def test_bright_path_table_constructive():
    table = path_table(NetworkConfig(inner_tuning="constructive"))[PORT_BRIGHT]
    got = {mirrors: coeff for coeff, mirrors in table}
    assert got[("E", "B", "F")] == pytest.approx(THIRD, abs=1e-15)


def test_port_weights_zero_tilt():
    ports = propagate(NetworkConfig(), {})
    assert total_probability(ports[PORT_BRIGHT]) == pytest.approx(1 / 9, abs=1e-12)
    assert total_probability(ports[PORT_DARK_OUTER]) == pytest.approx(2 / 9, abs=1e-12)
    assert total_probability(ports[PORT_DARK_INNER]) == pytest.approx(2 / 3, abs=1e-12)


def test_zero_tilt_bright_state_is_one_third_profile():
    # the two inner branches cancel pointwise, leaving (1/3) Psi(k)
    st_ = propagate(NetworkConfig(), {})[PORT_BRIGHT]
    k = np.linspace(-6.0, 6.0, 241)
    want = oracles.psi_values([THIRD], [0.0], 1.0, k)
    assert np.max(np.abs(state_eval(st_, k) - want)) < 1e-14


def test_propagate_rejects_unknown_mirror():
    with pytest.raises(ConfigError):
        propagate(NetworkConfig(), {"Q": 0.1})


def test_propagate_rejects_nonfinite_tilt():
    with pytest.raises(ConfigError):
        propagate(NetworkConfig(), {"A": math.nan})


def test_single_inner_tilt_shifts_lone_survivor():
    # with only kappa_A set, C and B branches cancel: bright state is the
    # shifted A branch alone, norm exactly 1/9
    d = 0.5
    st_ = propagate(NetworkConfig(), {"A": d})[PORT_BRIGHT]
    assert total_probability(st_) == pytest.approx(1 / 9, abs=1e-12)
    assert centroid(st_) == pytest.approx(d, abs=1e-10)


def test_single_b_tilt_partial_cancellation():
    d = 0.5
    st_ = propagate(NetworkConfig(), {"B": d})[PORT_BRIGHT]
    want = oracles.closed_probability([2 * THIRD, -THIRD], [0.0, d], 1.0)
    assert want == pytest.approx(0.16333470996240207, abs=1e-15)
    assert total_probability(st_) == pytest.approx(want, abs=1e-12)
    assert 1 / 9 < total_probability(st_) < 1 / 3


def test_bright_centroid_matches_reference_table():
    tilts = {"A": 0.03, "B": -0.02, "C": 0.01, "E": 0.05, "F": -0.04}
    got = bright_port_centroid(NetworkConfig(), tilts)
    assert got == pytest.approx(oracles.bright_centroid(tilts), abs=1e-10)


def test_inner_arm_tilts_cancel_exactly():
    # kappa_E and kappa_F shift both inner branches identically, so their
    # difference carries no trace of either: centroid pinned at kappa_C
    base = bright_port_centroid(NetworkConfig(), {"C": 0.02})
    for ke, kf in [(0.1, 0.0), (0.0, 0.1), (0.07, -0.13), (0.5, 0.25)]:
        got = bright_port_centroid(NetworkConfig(), {"C": 0.02, "E": ke, "F": kf})
        assert got == pytest.approx(base, abs=1e-12)


def test_first_order_state_shape():
    st_ = first_order_state({"A": 0.1, "B": 0.04, "C": 0.02, "E": 0.3, "F": -0.1})
    assert len(st_.branches) == 1
    assert st_.branches[0].coeff == pytest.approx(THIRD, abs=1e-15)
    assert st_.branches[0].shift == pytest.approx(0.08, abs=1e-15)


def test_first_order_matches_centroid_for_small_tilts():
    tilts = {"A": 0.004, "B": -0.003, "C": 0.002, "E": 0.01, "F": 0.01}
    lin = first_order_state(tilts).branches[0].shift
    full = bright_port_centroid(NetworkConfig(), tilts)
    # residual is cubic in the tilts
    assert full == pytest.approx(lin, abs=1e-5)


def test_set_gap_returns_new_config():
    c = NetworkConfig()
    c2 = set_gap(c, SEG_F_D, 0.0)
    assert c.transmissions[SEG_F_D] == 1.0
    assert c2.transmissions[SEG_F_D] == 0.0
    assert c2 is not c


def test_set_gap_validation():
    with pytest.raises(DomainError):
        set_gap(NetworkConfig(), SEG_F_D, 1.5)
    with pytest.raises(DomainError):
        set_gap(NetworkConfig(), SEG_F_D, -0.1)
    with pytest.raises(ConfigError):
        set_gap(NetworkConfig(), "A-Z", 0.5)


def test_gap_blocks_inner_contribution():
    c = set_gap(NetworkConfig(), SEG_F_D, 0.0)
    table = path_table(c)[PORT_BRIGHT]
    assert [(pytest.approx(THIRD), ("C",))] == [
        (pytest.approx(co), m) for co, m in table
    ]


def test_gap_makes_bright_port_tilt_independent():
    # identical bright branches for wildly different inner tilts
    c = set_gap(NetworkConfig(), SEG_F_D, 0.0)
    a = propagate(c, {"A": 0.3, "B": -0.2, "E": 0.4, "F": 0.1, "C": 0.05})
    b = propagate(c, {"A": -0.1, "B": 0.25, "E": -0.3, "F": 0.2, "C": 0.05})
    assert a[PORT_BRIGHT] == b[PORT_BRIGHT]


def test_gap_on_outer_segment():
    c = set_gap(NetworkConfig(), SEG_C_D, 0.0)
    table = path_table(c)[PORT_BRIGHT]
    assert {m for _, m in table} == {("E", "A", "F"), ("E", "B", "F")}


def test_partial_gap_scales_amplitude():
    c = set_gap(NetworkConfig(), SEG_C_D, 0.25)
    table = {m: co for co, m in path_table(c)[PORT_BRIGHT]}
    assert table[("C",)] == pytest.approx(0.25 * THIRD, abs=1e-15)


def test_conservation_unblocked():
    rep = conservation_report(NetworkConfig(), {"A": 0.3, "E": -0.2})
    assert rep.total == pytest.approx(1.0, abs=1e-10)
    assert not rep.lossy


def test_gap_at_zero_tilt_loses_nothing():
    # the inner loop is tuned dark toward the bright port, so the blocked
    # segment carries no power until the arms are detuned
    c = set_gap(NetworkConfig(), SEG_F_D, 0.5)
    rep = conservation_report(c, {})
    assert rep.lossy
    assert rep.total == pytest.approx(1.0, abs=1e-10)


def test_partial_gap_loss_closed_form():
    # power in the blocked segment is (1/3)(1 - overlap(d, 0)); a
    # transmission tau keeps tau^2 of it
    d, tau = 0.4, 0.5
    c = set_gap(NetworkConfig(), SEG_F_D, tau)
    rep = conservation_report(c, {"A": d})
    seg_power = (1.0 - oracles.overlap(d, 0.0, 1.0)) / 3.0
    assert rep.lossy
    assert rep.total == pytest.approx(1.0 - (1.0 - tau**2) * seg_power, abs=1e-10)


def test_full_gap_total_below_unity():
    d = 0.2
    c = set_gap(NetworkConfig(), SEG_F_D, 0.0)
    rep = conservation_report(c, {"A": d})
    seg_power = (1.0 - oracles.overlap(d, 0.0, 1.0)) / 3.0
    assert rep.total == pytest.approx(1.0 - seg_power, abs=1e-10)
    assert rep.total < 1.0 - 1e-3


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_conservation_random_tilts(seed):
    rng = np.random.default_rng(seed)
    tilts = {m: float(t) for m, t in zip(MIRRORS, rng.uniform(-0.5, 0.5, 5))}
    rep = conservation_report(NetworkConfig(), tilts)
    assert rep.total == pytest.approx(1.0, abs=1e-8)
    assert not rep.lossy


@settings(max_examples=30, deadline=None)
@given(
    d=st.floats(0.001, 0.45),
    tuning=st.sampled_from(["destructive", "constructive"]),
)
def test_conservation_under_both_tunings(d, tuning):
    c = NetworkConfig(inner_tuning=tuning)
    rep = conservation_report(c, {"A": d, "B": -d, "C": d / 2})
    assert rep.total == pytest.approx(1.0, abs=1e-8)


def test_aligned_tuning_all_mirrors_reach_bright_port():
    table = path_table(NetworkConfig(inner_tuning="constructive"))[PORT_BRIGHT]
    seen = set()
    for _, mirrors in table:
        seen.update(mirrors)
    assert seen == set(MIRRORS)
