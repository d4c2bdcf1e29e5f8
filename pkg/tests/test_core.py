import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import map_once
from mrchialvo.core import (
    DriveSignal,
    EscapedOrbitError,
    MapParams,
    NeuronState,
    Orbit,
    firing_params,
    firing_stats,
    iterate,
    memristance,
    memristor_step,
    phl_trace,
    reduced_chialvo,
    step,
)

finite = st.floats(-5, 5, allow_nan=False)
TABLE1_R2 = MapParams(k0=0.01, k1=0.5, k2=0.5, k=-0.1, r=2.0)


def test_params_reject_non_finite():
    with pytest.raises(ValueError):
        MapParams(k0=math.nan, k1=0.1, k2=0.2, k=0.1, r=1.0)
    assert MapParams(0, 0, 0, 0, 0).h == 1.0


def test_drive_signal_validation():
    with pytest.raises(ValueError):
        DriveSignal(1.0, 3.7, 0)
    with pytest.raises(ValueError):
        DriveSignal(math.inf, 3.7, 10)


@pytest.mark.parametrize("phi, expected", [(0.0, 1.0), (0.5, 0.0), (1.0, -1.0)])
def test_memristance_values(phi, expected):
    assert memristance(phi) == pytest.approx(expected, abs=1e-15)


def test_memristor_step_examples():
    p = MapParams(k0=0, k1=0.7, k2=0.2, k=0, r=0)
    assert memristor_step(0.0, 0.0, p) == (0.0, 0.0)
    assert memristor_step(1.0, 0.0, p) == (1.0, 0.7)


def test_sinusoidal_drive_passes_through_origin():
    p = MapParams(k0=0, k1=0.7, k2=0.2, k=0, r=0)
    tr = phl_trace(DriveSignal(1.0, 3.7, 500), p)
    zero = tr.v == 0.0
    assert zero.any()
    assert np.all(tr.i[zero] == 0.0)
    assert np.all(np.abs(tr.i) <= np.abs(tr.v))


@given(phi=st.floats(-1e3, 1e3), k1=finite, k2=finite)
def test_pinching_bit_exact(phi, k1, k2):
    i, _ = memristor_step(0.0, phi, MapParams(0, k1, k2, 0, 0))
    assert i == 0.0


@given(phi0=finite, k2=st.floats(-1.5, 1.5), n=st.integers(1, 60))
def test_flux_linearity_without_drive(phi0, k2, n):
    p = MapParams(0, 0.7, k2, 0, 0)
    tr = phl_trace(DriveSignal(0.0, 3.7, n + 1), p, phi0=phi0)
    expected = phi0
    for _ in range(n):
        expected = (-k2) * expected
    assert tr.phi[n] == expected


def test_zero_amplitude_gives_zero_loop():
    tr = phl_trace(DriveSignal(0.0, 3.7, 400), MapParams(0, 0.7, 0.2, 0, 0))
    assert np.all(tr.i == 0.0)
    assert tr.area == 0.0 and tr.enclosed_area == 0.0


def test_loop_area_mirror_symmetry_in_frequency():
    """Drive frequencies w and 2*pi - w give loops of identical enclosed area."""
    p = MapParams(0, 0.7, 0.2, 0, 0)
    for w in (0.9, 2.2, 3.7):
        a = phl_trace(DriveSignal(1.0, w, 4000), p).enclosed_area
        b = phl_trace(DriveSignal(1.0, 2 * math.pi - w, 4000), p).enclosed_area
        assert a == pytest.approx(b, rel=1e-6)


def test_origin_fixed_when_k0_zero():
    assert step(NeuronState(0.0, 0.0), MapParams(0, 0.3, 0.4, 0.5, 1.0)) == NeuronState(0.0, 0.0)


def test_table1_point_is_nearly_fixed():
    s = NeuronState(3.296, 1.098)
    out = step(s, TABLE1_R2)
    assert abs(out.x - s.x) < 5e-3 and abs(out.phi - s.phi) < 5e-3


@given(x=finite, phi=finite, k0=finite, k1=finite, k2=finite, k=finite, r=finite)
def test_step_matches_independent_formula(x, phi, k0, k1, k2, k, r):
    out = step(NeuronState(x, phi), MapParams(k0, k1, k2, k, r))
    ex, ep = map_once(x, phi, k0, k1, k2, k, r)
    if out is None:
        assert abs(ex) > 1e6
    else:
        assert out.x == pytest.approx(ex, rel=1e-14, abs=1e-300)
        assert out.phi == ep


@given(x=st.floats(-1, 10), r=finite, k0=finite)
def test_k_zero_decouples_to_reduced_map(x, r, k0):
    out = step(NeuronState(x, 0.37), MapParams(k0, 0.5, 0.5, 0.0, r))
    expected = reduced_chialvo(x, r, k0)
    if out is not None:
        assert out.x == expected


def test_escape_is_flagged_not_stored():
    assert step(NeuronState(-60.0, 0.0), TABLE1_R2) is None
    o = iterate(NeuronState(-60.0, 0.0), TABLE1_R2, 0, 10)
    assert o.escaped and o.escape_index == 1
    assert np.all(np.isfinite(o.states)) and len(o) == 0


def test_escape_after_transient_keeps_finite_prefix():
    p = MapParams(k0=0.0, k1=0.0, k2=0.0, k=2.0, r=-50.0)   # x' ~ 2x until escape
    o = iterate(NeuronState(1.0, 0.0), p, 5, 100)
    assert o.escaped
    assert o.escape_index == 20        # 2**20 > 1e6
    assert len(o) == o.escape_index - 1 - 5
    assert np.all(np.isfinite(o.states))


def test_iterate_records_requested_count():
    o = iterate(NeuronState(0.1, 0.0), TABLE1_R2, 100, 37)
    assert len(o) == 37 and o.transient_len == 100 and not o.escaped


def test_iterate_is_pure():
    a = iterate(NeuronState(0.3, 0.1), firing_params("chaotic_bursting"), 500, 500)
    b = iterate(NeuronState(0.3, 0.1), firing_params("chaotic_bursting"), 500, 500)
    assert np.array_equal(a.states, b.states)


def test_stable_fixed_point_stays_put():
    s = NeuronState(3.296201614241979, 1.0987338714139929)
    o = iterate(s, TABLE1_R2, 0, 200)
    assert np.max(np.abs(o.states - [s.x, s.phi])) < 1e-10


def test_iterate_rejects_negative_counts():
    with pytest.raises(ValueError):
        iterate(NeuronState(0.1, 0.0), TABLE1_R2, -1, 10)


def test_regular_spiking_recipe_is_eventually_periodic():
    o = iterate(NeuronState(0.1, 0.0), firing_params("regular_spiking"), 3000, 200)
    x = o.x
    assert any(np.all(np.abs(x[q:] - x[:-q]) < 1e-9) for q in range(1, 9))


def test_firing_stats_constant_orbit():
    o = Orbit(np.tile([0.5, 0.1], (100, 1)), 0)
    fs = firing_stats(o, threshold=1.0)
    assert fs.spike_count == 0 and fs.isi_cv == 0.0
    assert firing_stats(o).spike_count == 0


def test_firing_stats_periodic_orbit_has_zero_cv():
    x = np.tile([0.0, 0.2, 3.0, 0.4, 0.1], 40)
    fs = firing_stats(Orbit(np.column_stack([x, np.zeros_like(x)]), 0), threshold=1.0)
    assert fs.spike_count == 40
    assert fs.isi_cv == 0.0
    assert np.all(fs.inter_spike_intervals == 5)


def test_firing_stats_rejects_escaped_orbit():
    o = Orbit(np.zeros((0, 2)), 0, escaped=True, escape_index=3)
    with pytest.raises(EscapedOrbitError):
        firing_stats(o)


def test_chaotic_bursting_is_more_irregular_than_regular_spiking():
    cv = {}
    for name in ("regular_spiking", "chaotic_bursting"):
        o = iterate(NeuronState(0.1, 0.0), firing_params(name), 1000, 3000)
        cv[name] = firing_stats(o).isi_cv
    assert cv["chaotic_bursting"] > cv["regular_spiking"]


def test_unknown_firing_pattern():
    with pytest.raises(KeyError):
        firing_params("bursty")
