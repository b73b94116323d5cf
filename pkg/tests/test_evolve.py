import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gwpack.core import ground_state, make_gaussian, overlap
from gwpack.errors import DomainError
from gwpack.evolve import apply, coefficients, evolve_schedule, flow_map
from gwpack.propagators import (ForcedHarmonic, ForceSpec, Free, Harmonic, InverseHarmonic,
                                QuadraticPropagator, compose, free, harmonic)

real = st.floats(-2.0, 2.0)


@settings(max_examples=80)
@given(st.floats(0.3, 3), st.floats(0.05, 4), real, real, st.floats(0.1, 2), real,
       st.floats(0.3, 3), st.floats(0.3, 3))
def test_kernel_route_agrees_with_flow_route(w, T, x0, p, dsq, tw, m, hbar):
    G = harmonic(w, T, m, hbar)
    if G.is_focal():
        return
    s = make_gaussian(m, hbar, x0, p, dsq, tw)
    a, b = apply(G, s), flow_map(G, s)
    for f in ("x_center", "mean_momentum", "delta_sq", "tw"):
        assert getattr(a, f) == pytest.approx(getattr(b, f), rel=1e-9, abs=1e-10)


def test_ground_state_is_stationary_up_to_phase():
    s = ground_state(1.7)
    out = apply(harmonic(1.7, 0.9), s)
    assert out.delta_sq == pytest.approx(s.delta_sq, rel=1e-14)
    assert out.tw == pytest.approx(0.0, abs=1e-14)
    assert out.global_phase == pytest.approx(-0.5 * 1.7 * 0.9, abs=1e-12)


def test_coherent_state_follows_classical_orbit():
    s = ground_state(1.0, x0=1.0)
    out = apply(harmonic(1.0, 0.6), s)
    assert out.x_center == pytest.approx(math.cos(0.6))
    assert out.mean_momentum == pytest.approx(-math.sin(0.6))


def test_focal_point_uses_flow_route():
    s = make_gaussian(1, 1, 0.5, 0.2, 0.3, 0.1)
    out = apply(harmonic(1.0, math.pi), s)
    assert out.x_center == pytest.approx(-0.5)
    assert out.mean_momentum == pytest.approx(-0.2)
    assert out.delta_sq == pytest.approx(0.3)


def test_closed_form_im_A_agrees_with_direct_complex_A():
    G = compose(harmonic(1.3, 0.4), free(0.7))
    s = make_gaussian(1, 1, 0.2, -0.5, 0.35, 0.6)
    co = coefficients(G, s)
    assert co.im_A == pytest.approx(co.A.imag, rel=1e-12)
    assert co.im_B == pytest.approx(co.B.imag, rel=1e-12)


def test_phase_matches_overlap_with_split_evolution():
    s = make_gaussian(1, 1, 0.3, 0.4, 0.5, 0.2)
    one = apply(harmonic(1.0, 2.2), s)
    two = apply(harmonic(1.0, 1.1), apply(harmonic(1.0, 1.1), s))
    assert overlap(one, two) == pytest.approx(1.0, abs=1e-12)


def test_schedule_boundaries_and_snapshots():
    segs = [Free(1.0), Harmonic(2.0, 0.5)]
    tr = evolve_schedule(segs, make_gaussian(1, 1, 0, 0, 0.5), snapshot_rule=0.25)
    assert tr.boundaries == pytest.approx([1.0, 1.5])
    assert tr.times[-1] == pytest.approx(1.5)
    assert len(tr.times) == 7
    direct = apply(tr.propagator, make_gaussian(1, 1, 0, 0, 0.5))
    assert direct.delta_sq == pytest.approx(tr.final.delta_sq, rel=1e-12)


def test_split_forced_segment_matches_whole():
    seg = ForcedHarmonic(1.0, ForceSpec.sinusoid(0.3, 0.9, 0.2), 2.0)
    s = ground_state(1.0)
    whole = evolve_schedule([seg], s).final
    pieces = evolve_schedule([seg], s, snapshot_rule=0.5).final
    assert pieces.x_center == pytest.approx(whole.x_center, abs=1e-9)
    assert pieces.mean_momentum == pytest.approx(whole.mean_momentum, abs=1e-9)
    assert overlap(whole, pieces) == pytest.approx(1.0, abs=1e-8)


def test_inverse_harmonic_returns_the_state():
    s = make_gaussian(1, 1, 0.3, -0.2, 0.4, 0.1)
    out = evolve_schedule([Harmonic(1.0, 1.2), InverseHarmonic(1.0, 1.2)], s).final
    assert (out.x_center, out.mean_momentum, out.delta_sq, out.tw) == pytest.approx(
        (0.3, -0.2, 0.4, 0.1), abs=1e-12)
    assert not out.phase_tracked


def test_mismatched_units_rejected():
    with pytest.raises(DomainError):
        apply(harmonic(1.0, 1.0, m=2.0), make_gaussian(1, 1, 0, 0, 1.0))


def test_empty_schedule_rejected():
    with pytest.raises(DomainError):
        evolve_schedule([], ground_state(1.0))
