import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from gwpack.core import ground_state, make_gaussian
from gwpack.design import (LinewidthTarget, flight_imag_shift, forward_two_pulse,
                           quarter_period_resize, solve_two_pulse)
from gwpack.errors import (ConstraintError, DomainError, InfeasibleError, SingularityError)
from gwpack.evolve import apply, evolve_schedule
from gwpack.propagators import Harmonic, harmonic


@given(st.floats(0.2, 5.0), st.floats(0.2, 5.0), st.integers(0, 3))
def test_quarter_period_resize_reaches_new_ground_width_ratio(w, wc, k):
    T_c, new = quarter_period_resize(w, wc, k=k)
    out = apply(harmonic(wc, T_c), ground_state(w))
    assert out.delta_sq == pytest.approx(new, rel=1e-9)
    assert out.tw == pytest.approx(0.0, abs=1e-8 * max(1.0, T_c))


def test_resize_rejects_bad_input():
    with pytest.raises(DomainError):
        quarter_period_resize(-1.0, 1.0)
    with pytest.raises(DomainError):
        quarter_period_resize(1.0, 1.0, k=-1)


def test_worked_point():
    got = forward_two_pulse(1.0, math.pi / 4, 2.0, math.atan(2.0) / 2.0, 0.5, 0.2)
    assert got == pytest.approx((0.121951, -0.195122), abs=1e-6)


def test_forward_model_agrees_with_propagation():
    w, T, wo = 1.0, math.pi / 4, 2.0
    To = math.atan(2.0) / 2.0
    s = make_gaussian(1, 1, 0, 0, 0.5, 0.2)
    fin = evolve_schedule([Harmonic(w, T), Harmonic(wo, To)], s).final
    assert (fin.delta_sq, fin.tw) == pytest.approx(forward_two_pulse(w, T, wo, To, 0.5, 0.2),
                                                   rel=1e-12)


@settings(max_examples=60)
@given(st.floats(0.2, 1.0), st.floats(-0.5, 0.5), st.floats(0.7, 2.5), st.floats(0.15, 1.4))
def test_solver_inverts_forward_model(dx2, T0, n, a1):
    # equal frequencies collapse to a single oscillator, which the solver reports as singular
    assume(abs(n - 1.0) > 0.02)
    a2 = math.atan2(n, math.tan(a1))
    dy, tw = forward_two_pulse(1.0, a1, n, a2 / n, dx2, T0)
    sol = solve_two_pulse(LinewidthTarget(dy, tw), dx2, 1.0, T0)
    assert sol.achieved == pytest.approx((dy, tw), rel=1e-9, abs=1e-12)
    assert abs(sol.constraint_residual()) < 1e-9 * max(1.0, sol.n_o)
    assert sol.T > 0 and sol.T_o > 0


def test_unreachable_target_reports_diagnostics():
    with pytest.raises(InfeasibleError) as exc:
        solve_two_pulse(LinewidthTarget(0.5, 1.0), 0.5, 1.0, 0.2)
    d = exc.value.details
    assert d["K"] == pytest.approx(2.0)
    assert d["A0"] == pytest.approx(-1.0)
    assert d["B0"] == pytest.approx(1.2)
    assert d["n_o_sq"] < 0


def test_diverging_tangent_is_singular():
    with pytest.raises(SingularityError):
        solve_two_pulse(LinewidthTarget(0.5, 0.0), 0.5, 1.0, 0.0)


def test_vanishing_tangent_is_singular():
    with pytest.raises(SingularityError):
        solve_two_pulse(LinewidthTarget(0.25, 0.0), 0.5, 1.0, 0.0)


def test_forward_model_enforces_constraint():
    with pytest.raises(ConstraintError):
        forward_two_pulse(1.0, 0.5, 2.0, 0.5, 0.5, 0.0)
    with pytest.raises(SingularityError):
        forward_two_pulse(1.0, math.pi / 2, 2.0, 0.5, 0.5, 0.0)


def test_target_must_have_positive_width():
    with pytest.raises(DomainError):
        LinewidthTarget(0.0, 1.0)


def test_flight_shift_moves_tw_both_ways():
    s = make_gaussian(1, 1, 0, 0, 0.7, 0.3)
    fwd = flight_imag_shift(s, 1.5)
    assert fwd.tw == pytest.approx(1.8)
    back = flight_imag_shift(fwd, 1.5, "inverse")
    assert (back.tw, back.delta_sq) == pytest.approx((0.3, 0.7), rel=1e-12)
    with pytest.raises(DomainError):
        flight_imag_shift(s, 1.0, "sideways")


def test_flight_shift_warns_for_moving_packet():
    with pytest.warns(RuntimeWarning):
        flight_imag_shift(make_gaussian(1, 1, 0, 1.0, 0.7), 1.0)
