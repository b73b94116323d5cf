"""Pulse design for the complex linewidth of a resting Gaussian packet.

Three tools:

``quarter_period_resize``
    Switch the trap from ``omega`` to ``omega_c`` for a quarter period; the
    ground state of the first trap comes out with a rescaled real width.
``forward_two_pulse`` / ``solve_two_pulse``
    Two consecutive oscillator segments (frequency ``omega`` for ``T``, then
    ``omega_o`` for ``T_o``) chosen so that the composite kernel has no
    ``x_a**2`` term.  The forward map gives the reached linewidth; the solver
    inverts it for a target.
``flight_imag_shift``
    Free or inverse-free flight, which moves only the imaginary part.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .core import GaussianState
from .errors import ConstraintError, DomainError, InfeasibleError, NumericError, SingularityError
from .evolve import apply
from .propagators import Harmonic, free, inverse_free_direct

__all__ = [
    "LinewidthTarget",
    "TwoPulseSolution",
    "quarter_period_resize",
    "forward_two_pulse",
    "solve_two_pulse",
    "flight_imag_shift",
]

_EDGE = 1e-12


@dataclass(frozen=True)
class LinewidthTarget:
    delta_y_sq: float
    tw: float

    def __post_init__(self):
        if not self.delta_y_sq > 0:
            raise DomainError("target real linewidth must be positive",
                              delta_y_sq=self.delta_y_sq)


@dataclass(frozen=True)
class TwoPulseSolution:
    omega: float
    T: float
    omega_o: float
    T_o: float
    A0: float
    B0: float
    n_o: float
    achieved: tuple
    branch: int = 0
    diagnostics: dict = field(default_factory=dict)

    def segments(self):
        return [Harmonic(self.omega, self.T), Harmonic(self.omega_o, self.T_o)]

    def constraint_residual(self):
        return (math.tan(self.omega * self.T) * math.tan(self.omega_o * self.T_o)
                - self.omega_o / self.omega)


def quarter_period_resize(omega, omega_c, m=1.0, hbar=1.0, k=0):
    """Duration of the switched segment and the resulting real linewidth."""
    if not (omega > 0 and omega_c > 0):
        raise DomainError("frequencies must be positive", omega=omega, omega_c=omega_c)
    if not (isinstance(k, int) and k >= 0):
        raise DomainError("k must be a non-negative integer", k=k)
    T_c = (2.0 * k * math.pi + 0.5 * math.pi) / omega_c
    new_delta_sq = (omega / omega_c) * hbar / (2.0 * m * omega_c)
    return T_c, new_delta_sq


def _reduced_coefficients(omega, T, omega_o, T_o, tol):
    a1, a2 = omega * T, omega_o * T_o
    for ang in (a1, a2):
        if abs(math.sin(ang)) < _EDGE or abs(math.cos(ang)) < _EDGE:
            raise SingularityError("segment angle sits on a multiple of pi/2", angle=ang)
    t1, t2 = math.tan(a1), math.tan(a2)
    n = omega_o / omega
    if abs(t1 * t2 - n) > tol * max(1.0, n):
        raise ConstraintError("tan(omega T) tan(omega_o T_o) must equal omega_o / omega",
                              residual=t1 * t2 - n)
    q = 1.0 + t1 * t1
    S_bb = ((omega ** 2 - omega_o ** 2) / omega) * t1 / q
    S_ab_sq = (omega_o ** 2 + omega ** 2 * t1 * t1) / q
    return S_bb, S_ab_sq


def forward_two_pulse(omega, T, omega_o, T_o, delta_x_sq, T0, m=1.0, hbar=1.0, tol=1e-9):
    """Linewidth ``(delta_y_sq, tw)`` reached from ``(delta_x_sq, T0)``."""
    if not delta_x_sq > 0:
        raise DomainError("delta_x_sq must be positive")
    S_bb, S_ab_sq = _reduced_coefficients(omega, T, omega_o, T_o, tol)
    delta = 2.0 * m * delta_x_sq / hbar
    num = T0 * S_ab_sq - S_bb
    den = delta ** 2 * S_ab_sq ** 2 + num ** 2
    return delta_x_sq * S_ab_sq / den, -num / den


def _angle_mod_pi(y, x):
    """Representative of atan(y / x) in (0, pi)."""
    a = math.atan2(y, x)
    if a <= 0:
        a += math.pi
    if a >= math.pi:
        a -= math.pi
    return a


def solve_two_pulse(target: LinewidthTarget, delta_x_sq, omega, T0, m=1.0, hbar=1.0,
                    rtol=1e-9) -> TwoPulseSolution:
    """Durations ``T`` and frequency/duration ``(omega_o, T_o)`` that reach ``target``."""
    if not (delta_x_sq > 0 and omega > 0):
        raise DomainError("delta_x_sq and omega must be positive")
    dy, tw = target.delta_y_sq, target.tw
    ratio = delta_x_sq / dy
    K = omega ** 2 * ratio * ((2.0 * m * dy / hbar) ** 2 + tw ** 2)
    A0 = 1.0 - K
    B0 = omega * T0 + omega * tw * ratio
    diag = {"A0": A0, "B0": B0, "K": K}
    if A0 == 0.0:
        raise SingularityError("tan(omega T) diverges (A0 = 0)", **diag)
    t = -B0 / A0
    diag["tan_omega_T"] = t
    n_sq = (1.0 + A0 * t * t) / K
    diag["n_o_sq"] = n_sq
    if not n_sq > 0:
        raise InfeasibleError("target unreachable: n_o**2 <= 0", **diag)
    n_o = math.sqrt(n_sq)
    if abs(t) < _EDGE:
        raise SingularityError("degenerate geometry: tan(omega T) = 0", **diag)
    omega_o = n_o * omega
    a2 = _angle_mod_pi(n_o, t)
    base = _angle_mod_pi(-B0, A0)
    tried = []
    for branch in (0, 1):
        a1 = base + branch * math.pi
        T = a1 / omega
        T_o = a2 / omega_o
        try:
            got = forward_two_pulse(omega, T, omega_o, T_o, delta_x_sq, T0, m, hbar,
                                    tol=max(rtol, 1e-9))
        except (SingularityError, ConstraintError) as exc:
            tried.append(str(exc))
            continue
        err = max(abs(got[0] - dy) / abs(dy), abs(got[1] - tw) / max(abs(tw), dy * m / hbar))
        tried.append(err)
        if err <= rtol:
            return TwoPulseSolution(omega, T, omega_o, T_o, A0, B0, n_o, got, branch, diag)
    raise NumericError("no branch reproduces the target", tried=tried, **diag)


def flight_imag_shift(state: GaussianState, T, direction="forward") -> GaussianState:
    """Shift ``tw`` by ``+T`` (free flight) or ``-T`` (inverse free flight)."""
    if direction == "forward":
        G = free(T, state.mass, state.hbar)
    elif direction == "inverse":
        G = inverse_free_direct(T, state.mass, state.hbar)
    else:
        raise DomainError(f"unknown direction {direction!r}")
    if state.mean_momentum != 0.0:
        warnings.warn("moving packet: the centre drifts during flight", RuntimeWarning,
                      stacklevel=2)
    return apply(G, state)
