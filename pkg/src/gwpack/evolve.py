"""Closed-form action of a quadratic propagator on a Gaussian state.

Away from focal points the new state follows from integrating the kernel
against the Gaussian.  The quadratic part of the exponent fixes the new
linewidth and depends on the kernel's quadratic coefficients alone; the
linear coefficients only move the centre and the mean momentum.

At focal points the kernel does not exist and the state is mapped through
the classical flow instead (``flow_map``).  That route also serves as an
independent redundancy check in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, Sequence, Tuple

import numpy as np

from .core import GaussianState, make_gaussian
from .errors import DomainError, SingularityError
from .propagators import (
    Free, ForcedHarmonic, ForceSpec, GeneralQuadratic, Harmonic, InverseFree,
    InverseHarmonic, QuadraticPropagator, compose_all, propagator_for,
)

__all__ = [
    "EvolutionCoefficients",
    "Trajectory",
    "coefficients",
    "apply",
    "flow_map",
    "evolve_schedule",
    "segment_duration",
]


@dataclass(frozen=True)
class EvolutionCoefficients:
    a: complex
    b_lin: complex
    b_const: complex
    A: complex
    B: complex
    C: complex
    im_A: float
    im_B: float
    im_C: float
    delta: float
    v_a: float
    v_b: float
    Z: float


def _check_pair(G: QuadraticPropagator, s: GaussianState):
    if G.mass != s.mass or G.hbar != s.hbar:
        raise DomainError("propagator and state carry different mass or hbar")


def coefficients(G: QuadraticPropagator, s: GaussianState) -> EvolutionCoefficients:
    _check_pair(G, s)
    k = G.kernel()
    if k is None:
        raise SingularityError("kernel coefficients unavailable at a focal point")
    m, hbar = s.mass, s.hbar
    W0 = s.W
    x0, T0 = s.x_center, s.tw
    p0 = s.p0
    Sbb, Sab, Saa = k.S_bb, k.S_ab, k.S_aa

    a = -0.5j * m * Saa / hbar + 1.0 / (4.0 * W0)
    b_lin = 1j * m * Sab / hbar
    b_const = 1j * (k.Q_a - p0) / hbar + x0 / (2.0 * W0)
    A = b_lin * b_lin / (4.0 * a) + 0.5j * m * Sbb / hbar
    B = b_lin * b_const / (2.0 * a) + 1j * k.Q_b / hbar
    C = b_const * b_const / (4.0 * a) - x0 * x0 / (4.0 * W0)

    delta = 2.0 * m * s.delta_sq / hbar
    v_a = (k.Q_a - p0) / m
    v_b = k.Q_b / m
    g = 1.0 + Saa * T0
    Z = Saa * delta ** 2 + T0 * g
    den = delta ** 2 * Saa ** 2 + g * g
    im_A = (m / (2.0 * hbar)) * (Sbb * g + Z * (Sbb * Saa - Sab ** 2)) / den
    im_B = (m / hbar) * ((v_b + Sab * x0) * g + Z * (v_b * Saa - v_a * Sab)) / den
    im_C = (m / (2.0 * hbar)) * ((x0 ** 2 * Saa + 2 * x0 * v_a - T0 * v_a ** 2) * g
                                 - delta ** 2 * Saa * v_a ** 2) / den
    return EvolutionCoefficients(complex(a), complex(b_lin), complex(b_const), complex(A),
                                 complex(B), complex(C), im_A, im_B, im_C, delta, v_a, v_b, Z)


def _output_phase(G, s, co, x_c, W_new):
    if not (G.theta_tracked and s.phase_tracked):
        return None
    m, hbar = s.mass, s.hbar
    f_ab = G.kernel().f_ab
    amp = (1.0 / np.sqrt(s.W)
           * np.sqrt(m / (2j * math.pi * hbar * f_ab))
           * np.sqrt(math.pi / co.a))
    phase = (s.global_phase + G.theta + co.C.imag - co.A.imag * x_c ** 2
             + float(np.angle(amp)) + float(np.angle(np.sqrt(W_new))))
    return math.remainder(phase, 2.0 * math.pi)


def apply(G: QuadraticPropagator, s: GaussianState) -> GaussianState:
    """Gaussian obtained by propagating ``s`` with ``G``."""
    _check_pair(G, s)
    k = G.kernel()
    if k is None:
        return flow_map(G, s)
    co = coefficients(G, s)
    m, hbar = s.mass, s.hbar
    Sab, Saa = k.S_ab, k.S_aa
    x_c = -(Saa * s.x_center + co.v_a) / Sab
    g = 1.0 + Saa * s.tw
    D = Saa ** 2 * s.delta_sq + (hbar ** 2 / (4.0 * m * m * s.delta_sq)) * g * g
    den = Sab ** 4 + 16.0 * co.im_A ** 2 * D * D
    delta_sq = Sab ** 2 * D / den
    tw = (2.0 * m / hbar) * 4.0 * co.im_A * D * D / den
    pbar = hbar * (co.im_B + 2.0 * x_c * co.im_A)
    W_new = complex(delta_sq, hbar * tw / (2.0 * m))
    phase = _output_phase(G, s, co, x_c, W_new)
    return make_gaussian(m, hbar, x_c, pbar, delta_sq, tw, phase)


def flow_map(G: QuadraticPropagator, s: GaussianState) -> GaussianState:
    """Propagate through the classical flow: centre by Hamilton's equations,
    width by the linear-fractional law on q = -2 i m W / hbar."""
    _check_pair(G, s)
    m, hbar = s.mass, s.hbar
    x_c, pbar = G.map_phase_point(s.x_center, s.mean_momentum)
    (A, B), (C, D) = G.velocity_matrix()
    q = -2j * m * s.W / hbar
    q_new = (A * q + B) / (C * q + D)
    W_new = 0.5j * hbar * q_new / m
    phase = None
    if G.theta_tracked and s.phase_tracked and not G.displacement.any():
        if np.array_equal(G.flow, np.eye(2)):
            phase = s.global_phase + G.theta
        elif np.array_equal(G.flow, -np.eye(2)):
            phase = s.global_phase + G.theta
    return make_gaussian(m, hbar, x_c, pbar, W_new.real, 2.0 * m * W_new.imag / hbar, phase)


# ---------------------------------------------------------------- schedules

@dataclass
class Trajectory:
    times: List[float] = field(default_factory=list)
    states: List[GaussianState] = field(default_factory=list)
    boundaries: List[float] = field(default_factory=list)
    propagator: QuadraticPropagator = None

    @property
    def final(self) -> GaussianState:
        return self.states[-1]

    def append(self, t, s):
        if self.times and not t > self.times[-1]:
            raise DomainError("snapshot times must increase")
        self.times.append(float(t))
        self.states.append(s)


def segment_duration(seg) -> float:
    """Physical duration of a segment."""
    if isinstance(seg, InverseHarmonic):
        return 2.0 * seg.k * math.pi / seg.omega - seg.T_prime
    return float(seg.T)


def _shift(c, t0):
    if callable(c):
        return lambda t: c(t + t0)
    return c


def _split(seg, n) -> List:
    """Cut a segment into ``n`` consecutive pieces of equal duration."""
    if n <= 1:
        return [seg]
    if isinstance(seg, Free):
        return [Free(seg.T / n)] * n
    if isinstance(seg, Harmonic):
        return [Harmonic(seg.omega, seg.T / n)] * n
    if isinstance(seg, InverseHarmonic):
        return [Harmonic(seg.omega, segment_duration(seg) / n)] * n
    if isinstance(seg, InverseFree):
        return [InverseFree(seg.T / n)] * n
    h = seg.T / n
    if isinstance(seg, ForcedHarmonic):
        out = []
        for j in range(n):
            f = seg.force
            t0 = j * h
            if f.kind == "sinusoid":
                f0, w, ph = f.params
                piece = ForceSpec.sinusoid(f0, w, ph + w * t0, tol=f.tol)
            elif f.kind == "constant":
                piece = f
            else:
                piece = ForceSpec.from_callable(lambda t, f=f, t0=t0: f(t + t0), tol=f.tol)
            out.append(ForcedHarmonic(seg.omega, piece, h))
        return out
    if isinstance(seg, GeneralQuadratic):
        return [GeneralQuadratic(h, *(_shift(c, j * h) for c in (seg.b, seg.c, seg.d, seg.f)))
                for j in range(n)]
    raise DomainError(f"unknown segment {seg!r}")


def evolve_schedule(segments: Sequence, s: GaussianState, snapshot_rule="segment"
                    ) -> Trajectory:
    """Apply segments in order.

    ``snapshot_rule`` is ``"segment"`` (one snapshot per segment end) or a
    positive float giving the maximal spacing between snapshots.
    """
    if not segments:
        raise DomainError("empty schedule")
    m, hbar = s.mass, s.hbar
    traj = Trajectory()
    traj.append(0.0, s)
    t = 0.0
    props = []
    cur = s
    for seg in segments:
        dur = segment_duration(seg)
        if snapshot_rule == "segment":
            n = 1
        else:
            dt = float(snapshot_rule)
            if not dt > 0:
                raise DomainError("snapshot spacing must be positive")
            n = max(1, math.ceil(dur / dt - 1e-12))
        pieces = _split(seg, n)
        props.append(propagator_for(seg, m, hbar))
        for j, piece in enumerate(pieces):
            cur = apply(propagator_for(piece, m, hbar), cur)
            if isinstance(seg, InverseHarmonic) and j == len(pieces) - 1:
                cur = cur.with_phase(None)
            traj.append(t + dur * (j + 1) / len(pieces), cur)
        t += dur
        traj.boundaries.append(t)
    traj.propagator = compose_all(props)
    return traj
