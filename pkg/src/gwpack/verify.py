"""Run a segment schedule through the grid oracle and compare with the closed form."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .core import GaussianState, sample_wavefunction
from .errors import DomainError
from .evolve import evolve_schedule, segment_duration
from .oracle import (ComparisonReport, GridHamiltonian, auto_grid, compare, grid_evolve,
                     grid_state, make_grid)
from .propagators import (Free, ForcedHarmonic, GeneralQuadratic, Harmonic, InverseFree,
                          InverseHarmonic)

__all__ = ["grid_hamiltonian", "grid_reference", "verify_schedule"]


def grid_hamiltonian(seg, m=1.0) -> GridHamiltonian:
    """Grid form of one physical segment (time measured from its start)."""
    if isinstance(seg, Free):
        return GridHamiltonian()
    if isinstance(seg, (Harmonic, InverseHarmonic)):
        return GridHamiltonian(c=m * seg.omega ** 2)
    if isinstance(seg, ForcedHarmonic):
        return GridHamiltonian(c=m * seg.omega ** 2, f=seg.force)
    if isinstance(seg, GeneralQuadratic):
        if callable(seg.b) or seg.b != 0.0:
            raise DomainError("the grid oracle has no (px + xp) term")
        return GridHamiltonian(c=seg.c, f=seg.f, d=seg.d)
    if isinstance(seg, InverseFree):
        raise DomainError("inverse free flight has no physical grid realization; "
                          "run its oscillator sandwich instead")
    raise DomainError(f"unknown segment {seg!r}")


def grid_reference(segments: Sequence, s0: GaussianState, dt=1e-3, x=None):
    """Propagate the sampled initial state segment by segment on a grid."""
    if x is None:
        traj = evolve_schedule(segments, s0, snapshot_rule=max(dt * 50, 0.05))
        x = auto_grid(traj.states, n_min=1024, span=10.0)
    psi = grid_state(x, sample_wavefunction(s0, x), s0.mass, s0.hbar)
    for seg in segments:
        dur = segment_duration(seg)
        steps = max(1, math.ceil(dur / dt - 1e-12))
        psi = grid_evolve(grid_hamiltonian(seg, s0.mass), psi, dur / steps, steps)
    return psi


def verify_schedule(segments: Sequence, s0: GaussianState, dt=1e-3, n_points=None):
    """Closed-form final state and its comparison against the grid oracle."""
    traj = evolve_schedule(segments, s0)
    x = None
    if n_points is not None:
        ref = evolve_schedule(segments, s0, snapshot_rule=max(dt * 50, 0.05))
        lo = min(s.x_center - 10 * math.sqrt(s.position_variance) for s in ref.states)
        hi = max(s.x_center + 10 * math.sqrt(s.position_variance) for s in ref.states)
        x = make_grid(lo, hi, int(n_points))
    psi = grid_reference(segments, s0, dt, x)
    return traj.final, compare(traj.final, psi)
