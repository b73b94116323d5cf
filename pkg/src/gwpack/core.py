"""Gaussian wave-packet states and the closed-form Gaussian integral.

A state is stored through five real numbers: centre ``x_center``, mean
momentum ``mean_momentum``, real linewidth ``delta_sq`` and the dispersion
time ``tw``.  The complex linewidth is

    W = delta_sq + i * hbar * tw / (2 m)

and the position-space amplitude is

    psi(x) = exp(i phase) (delta_sq / 2 pi)**(1/4) W**(-1/2)
             * exp(-(x - x_center)**2 / (4 W)) * exp(i mean_momentum x / hbar)

``mean_momentum`` is the physical expectation value of p.  Writing the plane
wave as exp(-i p0 x / hbar) instead gives ``p0 = -mean_momentum``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError

__all__ = [
    "GaussianState",
    "ComplexLinewidth",
    "make_gaussian",
    "sample_wavefunction",
    "overlap",
    "gaussian_integral",
    "ground_state",
]


@dataclass(frozen=True)
class ComplexLinewidth:
    """Complex width ``real_part + 1j * imag_part`` (both in length**2)."""

    real_part: float
    imag_part: float

    def __post_init__(self):
        if not self.real_part > 0:
            raise DomainError("real part of the linewidth must be positive",
                              real_part=self.real_part)

    @property
    def value(self) -> complex:
        return complex(self.real_part, self.imag_part)

    @classmethod
    def from_fields(cls, delta_sq, tw, mass=1.0, hbar=1.0):
        return cls(float(delta_sq), hbar * tw / (2.0 * mass))

    def to_fields(self, mass=1.0, hbar=1.0):
        """Return ``(delta_sq, tw)``."""
        return self.real_part, 2.0 * mass * self.imag_part / hbar


@dataclass(frozen=True)
class GaussianState:
    mass: float
    hbar: float
    x_center: float
    mean_momentum: float
    delta_sq: float
    tw: float
    global_phase: float = 0.0
    phase_tracked: bool = True

    def __post_init__(self):
        for name in ("mass", "hbar", "delta_sq"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive and finite", **{name: v})
        for name in ("x_center", "mean_momentum", "tw", "global_phase"):
            if not np.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")

    @property
    def W(self) -> complex:
        return complex(self.delta_sq, self.hbar * self.tw / (2.0 * self.mass))

    @property
    def linewidth(self) -> ComplexLinewidth:
        return ComplexLinewidth(self.delta_sq, self.W.imag)

    @property
    def p0(self) -> float:
        """Momentum parameter of the exp(-i p0 x / hbar) convention."""
        return -self.mean_momentum

    @property
    def spreading(self) -> float:
        """sqrt(2 [delta_sq + (hbar tw / (2 m sqrt(delta_sq)))**2])."""
        r = self.hbar * self.tw / (2.0 * self.mass * math.sqrt(self.delta_sq))
        return math.sqrt(2.0 * (self.delta_sq + r * r))

    @property
    def position_variance(self) -> float:
        return abs(self.W) ** 2 / self.delta_sq

    @property
    def momentum_variance(self) -> float:
        return self.hbar ** 2 / (4.0 * self.delta_sq)

    def with_phase(self, phase):
        """Copy with a new global phase; ``None`` marks it untracked."""
        if phase is None:
            return replace(self, global_phase=0.0, phase_tracked=False)
        return replace(self, global_phase=float(phase), phase_tracked=True)

    def to_dict(self):
        return {
            "mass": self.mass,
            "hbar": self.hbar,
            "x_center": self.x_center,
            "mean_momentum": self.mean_momentum,
            "delta_sq": self.delta_sq,
            "tw": self.tw,
            "global_phase": self.global_phase if self.phase_tracked else None,
        }

    @classmethod
    def from_dict(cls, d):
        return make_gaussian(d.get("mass", 1.0), d.get("hbar", 1.0),
                             d.get("x_center", 0.0), d.get("mean_momentum", 0.0),
                             d["delta_sq"], d.get("tw", 0.0), d.get("global_phase", 0.0))


def make_gaussian(m, hbar, x0, pbar, delta_sq, tw=0.0, phase=0.0) -> GaussianState:
    """Build a validated state.  ``phase=None`` leaves the global phase untracked."""
    tracked = phase is not None
    return GaussianState(float(m), float(hbar), float(x0), float(pbar),
                         float(delta_sq), float(tw),
                         float(phase) if tracked else 0.0, tracked)


def ground_state(omega, m=1.0, hbar=1.0, x0=0.0, pbar=0.0) -> GaussianState:
    """Oscillator ground state (or coherent state when displaced)."""
    if not omega > 0:
        raise DomainError("omega must be positive", omega=omega)
    return make_gaussian(m, hbar, x0, pbar, hbar / (2.0 * m * omega), 0.0)


def sample_wavefunction(s: GaussianState, grid) -> np.ndarray:
    x = np.asarray(grid, dtype=float)
    if x.size == 0:
        raise DomainError("empty grid")
    if x.size > 1:
        half = 6.0 * s.spreading
        if x.min() > s.x_center - half or x.max() < s.x_center + half:
            warnings.warn("grid does not cover six spreadings around the centre",
                          RuntimeWarning, stacklevel=2)
    W = s.W
    pref = (s.delta_sq / (2.0 * np.pi)) ** 0.25 / np.sqrt(W)
    if s.phase_tracked:
        pref *= np.exp(1j * s.global_phase)
    return pref * np.exp(-(x - s.x_center) ** 2 / (4.0 * W)
                         + 1j * s.mean_momentum * x / s.hbar)


def gaussian_integral(a, b=0.0) -> complex:
    """Integral of exp(-a x**2 + b x) over the real line.

    Principal-branch value sqrt(pi / a) exp(b**2 / (4 a)).  Purely imaginary
    ``a`` is accepted as the limit of vanishing positive damping.
    """
    a = complex(a)
    b = complex(b)
    if a == 0:
        raise DomainError("quadratic coefficient must be nonzero")
    if a.real < 0:
        raise DomainError("integral diverges for Re(a) < 0", a=a)
    return complex(np.sqrt(np.pi / a) * np.exp(b * b / (4.0 * a)))


def overlap(a: GaussianState, b: GaussianState) -> complex:
    """<a|b> in closed form."""
    if a.mass != b.mass or a.hbar != b.hbar:
        raise DomainError("states carry different mass or hbar")
    Wa = a.W.conjugate()
    Wb = b.W
    quad = 1.0 / (4.0 * Wa) + 1.0 / (4.0 * Wb)
    lin = (a.x_center / (2.0 * Wa) + b.x_center / (2.0 * Wb)
           + 1j * (b.mean_momentum - a.mean_momentum) / a.hbar)
    const = -a.x_center ** 2 / (4.0 * Wa) - b.x_center ** 2 / (4.0 * Wb)
    pref = (a.delta_sq * b.delta_sq / (4.0 * np.pi ** 2)) ** 0.25
    pref /= np.conj(np.sqrt(a.W)) * np.sqrt(Wb)
    if a.phase_tracked and b.phase_tracked:
        pref *= np.exp(1j * (b.global_phase - a.global_phase))
    # fold the constant into the exponent to avoid overflow for distant states
    a_ = complex(quad)
    val = pref * np.sqrt(np.pi / a_) * np.exp(lin * lin / (4.0 * a_) + const)
    return complex(val)
