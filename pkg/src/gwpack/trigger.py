"""Three-level atom in a harmonic trap driven by a matched pair of beams.

Internal levels are ordered (g0, g1, e).  The drive couples g0 and e only, so
any product state with the atom in g1 is left alone.  Operators act on
internal (x) motional space, with the motional factor represented in a
truncated number basis (``FockBasis``) or sampled on a position grid.

Programs are lists of primitives in the order they are applied (the first
element acts first).  Operator products written in the usual right-to-left
notation therefore appear reversed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, linalg

from .core import GaussianState, make_gaussian
from .errors import DomainError, NumericError
from .oracle import FockState, fit_gaussian, fock_operators, fock_to_grid, hermite_functions

__all__ = [
    "G0", "G1", "E",
    "InternalLevels",
    "RamanPair",
    "MatchedDrive",
    "FockBasis",
    "EvolveFree",
    "EvolveFreeInverse",
    "LaserPulse",
    "Drive",
    "PulseProgram",
    "matched_dipole_H",
    "rotating_frame_H",
    "commutator_Q",
    "commutator_Q_closed_form",
    "suzuki_weight",
    "compile_UI",
    "compile_Q_sequence",
    "rotation_Rz",
    "program_unitary",
    "target_unitary",
    "gaussian_to_fock",
    "apply_trigger",
    "TriggerResult",
    "EffectiveParams",
    "effective_params",
    "effective_forced_prediction",
    "raman_hamiltonian",
]

G0, G1, E = 0, 1, 2
LEVEL_INDEX = {"g0": G0, "g1": G1, "e": E}

_I0 = np.diag([1.0, 0.0, 0.0]).astype(complex)
_I1 = np.diag([0.0, 0.0, 1.0]).astype(complex)
_IZ = 0.5 * (_I1 - _I0)
_IP = np.zeros((3, 3), complex)
_IP[E, G0] = 1.0
_IM = _IP.conj().T


@dataclass(frozen=True)
class InternalLevels:
    E0: float
    E1: float
    E2: float
    hbar: float = 1.0

    def __post_init__(self):
        if not self.E2 > self.E0:
            raise DomainError("the excited level must lie above g0")

    @property
    def omega_a(self) -> float:
        return (self.E2 - self.E0) / self.hbar

    @property
    def alpha0(self) -> float:
        return 0.5 * (self.E2 + self.E0)

    # fixed internal operators
    I_z = _IZ
    I_plus = _IP
    I_minus = _IM
    I_0 = _I0
    I_1 = _I1


def _val(c, t):
    return float(c(t)) if callable(c) else float(c)


@dataclass(frozen=True, eq=False)
class RamanPair:
    rabi0: object
    rabi1: object
    k0: float
    k1: float
    omega0: float
    omega1: float
    phi0: float = 0.0
    phi1: float = 0.0

    @property
    def dk(self):
        return self.k0 - self.k1

    @property
    def dw(self):
        return self.omega0 - self.omega1

    @property
    def dphi(self):
        return self.phi0 - self.phi1

    def eta(self, omega, m=1.0, hbar=1.0):
        """Lamb-Dicke parameter of the wave-vector difference."""
        return math.sqrt(hbar ** 2 * self.dk ** 2 / (2.0 * m * hbar * omega))

    def lamb_dicke(self, omega, m=1.0, hbar=1.0, amplitude=1.0):
        return self.eta(omega, m, hbar) * amplitude < 0.1


@dataclass(frozen=True)
class MatchedDrive:
    alpha: float
    gamma: float
    rabi: float
    k_sum: float
    k_diff: float

    @classmethod
    def from_wavevectors(cls, alpha, gamma, rabi, k0, k1):
        return cls(alpha, gamma, rabi, k0 + k1, k0 - k1)

    def with_gamma(self, gamma):
        return MatchedDrive(self.alpha, gamma, self.rabi, self.k_sum, self.k_diff)

    def beam_phases(self, omega0, omega1, t):
        """Phases of the two beams that realize this drive at time ``t``."""
        return self.alpha + self.gamma, (omega0 - omega1) * t - self.alpha + self.gamma


# ------------------------------------------------------------------ representation

@dataclass(frozen=True, eq=False)
class FockBasis:
    """Truncated number basis of the trap with frequency ``omega``."""

    N: int
    omega: float = 1.0
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if self.N < 2:
            raise DomainError("need at least two number states")
        a, x, p = fock_operators(self.N, self.mass, self.hbar, self.omega)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    def h0(self):
        n = np.arange(self.N)
        return np.diag(self.hbar * self.omega * (n + 0.5)).astype(complex)

    def exp_ikx(self, k):
        """exp(i k x) as a dense exponential of the truncated position matrix."""
        return linalg.expm(1j * k * self.x)

    def lift(self, internal, motional):
        return np.kron(internal, motional)

    @property
    def dim(self):
        return 3 * self.N


def _position_factor(d: MatchedDrive, basis: FockBasis, gamma=None):
    """exp(i k_sum x / 2 - i gamma) cos(k_diff x / 2 - alpha) on the motional space."""
    g = d.gamma if gamma is None else gamma
    ep = basis.exp_ikx(0.5 * (d.k_sum + d.k_diff)) * np.exp(-1j * d.alpha)
    em = basis.exp_ikx(0.5 * (d.k_sum - d.k_diff)) * np.exp(1j * d.alpha)
    return 0.5 * (ep + em) * np.exp(-1j * g)


def matched_dipole_H(d: MatchedDrive, rep, hbar=1.0):
    """Interaction Hamiltonian of the matched drive.

    ``rep`` is a FockBasis (dense matrix returned) or a 1-D position grid
    (array of 3x3 blocks, one per point, returned).
    """
    if isinstance(rep, FockBasis):
        F = _position_factor(d, rep)
        H = 2.0 * rep.hbar * d.rabi * (np.kron(_IP, F) + np.kron(_IM, F.conj().T))
        herm = np.abs(H - H.conj().T).max()
        if herm > 1e-13 * max(1.0, np.abs(H).max()):
            raise NumericError("internal error: drive Hamiltonian not Hermitian", error=herm)
        return H
    x = np.asarray(rep, dtype=float)
    f = (np.exp(0.5j * d.k_sum * x - 1j * d.gamma) * np.cos(0.5 * d.k_diff * x - d.alpha))
    H = np.zeros((x.size, 3, 3), complex)
    H[:, E, G0] = 2.0 * hbar * d.rabi * f
    H[:, G0, E] = np.conj(H[:, E, G0])
    return H


def rotating_frame_H(levels: InternalLevels, d: MatchedDrive, detuning, basis: FockBasis):
    """Trap + detuning * I_z + matched drive, in the frame of the first beam."""
    hb = basis.hbar
    H = np.kron(np.eye(3), basis.h0())
    H = H + hb * detuning * np.kron(_IZ, np.eye(basis.N))
    if d.rabi != 0.0:
        H = H + matched_dipole_H(d, basis)
    return H


def commutator_Q(d: MatchedDrive, basis: FockBasis):
    """i [H(alpha, 0), H(alpha, pi/2)] formed numerically."""
    A = matched_dipole_H(d.with_gamma(0.0), basis)
    B = matched_dipole_H(d.with_gamma(0.5 * math.pi), basis)
    return 1j * (A @ B - B @ A)


def commutator_Q_closed_form(d: MatchedDrive, basis: FockBasis):
    """-16 hbar**2 rabi**2 I_z cos**2(k_diff x / 2 - alpha)."""
    c = 0.5 * (basis.exp_ikx(0.5 * d.k_diff) * np.exp(-1j * d.alpha)
               + basis.exp_ikx(-0.5 * d.k_diff) * np.exp(1j * d.alpha))
    return -16.0 * basis.hbar ** 2 * d.rabi ** 2 * np.kron(_IZ, c @ c)


# ------------------------------------------------------------------ programs

@dataclass(frozen=True)
class EvolveFree:
    """Trap only, for time ``t``."""
    t: float


@dataclass(frozen=True)
class EvolveFreeInverse:
    """Undo ``t`` of trap evolution by running on to ``k`` whole periods."""
    t: float
    k: int = 1


@dataclass(frozen=True)
class LaserPulse:
    """Trap plus matched drive switched on together for time ``t``."""
    alpha: float
    gamma: float
    t: float


@dataclass(frozen=True)
class Drive:
    """Matched drive alone (trap motion removed); ``dagger`` marks an abstract inverse."""
    alpha: float
    gamma: float
    t: float
    dagger: bool = False


Primitive = Union[EvolveFree, EvolveFreeInverse, LaserPulse, Drive]


@dataclass(frozen=True)
class PulseProgram:
    steps: Tuple
    error_order: int
    target: str
    realizable: bool = True
    notes: str = ""

    def __len__(self):
        return len(self.steps)

    def total_time(self, omega):
        total = 0.0
        for s in self.steps:
            if isinstance(s, EvolveFreeInverse):
                total += 2 * s.k * math.pi / omega - s.t
            else:
                total += abs(s.t)
        return total

    def describe(self):
        out = []
        for s in self.steps:
            d = {"kind": type(s).__name__}
            d.update({k: v for k, v in s.__dict__.items()})
            out.append(d)
        return out


def _minimal_k(t, omega):
    return max(1, math.floor(omega * t / (2.0 * math.pi)) + 1)


def _inverse_free(t, omega):
    """Inverse trap evolution; a negative duration becomes plain evolution."""
    if t < 0:
        return EvolveFree(-t)
    return EvolveFreeInverse(t, _minimal_k(t, omega))


def suzuki_weight(n):
    """(4 - 4**(1/(2n-1)))**-1."""
    return 1.0 / (4.0 - 4.0 ** (1.0 / (2 * n - 1)))


def _s_steps(alpha, gamma, dt, level, omega):
    """Symmetric composition of recursion depth ``level`` (1 = basic symmetric)."""
    if level == 1:
        return [_inverse_free(0.5 * dt, omega), LaserPulse(alpha, gamma, dt),
                _inverse_free(0.5 * dt, omega)]
    n = (level + 1) // 2
    p = suzuki_weight(n)
    outer = _s_steps(alpha, gamma, p * dt, level - 2, omega)
    middle = _s_steps(alpha, gamma, (1 - 4 * p) * dt, level - 2, omega)
    return outer + outer + middle + outer + outer


def compile_UI(d: MatchedDrive, dt, order, omega) -> PulseProgram:
    """Approximate the drive-only propagator for ``dt`` from trap and laser pulses.

    ``order`` 1 gives the plain two-factor product (error ~ dt**2), 2 the
    symmetric three-factor product (~ dt**3) and an odd ``2n - 1 >= 3`` the
    recursive symmetric composition (~ dt**(2n + 1)).
    """
    if not dt > 0:
        raise DomainError("dt must be positive")
    if not omega > 0:
        raise DomainError("omega must be positive")
    target = f"exp(-i H_drive(alpha={d.alpha}, gamma={d.gamma}) dt / hbar), dt={dt}"
    if order == 1:
        steps = [LaserPulse(d.alpha, d.gamma, dt), _inverse_free(dt, omega)]
        return PulseProgram(tuple(steps), 2, target)
    if order == 2:
        return PulseProgram(tuple(_s_steps(d.alpha, d.gamma, dt, 1, omega)), 3, target)
    if isinstance(order, int) and order >= 3 and order % 2 == 1:
        steps = _s_steps(d.alpha, d.gamma, dt, order, omega)
        backward = any(isinstance(s, LaserPulse) and s.t < 0 for s in steps)
        return PulseProgram(tuple(steps), order + 2, target, realizable=not backward,
                            notes="contains laser pulses of negative duration"
                            if backward else "")
    raise DomainError("order must be 1, 2 or an odd integer >= 3", order=order)


def compile_Q_sequence(d: MatchedDrive, dt, variant="realizable") -> PulseProgram:
    """Approximate exp(i Q dt**2 / hbar**2) by drive pulses with phases 0 and pi/2."""
    if not dt > 0:
        raise DomainError("dt must be positive")
    a = d.alpha
    target = f"exp(i Q(alpha={a}) dt^2 / hbar^2), dt={dt}"
    if variant == "basic":
        ops = [Drive(a, 0.0, dt), Drive(a, 0.5 * math.pi, dt),
               Drive(a, 0.0, dt, True), Drive(a, 0.5 * math.pi, dt, True)]
        return PulseProgram(tuple(reversed(ops)), 3, target)
    if variant not in ("improved", "realizable"):
        raise DomainError(f"unknown variant {variant!r}")
    h = dt / math.sqrt(2.0)
    U0, U1 = Drive(a, 0.0, h), Drive(a, 0.5 * math.pi, h)
    if variant == "improved":
        V0, V1 = Drive(a, 0.0, h, True), Drive(a, 0.5 * math.pi, h, True)
    else:
        V0, V1 = Drive(a, math.pi, h), Drive(a, 1.5 * math.pi, h)
    ops = [U0, U1, V0, V1, V0, V1, U0, U1]
    return PulseProgram(tuple(reversed(ops)), 4, target)


def rotation_Rz(d: MatchedDrive, dt, variant="realizable") -> PulseProgram:
    """Internal rotation exp(-i theta I_z) with theta = 16 rabi**2 dt**2."""
    if d.alpha != 0.0:
        raise DomainError("the rotation needs alpha = 0", alpha=d.alpha)
    prog = compile_Q_sequence(d, dt, variant)
    theta = 16.0 * d.rabi ** 2 * dt ** 2
    return PulseProgram(prog.steps, prog.error_order, f"exp(-i {theta} I_z)", prog.realizable)


def _primitive_unitary(step, d: MatchedDrive, basis: FockBasis, omega, cache):
    key = step
    if key in cache:
        return cache[key]
    hb = basis.hbar
    H0 = np.kron(np.eye(3), basis.h0())
    if isinstance(step, EvolveFree):
        U = np.diag(np.exp(-1j * np.diag(H0).real * step.t / hb))
    elif isinstance(step, EvolveFreeInverse):
        t1 = 2.0 * step.k * math.pi / omega - step.t
        U = np.diag(np.exp(-1j * np.diag(H0).real * t1 / hb))
    elif isinstance(step, LaserPulse):
        H = H0 + matched_dipole_H(MatchedDrive(step.alpha, step.gamma, d.rabi, d.k_sum,
                                               d.k_diff), basis)
        U = linalg.expm(-1j * H * step.t / hb)
    elif isinstance(step, Drive):
        H = matched_dipole_H(MatchedDrive(step.alpha, step.gamma, d.rabi, d.k_sum, d.k_diff),
                             basis)
        U = linalg.expm(-1j * H * step.t / hb)
        if step.dagger:
            U = U.conj().T
    else:
        raise DomainError(f"unknown primitive {step!r}")
    cache[key] = U
    return U


def program_unitary(program: PulseProgram, d: MatchedDrive, basis: FockBasis, omega=None):
    """Dense unitary of a program on internal (x) number space.

    ``omega`` is the trap frequency used to realize inverse trap evolution;
    by default the basis frequency.
    """
    omega = basis.omega if omega is None else omega
    cache = {}
    U = np.eye(basis.dim, dtype=complex)
    for step in program.steps:
        U = _primitive_unitary(step, d, basis, omega, cache) @ U
    return U


def target_unitary(kind, d: MatchedDrive, dt, basis: FockBasis):
    """Exact reference: ``"drive"`` for exp(-i H_drive dt) or ``"Q"`` for exp(i Q dt**2)."""
    hb = basis.hbar
    if kind == "drive":
        return linalg.expm(-1j * matched_dipole_H(d, basis) * dt / hb)
    if kind == "Q":
        return linalg.expm(1j * commutator_Q(d, basis) * dt ** 2 / hb ** 2)
    if kind == "Rz":
        theta = 16.0 * d.rabi ** 2 * dt ** 2
        return np.kron(np.diag(np.exp(-1j * theta * np.diag(_IZ).real)), np.eye(basis.N))
    raise DomainError(f"unknown target {kind!r}")


# ------------------------------------------------------------------ state preparation

def gaussian_to_fock(s: GaussianState, basis: FockBasis, n_grid=4096, span=12.0):
    """Number-basis amplitudes of a Gaussian packet by quadrature on a fine grid."""
    from .core import sample_wavefunction

    if s.mass != basis.mass or s.hbar != basis.hbar:
        raise DomainError("state and basis carry different mass or hbar")
    sd = math.sqrt(s.position_variance)
    osc = math.sqrt(basis.hbar / (basis.mass * basis.omega))
    half = span * max(sd, osc) + abs(s.x_center)
    x = np.linspace(-half, half, n_grid)
    dx = x[1] - x[0]
    phi = hermite_functions(basis.N, x, basis.mass, basis.hbar, basis.omega)
    c = phi @ sample_wavefunction(s, x) * dx
    tail = 1.0 - float(np.sum(np.abs(c) ** 2))
    return c, tail


@dataclass
class TriggerResult:
    final: FockState
    populations: Dict[str, float]
    fidelity_with_initial: float
    fits: Dict[str, object] = field(default_factory=dict)

    def mean_momentum(self, level):
        return self.fits[level].state.mean_momentum


def apply_trigger(program: PulseProgram, d: MatchedDrive, initial, basis: FockBasis,
                  omega=None, tail_tol=1e-12, fit_levels=None, grid=None) -> TriggerResult:
    """Run a program on a product state and fit Gaussians to the populated levels.

    ``initial`` is ``(label, GaussianState)`` with label in {"g0", "g1", "e"}.
    """
    label, s = initial
    if label not in LEVEL_INDEX:
        raise DomainError(f"unknown internal level {label!r}")
    c, tail = gaussian_to_fock(s, basis)
    if tail > tail_tol:
        raise NumericError("number-basis truncation too small for the initial state",
                           tail=tail, suggested_dim=2 * basis.N)
    psi0 = np.zeros((3, basis.N), complex)
    psi0[LEVEL_INDEX[label]] = c
    U = program_unitary(program, d, basis, omega)
    v = U @ psi0.reshape(-1)
    final = FockState(v.reshape(3, basis.N))
    top = final.tail_population(top=max(1, basis.N // 10))
    if top > 1e-8:
        raise NumericError("population reached the top of the number basis", tail=top)
    pops = {name: float(np.sum(np.abs(final.psi[i]) ** 2)) for name, i in LEVEL_INDEX.items()}
    fid = float(abs(np.vdot(psi0.reshape(-1), v)))
    if grid is None:
        sd = math.sqrt(basis.hbar / (2 * basis.mass * basis.omega))
        grid = np.linspace(-14 * sd, 14 * sd, 2048, endpoint=False)
    fits = {}
    for name in (fit_levels or [k for k, p in pops.items() if p > 1e-6]):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            g = fock_to_grid(final, grid, basis.mass, basis.hbar, basis.omega)
            fits[name] = fit_gaussian(g, level=LEVEL_INDEX[name])
    return TriggerResult(final, pops, fid, fits)


# ------------------------------------------------------------------ off-resonance model

@dataclass(frozen=True, eq=False)
class EffectiveParams:
    """First-order effective parameters of an off-resonant beam pair.

    Call the methods with a time argument; ``beta`` is the first-order effective
    expression (carrying the factor exp(i omega t) of the uncoupled motion) and
    ``beta_frame`` removes that factor so that the coefficient multiplies the
    time-independent ladder operators.
    """

    pair: RamanPair
    levels: InternalLevels
    omega: float
    mass: float = 1.0
    hbar: float = 1.0
    tol: float = 1e-10
    include_integral: bool = True

    def __post_init__(self):
        for l, w in ((0, self.pair.omega0), (1, self.pair.omega1)):
            if self.levels.omega_a - w == 0:
                raise DomainError("zero detuning makes the effective parameters singular",
                                  beam=l)

    @property
    def detunings(self):
        wa = self.levels.omega_a
        return wa - self.pair.omega0, wa - self.pair.omega1

    def omega_e(self, t):
        d0, d1 = self.detunings
        r = 2.0 * _val(self.pair.rabi0, t) * _val(self.pair.rabi1, t)
        return r / d0, r / d1

    def omega_eff(self, t):
        d0, d1 = self.detunings
        r = 2.0 * _val(self.pair.rabi0, t) * _val(self.pair.rabi1, t)
        return self.pair.k0 * r / d1 - self.pair.k1 * r / d0

    def omega_a_eff(self, t):
        d0, d1 = self.detunings
        e0, e1 = self.omega_e(t)
        r0, r1 = _val(self.pair.rabi0, t), _val(self.pair.rabi1, t)
        return (self.levels.omega_a + 4 * r0 ** 2 / d0 + 4 * r1 ** 2 / d1
                + 2 * (e0 + e1) * math.cos(self.pair.dw * t + self.pair.dphi))

    def _phase_arg(self, t):
        return self.pair.dw * t + self.pair.dphi

    def beta_integral(self, t):
        """Time-integral contribution to beta at ``t``."""
        if t == 0.0 or not self.include_integral:
            return 0.0j
        w = self.omega
        g = lambda s: self.omega_eff(s) * math.sin(self._phase_arg(s))
        opts = dict(epsabs=self.tol, epsrel=self.tol, limit=400)
        re, _ = integrate.quad(lambda s: g(s) * math.cos(w * s), 0.0, t, **opts)
        im, _ = integrate.quad(lambda s: g(s) * math.sin(w * s), 0.0, t, **opts)
        return -1j * math.sqrt(2 * self.hbar * w / self.mass) * complex(re, im)

    def beta_boundary(self, t):
        e0, e1 = self.omega_e(t)
        w = self.omega
        return (self.pair.dk * math.sqrt(2 * self.hbar / (self.mass * w)) * (e0 + e1)
                * math.sin(self._phase_arg(t)) * complex(math.cos(w * t), math.sin(w * t)))

    def beta(self, t):
        return self.beta_integral(t) + self.beta_boundary(t)

    def beta_frame(self, t):
        return self.beta(t) * complex(math.cos(self.omega * t), -math.sin(self.omega * t))

    def force(self, t):
        """sqrt(2 m hbar omega) * beta_frame(t), real part (see ``realness``)."""
        return math.sqrt(2 * self.mass * self.hbar * self.omega) * self.beta_frame(t).real

    def realness(self, T, n=401):
        """Largest |Im beta_frame| relative to the largest |beta_frame| on [0, T]."""
        ts = np.linspace(0.0, T, n)
        b = np.array([self.beta_frame(t) for t in ts])
        scale = np.abs(b).max()
        return 0.0 if scale == 0 else float(np.abs(b.imag).max() / scale)

    def nonsecular_ratio(self, t):
        """Drive amplitude over detuning; small values justify the first-order model."""
        d0, d1 = self.detunings
        r0, r1 = _val(self.pair.rabi0, t), _val(self.pair.rabi1, t)
        return max(abs(r0 / d0), abs(r1 / d1))

    def snapshot(self, t):
        e0, e1 = self.omega_e(t)
        return {"t": t, "beta": self.beta(t), "omega_a_eff": self.omega_a_eff(t),
                "omega_eff": self.omega_eff(t), "omega_e0": e0, "omega_e1": e1,
                "force": self.force(t), "nonsecular_ratio": self.nonsecular_ratio(t)}


def effective_params(pair: RamanPair, levels: InternalLevels, omega, m=1.0, hbar=1.0,
                     tol=1e-10, include_integral=True) -> EffectiveParams:
    return EffectiveParams(pair, levels, omega, m, hbar, tol, include_integral)


def effective_forced_prediction(params: EffectiveParams, branch, T, s0: GaussianState,
                                real_tol=1e-8, n_table=2001):
    """Gaussian predicted by the forced oscillator with force -f/2 (g0) or +f/2 (e)."""
    from .evolve import apply
    from .propagators import ForceSpec, forced_harmonic

    if branch not in ("g0", "e"):
        raise DomainError("branch must be 'g0' or 'e'")
    ratio = params.realness(T)
    if ratio > real_tol:
        raise DomainError("effective force is not real for these beam parameters",
                          imaginary_ratio=ratio)
    sign = -0.5 if branch == "g0" else 0.5
    if params.include_integral and any(params.omega_eff(t) != 0.0
                                       for t in np.linspace(0, T, 17)):
        ts = np.linspace(0.0, T, n_table)
        vals = [sign * params.force(t) for t in ts]
        force = ForceSpec.tabulated(ts, vals, "cubic")
    else:
        force = ForceSpec.from_callable(lambda t: sign * params.force(t))
    G = forced_harmonic(params.omega, force, T, s0.mass, s0.hbar)
    return apply(G, s0)


def raman_hamiltonian(pair: RamanPair, levels: InternalLevels, basis: FockBasis):
    """Time-dependent Hamiltonian of the beam pair in the frame rotating at omega_a.

    Returns a callable t -> dense matrix on internal (x) number space.  No
    effective-model approximation is made beyond truncation.
    """
    hb = basis.hbar
    H0 = np.kron(np.eye(3), basis.h0())
    d0 = levels.omega_a - pair.omega0
    d1 = levels.omega_a - pair.omega1
    X0 = np.kron(_IP, basis.exp_ikx(pair.k0))
    X1 = np.kron(_IP, basis.exp_ikx(pair.k1))

    def H(t):
        c0 = hb * _val(pair.rabi0, t) * np.exp(1j * (d0 * t - pair.phi0))
        c1 = hb * _val(pair.rabi1, t) * np.exp(1j * (d1 * t - pair.phi1))
        V = c0 * X0 + c1 * X1
        return H0 + V + V.conj().T

    return H
