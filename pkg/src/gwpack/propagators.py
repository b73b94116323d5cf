"""Unitary propagators of quadratic Hamiltonians.

The canonical representation is the affine classical map

    (x_b, p_b) = flow @ (x_a, p_a) + displacement

plus a kernel phase ``theta``.  The position-space kernel

    K(x_b, x_a) = sqrt(m / (2 pi i hbar f)) exp(i theta)
                  * exp(i m / (2 hbar) [S_bb x_b**2 + 2 S_ab x_a x_b + S_aa x_a**2])
                  * exp(i / hbar [Q_a x_a + Q_b x_b]),     f = -1 / S_ab,

is a derived view; it does not exist when flow[0, 1] == 0 (focal points).
The square root in the prefactor is always the principal branch and
``theta`` absorbs whatever extra phase the exact kernel carries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import integrate, interpolate

from .errors import DomainError, NumericError, SingularityError

__all__ = [
    "KernelView",
    "QuadraticPropagator",
    "ForceSpec",
    "Free",
    "InverseFree",
    "Harmonic",
    "InverseHarmonic",
    "ForcedHarmonic",
    "GeneralQuadratic",
    "SandwichSolution",
    "identity",
    "free",
    "inverse_free_direct",
    "harmonic",
    "harmonic_inverse",
    "forced_harmonic",
    "from_quadratic_hamiltonian",
    "compose",
    "compose_all",
    "inverse_free_sandwich",
    "propagator_for",
]

# |m * flow[0, 1]| below this (in time units) counts as a focal point.
FOCAL_ATOL = 1e-13
# relative tolerance for snapping omega * T onto a multiple of pi
_SNAP_RTOL = 1e-13


@dataclass(frozen=True)
class KernelView:
    S_bb: float
    S_ab: float
    S_aa: float
    Q_a: float
    Q_b: float
    theta: float
    theta_tracked: bool

    @property
    def f_ab(self) -> float:
        return -1.0 / self.S_ab


@dataclass(frozen=True, eq=False)
class QuadraticPropagator:
    mass: float
    hbar: float
    flow: np.ndarray
    displacement: np.ndarray = field(default_factory=lambda: np.zeros(2))
    theta: float = 0.0
    theta_tracked: bool = True

    def __post_init__(self):
        M = np.array(self.flow, dtype=float).reshape(2, 2)
        d = np.array(self.displacement, dtype=float).reshape(2)
        M.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "flow", M)
        object.__setattr__(self, "displacement", d)
        if not (self.mass > 0 and self.hbar > 0):
            raise DomainError("mass and hbar must be positive")
        if not (np.all(np.isfinite(M)) and np.all(np.isfinite(d))):
            raise NumericError("non-finite propagator entries")

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.flow))

    def is_focal(self) -> bool:
        return abs(self.mass * self.flow[0, 1]) <= FOCAL_ATOL

    def kernel(self) -> Optional[KernelView]:
        """Kernel coefficients, or ``None`` at a focal point."""
        if self.is_focal():
            return None
        (m11, m12), (_, m22) = self.flow
        dx, dp = self.displacement
        mb = self.mass * m12
        return KernelView(
            S_bb=m22 / mb,
            S_ab=-1.0 / mb,
            S_aa=m11 / mb,
            Q_a=dx / m12,
            Q_b=dp - m22 * dx / m12,
            theta=self.theta,
            theta_tracked=self.theta_tracked,
        )

    def require_kernel(self) -> KernelView:
        view = self.kernel()
        if view is None:
            raise SingularityError("kernel coefficients are unavailable at a focal point",
                                   flow=self.flow.tolist())
        return view

    @classmethod
    def from_kernel(cls, S_bb, S_ab, S_aa, Q_a=0.0, Q_b=0.0, theta=0.0,
                    mass=1.0, hbar=1.0, theta_tracked=True):
        if S_ab == 0:
            raise SingularityError("S_ab must be nonzero")
        m12 = -1.0 / (mass * S_ab)
        m11 = S_aa * mass * m12
        m22 = S_bb * mass * m12
        m21 = (m11 * m22 - 1.0) / m12
        dx = Q_a * m12
        dp = Q_b + m22 * Q_a
        return cls(mass, hbar, [[m11, m12], [m21, m22]], [dx, dp], theta, theta_tracked)

    def map_phase_point(self, x, p):
        z = self.flow @ np.array([x, p], dtype=float) + self.displacement
        return float(z[0]), float(z[1])

    def velocity_matrix(self) -> np.ndarray:
        """Flow in (x, p / m) coordinates."""
        m = self.mass
        (a, b), (c, d) = self.flow
        return np.array([[a, b * m], [c / m, d]])

    def untracked(self) -> "QuadraticPropagator":
        return QuadraticPropagator(self.mass, self.hbar, self.flow, self.displacement,
                                   0.0, False)

    def close_to(self, other, atol=1e-10) -> bool:
        return (np.allclose(self.flow, other.flow, rtol=0, atol=atol)
                and np.allclose(self.displacement, other.displacement, rtol=0, atol=atol))


# ---------------------------------------------------------------- forces

@dataclass(frozen=True, eq=False)
class ForceSpec:
    """Time-dependent linear coefficient f(t) in the Hamiltonian term f(t) x.

    Build with :meth:`constant`, :meth:`sinusoid`, :meth:`tabulated` or
    :meth:`from_callable`.  Times are local to the segment.
    """

    kind: str
    params: tuple = ()
    func: Optional[Callable[[float], float]] = None
    tol: float = 1e-10

    @classmethod
    def zero(cls):
        return cls("constant", (0.0,))

    @classmethod
    def constant(cls, f0, tol=1e-10):
        return cls("constant", (float(f0),), tol=tol)

    @classmethod
    def sinusoid(cls, f0, omega_d, phi_d=0.0, tol=1e-10):
        return cls("sinusoid", (float(f0), float(omega_d), float(phi_d)), tol=tol)

    @classmethod
    def tabulated(cls, times, values, rule="cubic", tol=1e-10):
        t = np.asarray(times, dtype=float)
        v = np.asarray(values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 2:
            raise DomainError("tabulated force needs matching 1-D arrays of length >= 2")
        if not np.all(np.diff(t) > 0):
            raise DomainError("tabulated times must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise DomainError("tabulated force values must be finite")
        if rule == "linear":
            fn = lambda s: float(np.interp(s, t, v))
        elif rule == "cubic":
            fn = interpolate.CubicSpline(t, v)
        else:
            raise DomainError(f"unknown interpolation rule {rule!r}")
        return cls("tabulated", (tuple(t), tuple(v), rule), fn, tol)

    @classmethod
    def from_callable(cls, fn, tol=1e-10):
        return cls("callable", (), fn, tol)

    def __call__(self, t):
        if self.kind == "constant":
            return self.params[0]
        if self.kind == "sinusoid":
            f0, w, ph = self.params
            return f0 * math.cos(w * t + ph)
        return float(self.func(t))

    def is_zero(self):
        return self.kind == "constant" and self.params[0] == 0.0

    def to_dict(self):
        if self.kind == "constant":
            return {"kind": "constant", "f0": self.params[0]}
        if self.kind == "sinusoid":
            f0, w, ph = self.params
            return {"kind": "sinusoid", "f0": f0, "omega_d": w, "phi_d": ph}
        if self.kind == "tabulated":
            t, v, rule = self.params
            return {"kind": "tabulated", "times": list(t), "values": list(v), "rule": rule}
        raise DomainError("callable forces are not serializable")


# ---------------------------------------------------------------- segments

@dataclass(frozen=True)
class Free:
    T: float


@dataclass(frozen=True)
class InverseFree:
    T: float


@dataclass(frozen=True)
class Harmonic:
    omega: float
    T: float


@dataclass(frozen=True)
class InverseHarmonic:
    omega: float
    T_prime: float
    k: int = 1


@dataclass(frozen=True, eq=False)
class ForcedHarmonic:
    omega: float
    force: ForceSpec
    T: float


Coefficient = Union[float, Callable[[float], float]]


@dataclass(frozen=True, eq=False)
class GeneralQuadratic:
    """H = p**2/2m + b(t)(px+xp)/2 + c(t) x**2/2 + d(t) p + f(t) x on [0, T]."""

    T: float
    b: Coefficient = 0.0
    c: Coefficient = 0.0
    d: Coefficient = 0.0
    f: Coefficient = 0.0


PulseSegment = Union[Free, InverseFree, Harmonic, InverseHarmonic, ForcedHarmonic,
                     GeneralQuadratic]


# ---------------------------------------------------------------- constructors

def _check_mh(m, hbar):
    if not (m > 0 and hbar > 0):
        raise DomainError("mass and hbar must be positive", mass=m, hbar=hbar)


def identity(m=1.0, hbar=1.0) -> QuadraticPropagator:
    _check_mh(m, hbar)
    return QuadraticPropagator(m, hbar, np.eye(2))


def free(T, m=1.0, hbar=1.0) -> QuadraticPropagator:
    _check_mh(m, hbar)
    if not T > 0:
        raise DomainError("free flight needs T > 0", T=T)
    return QuadraticPropagator(m, hbar, [[1.0, T / m], [0.0, 1.0]])


def inverse_free_direct(T, m=1.0, hbar=1.0) -> QuadraticPropagator:
    """exp(+i p**2 T / (2 m hbar)); the kernel carries the conjugate prefactor."""
    _check_mh(m, hbar)
    if not T > 0:
        raise DomainError("inverse flight needs T > 0", T=T)
    # principal sqrt(m / (2 pi i hbar f)) with f = -T has phase +pi/4, as wanted
    return QuadraticPropagator(m, hbar, [[1.0, -T / m], [0.0, 1.0]])


def _snapped_rotation(phase):
    """cos and sin of ``phase`` with exact values near multiples of pi / 2."""
    q = phase / (0.5 * math.pi)
    n = round(q)
    if abs(q - n) <= _SNAP_RTOL * max(1.0, abs(q)):
        return [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][n % 4]
    return math.cos(phase), math.sin(phase)


def _oscillator_theta(phase):
    """Phase of the exact oscillator kernel beyond the principal prefactor."""
    n = math.floor(phase / math.pi)
    return -0.5 * math.pi * (n if n % 2 == 0 else n + 1)


def harmonic(omega, T, m=1.0, hbar=1.0) -> QuadraticPropagator:
    _check_mh(m, hbar)
    if not (omega > 0 and T > 0):
        raise DomainError("harmonic segment needs omega > 0 and T > 0", omega=omega, T=T)
    c, s = _snapped_rotation(omega * T)
    flow = [[c, s / (m * omega)], [-m * omega * s, c]]
    if s == 0.0:
        # focal point: the kernel phase is not represented
        return QuadraticPropagator(m, hbar, flow, theta=0.0, theta_tracked=False)
    return QuadraticPropagator(m, hbar, flow, theta=_oscillator_theta(omega * T))


def harmonic_inverse(omega, T_prime, k=1, m=1.0, hbar=1.0) -> QuadraticPropagator:
    """Undo ``harmonic(omega, T_prime)`` by running on to a whole number of periods."""
    if not (isinstance(k, (int, np.integer)) and k >= 1):
        raise DomainError("k must be a positive integer", k=k)
    if not omega > 0:
        raise DomainError("omega must be positive", omega=omega)
    period = 2.0 * k * math.pi / omega
    if not 0 < T_prime <= period:
        raise DomainError("T_prime must lie in (0, 2 k pi / omega]", T_prime=T_prime)
    if T_prime == period:
        return identity(m, hbar).untracked()
    return harmonic(omega, period - T_prime, m, hbar).untracked()


def _forced_integrals(omega, force: ForceSpec, T):
    """The two single integrals and the ordered double integral with sine weights."""
    tol = force.tol
    opts = dict(epsabs=tol, epsrel=tol, limit=500)
    if force.kind == "tabulated":
        opts["points"] = [t for t in force.params[0] if 0 < t < T][:400] or None
    ia, ea = integrate.quad(lambda t: force(t) * math.sin(omega * (T - t)), 0.0, T, **opts)
    ib, eb = integrate.quad(lambda t: force(t) * math.sin(omega * t), 0.0, T, **opts)

    inner_opts = dict(epsabs=1e-11, epsrel=1e-11, limit=200)

    def inner(t):
        if t == 0.0:
            return 0.0
        v, _ = integrate.quad(lambda s: force(s) * math.sin(omega * s), 0.0, t, **inner_opts)
        return v

    dopts = dict(opts, epsabs=max(tol, 1e-9), epsrel=max(tol, 1e-9))
    ic, ec = integrate.quad(lambda t: force(t) * math.sin(omega * (T - t)) * inner(t),
                            0.0, T, **dopts)
    scale = 1.0 + abs(ia) + abs(ib)
    if max(ea, eb) > 100 * tol * scale:
        raise NumericError("force quadrature did not converge", achieved=max(ea, eb))
    return ia, ib, ic


def forced_harmonic(omega, force: ForceSpec, T, m=1.0, hbar=1.0) -> QuadraticPropagator:
    """Oscillator of frequency ``omega`` driven by the term force(t) * x."""
    base = harmonic(omega, T, m, hbar)
    if base.is_focal():
        raise SingularityError(
            "omega * T is a multiple of pi; split the segment at the focal point",
            omega=omega, T=T)
    if force.is_zero():
        return base
    ia, ib, ic = _forced_integrals(omega, force, T)
    s = math.sin(omega * T)
    Q_a = -ia / s
    Q_b = -ib / s
    extra = -ic / (m * omega * hbar * s)
    view = base.require_kernel()
    return QuadraticPropagator.from_kernel(view.S_bb, view.S_ab, view.S_aa, Q_a, Q_b,
                                           base.theta + extra, m, hbar)


def _as_func(c):
    if callable(c):
        return c
    v = float(c)
    return lambda t: v


def _integrate_linear(seg: GeneralQuadratic, m, n):
    """RK4 for the flow matrix, displacement and the action integral."""
    b, c, d, f = map(_as_func, (seg.b, seg.c, seg.d, seg.f))

    def rhs(t, y):
        M = y[:4].reshape(2, 2)
        z = y[4:6]
        K = np.array([[b(t), 1.0 / m], [-c(t), -b(t)]])
        g = np.array([d(t), -f(t)])
        return np.concatenate([(K @ M).ravel(), K @ z + g])

    y = np.array([1.0, 0.0, 0.0, 1.0, 0.0, 0.0])
    h = seg.T / n
    t = 0.0
    for _ in range(n):
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return y[:4].reshape(2, 2), y[4:6]


def from_quadratic_hamiltonian(seg: GeneralQuadratic, m=1.0, hbar=1.0, tol=1e-10,
                               n_start=64, n_max=1 << 16) -> QuadraticPropagator:
    """Integrate the classical linear flow; the kernel phase is left untracked."""
    _check_mh(m, hbar)
    if not seg.T > 0:
        raise DomainError("segment needs T > 0", T=seg.T)
    n = n_start
    M, z = _integrate_linear(seg, m, n)
    while True:
        n2 = 2 * n
        M2, z2 = _integrate_linear(seg, m, n2)
        scale = 1.0 + np.abs(M2).max() + np.abs(z2).max()
        err = max(np.abs(M2 - M).max(), np.abs(z2 - z).max()) / 15.0
        drift = abs(np.linalg.det(M2) - 1.0)
        if err <= tol * scale and drift <= tol:
            # Richardson extrapolation of the fourth-order result
            M_out = M2 + (M2 - M) / 15.0
            z_out = z2 + (z2 - z) / 15.0
            return QuadraticPropagator(m, hbar, M_out, z_out, 0.0, False)
        if n2 >= n_max:
            raise NumericError("flow integration did not reach tolerance",
                               achieved=float(err), det_drift=float(drift))
        n, M, z = n2, M2, z2


# ---------------------------------------------------------------- composition

def _prefactor_phase(view: KernelView, m, hbar):
    return float(np.angle(np.sqrt(m / (2j * math.pi * hbar * view.f_ab))))


def compose(G2: QuadraticPropagator, G1: QuadraticPropagator) -> QuadraticPropagator:
    """Propagator of G1 followed by G2."""
    if G1.mass != G2.mass or G1.hbar != G2.hbar:
        raise DomainError("cannot compose propagators with different mass or hbar")
    m, hbar = G1.mass, G1.hbar
    flow = G2.flow @ G1.flow
    disp = G2.flow @ G1.displacement + G2.displacement
    tracked = G1.theta_tracked and G2.theta_tracked
    theta = 0.0
    if tracked:
        theta, tracked = _composed_theta(G2, G1, flow, disp)
    return QuadraticPropagator(m, hbar, flow, disp, theta, tracked)


def _composed_theta(G2, G1, flow, disp):
    """Phase from integrating out the intermediate coordinate."""
    m, hbar = G1.mass, G1.hbar
    k1, k2 = G1.kernel(), G2.kernel()
    if k1 is None and k2 is None:
        return 0.0, False
    if k1 is None or k2 is None:
        # a focal factor (identity or parity with no linear terms) leaves phase alone
        focal, other = (G1, k2) if k1 is None else (G2, k1)
        if np.allclose(np.abs(focal.flow), np.eye(2), atol=0) and not focal.displacement.any():
            return focal.theta + other.theta, True
        return 0.0, False
    probe = QuadraticPropagator(m, hbar, flow, disp)
    kc = probe.kernel()
    s = k2.S_aa + k1.S_bb
    if kc is None or s == 0:
        return 0.0, False
    q = k2.Q_a + k1.Q_b
    a_mid = -0.5j * m * s / hbar
    amp = (np.sqrt(m / (2j * math.pi * hbar * k1.f_ab))
           * np.sqrt(m / (2j * math.pi * hbar * k2.f_ab))
           * np.sqrt(math.pi / a_mid))
    theta = (k1.theta + k2.theta - q * q / (2.0 * hbar * m * s)
             + float(np.angle(amp)) - _prefactor_phase(kc, m, hbar))
    theta = math.remainder(theta, 2.0 * math.pi)
    return theta, True


def compose_all(props: Sequence[QuadraticPropagator]) -> QuadraticPropagator:
    """Compose in time order: ``props[0]`` acts first."""
    if not props:
        raise DomainError("nothing to compose")
    out = props[0]
    for g in props[1:]:
        out = compose(g, out)
    return out


def propagator_for(seg: PulseSegment, m=1.0, hbar=1.0) -> QuadraticPropagator:
    if isinstance(seg, Free):
        return free(seg.T, m, hbar)
    if isinstance(seg, InverseFree):
        return inverse_free_direct(seg.T, m, hbar)
    if isinstance(seg, Harmonic):
        return harmonic(seg.omega, seg.T, m, hbar)
    if isinstance(seg, InverseHarmonic):
        return harmonic_inverse(seg.omega, seg.T_prime, seg.k, m, hbar)
    if isinstance(seg, ForcedHarmonic):
        return forced_harmonic(seg.omega, seg.force, seg.T, m, hbar)
    if isinstance(seg, GeneralQuadratic):
        return from_quadratic_hamiltonian(seg, m, hbar)
    raise DomainError(f"unknown segment {seg!r}")


# ---------------------------------------------------------------- sandwich

@dataclass(frozen=True)
class SandwichSolution:
    T1: float
    T2: float
    branch: str
    T: float
    omega1: float
    omega2: float

    def segments(self):
        """Time-ordered segments: the second oscillator acts first."""
        return [Harmonic(self.omega2, self.T2), Free(self.T), Harmonic(self.omega1, self.T1)]

    def residuals(self):
        """Residuals of the four sine/cosine conditions."""
        s_tab = _sandwich_trig(self.T, self.omega1, self.omega2,
                               1.0 if self.branch == "upper" else -1.0)
        a1, a2 = self.omega1 * self.T1, self.omega2 * self.T2
        return (math.sin(a1) - s_tab[0], math.cos(a1) - s_tab[1],
                math.sin(a2) - s_tab[2], math.cos(a2) - s_tab[3])


def _sandwich_trig(T, w1, w2, sign):
    u = T * T * w1 * w1 * w2 * w2
    dw = w2 * w2 - w1 * w1
    r1 = math.hypot(u - dw, 2 * T * w1 * w2 * w2)
    r2 = math.hypot(u + dw, 2 * T * w1 * w1 * w2)
    return (-sign * 2 * T * w1 * w2 * w2 / r1, -sign * (u - dw) / r1,
            sign * 2 * T * w1 * w1 * w2 / r2, sign * (u + dw) / r2)


def _positive_angle(s, c):
    a = math.atan2(s, c)
    if a <= 0:
        a += 2.0 * math.pi
    return a


def inverse_free_sandwich(T, omega1, omega2, branch="upper", verify=True,
                          m=1.0, hbar=1.0):
    """Oscillator times (T1, T2) such that osc1(T1) . free(T) . osc2(T2) undoes free(T).

    ``branch="both"`` returns a pair (upper, lower).
    """
    if not (T > 0 and omega1 > 0 and omega2 > 0):
        raise DomainError("T, omega1 and omega2 must be positive")
    if branch == "both":
        return (inverse_free_sandwich(T, omega1, omega2, "upper", verify, m, hbar),
                inverse_free_sandwich(T, omega1, omega2, "lower", verify, m, hbar))
    if branch not in ("upper", "lower"):
        raise DomainError(f"unknown branch {branch!r}")
    s1, c1, s2, c2 = _sandwich_trig(T, omega1, omega2, 1.0 if branch == "upper" else -1.0)
    sol = SandwichSolution(_positive_angle(s1, c1) / omega1, _positive_angle(s2, c2) / omega2,
                           branch, T, omega1, omega2)
    if verify:
        G = compose_all([propagator_for(sg, m, hbar) for sg in sol.segments()])
        target = inverse_free_direct(T, m, hbar)
        if not G.close_to(target, atol=1e-10 * (1.0 + T / m)):
            raise NumericError("sandwich verification failed",
                               flow=G.flow.tolist(), target=target.flow.tolist())
    return sol
