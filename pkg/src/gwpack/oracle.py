"""Brute-force reference solvers.

Two independent numerical pictures of the same physics:

* a uniform periodic position grid per internal level, stepped with the
  symmetric split-step Fourier method;
* a truncated number basis per internal level, stepped with dense matrix
  exponentials.

Nothing here imports the analytic propagator or evolution code, so agreement
with it is evidence rather than tautology.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, linalg

from .core import GaussianState, make_gaussian, sample_wavefunction
from .errors import DomainError, NumericError

__all__ = [
    "GridState",
    "FockState",
    "GridHamiltonian",
    "ComparisonReport",
    "FitResult",
    "make_grid",
    "auto_grid",
    "grid_state",
    "grid_evolve",
    "fock_operators",
    "fock_state",
    "fock_evolve",
    "hermite_functions",
    "fock_to_grid",
    "fit_gaussian",
    "compare",
    "fidelity",
]


# ------------------------------------------------------------------ grid

@dataclass(frozen=True, eq=False)
class GridState:
    x: np.ndarray
    psi: np.ndarray  # shape (levels, n)
    mass: float = 1.0
    hbar: float = 1.0

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def n_points(self) -> int:
        return self.x.size

    @property
    def n_levels(self) -> int:
        return self.psi.shape[0]

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.psi) ** 2) * self.dx))

    def level(self, j=0) -> np.ndarray:
        return self.psi[j]

    def populations(self) -> np.ndarray:
        return np.sum(np.abs(self.psi) ** 2, axis=1) * self.dx


def make_grid(x_min, x_max, n) -> np.ndarray:
    """Periodic grid of ``n`` points on [x_min, x_max)."""
    if n < 256 or n & (n - 1):
        raise DomainError("grid size must be a power of two and at least 256", n=n)
    if not x_max > x_min:
        raise DomainError("empty domain")
    return x_min + (x_max - x_min) * np.arange(n) / n


def auto_grid(states: Sequence[GaussianState], n_min=256, n_max=1 << 16,
              span=8.0, per_spread=16.0) -> np.ndarray:
    """Grid covering ``span`` spreadings around every state, with enough points
    to resolve both the narrowest width and the largest momentum content."""
    lo = min(s.x_center - span * math.sqrt(s.position_variance) for s in states)
    hi = max(s.x_center + span * math.sqrt(s.position_variance) for s in states)
    min_width = min(math.sqrt(s.position_variance) for s in states)
    hbar = states[0].hbar
    kmax = max((abs(s.mean_momentum) + span * math.sqrt(s.momentum_variance)) / hbar
               for s in states)
    dx = min(min_width / per_spread, math.pi / kmax)
    n = n_min
    while (hi - lo) / n > dx and n < n_max:
        n *= 2
    return make_grid(lo, hi, n)


def grid_state(x, amplitudes, mass=1.0, hbar=1.0, normalize=False) -> GridState:
    psi = np.atleast_2d(np.asarray(amplitudes, dtype=complex)).copy()
    x = np.asarray(x, dtype=float)
    if psi.shape[1] != x.size:
        raise DomainError("amplitude length does not match grid")
    st = GridState(x, psi, mass, hbar)
    if normalize:
        st = GridState(x, psi / st.norm(), mass, hbar)
    return st


def _as_func(c):
    if c is None:
        return lambda t: 0.0
    if callable(c):
        return c
    v = float(c)
    return lambda t: v


@dataclass(frozen=True, eq=False)
class GridHamiltonian:
    """p**2/2m + d(t) p + c(t) x**2/2 + f(t) x + optional per-point coupling.

    ``coupling(x, t)`` returns an array of shape (n, L, L) of Hermitian
    matrices acting on the internal levels at each grid point.
    ``potential(x, t)`` adds an arbitrary scalar potential.
    """

    c: object = 0.0
    f: object = 0.0
    d: object = 0.0
    potential: Optional[Callable] = None
    coupling: Optional[Callable] = None


def grid_evolve(H: GridHamiltonian, psi0: GridState, dt, steps, t0=0.0,
                check_every=100, norm_tol=1e-10) -> GridState:
    """Symmetric split-step propagation: half kinetic, potential, half kinetic."""
    if not dt > 0 or steps < 0:
        raise DomainError("need dt > 0 and steps >= 0")
    x = psi0.x
    n = x.size
    m, hbar = psi0.mass, psi0.hbar
    k = 2.0 * np.pi * np.fft.fftfreq(n, psi0.dx)
    c, f, d = _as_func(H.c), _as_func(H.f), _as_func(H.d)
    const_kin = not callable(H.d)
    kin_half = np.exp(-0.5j * dt * (hbar * k * k / (2.0 * m) + d(0.0) * k))
    psi = psi0.psi.copy()
    norm0 = psi0.norm()
    for j in range(steps):
        tm = t0 + (j + 0.5) * dt
        if not const_kin:
            kin_half = np.exp(-0.5j * dt * (hbar * k * k / (2.0 * m) + d(tm) * k))
        psi = np.fft.ifft(kin_half * np.fft.fft(psi, axis=1), axis=1)
        V = 0.5 * c(tm) * x * x + f(tm) * x
        if H.potential is not None:
            V = V + H.potential(x, tm)
        if H.coupling is None:
            psi = psi * np.exp(-1j * dt * V / hbar)
        else:
            Hc = np.array(H.coupling(x, tm), dtype=complex)
            Hc = Hc + V[:, None, None] * np.eye(psi.shape[0])
            w, U = np.linalg.eigh(Hc)
            ph = np.exp(-1j * dt * w / hbar)
            coeff = np.einsum("nji,jn->ni", U.conj(), psi)
            psi = np.einsum("nij,nj->in", U, ph * coeff)
        psi = np.fft.ifft(kin_half * np.fft.fft(psi, axis=1), axis=1)
        if check_every and (j + 1) % check_every == 0:
            _check_grid(psi, x, psi0.dx, norm0, norm_tol, hbar)
    _check_grid(psi, x, psi0.dx, norm0, norm_tol, hbar)
    return GridState(x, psi, m, hbar)


def _check_grid(psi, x, dx, norm0, norm_tol, hbar):
    rho = np.sum(np.abs(psi) ** 2, axis=0) * dx
    norm = math.sqrt(rho.sum())
    if abs(norm - norm0) > norm_tol:
        raise NumericError("norm drift exceeded; reduce the step", drift=abs(norm - norm0))
    # escape test per internal level
    for lev in np.abs(psi) ** 2:
        w = lev.sum()
        if w * dx < 1e-12:
            continue
        mu = (x * lev).sum() / w
        sd = math.sqrt(max(((x - mu) ** 2 * lev).sum() / w, 0.0))
        if mu - 4 * sd < x[0] or mu + 4 * sd > x[-1]:
            raise NumericError("wave packet reached the grid boundary",
                               centre=mu, width=sd)


# ------------------------------------------------------------------ fock

@dataclass(frozen=True, eq=False)
class FockState:
    psi: np.ndarray  # shape (levels, N)

    @property
    def dim(self) -> int:
        return self.psi.shape[1]

    @property
    def n_levels(self) -> int:
        return self.psi.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.psi))

    def tail_population(self, top=1) -> float:
        return float(np.sum(np.abs(self.psi[:, -top:]) ** 2))

    def vector(self) -> np.ndarray:
        return self.psi.reshape(-1)


def fock_operators(N, m=1.0, hbar=1.0, omega=1.0):
    """Annihilation, position and momentum matrices on an N-level truncation."""
    a = np.diag(np.sqrt(np.arange(1, N, dtype=float)), 1).astype(complex)
    ad = a.conj().T
    x = math.sqrt(hbar / (2.0 * m * omega)) * (ad + a)
    p = 1j * math.sqrt(hbar * m * omega / 2.0) * (ad - a)
    return a, x, p


def fock_state(levels: Sequence[np.ndarray]) -> FockState:
    psi = np.array([np.asarray(v, dtype=complex) for v in levels])
    return FockState(psi)


def fock_evolve(H, psi0: FockState, T, segments=1, t0=0.0, tail_tol=1e-8,
                unitary_tol=1e-11, method="expm", rtol=1e-10, hbar=1.0) -> FockState:
    """Propagate in the number basis.

    ``H`` is a Hermitian matrix on the full (levels x N) space or a callable
    of time returning one.  ``method="expm"`` uses piecewise-constant dense
    exponentials with the midpoint value per segment; ``method="ode"`` hands
    the Schroedinger equation to an adaptive Runge-Kutta integrator, which is
    much cheaper for rapidly oscillating couplings.
    """
    if not T >= 0 or segments < 1:
        raise DomainError("need T >= 0 and segments >= 1")
    L, N = psi0.psi.shape
    if method == "ode":
        Hf = H if callable(H) else (lambda t: H)
        sol = integrate.solve_ivp(lambda t, y: (-1j / hbar) * (Hf(t) @ y), (t0, t0 + T),
                                  psi0.vector().astype(complex), method="DOP853",
                                  rtol=rtol, atol=rtol * 1e-2)
        if not sol.success:
            raise NumericError("integrator failed", message=sol.message)
        out = FockState(sol.y[:, -1].reshape(L, N))
        drift = abs(out.norm() - psi0.norm())
        if drift > 1e3 * rtol:
            raise NumericError("norm drift in the integrator", drift=drift)
        tail = out.tail_population(top=max(1, N // 20))
        if tail > tail_tol:
            raise NumericError("truncation tail too large", tail=tail, suggested_dim=2 * N)
        return out
    if method != "expm":
        raise DomainError(f"unknown method {method!r}")
    v = psi0.vector().copy()
    h = T / segments
    static = not callable(H)
    U = None
    for j in range(segments):
        if U is None or not static:
            Hm = np.asarray(H if static else H(t0 + (j + 0.5) * h), dtype=complex)
            if Hm.shape != (L * N, L * N):
                raise DomainError("Hamiltonian does not match the state space")
            U = linalg.expm((-1j * h / hbar) * Hm)
            err = np.abs(U.conj().T @ U - np.eye(L * N)).max()
            if err > unitary_tol:
                raise NumericError("segment propagator is not unitary", error=float(err))
        v = U @ v
    out = FockState(v.reshape(L, N))
    tail = out.tail_population(top=max(1, N // 20))
    if tail > tail_tol:
        raise NumericError("truncation tail too large", tail=tail, suggested_dim=2 * N)
    return out


def hermite_functions(N, x, m=1.0, hbar=1.0, omega=1.0) -> np.ndarray:
    """Oscillator eigenfunctions phi_0..phi_{N-1} sampled at ``x`` (rows)."""
    s = math.sqrt(m * omega / hbar)
    y = s * np.asarray(x, dtype=float)
    out = np.empty((N, y.size))
    out[0] = (s / math.sqrt(math.pi)) ** 0.5 * np.exp(-0.5 * y * y)
    if N > 1:
        out[1] = math.sqrt(2.0) * y * out[0]
    for n in range(2, N):
        out[n] = math.sqrt(2.0 / n) * y * out[n - 1] - math.sqrt((n - 1) / n) * out[n - 2]
    return out


def fock_to_grid(psi: FockState, x, m=1.0, hbar=1.0, omega=1.0) -> GridState:
    phi = hermite_functions(psi.dim, x, m, hbar, omega)
    return GridState(np.asarray(x, float), psi.psi @ phi, m, hbar)


# ------------------------------------------------------------------ analysis

@dataclass(frozen=True)
class FitResult:
    state: GaussianState
    residual: float
    gaussian: bool
    population: float


def _moments(psi, x, dx, hbar):
    k = 2.0 * np.pi * np.fft.fftfreq(x.size, dx)
    w = np.sum(np.abs(psi) ** 2) * dx
    rho = np.abs(psi) ** 2 / w
    xm = float(np.sum(x * rho) * dx)
    vx = float(np.sum((x - xm) ** 2 * rho) * dx)
    phik = np.fft.fft(psi)
    rk = np.abs(phik) ** 2
    rk = rk / rk.sum()
    pm = float(hbar * np.sum(k * rk))
    vp = float(hbar ** 2 * np.sum((k - pm / hbar) ** 2 * rk))
    dpsi = np.fft.ifft(1j * k * phik)
    cov = float(np.real(np.sum(np.conj(psi) * (x - xm) * (-1j * hbar) * dpsi) * dx) / w)
    return xm, pm, vx, vp, cov, w


def fit_gaussian(state, level=None, x=None, m=None, hbar=None, omega=1.0,
                 residual_tol=1e-3) -> FitResult:
    """Gaussian parameters of one internal level from position and momentum moments.

    ``state`` may be a GridState or a FockState (projected onto ``x``).
    Without ``level`` the most populated level is used.
    """
    if isinstance(state, FockState):
        if x is None:
            raise DomainError("a grid is required to project a number-basis state")
        state = fock_to_grid(state, x, m or 1.0, hbar or 1.0, omega)
    if not isinstance(state, GridState):
        raise DomainError("unsupported state type")
    pops = state.populations()
    if level is None:
        level = int(np.argmax(pops))
        others = pops.sum() - pops[level]
        if others > 1e-8:
            warnings.warn("several internal levels are populated; fitting the largest",
                          RuntimeWarning, stacklevel=2)
    psi = state.psi[level]
    xm, pm, vx, vp, cov, w = _moments(psi, state.x, state.dx, state.hbar)
    delta_sq = state.hbar ** 2 / (4.0 * vp)
    im_W = 2.0 * delta_sq * cov / state.hbar
    tw = 2.0 * state.mass * im_W / state.hbar
    trial = make_gaussian(state.mass, state.hbar, xm, pm, delta_sq, tw, 0.0)
    ref = sample_wavefunction(trial, state.x) if _covers(trial, state.x) else None
    if ref is None:
        residual = float("inf")
    else:
        unit = psi / math.sqrt(w)
        ov = np.sum(np.conj(ref) * unit) * state.dx
        phase = float(np.angle(ov))
        trial = trial.with_phase(phase)
        residual = float(np.sqrt(np.sum(np.abs(unit - ref * np.exp(1j * phase)) ** 2)
                                 * state.dx))
    ok = residual <= residual_tol
    if not ok:
        warnings.warn(f"state is not Gaussian (residual {residual:.3g})", RuntimeWarning,
                      stacklevel=2)
    return FitResult(trial, residual, ok, float(pops[level]))


def _covers(s, x):
    half = 6.0 * s.spreading
    return x[0] <= s.x_center - half and x[-1] >= s.x_center + half


def fidelity(a: np.ndarray, b: np.ndarray, dx) -> float:
    """|<a|b>| for grid amplitudes (either may carry several levels)."""
    return float(abs(np.sum(np.conj(a) * b) * dx))


@dataclass(frozen=True)
class ComparisonReport:
    fidelity: float
    l2_error: float
    fitted: GaussianState
    residual: float
    deltas: dict = field(default_factory=dict)

    def to_dict(self):
        return {"fidelity": self.fidelity, "l2_error": self.l2_error,
                "residual": self.residual, "deltas": dict(self.deltas),
                "fitted": self.fitted.to_dict()}


def compare(analytic: GaussianState, numeric: GridState, level=0) -> ComparisonReport:
    """Fidelity up to global phase plus parameter deltas of a moment fit."""
    if analytic.mass != numeric.mass or analytic.hbar != numeric.hbar:
        raise DomainError("mass or hbar mismatch")
    x = numeric.x
    if not _covers(analytic, x):
        raise DomainError("grid does not cover the analytic state")
    ref = sample_wavefunction(analytic, x)
    psi = numeric.psi[level]
    ov = np.sum(np.conj(ref) * psi) * numeric.dx
    fid = float(abs(ov))
    l2 = float(np.sqrt(np.sum(np.abs(psi - ref * np.exp(1j * np.angle(ov))) ** 2)
                       * numeric.dx))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fit = fit_gaussian(numeric, level=level)
    f = fit.state
    deltas = {
        "x_center": f.x_center - analytic.x_center,
        "mean_momentum": f.mean_momentum - analytic.mean_momentum,
        "delta_sq": f.delta_sq - analytic.delta_sq,
        "tw": f.tw - analytic.tw,
    }
    return ComparisonReport(fid, l2, f, fit.residual, deltas)
