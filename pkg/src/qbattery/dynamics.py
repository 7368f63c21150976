"""Open-system dynamics: Lindblad master equation, analytic self-discharge, crossings.

The integrator is fixed-step RK4 on the vectorized master equation.  The
dissipator uses the cascade jump operators |g><e| and |e><f| plus the two
dephasing operators, with rates held in a DecoherenceSpec.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .qutrit import DensityMatrix

# Jump operators in the (|g>, |e>, |f>) basis
SIGMA_E_MINUS = np.array([[0, 1, 0], [0, 0, 0], [0, 0, 0]], dtype=complex)   # |g><e|
SIGMA_F_MINUS = np.array([[0, 0, 0], [0, 0, 1], [0, 0, 0]], dtype=complex)   # |e><f|
SIGMA_E_Z = np.diag([-1.0, 1.0, 0.0]).astype(complex)                        # |e><e| - |g><g|
SIGMA_F_Z = np.diag([0.0, -1.0, 1.0]).astype(complex)                        # |f><f| - |e><e|

TRACE_DRIFT_ABORT = 1e-6
POSITIVITY_FLOOR = -1e-7

DEFAULT_STEPS_PER_PERIOD = 10_000


class NumericalDivergenceError(RuntimeError):
    """Raised when the integrator leaves the physical manifold (trace drift, negativity)."""


@dataclass(frozen=True)
class DecoherenceSpec:
    """Decay and dephasing rates, in units of the scenario's reference rate."""

    gamma_e: float = 0.0
    gamma_f: float = 0.0
    gamma_e_z: float = 0.0
    gamma_f_z: float = 0.0

    def __post_init__(self):
        for name in ("gamma_e", "gamma_f", "gamma_e_z", "gamma_f_z"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")

    @classmethod
    def closed(cls) -> "DecoherenceSpec":
        return cls()

    @classmethod
    def standard_ratios(cls, gamma: float) -> "DecoherenceSpec":
        """Rate family gamma_e = gamma, gamma_f = 1.5 gamma, dephasings 2 gamma."""
        return cls(gamma_e=gamma, gamma_f=1.5 * gamma, gamma_e_z=2.0 * gamma, gamma_f_z=2.0 * gamma)

    @property
    def is_closed(self) -> bool:
        return self.gamma_e == self.gamma_f == self.gamma_e_z == self.gamma_f_z == 0.0

    def jump_terms(self):
        return (
            (self.gamma_e, SIGMA_E_MINUS),
            (self.gamma_f, SIGMA_F_MINUS),
            (self.gamma_e_z, SIGMA_E_Z),
            (self.gamma_f_z, SIGMA_F_Z),
        )


@dataclass(frozen=True)
class TimeGrid:
    """Uniform integration grid with `steps` RK4 steps on [t_start, t_end]."""

    t_start: float
    t_end: float
    steps: int

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError(f"t_end must exceed t_start, got [{self.t_start}, {self.t_end}]")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.steps + 1)


def lindblad_rhs(rho, H, spec: DecoherenceSpec) -> np.ndarray:
    """Master-equation right-hand side for a single state.

    Returns -i[H, rho] + (1/2) sum_n (gamma_n L[sigma_n^-] + gamma_n^z L[sigma_n^z])
    with L[o] = 2 o rho o^dag - o^dag o rho - rho o^dag o.
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    H = np.asarray(H, dtype=complex)
    out = -1j * (H @ m - m @ H)
    for gamma, op in spec.jump_terms():
        if gamma == 0.0:
            continue
        od = op.conj().T
        odo = od @ op
        out += 0.5 * gamma * (2.0 * (op @ m @ od) - odo @ m - m @ odo)
    return out


def _dissipator_superoperator(spec: DecoherenceSpec) -> np.ndarray:
    """9x9 superoperator of the dissipator for row-major vec(rho)."""
    eye = np.eye(3, dtype=complex)
    D = np.zeros((9, 9), dtype=complex)
    for gamma, op in spec.jump_terms():
        if gamma == 0.0:
            continue
        odo = op.conj().T @ op
        D += 0.5 * gamma * (
            2.0 * np.kron(op, op.conj())
            - np.kron(odo, eye)
            - np.kron(eye, odo.T)
        )
    return D


def _unitary_superoperators(H_stack: np.ndarray) -> np.ndarray:
    """-i(H x I - I x H^T) for a stack of Hamiltonians, shape (n, 9, 9)."""
    eye = np.eye(3, dtype=complex)
    left = np.einsum("nab,cd->nacbd", H_stack, eye).reshape(-1, 9, 9)
    right = np.einsum("ab,ncd->nacbd", eye, H_stack.transpose(0, 2, 1)).reshape(-1, 9, 9)
    return -1j * (left - right)


def _hamiltonian_stack(hamiltonian, times: np.ndarray) -> np.ndarray:
    """Evaluate a constant or callable Hamiltonian on a time array, shape (n, 3, 3)."""
    if hamiltonian is None:
        return np.zeros((len(times), 3, 3), dtype=complex)
    if isinstance(hamiltonian, np.ndarray):
        return np.broadcast_to(hamiltonian.astype(complex), (len(times), 3, 3)).copy()
    try:
        stack = np.asarray(hamiltonian(times), dtype=complex)
        if stack.shape == (len(times), 3, 3):
            return stack
    except (TypeError, ValueError):
        pass
    return np.array([hamiltonian(float(t)) for t in times], dtype=complex)


@dataclass
class Trajectory:
    """Integration output: times (n,), states (n, 3, 3), and diagnostics."""

    times: np.ndarray
    states: np.ndarray
    max_trace_drift: float
    min_eigenvalue: float

    def state(self, i: int) -> DensityMatrix:
        return DensityMatrix(self.states[i], eig_atol=-POSITIVITY_FLOOR)

    @property
    def final_state(self) -> DensityMatrix:
        return self.state(-1)

    @property
    def populations(self) -> np.ndarray:
        """(n, 3) real populations along the trajectory."""
        return np.real(np.einsum("nii->ni", self.states))


def evolve(rho0: DensityMatrix, hamiltonian, spec: DecoherenceSpec, grid: TimeGrid) -> Trajectory:
    """Integrate the master equation with fixed-step RK4.

    `hamiltonian` may be a constant 3x3 array, a callable t -> 3x3 array, or a
    vectorized callable accepting a time array.  Each step symmetrizes the
    state; trace drift beyond 1e-6 or negativity beyond -1e-7 aborts.
    """
    steps = grid.steps
    h = (grid.t_end - grid.t_start) / steps
    constant = hamiltonian is None or isinstance(hamiltonian, np.ndarray)
    if constant:
        L0 = _unitary_superoperators(_hamiltonian_stack(hamiltonian, np.zeros(1)))[0]
        if not spec.is_closed:
            L0 += _dissipator_superoperator(spec)
        # One fixed RK4 step under a constant generator is the polynomial map
        # I + hL + (hL)^2/2 + (hL)^3/6 + (hL)^4/24 applied each step.
        hL = h * L0
        step_map = np.eye(9, dtype=complex)
        term = np.eye(9, dtype=complex)
        for k in range(1, 5):
            term = term @ hL / k
            step_map = step_map + term
    else:
        nodes = np.linspace(grid.t_start, grid.t_end, 2 * steps + 1)
        L = _unitary_superoperators(_hamiltonian_stack(hamiltonian, nodes))
        if not spec.is_closed:
            L += _dissipator_superoperator(spec)

    states = np.empty((steps + 1, 3, 3), dtype=complex)
    states[0] = rho0.matrix
    y = rho0.matrix.ravel().astype(complex)
    max_drift = abs(y[0] + y[4] + y[8] - 1.0)

    for n in range(steps):
        if constant:
            y = step_map @ y
        else:
            L0, Lm, L1 = L[2 * n], L[2 * n + 1], L[2 * n + 2]
            k1 = L0 @ y
            k2 = Lm @ (y + (0.5 * h) * k1)
            k3 = Lm @ (y + (0.5 * h) * k2)
            k4 = L1 @ (y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        m = y.reshape(3, 3)
        m = 0.5 * (m + m.conj().T)
        y = m.ravel()
        drift = abs(y[0] + y[4] + y[8] - 1.0)
        if drift > max_drift:
            max_drift = drift
        if drift > TRACE_DRIFT_ABORT:
            raise NumericalDivergenceError(
                f"trace drift {drift:.3e} at step {n + 1} exceeds {TRACE_DRIFT_ABORT:.1e}; "
                f"reduce the step size"
            )
        states[n + 1] = m

    min_eig = float(np.linalg.eigvalsh(states).min())
    if min_eig < POSITIVITY_FLOOR:
        raise NumericalDivergenceError(
            f"trajectory min eigenvalue {min_eig:.3e} below {POSITIVITY_FLOOR:.1e}"
        )
    return Trajectory(times=grid.times, states=states, max_trace_drift=float(max_drift),
                      min_eigenvalue=min_eig)


_RATE_DEGENERACY_RTOL = 1e-9


def analytic_discharge(t, spec: DecoherenceSpec):
    """Closed-form populations of the relaxation cascade from a full |f> state.

    Returns (rho_gg, rho_ee, rho_ff); off-diagonals vanish identically.
    Accepts a scalar or array time (in the same units as the rates).
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be non-negative")
    ge, gf = spec.gamma_e, spec.gamma_f
    if ge <= 0 or gf <= 0:
        raise ValueError("analytic discharge requires positive decay rates")
    rho_ff = np.exp(-gf * t)
    if abs(ge - gf) <= _RATE_DEGENERACY_RTOL * max(ge, gf):
        rho_ee = gf * t * np.exp(-gf * t)
    else:
        rho_ee = gf / (ge - gf) * (np.exp(-gf * t) - np.exp(-ge * t))
    rho_gg = 1.0 - rho_ff - rho_ee
    return rho_gg, rho_ee, rho_ff


def crossing_times(spec: DecoherenceSpec) -> tuple[float, float, float]:
    """The three population-crossing moments of the relaxation cascade.

    tau1 (ff = ee) comes from the closed form; tau2 (ff = gg) and tau3
    (ee = gg) from bracketed root-finding on the analytic solution.
    """
    ge, gf = spec.gamma_e, spec.gamma_f
    if ge <= 0 or gf <= 0:
        raise ValueError("crossing times require positive decay rates")
    if abs(ge - gf) <= _RATE_DEGENERACY_RTOL * max(ge, gf):
        raise ValueError("crossing times require gamma_e != gamma_f")
    if 2 * gf <= ge:
        raise ValueError("no ff/ee crossing exists for 2*gamma_f <= gamma_e")

    tau1 = (math.log(2 * gf - ge) - math.log(gf)) / (gf - ge)

    def pop_diff(which):
        def f(t):
            gg, ee, ff = analytic_discharge(t, spec)
            return {"ff_gg": ff - gg, "ee_gg": ee - gg}[which]
        return f

    def bracket_root(f, lo):
        hi = 1.0 / min(ge, gf)
        limit = 1e3 / min(ge, gf)
        while f(hi) > 0:
            hi *= 2.0
            if hi > limit:
                raise ValueError("no crossing bracket found; rates are pathological")
        return brentq(f, lo, hi, xtol=1e-12, rtol=8.9e-16)

    tau2 = bracket_root(pop_diff("ff_gg"), 0.0)
    tau3 = bracket_root(pop_diff("ee_gg"), 1e-9 / gf)

    for tau, which in ((tau1, "ff_ee"), (tau2, "ff_gg"), (tau3, "ee_gg")):
        gg, ee, ff = analytic_discharge(tau, spec)
        pairs = {"ff_ee": ff - ee, "ff_gg": ff - gg, "ee_gg": ee - gg}
        if abs(pairs[which]) > 1e-8:
            raise ValueError(f"crossing {which} at t={tau} failed verification: {pairs[which]:.3e}")
    return tau1, tau2, tau3
