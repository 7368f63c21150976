"""Drive envelopes, counterdiabatic construction, and control Hamiltonians.

Three pulse families drive the g-e and e-f transitions: sine, gaussian, and
flat (square).  The counterdiabatic envelope is the rate of change of the
mixing angle theta = atan2(Omega_1, Omega_2); it closes the g-f transition
so the dark state is followed exactly at any speed.

For t > tau_c the envelopes hold their end-of-charging values with the
counterdiabatic term off, which defines the post-charging stability setting.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.integrate import simpson

SHAPES = ("sine", "gaussian", "flat")
PROTOCOLS = ("sta", "stirap")

_BOUNDARY_TAN_MAX = 1e-3


@dataclass(frozen=True)
class DriveSpec:
    """Charging drive: pulse shape, peak Rabi frequency, period, and error knobs.

    `epsilon` is the relative intensity error (+ on the g-e leg, - on e-f);
    `delta_one` and `delta_two` are the detunings carried by |e> and |f> in
    the rotating frame.  Gaussian pulses default to center offset
    alpha = tau_c/10 and width sigma = tau_c/6, which meets the passage
    boundary conditions to within tan(theta) ~ 7.5e-4.
    """

    shape: str
    omega: float
    tau_c: float
    cd_enabled: bool = True
    epsilon: float = 0.0
    delta_one: float = 0.0
    delta_two: float = 0.0
    alpha: float | None = None
    sigma: float | None = None

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"shape must be one of {SHAPES}, got {self.shape!r}")
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if not self.tau_c > 0:
            raise ValueError(f"tau_c must be positive, got {self.tau_c}")
        if self.shape == "gaussian":
            if self.alpha is None:
                object.__setattr__(self, "alpha", self.tau_c / 10.0)
            if self.sigma is None:
                object.__setattr__(self, "sigma", self.tau_c / 6.0)
            if not (self.alpha > 0 and self.sigma > 0):
                raise ValueError("gaussian pulses need alpha > 0 and sigma > 0")
        elif self.alpha is not None or self.sigma is not None:
            raise ValueError(f"alpha/sigma only apply to gaussian pulses, not {self.shape!r}")
        if self.shape != "flat":
            tan0 = self._boundary_tangent(0.0)
            tan1 = self._boundary_tangent(self.tau_c)
            if tan0 > _BOUNDARY_TAN_MAX or tan1 < 1.0 / _BOUNDARY_TAN_MAX:
                raise ValueError(
                    f"pulse boundary conditions violated: tan(theta(0))={tan0:.3e}, "
                    f"tan(theta(tau_c))={tan1:.3e}"
                )

    def _boundary_tangent(self, t: float) -> float:
        o1, o2, _ = envelopes(self, t)
        if o2 == 0.0:
            return math.inf
        return o1 / o2

    @property
    def is_ideal(self) -> bool:
        return self.epsilon == 0.0 and self.delta_one == 0.0 and self.delta_two == 0.0


def _as_time_array(t):
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0):
        raise ValueError("time must be >= 0")
    return arr, arr.ndim == 0


def envelopes(spec: DriveSpec, t):
    """Drive envelopes (Omega_1, Omega_2, Omega_CD) at time `t` (scalar or array).

    Negative times are rejected; times past tau_c return the frozen
    end-of-charging values with the counterdiabatic term off.
    """
    arr, scalar = _as_time_array(t)
    tau, omega = spec.tau_c, spec.omega
    tt = np.minimum(arr, tau)
    charging = arr <= tau

    if spec.shape == "sine":
        phase = np.pi * tt / (2.0 * tau)
        o1 = omega * np.sin(phase)
        o2 = omega * np.cos(phase)
        ocd = np.where(charging, np.pi / (2.0 * tau), 0.0)
    elif spec.shape == "gaussian":
        a, s2 = spec.alpha, spec.sigma**2
        c1 = tau / 2.0 + a          # Omega_1 peaks second
        c2 = tau / 2.0 - a          # Omega_2 peaks first
        o1 = omega * np.exp(-((tt - c1) ** 2) / s2)
        o2 = omega * np.exp(-((tt - c2) ** 2) / s2)
        u = (4.0 * a * tt - 2.0 * a * tau) / s2
        with np.errstate(over="ignore"):
            ocd = np.where(charging, (2.0 * a / s2) / np.cosh(u), 0.0)
    else:  # flat: square pulses, no counterdiabatic passage
        o1 = np.full_like(tt, omega / math.sqrt(2.0))
        o2 = np.full_like(tt, omega / math.sqrt(2.0))
        ocd = np.zeros_like(tt)

    if not spec.cd_enabled:
        ocd = np.zeros_like(ocd)
    if scalar:
        return float(o1), float(o2), float(ocd)
    return o1, o2, ocd


def mixing_angle(spec: DriveSpec, t):
    """theta(t) = atan2(Omega_1, Omega_2), in [0, pi/2]; frozen past tau_c."""
    o1, o2, _ = envelopes(spec, t)
    return np.arctan2(o1, o2)


def control_hamiltonian(spec: DriveSpec, t, protocol: str = "sta") -> np.ndarray:
    """Rotating-frame control Hamiltonian at `t` (scalar -> (3,3), array -> (n,3,3)).

    delta_one|e><e| + delta_two|f><f|
      + Omega_1(1+eps)|g><e| + Omega_2(1-eps)|e><f| + i*Omega_CD|g><f| + h.c.

    The counterdiabatic term is dropped for the 'stirap' protocol.
    """
    if protocol not in PROTOCOLS:
        raise ValueError(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")
    o1, o2, ocd = envelopes(spec, t)
    o1 = np.asarray(o1, dtype=float) * (1.0 + spec.epsilon)
    o2 = np.asarray(o2, dtype=float) * (1.0 - spec.epsilon)
    if protocol == "stirap":
        ocd = np.zeros_like(np.asarray(ocd, dtype=float))
    ocd = np.asarray(ocd, dtype=float)

    H = np.zeros(o1.shape + (3, 3), dtype=complex)
    H[..., 1, 1] = spec.delta_one
    H[..., 2, 2] = spec.delta_two
    H[..., 0, 1] = o1
    H[..., 1, 0] = o1
    H[..., 1, 2] = o2
    H[..., 2, 1] = o2
    H[..., 0, 2] = 1j * ocd
    H[..., 2, 0] = -1j * ocd
    return H


def _check_within_period(spec: DriveSpec, arr):
    if np.any(arr > spec.tau_c * (1.0 + 1e-12)):
        raise ValueError(f"time beyond the charging period tau_c={spec.tau_c}")


def dynamical_phase(spec: DriveSpec, t):
    """Accumulated phase  phi(t) = integral_0^t sqrt(Omega_1^2 + Omega_2^2) dt'.

    Exact for sine pulses (constant total Rabi frequency); Simpson quadrature
    for gaussian and flat envelopes.  Defined on [0, tau_c].
    """
    arr, scalar = _as_time_array(t)
    _check_within_period(spec, arr)
    if spec.shape == "sine":
        phi = spec.omega * arr
    else:
        def total_rabi(ts):
            o1, o2, _ = envelopes(spec, ts)
            return np.sqrt(o1**2 + o2**2)

        def quad(upper: float) -> float:
            if upper == 0.0:
                return 0.0
            nodes = np.linspace(0.0, upper, 2049)
            return float(simpson(total_rabi(nodes), x=nodes))

        if scalar:
            phi = quad(float(arr))
        else:
            phi = np.array([quad(float(u)) for u in arr])
    if scalar:
        return float(phi)
    return phi


def sta_propagator(spec: DriveSpec, t) -> np.ndarray:
    """Closed-form propagator of the counterdiabatic-assisted drive.

    Valid for the ideal drive only (no intensity error, no detunings) and for
    the passage shapes (sine, gaussian); encodes exact dark-state transport:
    the first column is the instantaneous dark state.  Scalar t -> (3,3);
    array t -> (n,3,3).  Unitary to machine precision.
    """
    if not spec.is_ideal:
        raise ValueError("closed-form propagator requires epsilon = delta_one = delta_two = 0")
    if not spec.cd_enabled:
        raise ValueError("closed-form propagator requires the counterdiabatic term enabled")
    if spec.shape == "flat":
        raise ValueError("flat pulses have no counterdiabatic passage; integrate numerically")
    arr, scalar = _as_time_array(t)
    _check_within_period(spec, arr)
    theta = mixing_angle(spec, arr)
    phi = np.asarray(dynamical_phase(spec, arr), dtype=float)

    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(phi), np.sin(phi)
    U = np.zeros(np.shape(arr) + (3, 3), dtype=complex)
    U[..., 0, 0] = ct
    U[..., 0, 1] = -1j * sp * st
    U[..., 0, 2] = cp * st
    U[..., 1, 1] = cp
    U[..., 1, 2] = -1j * sp
    U[..., 2, 0] = -st
    U[..., 2, 1] = -1j * sp * ct
    U[..., 2, 2] = cp * ct
    return U


@dataclass(frozen=True)
class TwoPhotonSpec:
    """Two-photon substitute for the direct g-f counterdiabatic drive.

    `omega_p` is the drive amplitude (a constant or a callable of time); the
    drive couples g-e with amplitude omega_p and e-f with sqrt(2)*omega_p at
    fixed phase pi/4.  `delta_d` is the dispersive detuning carried by |e>;
    the effective g-f coupling is sqrt(2)*omega_p^2/delta_d.
    """

    omega_p: Union[float, Callable[[float], float]]
    delta_d: float
    phase: float = math.pi / 4.0

    def __post_init__(self):
        if not self.delta_d > 0:
            raise ValueError(f"delta_d must be positive, got {self.delta_d}")

    def amplitude(self, t):
        if callable(self.omega_p):
            return np.asarray(self.omega_p(t), dtype=float)
        return np.full(np.shape(t), float(self.omega_p)) if np.ndim(t) else float(self.omega_p)


def effective_cd(tp: TwoPhotonSpec, t):
    """Dispersive-regime effective g-f coupling sqrt(2) * omega_p(t)^2 / delta_d."""
    op = tp.amplitude(t)
    return math.sqrt(2.0) * op**2 / tp.delta_d


def drive_for_effective_cd(cd_rate, delta_d: float):
    """Drive amplitude omega_p that realizes a target effective coupling."""
    return np.sqrt(np.asarray(cd_rate, dtype=float) * delta_d / math.sqrt(2.0))


def two_photon_hamiltonian(tp: TwoPhotonSpec, t, *, stark_compensated: bool = True) -> np.ndarray:
    """Two-photon drive Hamiltonian in the frame where |e> carries delta_d.

        delta_d |e><e| + omega_p e^{i phase} (|g><e| + sqrt(2)|e><f|) + h.c.

    With `stark_compensated` (default) the second-order level shifts of |g>
    and |f> are cancelled (drive retuning); the shifts scale with the
    effective coupling itself, so without compensation the g-f transfer is
    detuned by a fixed fraction at every delta_d.  Warns when the dispersive
    condition delta_d >= 10 * omega_p is violated.
    """
    arr = np.asarray(t, dtype=float)
    op = np.asarray(tp.amplitude(arr), dtype=float)
    peak = float(np.max(np.abs(op))) if op.ndim else abs(float(op))
    if tp.delta_d < 10.0 * peak:
        warnings.warn(
            f"dispersive condition violated: delta_d={tp.delta_d} < 10*omega_p={10 * peak}",
            stacklevel=2,
        )
    coupling = op * np.exp(1j * tp.phase)
    H = np.zeros(arr.shape + (3, 3), dtype=complex)
    H[..., 1, 1] = tp.delta_d
    H[..., 0, 1] = coupling
    H[..., 1, 0] = np.conj(coupling)
    H[..., 1, 2] = math.sqrt(2.0) * coupling
    H[..., 2, 1] = math.sqrt(2.0) * np.conj(coupling)
    if stark_compensated:
        H[..., 0, 0] += op**2 / tp.delta_d
        H[..., 2, 2] += 2.0 * op**2 / tp.delta_d
    return H
