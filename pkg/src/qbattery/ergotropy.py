"""Ergotropy, passive states, and work-extraction unitaries.

Ergotropy is the maximum work extractable by a unitary: the energy of the
state minus the energy of its passive state (populations of the spectral
decomposition sorted descending, paired against energies sorted ascending).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qutrit import BatteryLevels, DensityMatrix, expectation_energy, hermitian_eig3

_DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class ErgotropyReport:
    """Energy bookkeeping with ergotropy = energy - passive_energy."""

    energy: float
    passive_energy: float
    ergotropy: float


def _check_nondegenerate(eigvals):
    gaps = np.diff(eigvals)
    if np.any(gaps <= _DEGENERACY_TOL):
        raise ValueError(
            f"Hamiltonian spectrum is degenerate (gaps {gaps}); passive state is not unique"
        )


def _descending_stable(values: np.ndarray) -> np.ndarray:
    # Stable descending order: ties keep the lower-energy slot first.
    return np.argsort(-values, kind="stable")


def passive_state(rho: DensityMatrix, H0) -> DensityMatrix:
    """The unique minimum-energy state on the unitary orbit of `rho`.

    Pairs the descending eigenvalues of `rho` with the ascending eigenbasis
    of `H0`.  Raises for a degenerate `H0` spectrum.
    """
    eps, basis = hermitian_eig3(H0)
    _check_nondegenerate(eps)
    p, _ = hermitian_eig3(rho.matrix)
    p_desc = p[_descending_stable(p)]
    mat = (basis * p_desc) @ basis.conj().T
    return DensityMatrix(mat)


def ergotropy(rho: DensityMatrix, H0) -> ErgotropyReport:
    """Ergotropy of `rho` under `H0` via spectral decomposition."""
    eps, _ = hermitian_eig3(H0)
    _check_nondegenerate(eps)
    p, _ = hermitian_eig3(rho.matrix)
    p_desc = p[_descending_stable(p)]
    energy = expectation_energy(rho, H0)
    passive_energy = float(np.dot(p_desc, eps))
    return ErgotropyReport(energy=energy, passive_energy=passive_energy, ergotropy=energy - passive_energy)


def ergotropy_trajectory(states: np.ndarray, H0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched ergotropy over a stack of states with shape (n, 3, 3).

    Returns (energy, passive_energy, ergotropy) arrays.  States are assumed
    Hermitian (symmetrized trajectories); no per-state validation here.
    """
    states = np.asarray(states, dtype=complex)
    eps, _ = hermitian_eig3(H0)
    _check_nondegenerate(eps)
    p = np.linalg.eigvalsh(states)            # ascending along last axis
    p_desc = p[..., ::-1]
    energy = np.real(np.einsum("nij,ji->n", states, np.asarray(H0, dtype=complex)))
    passive = p_desc @ eps
    return energy, passive, energy - passive


def ergotropy_diagonal(populations, levels: BatteryLevels) -> float:
    """Ergotropy of a diagonal state from its populations (rho_gg, rho_ee, rho_ff).

    Uses the closed-form branch selected by the population ordering; the two
    orderings without a closed form fall through to the general spectral
    routine.
    """
    p = np.asarray(populations, dtype=float)
    if p.shape != (3,):
        raise ValueError("expected three populations")
    if np.any(p < -1e-12):
        raise ValueError(f"populations must be non-negative, got {p}")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"populations must sum to 1, got sum {p.sum()!r}")
    rho_gg, rho_ee, rho_ff = p
    omega_e, omega_f = levels.omega_e, levels.omega_f

    if rho_ff >= rho_ee >= rho_gg:
        return omega_f * (rho_ff - rho_gg)
    if rho_ee >= rho_ff >= rho_gg:
        return omega_f * (rho_ff - rho_gg) + omega_e * (rho_ee - rho_ff)
    if rho_ee >= rho_gg >= rho_ff:
        return omega_e * (rho_ee - rho_gg)
    if rho_gg >= rho_ee >= rho_ff:
        return 0.0
    # Remaining orderings (rho_ff >= rho_gg >= rho_ee and rho_gg >= rho_ff >= rho_ee)
    # have no dedicated branch; defer to the general routine.
    from .qutrit import bare_hamiltonian

    rho = DensityMatrix.from_populations(np.clip(p, 0.0, None) / p.sum())
    return ergotropy(rho, bare_hamiltonian(levels)).ergotropy


def _phase_fixed(columns: np.ndarray) -> np.ndarray:
    """Rotate each column's global phase so its largest-magnitude entry is real positive."""
    out = columns.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        idx = int(np.argmax(np.abs(col)))
        pivot = col[idx]
        if abs(pivot) > 0:
            out[:, k] = col * (abs(pivot) / pivot)
    return out


def extraction_unitary(rho: DensityMatrix, H0) -> np.ndarray:
    """Unitary mapping `rho` to its passive state (the optimal work extraction).

    Local phases are fixed so that diagonal inputs yield a real permutation;
    for a fully charged-ordered diagonal state this is the g<->f swap.
    """
    eps, e_basis = hermitian_eig3(H0)
    _check_nondegenerate(eps)
    p, p_basis = hermitian_eig3(rho.matrix)
    order = _descending_stable(p)
    src = _phase_fixed(p_basis[:, order])
    dst = _phase_fixed(e_basis)
    return dst @ src.conj().T
