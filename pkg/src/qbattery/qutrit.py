"""Validated qutrit states and 3x3 Hermitian linear algebra.

Basis ordering is (|g>, |e>, |f|) throughout; the bare Hamiltonian is
diagonal with the ground-state energy pinned to zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Basis indices
G, E, F = 0, 1, 2

_LEVEL_NAMES = {"g": G, "e": E, "f": F}

DEFAULT_ATOL = 1e-10


def ket(level) -> np.ndarray:
    """Basis column vector for a level given as index 0..2 or one of 'g', 'e', 'f'."""
    if isinstance(level, str):
        level = _LEVEL_NAMES[level]
    v = np.zeros(3, dtype=complex)
    v[level] = 1.0
    return v


def projector(level) -> np.ndarray:
    """|level><level| as a 3x3 complex matrix."""
    v = ket(level)
    return np.outer(v, v.conj())


@dataclass(frozen=True)
class BatteryLevels:
    """Bare transition frequencies of the qutrit, in units of a chosen reference rate.

    The spectrum must be non-degenerate and ascending: 0 < omega_e < omega_f.
    """

    omega_e: float
    omega_f: float

    def __post_init__(self):
        if not (0.0 < self.omega_e < self.omega_f):
            raise ValueError(
                f"levels must satisfy 0 < omega_e < omega_f, got "
                f"omega_e={self.omega_e}, omega_f={self.omega_f}"
            )


class DensityMatrix:
    """3x3 battery state, validated on construction.

    Invariants enforced: Hermitian (within `atol`), unit trace (within
    `atol`), positive semidefinite (eigenvalues >= -`eig_atol`).  The stored
    matrix is symmetrized, so downstream consumers can rely on exact
    Hermiticity.
    """

    __slots__ = ("matrix",)

    def __init__(self, matrix, *, atol: float = DEFAULT_ATOL, eig_atol: float | None = None):
        m = np.asarray(matrix, dtype=complex)
        if m.shape != (3, 3):
            raise ValueError(f"density matrix must be 3x3, got shape {m.shape}")
        herm_defect = np.linalg.norm(m - m.conj().T)
        if herm_defect > atol:
            raise ValueError(f"density matrix not Hermitian: defect {herm_defect:.3e} > {atol:.1e}")
        trace_defect = abs(m.trace() - 1.0)
        if trace_defect > atol:
            raise ValueError(f"density matrix trace off unity by {trace_defect:.3e} > {atol:.1e}")
        m = 0.5 * (m + m.conj().T)
        min_eig = float(np.linalg.eigvalsh(m)[0])
        eig_tol = atol if eig_atol is None else eig_atol
        if min_eig < -eig_tol:
            raise ValueError(f"density matrix not positive semidefinite: min eigenvalue {min_eig:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def pure(cls, level) -> "DensityMatrix":
        """Pure state on a bare level ('g', 'e', 'f' or index)."""
        return cls(projector(level))

    @classmethod
    def from_populations(cls, populations, *, atol: float = DEFAULT_ATOL) -> "DensityMatrix":
        """Diagonal state from three level populations (must sum to one)."""
        p = np.asarray(populations, dtype=float)
        if p.shape != (3,):
            raise ValueError("expected three populations")
        return cls(np.diag(p.astype(complex)), atol=atol)

    @classmethod
    def maximally_mixed(cls) -> "DensityMatrix":
        return cls(np.eye(3, dtype=complex) / 3.0)

    @property
    def populations(self) -> np.ndarray:
        """Real diagonal (populations over |g>, |e>, |f>)."""
        return np.real(np.diag(self.matrix)).copy()

    def __repr__(self):
        pops = ", ".join(f"{p:.6f}" for p in self.populations)
        return f"DensityMatrix(populations=[{pops}])"


def bare_hamiltonian(levels: BatteryLevels) -> np.ndarray:
    """diag(0, omega_e, omega_f) in the (|g>, |e>, |f>) basis."""
    return np.diag([0.0, levels.omega_e, levels.omega_f]).astype(complex)


def hermitian_eig3(H, *, atol: float = 1e-9):
    """Eigendecomposition of a 3x3 Hermitian matrix.

    Returns (eigenvalues ascending, eigenvectors as columns, orthonormal).
    Rejects input whose Hermitian defect exceeds `atol`.
    """
    H = np.asarray(H, dtype=complex)
    if H.shape != (3, 3):
        raise ValueError(f"expected 3x3 matrix, got shape {H.shape}")
    defect = np.linalg.norm(H - H.conj().T)
    if defect > atol:
        raise ValueError(f"matrix not Hermitian: defect {defect:.3e} > {atol:.1e}")
    w, v = np.linalg.eigh(0.5 * (H + H.conj().T))
    return w, v


def expectation_energy(rho: DensityMatrix, H0) -> float:
    """Internal energy Tr[rho H0] (real part; imaginary part must be negligible)."""
    val = complex(np.trace(rho.matrix @ np.asarray(H0, dtype=complex)))
    if abs(val.imag) > DEFAULT_ATOL:
        raise ValueError(f"energy expectation has imaginary part {val.imag:.3e}")
    return val.real
