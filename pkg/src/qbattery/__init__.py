"""Three-level quantum battery simulator.

Covers the full battery lifecycle: environmental self-discharge under a
Lindblad master equation, ergotropy and optimal work extraction,
ground-state postselection, and fast recharging along the dark state with
counterdiabatic driving, plus robustness sweeps and energetic-cost
accounting.
"""

from .dynamics import (
    DecoherenceSpec,
    NumericalDivergenceError,
    TimeGrid,
    Trajectory,
    analytic_discharge,
    crossing_times,
    evolve,
    lindblad_rhs,
)
from .ergotropy import (
    ErgotropyReport,
    ergotropy,
    ergotropy_diagonal,
    ergotropy_trajectory,
    extraction_unitary,
    passive_state,
)
from .protocol import (
    CostReport,
    CycleReport,
    MeasurementOutcome,
    RechargeResult,
    RechargeScenario,
    drive_cost,
    efficiency,
    full_cycle,
    max_unitary_ergotropy,
    measurement_cost,
    post_extraction_state,
    postselect_ground,
    recharge,
    stability_check,
    von_neumann_entropy,
)
from .pulses import (
    DriveSpec,
    TwoPhotonSpec,
    control_hamiltonian,
    drive_for_effective_cd,
    dynamical_phase,
    effective_cd,
    envelopes,
    mixing_angle,
    sta_propagator,
    two_photon_hamiltonian,
)
from .qutrit import (
    BatteryLevels,
    DensityMatrix,
    bare_hamiltonian,
    expectation_energy,
    hermitian_eig3,
    ket,
    projector,
)

__version__ = "0.1.0"

__all__ = [
    "BatteryLevels",
    "CostReport",
    "CycleReport",
    "DecoherenceSpec",
    "DensityMatrix",
    "DriveSpec",
    "ErgotropyReport",
    "MeasurementOutcome",
    "NumericalDivergenceError",
    "RechargeResult",
    "RechargeScenario",
    "TimeGrid",
    "Trajectory",
    "TwoPhotonSpec",
    "analytic_discharge",
    "bare_hamiltonian",
    "control_hamiltonian",
    "crossing_times",
    "drive_cost",
    "drive_for_effective_cd",
    "dynamical_phase",
    "effective_cd",
    "efficiency",
    "envelopes",
    "ergotropy",
    "ergotropy_diagonal",
    "ergotropy_trajectory",
    "evolve",
    "expectation_energy",
    "extraction_unitary",
    "full_cycle",
    "hermitian_eig3",
    "ket",
    "lindblad_rhs",
    "max_unitary_ergotropy",
    "measurement_cost",
    "mixing_angle",
    "passive_state",
    "post_extraction_state",
    "postselect_ground",
    "projector",
    "recharge",
    "sta_propagator",
    "stability_check",
    "two_photon_hamiltonian",
    "von_neumann_entropy",
]
