"""Open-system exciton dynamics and entanglement in light-harvesting complexes."""

__version__ = "0.1.0"

from .bath import BathSpec, correlation_coefficients, drude_spectral_density, fmo_bath
from .entanglement import (
    EntanglementReport,
    closest_separable,
    concurrence,
    entanglement_report,
    global_entanglement,
    is_entangled,
    relative_entropy,
    von_neumann_entropy,
    witness,
)
from .hamiltonian import build_fmo_hamiltonian, exciton_decomposition, site_state, validate_state
from .heom import HeomSolver, TrappingSpec, propagate_heom
from .propagation import IntegratorOptions, integrate, unitary_oracle
from .redfield import build_redfield_tensor, gibbs_state, propagate_redfield, secularize
from .scenario import Scenario, run_scenario

__all__ = [
    "BathSpec", "correlation_coefficients", "drude_spectral_density", "fmo_bath",
    "EntanglementReport", "closest_separable", "concurrence", "entanglement_report",
    "global_entanglement", "is_entangled", "relative_entropy", "von_neumann_entropy", "witness",
    "build_fmo_hamiltonian", "exciton_decomposition", "site_state", "validate_state",
    "HeomSolver", "TrappingSpec", "propagate_heom",
    "IntegratorOptions", "integrate", "unitary_oracle",
    "build_redfield_tensor", "gibbs_state", "propagate_redfield", "secularize",
    "Scenario", "run_scenario",
]
