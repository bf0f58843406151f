"""Cluster-state and W-state preparation for cavity-coupled qubits under decay.

State vectors evolve under an exchange Hamiltonian with a non-Hermitian
cavity-decay term; closed-form protocol solutions are validated against an
independent numeric propagator. See the README for the CLI and file formats.
"""

from .analytic import (
    StepParams,
    WSolution,
    cluster_analytic,
    cluster_fidelity_recursive,
    cluster_schedule,
    ideal_cluster,
    single_step_map,
    step_params,
    w_amplitudes,
    w_solve_lambda1,
    w_target,
)
from .errors import (
    ArgumentError,
    CapacityError,
    CavityEntanglerError,
    ConvergenceError,
    FactorizationError,
    NumericError,
    ProtocolError,
    RegimeError,
    RegimeWarning,
    SectorError,
    TruncationError,
)
from .hamiltonian import (
    EffectiveModel,
    OperatorMatrix,
    ThreeLevelModel,
    build_effective,
    build_full_rotated,
    effective_coupling,
    excitation_operator,
    kappa_from_quality,
    number_operator,
)
from .metrics import StabilizerReport, fidelity, raw_fidelity, stabilizer_expectation, success_probability
from .numeric import PropagatorOptions, evolve, evolve_step_sequence, evolve_vector
from .protocols import (
    cluster_initial_state,
    inject_phase_errors,
    run_cluster,
    run_w,
    w_initial_state,
)
from .records import RunReport, Schedule
from .statespace import (
    BasisLabel,
    StateVector,
    apply_sigma_z,
    factor_out_cavity,
    inner,
    make_basis_state,
    superpose,
)

__version__ = "0.1.0"

__all__ = [
    "ArgumentError",
    "BasisLabel",
    "CapacityError",
    "CavityEntanglerError",
    "ConvergenceError",
    "EffectiveModel",
    "FactorizationError",
    "NumericError",
    "OperatorMatrix",
    "PropagatorOptions",
    "ProtocolError",
    "RegimeError",
    "RegimeWarning",
    "RunReport",
    "Schedule",
    "SectorError",
    "StabilizerReport",
    "StateVector",
    "StepParams",
    "ThreeLevelModel",
    "TruncationError",
    "WSolution",
    "apply_sigma_z",
    "build_effective",
    "build_full_rotated",
    "cluster_analytic",
    "cluster_fidelity_recursive",
    "cluster_initial_state",
    "cluster_schedule",
    "effective_coupling",
    "evolve",
    "evolve_step_sequence",
    "evolve_vector",
    "excitation_operator",
    "factor_out_cavity",
    "fidelity",
    "ideal_cluster",
    "inject_phase_errors",
    "inner",
    "kappa_from_quality",
    "make_basis_state",
    "number_operator",
    "raw_fidelity",
    "run_cluster",
    "run_w",
    "single_step_map",
    "stabilizer_expectation",
    "step_params",
    "success_probability",
    "superpose",
    "w_amplitudes",
    "w_initial_state",
    "w_solve_lambda1",
    "w_target",
]
