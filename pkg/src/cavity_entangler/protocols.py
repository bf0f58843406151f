"""End-to-end protocol executors in analytic and numeric modes.

Both modes run the same schedule on the same initial state; "analytic" folds
the closed-form step map, "numeric" propagates with the matrix exponential
(or the adaptive integrator). Coupling/decoupling a qubit is modeled as
instantaneous switching of the active set; inactive qubits are strictly
uncoupled.
"""
from __future__ import annotations

import math
import warnings
from typing import Optional, Sequence, Tuple

import numpy as np

from . import analytic, metrics, numeric, statespace
from .errors import ArgumentError, CapacityError, ProtocolError, RegimeWarning
from .hamiltonian import (
    REGIME_MAX_KAPPA_OVER_LAMBDA,
    EffectiveModel,
    build_effective,
)
from .records import RunReport, Schedule  # Schedule re-exported: records live in records.py
from .statespace import StateVector

ANALYTIC = "analytic"
NUMERIC = "numeric"

# The analytic factorization is exact; the numeric one carries integrator
# and expm roundoff, hence the looser threshold.
CAVITY_TOL = {ANALYTIC: 1e-10, NUMERIC: 1e-7}


def _check_mode(mode: str) -> None:
    if mode not in (ANALYTIC, NUMERIC):
        raise ArgumentError(f"mode must be 'analytic' or 'numeric', got {mode!r}")


def _warn_if_out_of_regime(model: EffectiveModel) -> None:
    ratio = model.kappa_over_lambda
    if ratio > REGIME_MAX_KAPPA_OVER_LAMBDA:
        warnings.warn(
            f"protocol run at kappa/lambda = {ratio:.3g} is outside the supported "
            f"regime (<= {REGIME_MAX_KAPPA_OVER_LAMBDA})",
            RegimeWarning,
            stacklevel=3,
        )


# ---------------------------------------------------------------------------
# cluster protocol
# ---------------------------------------------------------------------------

def cluster_initial_state(n: int) -> StateVector:
    """Qubits 1..N-1 in |+>, qubit N in |0>, cavity in (|0> + i|1>)/sqrt(2)."""
    vec = np.array([1.0], dtype=complex)
    plus = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)
    ground = np.array([1.0, 0.0], dtype=complex)
    for j in range(1, n + 1):
        vec = np.kron(vec, plus if j < n else ground)
    cavity = np.array([1.0, 1j], dtype=complex) / math.sqrt(2.0)
    return StateVector(np.kron(vec, cavity), n, 2)


def run_cluster(
    model: EffectiveModel,
    n: int,
    mode: str = ANALYTIC,
    opts: Optional[numeric.PropagatorOptions] = None,
) -> Tuple[StateVector, RunReport]:
    """Run the N-step sequential protocol; return the qubit register and report.

    The cavity is factored out at vacuum after the final (drain) step; a
    factorization error here signals a scheduling bug, not numerical noise.
    Fidelity is measured against the normalized ideal cluster state, success
    probability is the final squared norm.
    """
    _check_mode(mode)
    if n < 2:
        raise ArgumentError(f"cluster protocol needs n >= 2, got {n}")
    if n > analytic.MAX_DENSE_QUBITS:
        raise CapacityError(
            f"dense protocol execution capped at {analytic.MAX_DENSE_QUBITS} qubits "
            "(use cluster_fidelity_recursive for larger registers)"
        )
    _warn_if_out_of_regime(model)
    schedule = analytic.cluster_schedule(model, n)

    psi = cluster_initial_state(n)
    per_step = []
    if mode == ANALYTIC:
        for idx, (j, lam, duration) in enumerate(schedule.steps, start=1):
            role = analytic.LOAD if j < n else analytic.DRAIN
            p = analytic.step_params(lam, model.kappa, role)
            psi = analytic.single_step_map(psi, j, p, duration)
            per_step.append((idx, psi.norm_sq()))
    else:
        opts = opts or numeric.PropagatorOptions()
        for idx, (j, lam, duration) in enumerate(schedule.steps, start=1):
            h = build_effective(model.with_active({j}), n, psi.fock_cutoff)
            psi = numeric.evolve(h, psi, duration, opts)
            per_step.append((idx, psi.norm_sq()))

    register = statespace.factor_out_cavity(psi, photon=0, tol=CAVITY_TOL[mode])
    target = analytic.ideal_cluster(n)
    report = RunReport(
        fidelity=metrics.fidelity(register, target),
        success_probability=register.norm_sq(),
        per_step=tuple(per_step),
        mode=mode,
        kappa_over_lambda=model.kappa_over_lambda,
        details={"schedule": schedule},
    )
    return register, report


# ---------------------------------------------------------------------------
# W protocol
# ---------------------------------------------------------------------------

def w_initial_state(n: int) -> StateVector:
    """Qubit 1 excited, qubits 2..N and the cavity in the ground state."""
    return statespace.make_basis_state([1] + [0] * (n - 1), photon=0, cutoff=2)


def run_w(
    model: EffectiveModel,
    n: int,
    mode: str = ANALYTIC,
    opts: Optional[numeric.PropagatorOptions] = None,
) -> Tuple[StateVector, RunReport]:
    """Simultaneous-coupling W preparation on qubits 2..N.

    The first coupling and the evolution time are always derived from the
    self-consistency conditions (model.lambdas[0] is treated as a seed only);
    at the solved time qubit 1 and the cavity disentangle, are checked against
    the mode's residual threshold, and are dropped from the register.
    """
    _check_mode(mode)
    if n < 2:
        raise ArgumentError(f"W protocol needs n >= 2, got {n}")
    if n > analytic.MAX_DENSE_QUBITS:
        raise CapacityError(
            f"dense protocol execution capped at {analytic.MAX_DENSE_QUBITS} qubits"
        )
    if model.qubit_count != n:
        raise ArgumentError(f"model has {model.qubit_count} couplings, n = {n}")
    rest = model.lambdas[1:]
    solution = analytic.w_solve_lambda1(rest, model.kappa)
    solved = EffectiveModel((solution.lambda1,) + rest, model.kappa)
    _warn_if_out_of_regime(solved)
    t = solution.duration

    if mode == ANALYTIC:
        amps = analytic.w_amplitudes(solved, t)
        qubit1_residual = abs(amps[0])
        cavity_residual = abs(amps[-1])
        if qubit1_residual > 1e-10 or cavity_residual > 1e-12:
            raise ProtocolError(
                "W conditions not met at the solved time: "
                f"qubit-1 residual {qubit1_residual:.3e}, cavity residual {cavity_residual:.3e}",
                residual=max(qubit1_residual, cavity_residual),
            )
        register_amps = np.zeros(1 << (n - 1), dtype=complex)
        for k in range(2, n + 1):
            register_amps[1 << (n - 1 - (k - 1))] = amps[k - 1]
        register = StateVector(register_amps, n - 1, 1)
        per_step = ((1, register.norm_sq()),)
    else:
        opts = opts or numeric.PropagatorOptions()
        h = build_effective(solved, n, 2)
        psi = numeric.evolve(h, w_initial_state(n), t, opts)
        grid = psi.amplitudes.reshape(2, 1 << (n - 1), 2)   # (qubit1, rest, photon)
        qubit1_residual = float(np.linalg.norm(grid[1]))
        cavity_residual = float(np.linalg.norm(grid[:, :, 1]))
        threshold = 1e-7
        if qubit1_residual > threshold or cavity_residual > threshold:
            raise ProtocolError(
                "W protocol failed to disentangle qubit 1 / cavity: "
                f"residuals {qubit1_residual:.3e}, {cavity_residual:.3e}",
                residual=max(qubit1_residual, cavity_residual),
            )
        register = StateVector(grid[0, :, 0].copy(), n - 1, 1)
        per_step = ((1, register.norm_sq()),)

    target = analytic.w_target(rest, model.kappa, t)
    report = RunReport(
        fidelity=metrics.fidelity(register, target),
        success_probability=register.norm_sq(),
        per_step=per_step,
        mode=mode,
        kappa_over_lambda=solved.kappa / min(rest),
        details={
            "solution": solution,
            "qubit1_residual": qubit1_residual,
            "cavity_residual": cavity_residual,
        },
    )
    return register, report


# ---------------------------------------------------------------------------
# imperfection injection
# ---------------------------------------------------------------------------

def inject_phase_errors(state: StateVector, phases: Sequence[float]) -> StateVector:
    """Apply diag(1, e^{i phi_j}) to each qubit j (norm preserved).

    Models the residual phases picked up while a qubit's level spacing is
    being switched; no quantitative switching model exists, so the phases are
    caller-chosen.
    """
    if len(phases) != state.qubit_count:
        raise ArgumentError(
            f"need {state.qubit_count} phases, got {len(phases)}"
        )
    arr = state._grid().copy()
    for j, phi in enumerate(phases, start=1):
        sel = [slice(None)] * (state.qubit_count + 1)
        sel[j - 1] = 1
        arr[tuple(sel)] *= np.exp(1j * float(phi))
    return StateVector(arr.reshape(-1), state.qubit_count, state.fock_cutoff)
