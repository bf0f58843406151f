"""State vectors over N two-level qubits tensored with one truncated cavity mode.

Basis ordering is qubit-1-major with the cavity innermost: the flat index of
``(bits, photon)`` is ``int(bits, base=2) * fock_cutoff + photon`` where bit 1
of the string belongs to qubit 1. A register without a cavity factor is
represented with ``fock_cutoff = 1`` (photon number pinned to 0), so the same
operations work on protocol outputs after the cavity has been factored out.

States are unnormalized by design: non-Hermitian evolution shrinks the norm
and the squared norm is the success probability. All values are immutable;
every operation returns a new StateVector.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import ArgumentError, CapacityError, FactorizationError, TruncationError

MAX_DENSE_QUBITS = 24   # dense 2^N storage; larger registers go through the
                        # O(N) recursion paths instead


@dataclass(frozen=True)
class BasisLabel:
    """One computational basis ket: qubit bits (qubit 1 first) and a photon number."""

    qubit_bits: tuple
    photon_number: int

    def __post_init__(self):
        if len(self.qubit_bits) == 0:
            raise ArgumentError("qubit_bits must be non-empty")
        if any(b not in (0, 1) for b in self.qubit_bits):
            raise ArgumentError(f"qubit_bits must be binary, got {self.qubit_bits}")
        if self.photon_number < 0:
            raise ArgumentError(f"photon_number must be >= 0, got {self.photon_number}")


@dataclass(frozen=True, eq=False)
class StateVector:
    """Dense complex amplitudes over the 2^N x fock_cutoff product basis."""

    amplitudes: np.ndarray
    qubit_count: int
    fock_cutoff: int = 2

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if self.qubit_count < 1:
            raise ArgumentError(f"qubit_count must be >= 1, got {self.qubit_count}")
        if self.qubit_count > MAX_DENSE_QUBITS:
            raise CapacityError(
                f"dense state vectors are capped at {MAX_DENSE_QUBITS} qubits"
            )
        if self.fock_cutoff < 1:
            raise ArgumentError(f"fock_cutoff must be >= 1, got {self.fock_cutoff}")
        dim = (1 << self.qubit_count) * self.fock_cutoff
        if amps.shape != (dim,):
            raise ArgumentError(
                f"amplitude vector has shape {amps.shape}, expected ({dim},) "
                f"for {self.qubit_count} qubits and cutoff {self.fock_cutoff}"
            )
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    # -- basic queries ------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def index_of(self, label: BasisLabel) -> int:
        if len(label.qubit_bits) != self.qubit_count:
            raise ArgumentError(
                f"label has {len(label.qubit_bits)} bits, register has {self.qubit_count}"
            )
        if label.photon_number >= self.fock_cutoff:
            raise TruncationError(
                f"photon number {label.photon_number} >= cutoff {self.fock_cutoff}"
            )
        bits_int = 0
        for b in label.qubit_bits:
            bits_int = (bits_int << 1) | b
        return bits_int * self.fock_cutoff + label.photon_number

    def label_of(self, index: int) -> BasisLabel:
        bits_int, photon = divmod(index, self.fock_cutoff)
        bits = tuple((bits_int >> (self.qubit_count - 1 - j)) & 1 for j in range(self.qubit_count))
        return BasisLabel(bits, photon)

    def amplitude(self, bits: Sequence[int], photon: int = 0) -> complex:
        return complex(self.amplitudes[self.index_of(BasisLabel(tuple(bits), photon))])

    def _grid(self) -> np.ndarray:
        """View shaped (2, ..., 2, cutoff): one axis per qubit, cavity last."""
        return self.amplitudes.reshape([2] * self.qubit_count + [self.fock_cutoff])


def make_basis_state(bits: Sequence[int], photon: int, cutoff: int) -> StateVector:
    """Unit-norm state with amplitude 1 on the single ket |bits>|photon>_c."""
    label = BasisLabel(tuple(bits), photon)
    if photon >= cutoff:
        raise TruncationError(f"photon number {photon} >= cutoff {cutoff}")
    n = len(label.qubit_bits)
    bits_int = 0
    for b in label.qubit_bits:
        bits_int = (bits_int << 1) | b
    amps = np.zeros((1 << n) * cutoff, dtype=complex)
    amps[bits_int * cutoff + photon] = 1.0
    return StateVector(amps, n, cutoff)


def superpose(terms: Iterable[tuple]) -> StateVector:
    """Coefficient-weighted sum of states. No implicit normalization."""
    terms = list(terms)
    if not terms:
        raise ArgumentError("superpose needs at least one term")
    _, first = terms[0]
    out = np.zeros_like(first.amplitudes)
    for coeff, sv in terms:
        if (sv.qubit_count, sv.fock_cutoff) != (first.qubit_count, first.fock_cutoff):
            raise ArgumentError(
                f"mismatched registers: ({sv.qubit_count}, {sv.fock_cutoff}) vs "
                f"({first.qubit_count}, {first.fock_cutoff})"
            )
        out = out + complex(coeff) * sv.amplitudes
    return StateVector(out, first.qubit_count, first.fock_cutoff)


def inner(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    if (a.qubit_count, a.fock_cutoff) != (b.qubit_count, b.fock_cutoff):
        raise ArgumentError(
            f"mismatched registers: ({a.qubit_count}, {a.fock_cutoff}) vs "
            f"({b.qubit_count}, {b.fock_cutoff})"
        )
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def apply_sigma_z(s: StateVector, j: int) -> StateVector:
    """Apply sigma_z on qubit j in the |1><1| - |0><0| sign convention.

    Flips the sign of every amplitude whose j-th bit is 0 (note this is the
    negative of the usual Pauli-Z matrix).
    """
    if not 1 <= j <= s.qubit_count:
        raise ArgumentError(f"qubit index {j} out of range 1..{s.qubit_count}")
    arr = s._grid().copy()
    sel = [slice(None)] * (s.qubit_count + 1)
    sel[j - 1] = 0
    arr[tuple(sel)] *= -1
    return StateVector(arr.reshape(-1), s.qubit_count, s.fock_cutoff)


def factor_out_cavity(s: StateVector, photon: int = 0, tol: float = 1e-9) -> StateVector:
    """Split off the cavity factor |photon>_c, returning the qubit register.

    Requires all amplitude weight outside the given photon sector to be below
    ``tol * norm``; the factorization is exact for protocol outputs, so any
    real residual signals a bug upstream. Amplitudes are preserved (no
    normalization); the result uses fock_cutoff = 1.
    """
    if not 0 <= photon < s.fock_cutoff:
        raise ArgumentError(f"photon {photon} outside 0..{s.fock_cutoff - 1}")
    grid = s.amplitudes.reshape(-1, s.fock_cutoff)
    kept = grid[:, photon]
    others = [k for k in range(s.fock_cutoff) if k != photon]
    residual = float(np.linalg.norm(grid[:, others]))
    if residual > tol * max(s.norm(), np.finfo(float).tiny):
        raise FactorizationError(
            f"weight outside photon={photon} sector: residual norm {residual:.3e} "
            f"exceeds tol {tol:.1e} (relative)",
            residual,
        )
    return StateVector(kept.copy(), s.qubit_count, 1)


# -- text dump format ---------------------------------------------------------
#
# One line per nonzero amplitude: "<bitstring> <photon> <re> <im>", amplitudes
# with 17 significant digits, lines sorted by basis index. Shared by the CLI
# --dump-state flag and the matrix dump (rows "row col re im").

def state_dump_lines(s: StateVector) -> list:
    lines = []
    for idx in range(s.dim):
        amp = s.amplitudes[idx]
        if amp == 0:
            continue
        label = s.label_of(idx)
        bits = "".join(str(b) for b in label.qubit_bits)
        lines.append(f"{bits} {label.photon_number} {amp.real:.17g} {amp.imag:.17g}")
    return lines


def write_state_dump(s: StateVector, fh: TextIO) -> None:
    for line in state_dump_lines(s):
        fh.write(line + "\n")


def matrix_dump_lines(matrix: np.ndarray) -> list:
    lines = []
    m = np.asarray(matrix)
    for row in range(m.shape[0]):
        for col in range(m.shape[1]):
            v = m[row, col]
            if v == 0:
                continue
            lines.append(f"{row} {col} {v.real:.17g} {v.imag:.17g}")
    return lines
