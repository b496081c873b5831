"""Small pure-state simulator for 1 to 3 qubits.

Qubit 0 is the leftmost ket position and the most significant bit of the
amplitude index, so ``|q0 q1 q2>`` lives at index ``4*q0 + 2*q1 + q2``.
States are immutable; every operation returns a new ``StateVector``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

CONSTRUCT_TOL = 1e-10
RUNTIME_TOL = 1e-9
BASIS_TOL = 1e-8

_SQRT1_2 = 1 / math.sqrt(2)

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
I_SIGMA_Y = 1j * SIGMA_Y
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT1_2
T_GATE = np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex)

for _g in (I2, SIGMA_X, SIGMA_Y, SIGMA_Z, I_SIGMA_Y, HADAMARD, T_GATE):
    _g.setflags(write=False)


# --------------------------------------------------------------------------
# Random streams
# --------------------------------------------------------------------------

def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Deterministic PCG64 generator for ``seed`` and an optional stream key.

    ``make_rng(seed, t)`` gives trial ``t`` its own stream; it does not depend
    on how many other trials are drawn.
    """
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(ss))


# --------------------------------------------------------------------------
# States and gates
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized amplitude vector over ``2**num_qubits`` basis kets."""

    amps: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        n = amps.size
        if n < 2 or n & (n - 1):
            raise ValueError(f"amplitude length must be a power of two >= 2, got {n}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > CONSTRUCT_TOL:
            raise ValueError(f"state is not normalized (norm={norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def normalized(cls, amps) -> "StateVector":
        amps = np.asarray(amps, dtype=complex)
        return cls(amps / np.linalg.norm(amps))

    @classmethod
    def from_bits(cls, bits: str) -> "StateVector":
        """Computational basis ket, e.g. ``from_bits("010")``."""
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[int(bits, 2)] = 1
        return cls(amps)

    @property
    def num_qubits(self) -> int:
        return self.amps.size.bit_length() - 1

    @property
    def dim(self) -> int:
        return self.amps.size

    def inner(self, other: "StateVector") -> complex:
        """``<self|other>``."""
        _check_same_dim(self, other)
        return complex(np.vdot(self.amps, other.amps))

    def __repr__(self):
        return f"StateVector(num_qubits={self.num_qubits}, amps={np.round(self.amps, 6)})"


def _check_same_dim(a: StateVector, b: StateVector) -> None:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits")


def is_unitary(gate: np.ndarray, tol: float = CONSTRUCT_TOL) -> bool:
    gate = np.asarray(gate)
    if gate.ndim != 2 or gate.shape[0] != gate.shape[1]:
        return False
    if not np.all(np.isfinite(gate)):
        return False
    err = gate @ gate.conj().T - np.eye(gate.shape[0])
    return bool(np.max(np.abs(err)) <= tol)


def as_gate(matrix) -> np.ndarray:
    """Validate a 2x2 unitary and return a read-only complex copy."""
    gate = np.array(matrix, dtype=complex)
    if gate.shape != (2, 2):
        raise ValueError(f"single-qubit gate must be 2x2, got shape {gate.shape}")
    if not is_unitary(gate):
        raise ValueError("gate is not unitary")
    gate.setflags(write=False)
    return gate


def apply_local(gate, qubit: int, state: StateVector) -> StateVector:
    """Apply a single-qubit ``gate`` to ``qubit`` of ``state``."""
    gate = as_gate(gate)
    k = state.num_qubits
    if not 0 <= qubit < k:
        raise IndexError(f"qubit {qubit} out of range for {k}-qubit state")
    psi = state.amps.reshape((2,) * k)
    out = np.moveaxis(np.tensordot(gate, psi, axes=([1], [qubit])), 0, qubit)
    return StateVector(out.reshape(-1))


def apply_product(gates: Sequence[np.ndarray], state: StateVector) -> StateVector:
    """Apply ``gates[r]`` to qubit ``r`` for every qubit."""
    if len(gates) != state.num_qubits:
        raise ValueError(f"expected {state.num_qubits} gates, got {len(gates)}")
    for r, g in enumerate(gates):
        state = apply_local(g, r, state)
    return state


def fidelity(a: StateVector, b: StateVector) -> float:
    """Squared overlap ``|<a|b>|**2``, clipped to [0, 1]."""
    return float(min(1.0, abs(a.inner(b)) ** 2))


def same_up_to_phase(a: StateVector, b: StateVector, tol: float = RUNTIME_TOL) -> bool:
    return fidelity(a, b) > 1 - tol


# --------------------------------------------------------------------------
# Named states and bases
# --------------------------------------------------------------------------

class Bell(enum.Enum):
    PHI_PLUS = "PhiPlus"
    PHI_MINUS = "PhiMinus"
    PSI_PLUS = "PsiPlus"
    PSI_MINUS = "PsiMinus"


_BELL_AMPS = {
    Bell.PHI_PLUS: (1, 0, 0, 1),
    Bell.PHI_MINUS: (1, 0, 0, -1),
    Bell.PSI_PLUS: (0, 1, 1, 0),
    Bell.PSI_MINUS: (0, 1, -1, 0),
}


def bell_state(label: Bell | str) -> StateVector:
    label = Bell(label)
    return StateVector(np.array(_BELL_AMPS[label], dtype=complex) * _SQRT1_2)


def ghz_basis_state(index: int) -> StateVector:
    """``(|a b 0> +/- |~a ~b 1>)/sqrt(2)`` with ``index = 4a + 2b + sign``.

    ``sign`` bit 0 is "+", so index 0 is ``(|000> + |111>)/sqrt(2)``.
    """
    if not 0 <= index <= 7:
        raise ValueError(f"GHZ basis index must be in 0..7, got {index}")
    a, b, minus = (index >> 2) & 1, (index >> 1) & 1, index & 1
    first = (a << 2) | (b << 1)
    second = first ^ 0b111
    amps = np.zeros(8, dtype=complex)
    amps[first] = _SQRT1_2
    amps[second] = -_SQRT1_2 if minus else _SQRT1_2
    return StateVector(amps)


def gram_matrix(basis: Sequence[StateVector]) -> np.ndarray:
    m = basis_matrix(basis)
    return m.conj() @ m.T


def basis_matrix(basis: Sequence[StateVector]) -> np.ndarray:
    """Rows are the basis vectors."""
    return np.stack([b.amps for b in basis])


def check_orthonormal_basis(basis: Sequence[StateVector], tol: float = BASIS_TOL) -> np.ndarray:
    """Return the basis as a row matrix, raising if it is not complete and orthonormal."""
    if not basis:
        raise ValueError("empty basis")
    dim = basis[0].dim
    if any(b.dim != dim for b in basis):
        raise ValueError("basis vectors have mixed dimensions")
    if len(basis) != dim:
        raise ValueError(f"basis is incomplete: {len(basis)} vectors for dimension {dim}")
    m = basis_matrix(basis)
    if np.max(np.abs(m.conj() @ m.T - np.eye(dim))) > tol:
        raise ValueError("basis is not orthonormal")
    return m


# --------------------------------------------------------------------------
# Euler-form unitaries
# --------------------------------------------------------------------------

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class EulerParams:
    alpha: float
    beta: float
    gamma: float
    phi: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.as_tuple()):
            raise ValueError(f"Euler parameters must be finite: {self.as_tuple()}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.alpha, self.beta, self.gamma, self.phi)

    def reduced(self) -> "EulerParams":
        """Angles wrapped into [0, 2pi)."""
        return EulerParams(*(math.fmod(math.fmod(v, TWO_PI) + TWO_PI, TWO_PI) for v in self.as_tuple()))


def rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]])


def ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def euler_unitary(p: EulerParams) -> np.ndarray:
    """``exp(i phi) Rz(alpha) Ry(beta) Rz(gamma)``."""
    u = np.exp(1j * p.phi) * (rz(p.alpha) @ ry(p.beta) @ rz(p.gamma))
    u.setflags(write=False)
    return u


def euler_unitary_batch(params: np.ndarray) -> np.ndarray:
    """Vectorized ``euler_unitary`` over rows ``(alpha, beta, gamma, phi)``; shape (n, 2, 2)."""
    params = np.asarray(params, dtype=float)
    a, b, g, ph = params.T
    c, s = np.cos(b / 2), np.sin(b / 2)
    ea_m, ea_p = np.exp(-0.5j * a), np.exp(0.5j * a)
    eg_m, eg_p = np.exp(-0.5j * g), np.exp(0.5j * g)
    glob = np.exp(1j * ph)
    out = np.empty((params.shape[0], 2, 2), dtype=complex)
    out[:, 0, 0] = glob * ea_m * c * eg_m
    out[:, 0, 1] = -glob * ea_m * s * eg_p
    out[:, 1, 0] = glob * ea_p * s * eg_m
    out[:, 1, 1] = glob * ea_p * c * eg_p
    return out


# --------------------------------------------------------------------------
# Measurement
# --------------------------------------------------------------------------

def basis_probabilities(state: StateVector, basis_rows: np.ndarray) -> np.ndarray:
    """Born probabilities of ``state`` against an already-validated row basis."""
    return np.abs(basis_rows.conj() @ state.amps) ** 2


def sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    p = np.clip(probs, 0.0, None)
    return int(rng.choice(p.size, p=p / p.sum()))


def measure_in_basis(state: StateVector, basis: Sequence[StateVector],
                     rng: np.random.Generator) -> tuple[int, np.ndarray]:
    """Projective measurement; returns the sampled index and the probability vector."""
    rows = check_orthonormal_basis(basis)
    if rows.shape[1] != state.dim:
        raise ValueError(f"basis dimension {rows.shape[1]} does not match state dimension {state.dim}")
    probs = basis_probabilities(state, rows)
    return sample_index(probs, rng), probs
