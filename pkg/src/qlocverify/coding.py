"""Superdense encoding onto Bell pairs and GHZ triples, and the matching decoders."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .qstate import (
    I2,
    I_SIGMA_Y,
    SIGMA_X,
    SIGMA_Z,
    StateVector,
    apply_local,
    basis_probabilities,
    bell_state,
    check_orthonormal_basis,
    sample_index,
)


class BsmMode(str, enum.Enum):
    FULL = "full"
    LINEAR_OPTICS = "linear_optics"


# 2-bit message -> operator on one qubit of |Phi+>.  Low bit flips, high bit phases.
BELL_OPERATORS = (I2, SIGMA_X, SIGMA_Z, I_SIGMA_Y)

# 3-bit message -> (op on qubit 0, op on qubit 1) applied to (|000> + |111>)/sqrt(2).
GHZ_OPERATORS = (
    (SIGMA_Z, SIGMA_Z),
    (I2, SIGMA_Z),
    (I_SIGMA_Y, SIGMA_Z),
    (SIGMA_X, SIGMA_Z),
    (I2, SIGMA_X),
    (SIGMA_Z, SIGMA_X),
    (SIGMA_X, SIGMA_X),
    (I_SIGMA_Y, SIGMA_X),
)

# Message values in the Bell code.
PHI_PLUS, PSI_PLUS, PHI_MINUS, PSI_MINUS = 0, 1, 2, 3

# Outcome tag for the unresolved {Phi+, Phi-} class under linear optics.
PHI_CLASS = "Phi"

# Three-symbol alphabet usable with a linear-optics BSM; the Phi class stands for Phi+.
LINEAR_OPTICS_CODEWORDS = (PHI_PLUS, PSI_PLUS, PSI_MINUS)


def _ghz_carrier() -> StateVector:
    amps = np.zeros(8, dtype=complex)
    amps[0] = amps[7] = 1 / math.sqrt(2)
    return StateVector(amps)


def encode_bell(msg: int, carrier: StateVector | None = None, qubit: int = 0) -> StateVector:
    """Encode a 2-bit message by a local operator on ``qubit`` of the carrier.

    Either party may do the encoding (``qubit`` 0 or 1); the resulting states
    agree up to global phase.
    """
    if not 0 <= msg <= 3:
        raise ValueError(f"Bell message must be in 0..3, got {msg}")
    if carrier is None:
        carrier = bell_state("PhiPlus")
    if carrier.num_qubits != 2:
        raise ValueError(f"Bell carrier must have 2 qubits, got {carrier.num_qubits}")
    return apply_local(BELL_OPERATORS[msg], qubit, carrier)


def encode_ghz(msg: int) -> StateVector:
    if not 0 <= msg <= 7:
        raise ValueError(f"GHZ message must be in 0..7, got {msg}")
    first, second = GHZ_OPERATORS[msg]
    return apply_local(second, 1, apply_local(first, 0, _ghz_carrier()))


def encode(msg: int, k: int) -> StateVector:
    if k == 2:
        return encode_bell(msg)
    if k == 3:
        return encode_ghz(msg)
    raise ValueError(f"k must be 2 or 3, got {k}")


@lru_cache(maxsize=None)
def _codebook(k: int) -> np.ndarray:
    rows = check_orthonormal_basis([encode(m, k) for m in range(2**k)])
    rows.setflags(write=False)
    return rows


def codebook(k: int) -> np.ndarray:
    """Decoding basis for ``k`` qubits: row ``m`` is the codeword for message ``m``."""
    return _codebook(k)


def codewords(k: int) -> list[StateVector]:
    return [StateVector(row) for row in _codebook(k)]


@dataclass(frozen=True)
class DecodeResult:
    outcome: int | str
    probabilities: np.ndarray

    @property
    def ambiguous(self) -> bool:
        return self.outcome == PHI_CLASS


def decode(state: StateVector, mode: BsmMode | str, rng: np.random.Generator) -> DecodeResult:
    """Measure ``state`` in the code basis.

    ``probabilities`` is always over the full code basis. In linear-optics mode
    the Phi+/Phi- outcomes merge into ``PHI_CLASS``.
    """
    mode = BsmMode(mode)
    k = state.num_qubits
    if k not in (2, 3):
        raise ValueError(f"no code basis for {k} qubits")
    probs = basis_probabilities(state, _codebook(k))
    if mode is BsmMode.FULL:
        return DecodeResult(sample_index(probs, rng), probs)
    if k != 2:
        raise ValueError("linear-optics BSM is only defined for Bell pairs")
    classes = np.array([probs[PSI_PLUS], probs[PSI_MINUS], probs[PHI_PLUS] + probs[PHI_MINUS]])
    outcome = (PSI_PLUS, PSI_MINUS, PHI_CLASS)[sample_index(classes, rng)]
    return DecodeResult(outcome, probs)


def linear_optics_symbol(outcome: int | str) -> int:
    """Map a linear-optics outcome back to a 3-symbol alphabet index."""
    if outcome == PHI_CLASS:
        return LINEAR_OPTICS_CODEWORDS.index(PHI_PLUS)
    return LINEAR_OPTICS_CODEWORDS.index(outcome)


def channel_capacity(mode: BsmMode | str, k: int) -> float:
    """Classical bits carried per entangled state."""
    mode = BsmMode(mode)
    if mode is BsmMode.FULL and k in (2, 3):
        return float(k)
    if mode is BsmMode.LINEAR_OPTICS and k == 2:
        return math.log2(len(LINEAR_OPTICS_CODEWORDS))
    raise ValueError(f"unsupported combination: mode={mode.value}, k={k}")
