"""Per-station random masks and statistics of the masked codewords.

H/T words are written left to right and multiplied in that order, so the
rightmost symbol acts on the state first: ``"THH"`` realizes ``T @ H @ H``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .coding import codebook
from .qstate import (
    HADAMARD,
    I2,
    T_GATE,
    TWO_PI,
    EulerParams,
    StateVector,
    apply_local,
    as_gate,
    euler_unitary,
    euler_unitary_batch,
)

HT_GATES = {"H": HADAMARD, "T": T_GATE}


class MaskKind(str, enum.Enum):
    EULER = "euler"
    HT = "ht"


@dataclass(frozen=True)
class MaskSpec:
    kind: MaskKind
    euler: EulerParams | None = None
    ht_sequence: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", MaskKind(self.kind))
        if self.kind is MaskKind.EULER:
            if self.euler is None or self.ht_sequence is not None:
                raise ValueError("Euler mask needs euler params and no H/T sequence")
        else:
            if self.ht_sequence is None or self.euler is not None:
                raise ValueError("H/T mask needs an H/T sequence and no euler params")
            seq = tuple(self.ht_sequence)
            if not seq or any(s not in HT_GATES for s in seq):
                raise ValueError(f"H/T sequence must be a non-empty word over {{H, T}}, got {seq!r}")
            object.__setattr__(self, "ht_sequence", seq)

    @property
    def word(self) -> str:
        return "".join(self.ht_sequence or ())

    def to_dict(self) -> dict:
        if self.kind is MaskKind.EULER:
            return {"kind": "euler", "params": list(self.euler.as_tuple())}
        return {"kind": "ht", "word": self.word}


def identity_mask() -> MaskSpec:
    return MaskSpec(MaskKind.EULER, euler=EulerParams(0.0, 0.0, 0.0, 0.0))


def random_mask(kind: MaskKind | str, rng: np.random.Generator, ht_length: int = 5) -> MaskSpec:
    kind = MaskKind(kind)
    if kind is MaskKind.EULER:
        return MaskSpec(kind, euler=EulerParams(*rng.uniform(0.0, TWO_PI, size=4)))
    if ht_length < 1:
        raise ValueError(f"ht_length must be >= 1, got {ht_length}")
    picks = rng.integers(0, 2, size=ht_length)
    return MaskSpec(kind, ht_sequence=tuple("HT"[p] for p in picks))


def realize(spec: MaskSpec) -> np.ndarray:
    if spec.kind is MaskKind.EULER:
        return euler_unitary(spec.euler)
    g = I2
    for s in spec.ht_sequence:
        g = g @ HT_GATES[s]
    return as_gate(g)


def quantize(spec: MaskSpec, digits: int | None) -> MaskSpec:
    """The mask as received over a finite-precision classical link.

    Euler angles are rounded to ``digits`` decimals; H/T words are exact.
    ``None`` means exact transfer.
    """
    if digits is None or spec.kind is MaskKind.HT:
        return spec
    return MaskSpec(spec.kind, euler=EulerParams(*(round(v, digits) for v in spec.euler.as_tuple())))


def mask(state: StateVector, gates: Sequence[np.ndarray]) -> StateVector:
    """Apply ``gates[r]`` to qubit ``r``."""
    if len(gates) != state.num_qubits:
        raise ValueError(f"need one gate per qubit: {len(gates)} gates for {state.num_qubits} qubits")
    for r, g in enumerate(gates):
        state = apply_local(g, r, state)
    return state


def unmask(state: StateVector, gates: Sequence[np.ndarray]) -> StateVector:
    """Undo ``mask`` by applying each gate's conjugate transpose to its qubit."""
    if len(gates) != state.num_qubits:
        raise ValueError(f"need one gate per qubit: {len(gates)} gates for {state.num_qubits} qubits")
    for r, g in enumerate(gates):
        state = apply_local(np.asarray(g).conj().T, r, state)
    return state


# --------------------------------------------------------------------------
# Batched Monte Carlo
# --------------------------------------------------------------------------

def random_gates_batch(kind: MaskKind | str, n: int, rng: np.random.Generator,
                       ht_length: int = 5) -> np.ndarray:
    """``n`` random mask unitaries, shape (n, 2, 2), same laws as ``random_mask``."""
    kind = MaskKind(kind)
    if kind is MaskKind.EULER:
        return euler_unitary_batch(rng.uniform(0.0, TWO_PI, size=(n, 4)))
    if ht_length < 1:
        raise ValueError(f"ht_length must be >= 1, got {ht_length}")
    table = np.stack([HADAMARD, T_GATE])
    picks = rng.integers(0, 2, size=(n, ht_length))
    out = np.broadcast_to(I2, (n, 2, 2)).copy()
    for j in range(ht_length):
        out = out @ table[picks[:, j]]
    return out


def mask_batch(states: np.ndarray, gates: Sequence[np.ndarray]) -> np.ndarray:
    """Masks rows of ``states`` (n, 2**k) with per-row gates ``gates[r]`` of shape (n, 2, 2)."""
    n, dim = states.shape
    k = dim.bit_length() - 1
    psi = states.reshape((n,) + (2,) * k)
    for r, g in enumerate(gates):
        psi = np.moveaxis(psi, r + 1, -1)
        psi = np.einsum("nij,n...j->n...i", g, psi)
        psi = np.moveaxis(psi, -1, r + 1)
    return psi.reshape(n, dim)


def _check_k(k: int) -> None:
    if k not in (2, 3):
        raise ValueError(f"k must be 2 or 3, got {k}")


def _random_masked_codewords(k, kind, n, rng, ht_length):
    words = codebook(k)
    msgs = rng.integers(0, 2**k, size=n)
    gates = [random_gates_batch(kind, n, rng, ht_length) for _ in range(k)]
    return msgs, mask_batch(words[msgs], gates)


def ensemble_fidelity_stats(k: int, mask_kind: MaskKind | str, num_pairs: int,
                            rng: np.random.Generator, ht_length: int = 5) -> tuple[float, float | None]:
    """Mean and sample standard deviation of ``|<a|b>|**2`` over independent masked pairs.

    Each state of each pair gets its own random message and its own per-station
    masks. The standard deviation is ``None`` for a single pair.
    """
    _check_k(k)
    if num_pairs < 1:
        raise ValueError("num_pairs must be >= 1")
    _, a = _random_masked_codewords(k, mask_kind, num_pairs, rng, ht_length)
    _, b = _random_masked_codewords(k, mask_kind, num_pairs, rng, ht_length)
    f = np.abs(np.einsum("ni,ni->n", a.conj(), b)) ** 2
    std = float(np.std(f, ddof=1)) if num_pairs > 1 else None
    return float(np.mean(f)), std


def pair_fidelities_distinct(k: int, mask_kind: MaskKind | str, num_pairs: int,
                             rng: np.random.Generator, ht_length: int = 5) -> np.ndarray:
    """Fidelities of masked pairs whose underlying messages differ."""
    _check_k(k)
    words = codebook(k)
    m1 = rng.integers(0, 2**k, size=num_pairs)
    m2 = (m1 + rng.integers(1, 2**k, size=num_pairs)) % 2**k
    a = mask_batch(words[m1], [random_gates_batch(mask_kind, num_pairs, rng, ht_length) for _ in range(k)])
    b = mask_batch(words[m2], [random_gates_batch(mask_kind, num_pairs, rng, ht_length) for _ in range(k)])
    return np.abs(np.einsum("ni,ni->n", a.conj(), b)) ** 2


def mask_uniformity(k: int, mask_kind: MaskKind | str, num_trials: int,
                    rng: np.random.Generator, ht_length: int = 5) -> np.ndarray:
    """Mean probability vector of random masked codewords measured in the code basis."""
    _check_k(k)
    if num_trials < 1:
        raise ValueError("num_trials must be >= 1")
    _, states = _random_masked_codewords(k, mask_kind, num_trials, rng, ht_length)
    probs = np.abs(states @ codebook(k).conj().T) ** 2
    return probs.mean(axis=0)


def masked_probabilities(k: int, message: int, gates: Sequence[np.ndarray]) -> np.ndarray:
    """Code-basis probabilities of one masked codeword."""
    _check_k(k)
    words = codebook(k)
    state = mask(StateVector(words[message]), gates)
    return np.abs(words.conj() @ state.amps) ** 2


def blind_decode_success(k: int, mask_kind: MaskKind | str, num_trials: int,
                         rng: np.random.Generator, ht_length: int = 5) -> float:
    """Average probability that measuring a masked codeword without unmasking returns its message."""
    _check_k(k)
    msgs, states = _random_masked_codewords(k, mask_kind, num_trials, rng, ht_length)
    probs = np.abs(states @ codebook(k).conj().T) ** 2
    return float(np.mean(probs[np.arange(num_trials), msgs]))
