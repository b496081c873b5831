import math

import numpy as np
import pytest

from conftest import kron_all
from qlocverify.coding import (
    GHZ_OPERATORS,
    LINEAR_OPTICS_CODEWORDS,
    PHI_CLASS,
    BsmMode,
    channel_capacity,
    codewords,
    decode,
    encode_bell,
    encode_ghz,
    linear_optics_symbol,
)
from qlocverify.qstate import I2, StateVector, bell_state, fidelity, ghz_basis_state, same_up_to_phase

R2 = 1 / math.sqrt(2)
GHZ0 = np.zeros(8, dtype=complex)
GHZ0[[0, 7]] = R2


def test_bell_encoding_table():
    assert same_up_to_phase(encode_bell(0), bell_state("PhiPlus"))
    assert same_up_to_phase(encode_bell(1), bell_state("PsiPlus"))
    assert same_up_to_phase(encode_bell(2), bell_state("PhiMinus"))
    assert same_up_to_phase(encode_bell(3), bell_state("PsiMinus"))


@pytest.mark.parametrize("msg", range(4))
def test_either_party_can_encode(msg):
    assert fidelity(encode_bell(msg, qubit=0), encode_bell(msg, qubit=1)) > 1 - 1e-12


def test_bell_encoding_errors():
    with pytest.raises(ValueError):
        encode_bell(4)
    with pytest.raises(ValueError):
        encode_bell(0, carrier=StateVector.from_bits("000"))


# Frozen from explicit 8x8 products kron(A, B, I) @ (|000> + |111>)/sqrt(2).
GHZ_EXPECTED = {
    0: {0: R2, 7: R2},
    1: {0: R2, 7: -R2},
    2: {4: -R2, 3: -R2},
    3: {4: R2, 3: -R2},
    4: {2: R2, 5: R2},
    5: {2: R2, 5: -R2},
    6: {6: R2, 1: R2},
    7: {6: -R2, 1: R2},
}


@pytest.mark.parametrize("msg", range(8))
def test_ghz_encoding_against_oracle(msg):
    a, b = GHZ_OPERATORS[msg]
    oracle = kron_all(a, b, I2) @ GHZ0
    expected = np.zeros(8, dtype=complex)
    for i, v in GHZ_EXPECTED[msg].items():
        expected[i] = v
    np.testing.assert_allclose(oracle, expected, atol=1e-15)
    np.testing.assert_allclose(encode_ghz(msg).amps, expected, atol=1e-12)


def test_ghz_example_states():
    assert same_up_to_phase(encode_ghz(4), StateVector.normalized([0, 0, 1, 0, 0, 1, 0, 0]))
    assert same_up_to_phase(encode_ghz(0), ghz_basis_state(0))


def test_ghz_encoding_is_bijection_onto_basis():
    basis = [ghz_basis_state(i) for i in range(8)]
    hits = sorted(int(np.argmax([fidelity(encode_ghz(m), b) for b in basis])) for m in range(8))
    assert hits == list(range(8))


@pytest.mark.parametrize("k", [2, 3])
def test_encodings_are_orthonormal(k):
    words = codewords(k)
    g = np.array([[np.vdot(a.amps, b.amps) for b in words] for a in words])
    np.testing.assert_allclose(g, np.eye(2**k), atol=1e-12)


@pytest.mark.parametrize("k,msg", [(2, m) for m in range(4)] + [(3, m) for m in range(8)])
def test_full_round_trip(k, msg, rng):
    state = encode_bell(msg) if k == 2 else encode_ghz(msg)
    res = decode(state, BsmMode.FULL, rng)
    assert res.outcome == msg
    assert abs(res.probabilities[msg] - 1) < 1e-9


def test_linear_optics_partition(rng):
    assert decode(bell_state("PhiMinus"), "linear_optics", rng).outcome == PHI_CLASS
    assert decode(bell_state("PhiPlus"), "linear_optics", rng).outcome == PHI_CLASS
    assert decode(bell_state("PsiPlus"), "linear_optics", rng).outcome == 1
    assert decode(bell_state("PsiMinus"), "linear_optics", rng).outcome == 3
    # projecting onto {Psi+, Psi-, span(Phi+, Phi-)}: any Phi superposition stays in the Phi class
    phis = StateVector.normalized(0.6 * bell_state("PhiPlus").amps + 0.8j * bell_state("PhiMinus").amps)
    assert all(decode(phis, "linear_optics", rng).outcome == PHI_CLASS for _ in range(50))


def test_linear_optics_three_symbol_alphabet():
    assert [linear_optics_symbol(o) for o in (PHI_CLASS, 1, 3)] == [0, 1, 2]
    assert LINEAR_OPTICS_CODEWORDS == (0, 1, 3)


def test_decode_errors(rng):
    with pytest.raises(ValueError):
        decode(ghz_basis_state(0), "linear_optics", rng)
    with pytest.raises(ValueError):
        decode(StateVector.from_bits("0"), "full", rng)


def test_channel_capacity():
    assert channel_capacity("full", 2) == 2.0
    assert channel_capacity("full", 3) == 3.0
    assert channel_capacity("linear_optics", 2) == pytest.approx(1.585, abs=1e-3)
    with pytest.raises(ValueError):
        channel_capacity("linear_optics", 3)
    with pytest.raises(ValueError):
        channel_capacity("full", 4)
