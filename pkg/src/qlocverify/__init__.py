"""Simulation of quantum location verification: superdense-coded, randomly
masked entangled states, timed decode-and-respond, and attack models."""

from .adversary import (
    AttackKind,
    AttackReport,
    AttackSpec,
    ClonerModel,
    relay_attack_delay,
    run_cloner_attack,
    run_relay_attack,
)
from .coding import BsmMode, DecodeResult, channel_capacity, decode, encode_bell, encode_ghz
from .geomtime import (
    C,
    Location,
    Station,
    TimingRecord,
    check_betweenness,
    expected_rtt,
    light_time,
    placement_sound,
    verify_timing,
)
from .masking import (
    MaskKind,
    MaskSpec,
    ensemble_fidelity_stats,
    mask,
    mask_uniformity,
    random_mask,
    realize,
    unmask,
)
from .protocol import (
    Alphabet,
    ProtocolConfig,
    VerificationReport,
    confidence_against_cloner,
    generate_sequence,
    run_protocol,
    schedule_classical_sends,
)
from .qstate import (
    EulerParams,
    StateVector,
    apply_local,
    bell_state,
    euler_unitary,
    fidelity,
    ghz_basis_state,
    make_rng,
    measure_in_basis,
)

__version__ = "0.1.0"
