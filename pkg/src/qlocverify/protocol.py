"""Event-level simulation of one verification session.

All events sit on one global clock and are computed in closed form. Qubits for
entangled system ``i`` leave every station at ``i * symbol_period``. The masks
for system ``i`` are timed to reach the claimed location together,
``mask_guard`` seconds after the last of its qubits would arrive there.

Random streams derived from ``config.seed``:

    stream 0  shared secret sequence
    stream 1  masks and encoding-party coin flips
    stream 2  the device's measurements
    stream 3  reserved for adversaries
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .coding import (
    LINEAR_OPTICS_CODEWORDS,
    BsmMode,
    decode,
    encode_bell,
    encode_ghz,
    linear_optics_symbol,
)
from .geomtime import (
    C,
    DEFAULT_TIMING_TOL,
    Location,
    Station,
    TimingRecord,
    TimingVerdict,
    check_stations,
    expected_rtt,
    light_time,
    placement_sound,
    verify_timing,
)
from .masking import MaskKind, MaskSpec, mask, quantize, random_mask, realize, unmask
from .qstate import StateVector, make_rng

STREAM_SEQUENCE, STREAM_MASKS, STREAM_DEVICE, STREAM_ADVERSARY = 0, 1, 2, 3

# Cloning-fidelity bounds for 2- and 3-qubit codewords.
CLONING_FIDELITY = {2: 0.7, 3: 0.6}


class Alphabet(str, enum.Enum):
    BELL = "bell"
    GHZ = "ghz"

    @property
    def k(self) -> int:
        return 2 if self is Alphabet.BELL else 3


@dataclass(frozen=True)
class ProtocolConfig:
    stations: tuple[Station, ...]
    claimed_location: Location
    N: int = 100
    alphabet: Alphabet = Alphabet.BELL
    bsm_mode: BsmMode = BsmMode.FULL
    mask_kind: MaskKind = MaskKind.EULER
    ht_length: int = 5
    timing_tol: float = DEFAULT_TIMING_TOL
    quantum_channel_speed: float = 1.0
    seed: int = 0
    # where the responding device really is; None means at the claimed location
    device_location: Location | None = None
    processing_delay: float = 0.0
    symbol_period: float = 1e-6
    mask_guard: float = 1e-8
    # decimal digits of transmitted Euler angles; None is exact
    mask_digits: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "stations", tuple(self.stations))
        object.__setattr__(self, "alphabet", Alphabet(self.alphabet))
        object.__setattr__(self, "bsm_mode", BsmMode(self.bsm_mode))
        object.__setattr__(self, "mask_kind", MaskKind(self.mask_kind))
        check_stations(self.stations)
        if len(self.stations) != self.alphabet.k:
            raise ValueError(f"{self.alphabet.value} alphabet needs {self.alphabet.k} stations, "
                             f"got {len(self.stations)}")
        if self.bsm_mode is BsmMode.LINEAR_OPTICS and self.alphabet is not Alphabet.BELL:
            raise ValueError("linear-optics BSM is only supported for the Bell alphabet")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if not 0 < self.quantum_channel_speed <= 1:
            raise ValueError("quantum_channel_speed must be in (0, 1]")
        if self.timing_tol < 0 or self.processing_delay < 0:
            raise ValueError("timing_tol and processing_delay must be non-negative")
        if self.symbol_period <= 0 or self.mask_guard <= 0:
            raise ValueError("symbol_period and mask_guard must be positive")
        if self.ht_length < 1:
            raise ValueError("ht_length must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def k(self) -> int:
        return self.alphabet.k

    @property
    def device(self) -> Location:
        return self.device_location if self.device_location is not None else self.claimed_location

    @property
    def alphabet_size(self) -> int:
        if self.bsm_mode is BsmMode.LINEAR_OPTICS:
            return len(LINEAR_OPTICS_CODEWORDS)
        return 2**self.k

    def with_(self, **changes) -> "ProtocolConfig":
        return replace(self, **changes)


@dataclass
class TranscriptRecord:
    index: int
    message_sent: int
    message_decoded: int
    encoder_qubit: int
    masks: list[dict]
    qubit_send: float
    qubit_arrival: float
    mask_send: dict[str, float]
    mask_arrival: dict[str, float]
    decode_time: float
    response_receipt: dict[str, float]

    @property
    def correct(self) -> bool:
        return self.message_sent == self.message_decoded


@dataclass
class VerificationReport:
    sequence: list[int]
    decoded: list[int]
    records: list[TranscriptRecord]
    timing: list[TimingRecord]
    timing_verdict: TimingVerdict
    confidence_against_cloner: float
    reasons: list[str] = field(default_factory=list)

    @property
    def per_record_correct(self) -> list[bool]:
        return [r.correct for r in self.records]

    @property
    def sequence_match(self) -> bool:
        return self.sequence == self.decoded

    @property
    def verified(self) -> bool:
        return self.sequence_match and self.timing_verdict.passed

    @property
    def verdict(self) -> str:
        return "Verified" if self.verified else "Rejected"

    @property
    def max_rtt_error(self) -> float:
        return max(abs(t.error) for t in self.timing)

    def to_dict(self, transcript: bool = False) -> dict:
        out = {
            "verdict": self.verdict,
            "reasons": list(self.reasons),
            "sequence_match": self.sequence_match,
            "num_correct": sum(self.per_record_correct),
            "num_records": len(self.records),
            "sequence": list(self.sequence),
            "decoded": list(self.decoded),
            "timing": [asdict(t) for t in self.timing],
            "violating_stations": list(self.timing_verdict.violators),
            "confidence_against_cloner": self.confidence_against_cloner,
        }
        if transcript:
            out["transcript"] = [asdict(r) for r in self.records]
        return out


# --------------------------------------------------------------------------
# Steps 1 and 3 helpers
# --------------------------------------------------------------------------

def generate_sequence(N: int, bits_per_symbol: int, rng: np.random.Generator) -> np.ndarray:
    """``N * bits_per_symbol`` independent fair bits."""
    if N < 1 or bits_per_symbol < 1:
        raise ValueError("N and bits_per_symbol must be >= 1")
    return rng.integers(0, 2, size=N * bits_per_symbol, dtype=np.uint8)


def bits_to_symbols(bits: np.ndarray, bits_per_symbol: int) -> list[int]:
    """Group bits MSB-first into symbols: ``[0, 1]`` -> message 1."""
    groups = np.asarray(bits).reshape(-1, bits_per_symbol)
    weights = 1 << np.arange(bits_per_symbol - 1, -1, -1)
    return [int(v) for v in groups @ weights]


def schedule_classical_sends(stations: Sequence[Station], v: Location, qubit_arrival_time: float,
                             guard: float = 1e-8) -> dict[str, float]:
    """Send times so every station's message reaches ``v`` at ``qubit_arrival_time + guard``."""
    if guard <= 0:
        raise ValueError("guard must be positive so masks trail the qubits")
    target = qubit_arrival_time + guard
    return {s.id: target - light_time(s.loc, v) for s in stations}


def confidence_against_cloner(N: int, F_c: float) -> float:
    """Probability that a cloning adversary answers all ``N`` symbols correctly: ``F_c**N``."""
    if not 0 <= F_c <= 1:
        raise ValueError(f"F_c must be in [0, 1], got {F_c}")
    if N < 1:
        raise ValueError("N must be >= 1")
    return F_c**N


# --------------------------------------------------------------------------
# Quantum channel
# --------------------------------------------------------------------------

class ChannelEmpty(RuntimeError):
    pass


class QuantumChannel:
    """Carries states from stations to one receiver.

    A state can be taken out exactly once; there is no way to read it without
    removing it.
    """

    def __init__(self):
        self._slots: dict[int, StateVector] = {}

    def send(self, index: int, state: StateVector) -> None:
        if index in self._slots:
            raise ValueError(f"slot {index} already occupied")
        self._slots[index] = state

    def receive(self, index: int) -> StateVector:
        try:
            return self._slots.pop(index)
        except KeyError:
            raise ChannelEmpty(f"no state in slot {index}") from None

    def __len__(self):
        return len(self._slots)


# --------------------------------------------------------------------------
# Session
# --------------------------------------------------------------------------

Tamper = Callable[[int, QuantumChannel, list[np.ndarray], np.random.Generator], StateVector]


def _encode(config: ProtocolConfig, symbol: int, rng: np.random.Generator) -> tuple[StateVector, int]:
    if config.alphabet is Alphabet.GHZ:
        return encode_ghz(symbol), 0
    message = LINEAR_OPTICS_CODEWORDS[symbol] if config.bsm_mode is BsmMode.LINEAR_OPTICS else symbol
    # who applies the encoding operator: Alice (qubit 0) or Bob (qubit 1)
    party = int(rng.integers(0, 2))
    return encode_bell(message, qubit=party), party


def _to_symbol(config: ProtocolConfig, outcome) -> int:
    if config.bsm_mode is BsmMode.LINEAR_OPTICS:
        return linear_optics_symbol(outcome)
    return int(outcome)


def draw_sequence(config: ProtocolConfig) -> tuple[np.ndarray, list[int]]:
    """The shared secret for ``config``: raw bits (empty for 3-symbol runs) and symbols."""
    rng = make_rng(config.seed, STREAM_SEQUENCE)
    if config.bsm_mode is BsmMode.LINEAR_OPTICS:
        symbols = [int(s) for s in rng.integers(0, len(LINEAR_OPTICS_CODEWORDS), size=config.N)]
        return np.zeros(0, dtype=np.uint8), symbols
    bits = generate_sequence(config.N, config.k, rng)
    return bits, bits_to_symbols(bits, config.k)


def simulate(config: ProtocolConfig, tamper: Tamper | None = None,
             extra_rtt: dict[str, float] | None = None) -> VerificationReport:
    """Run Steps 1-5; ``tamper`` and ``extra_rtt`` let attack models replace pieces.

    ``tamper`` supplies the state the device measures in place of the channel
    contents. ``extra_rtt`` adds per-station response latency on top of the
    device's own geometry.
    """
    if not placement_sound(config.stations, config.claimed_location):
        warnings.warn("claimed location is not soundly covered by the stations", stacklevel=2)

    _, symbols = draw_sequence(config)
    mask_rng = make_rng(config.seed, STREAM_MASKS)
    device_rng = make_rng(config.seed, STREAM_DEVICE)
    adversary_rng = make_rng(config.seed, STREAM_ADVERSARY)

    v, dev = config.claimed_location, config.device
    q_speed = config.quantum_channel_speed * C
    channel = QuantumChannel()
    records = []
    for i, symbol in enumerate(symbols):
        # Steps 1-2: encode, mask, launch
        state, party = _encode(config, symbol, mask_rng)
        specs: list[MaskSpec] = [random_mask(config.mask_kind, mask_rng, config.ht_length)
                                 for _ in config.stations]
        channel.send(i, mask(state, [realize(s) for s in specs]))
        t_q = i * config.symbol_period
        qubit_arrival = max(t_q + s.loc.distance(v) / q_speed for s in config.stations)

        # Step 3: synchronized classical masks
        sends = schedule_classical_sends(config.stations, v, qubit_arrival, config.mask_guard)
        mask_arrival_dev = {s.id: sends[s.id] + light_time(s.loc, dev) for s in config.stations}

        # Step 4: device waits for every qubit and every mask, then decodes and broadcasts
        qubits_at_dev = max(t_q + s.loc.distance(dev) / q_speed for s in config.stations)
        decode_time = max(qubits_at_dev, *mask_arrival_dev.values()) + config.processing_delay
        received = [realize(quantize(s, config.mask_digits)) for s in specs]
        if tamper is None:
            incoming = channel.receive(i)
        else:
            incoming = tamper(i, channel, received, adversary_rng)
        outcome = decode(unmask(incoming, received), config.bsm_mode, device_rng).outcome
        receipts = {s.id: decode_time + light_time(dev, s.loc) + (extra_rtt or {}).get(s.id, 0.0)
                    for s in config.stations}
        records.append(TranscriptRecord(
            index=i,
            message_sent=symbol,
            message_decoded=_to_symbol(config, outcome),
            encoder_qubit=party,
            masks=[s.to_dict() for s in specs],
            qubit_send=t_q,
            qubit_arrival=qubit_arrival,
            mask_send=sends,
            mask_arrival={s.id: sends[s.id] + light_time(s.loc, v) for s in config.stations},
            decode_time=decode_time,
            response_receipt=receipts,
        ))

    # Step 5: each station checks the returned sequence and its round-trip times
    timing = []
    all_timing = []
    for s in config.stations:
        exp = expected_rtt(s, v, config.processing_delay)
        observed = [r.response_receipt[s.id] - r.mask_send[s.id] for r in records]
        per_index = [TimingRecord(s.id, exp, max(o, 0.0)) for o in observed]
        all_timing.extend(per_index)
        timing.append(max(per_index, key=lambda t: abs(t.error)))
    verdict = verify_timing(all_timing, config.timing_tol)

    decoded = [r.message_decoded for r in records]
    reasons = []
    if decoded != symbols:
        reasons.append("sequence")
    if not verdict.passed:
        reasons.append("timing")
    F_c = CLONING_FIDELITY[config.k]
    return VerificationReport(
        sequence=symbols,
        decoded=decoded,
        records=records,
        timing=timing,
        timing_verdict=verdict,
        confidence_against_cloner=confidence_against_cloner(config.N, F_c),
        reasons=reasons,
    )


def run_protocol(config: ProtocolConfig) -> VerificationReport:
    """Honest session: the device sits at ``config.device`` and follows the protocol."""
    return simulate(config)


def one_way_slack(tol: float) -> float:
    """Distance slack in meters that a round-trip tolerance ``tol`` allows."""
    return C * tol / 2


def rtt_excess_for_offset(distance: float) -> float:
    """Extra round-trip time of a device ``distance`` meters farther from a station."""
    return 2 * distance / C

