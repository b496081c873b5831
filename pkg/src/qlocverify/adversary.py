"""Cloning and relay adversaries run against the verification session."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .coding import LINEAR_OPTICS_CODEWORDS, BsmMode, codebook
from .geomtime import Location, Station, light_time, placement_sound
from .masking import mask as apply_mask
from .masking import unmask
from .protocol import ProtocolConfig, QuantumChannel, confidence_against_cloner, simulate
from .qstate import StateVector, make_rng

STREAM_CLONER_TRIALS = 4


class AttackKind(str, enum.Enum):
    CLONER = "cloner"
    RELAY = "relay"


class ClonerModel(str, enum.Enum):
    BERNOULLI = "bernoulli"
    STATE_LEVEL = "state_level"


@dataclass(frozen=True)
class AttackSpec:
    kind: AttackKind
    F_c: float | None = None
    device_locations: tuple[Location, ...] = ()
    exclusion_radius: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", AttackKind(self.kind))
        object.__setattr__(self, "device_locations", tuple(self.device_locations))
        if self.kind is AttackKind.CLONER:
            if self.F_c is None or not 0 <= self.F_c <= 1:
                raise ValueError("cloner attack needs F_c in [0, 1]")
        elif not self.device_locations:
            raise ValueError("relay attack needs at least one device")
        elif self.exclusion_radius < 0:
            raise ValueError("exclusion_radius must be non-negative")

    def check_against(self, claimed: Location) -> None:
        """Every relay device must stay outside the exclusion radius and off the claimed point."""
        for d in self.device_locations:
            gap = d.distance(claimed)
            if gap < 1e-12 or gap < self.exclusion_radius:
                raise ValueError(f"relay device at ({d.x}, {d.y}) is within the exclusion radius")


@dataclass
class AttackReport:
    passed: bool
    per_record_correct: list[bool]
    timing_excess: dict[str, float]
    analytic_pass_probability: float
    empirical_pass_rate: float | None = None
    trials: int = 0
    verdict: str = "Rejected"
    reasons: list[str] = field(default_factory=list)
    decode_point: Location | None = None

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "verdict": self.verdict,
            "reasons": list(self.reasons),
            "num_correct": sum(self.per_record_correct),
            "num_records": len(self.per_record_correct),
            "timing_excess": dict(self.timing_excess),
            "max_timing_excess": max(self.timing_excess.values(), default=0.0),
            "analytic_pass_probability": self.analytic_pass_probability,
            "empirical_pass_rate": self.empirical_pass_rate,
            "trials": self.trials,
            "decode_point": None if self.decode_point is None else self.decode_point.to_dict(),
        }


# --------------------------------------------------------------------------
# Cloning
# --------------------------------------------------------------------------

def bernoulli_pass_rate(N: int, F_c: float, trials: int, rng: np.random.Generator,
                        chunk: int = 100_000) -> float:
    """Fraction of ``trials`` in which all ``N`` symbols independently survive with probability ``F_c``."""
    passes = 0
    done = 0
    while done < trials:
        n = min(chunk, trials - done)
        passes += int(np.count_nonzero(np.all(rng.random((n, N)) < F_c, axis=1)))
        done += n
    return passes / trials


def random_orthogonal_state(state: StateVector, rng: np.random.Generator) -> StateVector:
    """Haar-random pure state in the orthogonal complement of ``state``."""
    z = rng.normal(size=state.dim) + 1j * rng.normal(size=state.dim)
    z -= np.vdot(state.amps, z) * state.amps
    return StateVector.normalized(z)


def state_level_clone(F_c: float):
    """Tamper hook: the device gets the true masked state with probability ``F_c``,
    otherwise a random state orthogonal to it."""

    def tamper(i: int, channel: QuantumChannel, _masks, rng: np.random.Generator) -> StateVector:
        original = channel.receive(i)
        if rng.random() < F_c:
            return original
        return random_orthogonal_state(original, rng)

    return tamper


def bernoulli_clone(F_c: float, alphabet: Sequence[int]):
    """Tamper hook: each symbol survives with probability ``F_c``; otherwise the device
    receives another codeword from ``alphabet``, masked the same way."""

    def tamper(i: int, channel: QuantumChannel, masks, rng: np.random.Generator) -> StateVector:
        original = channel.receive(i)
        if rng.random() < F_c:
            return original
        plain = unmask(original, masks)
        words = codebook(plain.num_qubits)
        true_msg = int(np.argmax(np.abs(words.conj() @ plain.amps)))
        others = [m for m in alphabet if m != true_msg]
        wrong = others[int(rng.integers(0, len(others)))]
        return apply_mask(StateVector(words[wrong]), masks)

    return tamper


def run_cloner_attack(config: ProtocolConfig, F_c: float,
                      model: ClonerModel | str = ClonerModel.BERNOULLI,
                      trials: int = 0) -> AttackReport:
    """Adversary answers from pre-positioned clones, so timing is honest.

    One session is simulated in full. ``trials`` additional independent sessions
    estimate the empirical pass rate: Bernoulli trials are drawn per symbol,
    state-level trials each rerun the whole pipeline with a fresh seed.
    """
    if not 0 <= F_c <= 1:
        raise ValueError(f"F_c must be in [0, 1], got {F_c}")
    model = ClonerModel(model)
    if model is ClonerModel.BERNOULLI:
        alphabet = (LINEAR_OPTICS_CODEWORDS if config.bsm_mode is BsmMode.LINEAR_OPTICS
                    else range(2**config.k))
        hook = bernoulli_clone(F_c, list(alphabet))
    else:
        hook = state_level_clone(F_c)
    report = simulate(config, tamper=hook)
    empirical = None
    if trials > 0:
        if model is ClonerModel.BERNOULLI:
            empirical = bernoulli_pass_rate(config.N, F_c, trials, make_rng(config.seed, STREAM_CLONER_TRIALS))
        else:
            empirical = state_level_pass_rate(config, F_c, trials)
    return AttackReport(
        passed=report.verified,
        per_record_correct=report.per_record_correct,
        timing_excess={t.station_id: max(0.0, t.error) for t in report.timing},
        analytic_pass_probability=confidence_against_cloner(config.N, F_c),
        empirical_pass_rate=empirical,
        trials=trials,
        verdict=report.verdict,
        reasons=report.reasons,
    )


def state_level_pass_rate(config: ProtocolConfig, F_c: float, trials: int) -> float:
    """Pass rate of full sessions against the state-level cloner; trial ``t`` uses seed stream ``(seed, 5, t)``."""
    hook = state_level_clone(F_c)
    passes = 0
    for t in range(trials):
        seed = int(make_rng(config.seed, 5, t).integers(0, 2**63))
        passes += simulate(config.with_(seed=seed), tamper=hook).verified
    return passes / trials


# --------------------------------------------------------------------------
# Relay
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RelayTiming:
    decode_point: Location
    rtt: dict[str, float]
    excess: dict[str, float]

    @property
    def max_excess(self) -> float:
        return max(self.excess.values())


def relay_attack_delay(stations: Sequence[Station], devices: Sequence[Location], v: Location) -> RelayTiming:
    """Best round trips a relay adversary can achieve when all qubits must meet at one device.

    Each station's qubit is caught by the device nearest that station and
    forwarded at light speed to the decode point ``P``; the answer goes from
    ``P`` straight back. Responses that would be early are padded, so excesses
    are non-negative. ``P`` ranges over the devices and is chosen to minimize
    the largest excess.
    """
    if not devices:
        raise ValueError("need at least one relay device")
    catcher = {s.id: min(devices, key=lambda d: d.distance(s.loc)) for s in stations}
    best = None
    for p in devices:
        rtt = {s.id: light_time(s.loc, catcher[s.id]) + light_time(catcher[s.id], p) + light_time(p, s.loc)
               for s in stations}
        excess = {s.id: max(0.0, rtt[s.id] - 2 * light_time(s.loc, v)) for s in stations}
        cand = RelayTiming(p, rtt, excess)
        if best is None or cand.max_excess < best.max_excess:
            best = cand
    return best


def run_relay_attack(config: ProtocolConfig, spec: AttackSpec) -> AttackReport:
    """Run a session where the adversary decodes perfectly at its best device but answers late."""
    if spec.kind is not AttackKind.RELAY:
        raise ValueError("run_relay_attack needs a relay spec")
    spec.check_against(config.claimed_location)
    if not placement_sound(config.stations, config.claimed_location):
        raise ValueError("station placement does not soundly cover the claimed location")
    relay = relay_attack_delay(config.stations, spec.device_locations, config.claimed_location)
    report = simulate(config, extra_rtt=relay.excess)
    return AttackReport(
        passed=report.verified,
        per_record_correct=report.per_record_correct,
        timing_excess=relay.excess,
        analytic_pass_probability=1.0 if relay.max_excess <= config.timing_tol else 0.0,
        verdict=report.verdict,
        reasons=report.reasons,
        decode_point=relay.decode_point,
    )

