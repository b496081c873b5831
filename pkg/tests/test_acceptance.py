"""The nine acceptance criteria, each at its stated tolerance and runtime budget.

Every test prints one ``[PASS]``/``[FAIL]`` line, visible even without ``-s``.
"""
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import relay_scenario
from test_geomtime import random_config
from qlocverify.adversary import AttackKind, AttackSpec, bernoulli_pass_rate, run_relay_attack
from qlocverify.coding import (
    PHI_CLASS,
    PHI_MINUS,
    PHI_PLUS,
    PSI_MINUS,
    PSI_PLUS,
    BsmMode,
    channel_capacity,
    codebook,
    decode,
    encode,
)
from qlocverify.geomtime import C, Location, Station, find_dominating_point, placement_sound
from qlocverify.masking import ensemble_fidelity_stats, mask, mask_uniformity, random_mask, realize, unmask
from qlocverify.protocol import ProtocolConfig, confidence_against_cloner, run_protocol
from qlocverify.qstate import StateVector, fidelity, make_rng


@pytest.fixture
def criterion(capsys):
    @contextmanager
    def run(number, title, budget):
        start = time.perf_counter()
        ok = False
        try:
            yield
            elapsed = time.perf_counter() - start
            ok = elapsed < budget
            assert ok, f"runtime {elapsed:.2f}s exceeds {budget}s"
        finally:
            elapsed = time.perf_counter() - start
            with capsys.disabled():
                print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({elapsed:.2f}s / {budget}s)")
    return run


def test_criterion_1_superdense_round_trip(criterion):
    with criterion(1, "superdense round trip", 1.0):
        rng = make_rng(1)
        for k in (2, 3):
            for m in range(2**k):
                res = decode(encode(m, k), BsmMode.FULL, rng)
                assert res.outcome == m
                expected = np.zeros(2**k)
                expected[m] = 1.0
                assert np.max(np.abs(res.probabilities - expected)) < 1e-9


def test_criterion_2_mask_inverse(criterion):
    with criterion(2, "mask inverse", 10.0):
        rng = make_rng(2)
        worst = 1.0
        for i in range(10_000):
            k = 2 + i % 2
            s = encode(int(rng.integers(0, 2**k)), k)
            kind = "euler" if i % 4 < 2 else "ht"
            gates = [realize(random_mask(kind, rng)) for _ in range(k)]
            worst = min(worst, fidelity(unmask(mask(s, gates), gates), s))
        assert worst > 1 - 1e-10


def test_criterion_3_non_orthogonality(criterion):
    with criterion(3, "masked pair fidelity in [0.15, 0.45]", 30.0):
        ht, _ = ensemble_fidelity_stats(2, "ht", 10_000, make_rng(3, 0), ht_length=5)
        eu, _ = ensemble_fidelity_stats(2, "euler", 10_000, make_rng(3, 1))
        print(f"  H/T mean {ht:.4f}, Euler mean {eu:.4f}")
        assert 0.15 <= ht <= 0.45
        assert 0.15 <= eu <= 0.45


def test_criterion_4_cloner_confidence(criterion):
    with criterion(4, "cloner confidence", 60.0):
        assert 1e-16 <= confidence_against_cloner(100, 0.7) <= 1e-15
        assert 1e-23 <= confidence_against_cloner(100, 0.6) <= 1e-22
        trials = 1_000_000
        p = 0.7**10
        rate = bernoulli_pass_rate(10, 0.7, trials, make_rng(4))
        assert abs(rate - p) <= 3 * math.sqrt(p * (1 - p) / trials)


def _honest_configs():
    rng = make_rng(5)
    for i in range(100):
        seed = int(rng.integers(0, 2**32))
        if i % 2 == 0:
            length = rng.uniform(50, 2000)
            stations = (Station("A", Location(0, 0)), Station("B", Location(length, 0)))
            v = Location(rng.uniform(0, 1) * length, 0)
        else:
            pts = np.array([[0, 0], [rng.uniform(200, 800), 0], [rng.uniform(0, 800), rng.uniform(200, 800)]])
            v = Location(*(rng.dirichlet([1, 1, 1]) @ pts))
            stations = tuple(Station(n, Location(*p)) for n, p in zip("ABD", pts))
        yield ProtocolConfig(stations, v, N=20, seed=seed, alphabet="bell" if len(stations) == 2 else "ghz")


def test_criterion_5_honest_completeness(criterion):
    with criterion(5, "honest completeness", 30.0):
        for cfg in _honest_configs():
            rep = run_protocol(cfg)
            assert rep.verdict == "Verified"
            assert rep.decoded == rep.sequence
            assert rep.max_rtt_error < 1e-12


def test_criterion_6_relay_soundness(criterion, line_stations):
    with criterion(6, "relay soundness", 30.0):
        rng = make_rng(6)
        for _ in range(100):
            stations, v, devices, standoff = relay_scenario(rng)
            cfg = ProtocolConfig(stations, v, N=5, seed=int(rng.integers(0, 2**32)),
                                 alphabet="bell" if len(stations) == 2 else "ghz")
            rep = run_relay_attack(cfg, AttackSpec(AttackKind.RELAY, device_locations=tuple(devices),
                                                   exclusion_radius=standoff))
            assert rep.verdict == "Rejected"
            assert max(rep.timing_excess.values()) > 0
        cfg = ProtocolConfig(line_stations, Location(150, 0), N=5)
        rep = run_relay_attack(cfg, AttackSpec(AttackKind.RELAY, device_locations=(Location(50, 0),)))
        assert abs(max(rep.timing_excess.values()) - 6.67e-7) < 1e-9


def test_criterion_7_placement_oracle(criterion):
    with criterion(7, "hull criterion agrees with 0.5 m grid", 60.0):
        rng = make_rng(7)
        for k in (2, 3):
            for _ in range(50):
                stations, v = random_config(rng, k)
                assert placement_sound(stations, v) == (find_dominating_point(stations, v, 0.5) is None)


def test_criterion_8_mask_uniformity(criterion):
    with criterion(8, "mask uniformity 0.25 +- 0.03", 60.0):
        probs = mask_uniformity(2, "euler", 100_000, make_rng(8))
        print("  mean probabilities", np.round(probs, 4))
        assert np.all(np.abs(probs - 0.25) <= 0.03)


def test_criterion_9_linear_optics(criterion, line_stations):
    with criterion(9, "linear optics mode", 10.0):
        rng = make_rng(9)
        words = codebook(2)
        for m, expected in [(PSI_PLUS, PSI_PLUS), (PSI_MINUS, PSI_MINUS), (PHI_PLUS, PHI_CLASS), (PHI_MINUS, PHI_CLASS)]:
            for _ in range(20):
                assert decode(StateVector(words[m]), "linear_optics", rng).outcome == expected
        assert abs(channel_capacity("linear_optics", 2) - math.log2(3)) <= 0.001
        for seed in range(20):
            cfg = ProtocolConfig(line_stations, Location(150, 0), N=30, bsm_mode="linear_optics", seed=seed)
            rep = run_protocol(cfg)
            assert rep.verdict == "Verified" and max(rep.sequence) == 2
