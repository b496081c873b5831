"""Relay excess as a function of how far the adversary's devices sit from the claimed point.

Two stations 300 m apart, claim at 150 m. One device on the line and one offset
sideways, to show that the sideways direction is nearly invisible to a two-station
layout.
"""
from qlocverify.adversary import AttackKind, AttackSpec, run_relay_attack
from qlocverify.geomtime import C, Location, Station
from qlocverify.protocol import ProtocolConfig


def main():
    stations = (Station("A", Location(0, 0)), Station("B", Location(300, 0)))
    cfg = ProtocolConfig(stations, Location(150, 0), N=10)
    print(f"tolerance {cfg.timing_tol:.1e} s, c*tol = {C * cfg.timing_tol:.3f} m")
    print(f"{'standoff m':>10} {'on-line excess s':>18} {'verdict':>9} {'sideways excess s':>18} {'verdict':>9}")
    for d in (0.05, 0.1, 0.15, 0.3, 1.0, 10.0, 100.0):
        row = [f"{d:10.2f}"]
        for dev in (Location(150 - d, 0), Location(150, d)):
            rep = run_relay_attack(cfg, AttackSpec(AttackKind.RELAY, device_locations=(dev,)))
            row += [f"{max(rep.timing_excess.values()):18.3e}", f"{rep.verdict:>9}"]
        print(" ".join(row))


if __name__ == "__main__":
    main()
