import numpy as np
import pytest

from qlocverify.geomtime import Location, Station


def kron_all(*ops):
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def line_stations():
    return (Station("A", Location(0.0, 0.0)), Station("B", Location(300.0, 0.0)))


@pytest.fixture
def triangle_stations():
    return (Station("A", Location(0.0, 0.0)), Station("B", Location(400.0, 0.0)),
            Station("D", Location(200.0, 350.0)))


def relay_scenario(rng, timing_tol=1e-9, max_standoff=150.0):
    """Random sound station layout, claimed point and relay devices outside a standoff.

    Half the draws are two stations on a line with the claim strictly between them;
    the rest are non-degenerate triangles with the claim well inside. The standoff is
    drawn from [c * timing_tol, max_standoff] and every device sits at least that far
    from the claim. Returns (stations, claim, devices, standoff).
    """
    from qlocverify.geomtime import C

    standoff = rng.uniform(C * timing_tol, max_standoff)
    if rng.random() < 0.5:
        length = rng.uniform(100, 1000)
        stations = (Station("A", Location(0.0, 0.0)), Station("B", Location(length, 0.0)))
        v = Location(rng.uniform(0.1, 0.9) * length, 0.0)
        devices = []
        for _ in range(rng.integers(1, 4)):
            x = v.x + rng.choice([-1.0, 1.0]) * (standoff + rng.uniform(0, 300))
            devices.append(Location(x, 0.0))
        return stations, v, devices, standoff
    while True:
        pts = rng.uniform(0, 600, size=(3, 2))
        e1, e2 = pts[1] - pts[0], pts[2] - pts[0]
        w = rng.dirichlet([2, 2, 2])
        if abs(e1[0] * e2[1] - e1[1] * e2[0]) > 0.1 * 600 * 600 / 2 and w.min() >= 0.1:
            break
    stations = tuple(Station(f"S{i}", Location(*p)) for i, p in enumerate(pts))
    v = Location(*(w @ pts))
    devices = []
    for _ in range(rng.integers(1, 4)):
        ang, r = rng.uniform(0, 2 * np.pi), standoff + rng.uniform(0, 300)
        devices.append(Location(v.x + r * np.cos(ang), v.y + r * np.sin(ang)))
    return stations, v, devices, standoff
