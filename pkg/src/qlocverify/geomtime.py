"""Planar geometry and light-time bookkeeping for reference stations and devices."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import ConvexHull

C = 299_792_458.0  # m/s
DEFAULT_TIMING_TOL = 1e-9  # s


@dataclass(frozen=True)
class Location:
    x: float
    y: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"location must be finite, got ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    def distance(self, other: "Location") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y}


@dataclass(frozen=True)
class Station:
    id: str
    loc: Location

    def to_dict(self) -> dict:
        return {"id": self.id, "x": self.loc.x, "y": self.loc.y}


@dataclass(frozen=True)
class TimingRecord:
    station_id: str
    expected_rtt: float
    observed_rtt: float

    def __post_init__(self):
        if self.expected_rtt < 0 or self.observed_rtt < 0:
            raise ValueError("round-trip times must be non-negative")

    @property
    def error(self) -> float:
        return self.observed_rtt - self.expected_rtt


@dataclass(frozen=True)
class TimingVerdict:
    passed: bool
    violators: list[str] = field(default_factory=list)


def check_stations(stations: Sequence[Station]) -> None:
    ids = [s.id for s in stations]
    if len(set(ids)) != len(ids):
        raise ValueError(f"station ids must be distinct: {ids}")
    locs = [(s.loc.x, s.loc.y) for s in stations]
    if len(set(locs)) != len(locs):
        raise ValueError("station locations must be distinct")


def light_time(a: Location, b: Location) -> float:
    return a.distance(b) / C


def expected_rtt(station: Station, v: Location, processing_delay: float = 0.0) -> float:
    """Round trip station -> v -> station, plus any known device processing delay."""
    return 2 * light_time(station.loc, v) + processing_delay


def check_betweenness(alice: Station, bob: Station, v: Location, tol: float) -> bool:
    if alice.loc == bob.loc:
        raise ValueError("stations must be distinct")
    slack = light_time(alice.loc, v) + light_time(bob.loc, v) - light_time(alice.loc, bob.loc)
    return abs(slack) <= tol


def placement_sound(stations: Sequence[Station], v: Location, tol: float = 1e-9) -> bool:
    """True when no other point is at least as close to every station as ``v``.

    In the Euclidean plane this holds exactly when ``v`` lies in the closed convex
    hull of the stations; ``tol`` is a distance slack in meters. For collinear
    stations the hull is a segment.
    """
    if len(stations) < 2:
        raise ValueError("need at least 2 stations")
    pts = np.array([s.loc.as_array() for s in stations])
    p = v.as_array()
    centered = pts - pts.mean(axis=0)
    scale = max(1.0, float(np.max(np.abs(centered))))
    sv = np.linalg.svd(centered, compute_uv=False)
    if len(pts) < 3 or sv[1] <= 1e-12 * scale * len(pts):
        # collinear: project onto the principal direction
        direction = np.linalg.svd(centered)[2][0]
        origin = pts.mean(axis=0)
        rel = p - origin
        off_line = abs(rel[0] * direction[1] - rel[1] * direction[0])
        t = pts @ direction
        s = p @ direction
        return off_line <= tol and t.min() - tol <= s <= t.max() + tol
    hull = ConvexHull(pts)
    # equations are unit outward normals: n.x + d <= 0 inside
    return bool(np.all(hull.equations[:, :2] @ p + hull.equations[:, 2] <= tol))


def find_dominating_point(stations: Sequence[Station], v: Location,
                          resolution: float = 0.5, tol: float = 1e-9) -> Location | None:
    """Grid search for a point other than ``v`` no farther than ``v`` from every station.

    The grid is centred on ``v`` with spacing ``resolution`` and covers the box
    that must contain any such point (the intersection of the bounding boxes of
    the discs through ``v`` centred on each station). Returns one dominating
    point, or ``None``.
    """
    if len(stations) < 2:
        raise ValueError("need at least 2 stations")
    pts = np.array([s.loc.as_array() for s in stations])
    p = v.as_array()
    radii = np.linalg.norm(pts - p, axis=1)
    lo = np.max(pts - radii[:, None], axis=0)
    hi = np.min(pts + radii[:, None], axis=0)
    ix = np.arange(math.floor((lo[0] - p[0]) / resolution), math.ceil((hi[0] - p[0]) / resolution) + 1)
    iy = np.arange(math.floor((lo[1] - p[1]) / resolution), math.ceil((hi[1] - p[1]) / resolution) + 1)
    xs = p[0] + ix * resolution
    for row_start in range(0, iy.size, 256):
        ys = p[1] + iy[row_start:row_start + 256] * resolution
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        grid = np.stack([gx.ravel(), gy.ravel()], axis=1)
        ok = np.ones(len(grid), dtype=bool)
        for s, r in zip(pts, radii):
            ok &= np.hypot(grid[:, 0] - s[0], grid[:, 1] - s[1]) <= r + tol
        ok &= np.hypot(grid[:, 0] - p[0], grid[:, 1] - p[1]) > resolution / 4
        hits = np.flatnonzero(ok)
        if hits.size:
            return Location(*grid[hits[0]])
    return None


def verify_timing(records: Sequence[TimingRecord], tol: float = DEFAULT_TIMING_TOL) -> TimingVerdict:
    """Pass iff every observed RTT is within ``tol`` of its expected value, early or late."""
    if not records:
        raise ValueError("need at least one timing record")
    violators = []
    for rec in records:
        if abs(rec.observed_rtt - rec.expected_rtt) > tol and rec.station_id not in violators:
            violators.append(rec.station_id)
    return TimingVerdict(not violators, violators)
