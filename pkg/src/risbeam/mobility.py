"""Random-direction user trajectories in the coverage plane."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .scenario import SystemConfig


@dataclass(frozen=True)
class Trajectory:
    """Piecewise-straight path; waypoints are (y, z) pairs in the plane x = x_A.

    ``directions[i]`` is the heading (rad, measured from +y towards +z) of
    segment i.
    """

    waypoints: np.ndarray = field(repr=False)
    directions: np.ndarray = field(repr=False)
    x_plane: float
    velocity: float
    seed: object = None

    @property
    def segment_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.waypoints, axis=0), axis=1)

    @property
    def cumulative(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.segment_lengths)])

    @property
    def total_length(self) -> float:
        return float(self.cumulative[-1])

    def points(self) -> np.ndarray:
        """Waypoints as 3-D points."""
        return np.column_stack([np.full(len(self.waypoints), self.x_plane), self.waypoints])

    def position_at(self, s: float) -> np.ndarray:
        return position_at(self, s)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["s", "y", "z"])
            for s, (y, z) in zip(self.cumulative, self.waypoints):
                w.writerow([repr(float(s)), repr(float(y)), repr(float(z))])


def _inward(angle: float, walls: tuple) -> bool:
    c, s = math.cos(angle), math.sin(angle)
    checks = {"y_lo": c > 0, "y_hi": c < 0, "z_lo": s > 0, "z_hi": s < 0}
    return all(checks[w] for w in walls)


def generate_trajectory(cfg: SystemConfig, total_length: float, velocity: float, seed=None) -> Trajectory:
    """Random-direction walk of exactly ``total_length`` metres.

    Start point uniform over the area, first heading uniform on [0, 2 pi).
    At each wall hit a new heading is drawn uniformly among the inward ones
    (rejection sampling; at corners this is the inward quarter-plane).
    """
    if not total_length > 0:
        raise ValueError("total_length must be positive")
    rng = np.random.default_rng(seed)
    _, y_A, z_A = cfg.area_center
    A_y, A_z = cfg.area_extent
    y_lo, y_hi, z_lo, z_hi = y_A - A_y / 2, y_A + A_y / 2, z_A - A_z / 2, z_A + A_z / 2

    p = np.array([rng.uniform(y_lo, y_hi), rng.uniform(z_lo, z_hi)])
    angle = rng.uniform(0, 2 * math.pi)
    points, dirs = [p.copy()], []
    remaining = float(total_length)
    while remaining > 0:
        d = np.array([math.cos(angle), math.sin(angle)])
        hits = []
        for axis, lo, hi in ((0, y_lo, y_hi), (1, z_lo, z_hi)):
            if d[axis] > 0:
                hits.append(((hi - p[axis]) / d[axis], axis, "hi"))
            elif d[axis] < 0:
                hits.append(((lo - p[axis]) / d[axis], axis, "lo"))
        t_wall = max(0.0, min(h[0] for h in hits))
        dirs.append(angle)
        if remaining <= t_wall:
            p = p + remaining * d
            points.append(p.copy())
            break
        p = p + t_wall * d
        walls = []
        for t, axis, side in hits:
            if t - t_wall <= 1e-9 * max(A_y, A_z):
                p[axis] = (y_lo, z_lo)[axis] if side == "lo" else (y_hi, z_hi)[axis]
                walls.append(("y_" if axis == 0 else "z_") + side)
        points.append(p.copy())
        remaining -= t_wall
        while True:
            angle = rng.uniform(0, 2 * math.pi)
            if _inward(angle, tuple(walls)):
                break
    wp = np.array(points)
    # drop zero-length segments produced by corner starts
    keep = np.concatenate([[True], np.linalg.norm(np.diff(wp, axis=0), axis=1) > 0])
    dirs_arr = np.array(dirs)[keep[1:]]
    return Trajectory(wp[keep], dirs_arr, cfg.area_center[0], velocity, seed)


def position_at(traj: Trajectory, s: float) -> np.ndarray:
    """3-D point at arc length ``s`` (linear interpolation along segments)."""
    cum = traj.cumulative
    if not 0 <= s <= cum[-1] * (1 + 1e-12):
        raise ValueError(f"arc length {s} outside [0, {cum[-1]}]")
    i = int(np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(cum) - 2))
    seg = cum[i + 1] - cum[i]
    w = 0.0 if seg == 0 else min(1.0, (s - cum[i]) / seg)
    yz = traj.waypoints[i] + w * (traj.waypoints[i + 1] - traj.waypoints[i])
    return np.array([traj.x_plane, yz[0], yz[1]])
