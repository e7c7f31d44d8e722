"""Codeword phase profiles, hierarchical codebooks and tracking neighborhoods.

Every codeword here has a separable phase profile
``psi[q_x*side + q_y] = px[q_x] + py[q_y]``.  Levels store the two 1-D
profiles, which keeps memory at O(M*sqrt(Q)) and lets the gain of all
codewords be evaluated as ``sum((Ex @ E) * Ey, axis=1)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .analytic import Regime, classify_regime
from .scenario import (SubareaGrid, SystemConfig, aod_to_point, direction_cosines,
                       factorize_level, level_grid, partition_grid)

TWO_PI = 2 * math.pi
# fraction of the natural (3 dB) beam width subtracted from the angular
# extent before it is turned into curvature
_NATURAL_WIDTH = 0.886


def _axes(cfg: SystemConfig):
    q = np.arange(cfg.side)
    centered = q - (cfg.side - 1) / 2
    return q * cfg.unit_cell_len_x, q * cfg.unit_cell_len_y, centered * cfg.unit_cell_len_x, centered * cfg.unit_cell_len_y


def incident_cosines(cfg: SystemConfig) -> np.ndarray:
    """(u_x, u_y) of the BS as seen from the RIS."""
    return direction_cosines(cfg.bs_position)[0]


@dataclass(frozen=True)
class Codeword:
    level: int
    index: tuple  # (m_x, m_y)
    px: np.ndarray = field(repr=False)
    py: np.ndarray = field(repr=False)
    kind: str = "narrow"
    target: int | None = None

    @property
    def phases(self) -> np.ndarray:
        """Full length-Q profile wrapped to [0, 2 pi)."""
        return np.mod(self.px[:, None] + self.py[None, :], TWO_PI).ravel()


def _linear_profiles(cfg: SystemConfig, u_steer, u_inc):
    k = TWO_PI / cfg.wavelength
    x, y, _, _ = _axes(cfg)
    return -k * (u_inc[0] + u_steer[0]) * x, -k * (u_inc[1] + u_steer[1]) * y


def narrow_beam_codeword(cfg: SystemConfig, steer, incident=None, level: int = 0,
                         index=(0, 0), target=None) -> Codeword:
    """Phase profile adding the reflected field coherently towards ``steer``.

    ``steer`` and ``incident`` are (theta, phi) pairs; ``incident`` defaults
    to the BS direction.
    """
    u_s = np.array([math.sin(steer[0]) * math.cos(steer[1]), math.sin(steer[0]) * math.sin(steer[1])])
    if incident is None:
        u_i = incident_cosines(cfg)
    else:
        u_i = np.array([math.sin(incident[0]) * math.cos(incident[1]),
                        math.sin(incident[0]) * math.sin(incident[1])])
    px, py = _linear_profiles(cfg, u_s, u_i)
    return Codeword(level, tuple(index), px, py, "narrow", target)


def subarea_outline(cfg: SystemConfig, grid: SubareaGrid, m: int, n: int = 9) -> np.ndarray:
    """Points sampled along the boundary of subarea ``m``."""
    (y0, y1), (z0, z1) = grid.bounds(m)
    ys, zs = np.linspace(y0, y1, n), np.linspace(z0, z1, n)
    pts = [(y, z) for y in ys for z in (z0, z1)] + [(y, z) for z in zs for y in (y0, y1)]
    pts = np.array(pts)
    return np.column_stack([np.full(len(pts), cfg.area_center[0]), pts])


def angular_extent(cfg: SystemConfig, grid: SubareaGrid, m: int):
    """Bounding box (lo, hi) of the subarea's image in direction-cosine space."""
    U = direction_cosines(subarea_outline(cfg, grid, m))
    return U.min(axis=0), U.max(axis=0)


def wide_beam_codeword(cfg: SystemConfig, grid: SubareaGrid, m: int, incident=None,
                       curvature_scale: float = 1.0, level: int | None = None) -> Codeword:
    """Linear steering plus a separable quadratic (defocusing) profile.

    The beam is steered at the midpoint of the subarea's direction-cosine
    bounding box.  Along each axis the curvature ``beta`` spreads the beam
    over the box width ``du`` minus the natural beam width, using
    ``beta = spread / D`` with aperture length ``D``.  A subarea whose
    extent does not exceed the natural beam width gets a narrow beam at
    its center.
    """
    level = grid.level if level is None else level
    lo, hi = angular_extent(cfg, grid, m)
    aperture = np.array([cfg.side * cfg.unit_cell_len_x, cfg.side * cfg.unit_cell_len_y])
    natural = _NATURAL_WIDTH * cfg.wavelength / aperture
    spread = np.maximum(0.0, hi - lo - natural) * curvature_scale
    index = grid.unravel(m)
    if not np.any(spread > 0):
        return narrow_beam_codeword(cfg, aod_to_point(grid.centers[m]), incident, level, index, m)
    u_i = incident_cosines(cfg) if incident is None else np.array(
        [math.sin(incident[0]) * math.cos(incident[1]), math.sin(incident[0]) * math.sin(incident[1])])
    px, py = _linear_profiles(cfg, (lo + hi) / 2, u_i)
    beta = spread / aperture
    _, _, xc, yc = _axes(cfg)
    px = px + math.pi / cfg.wavelength * beta[0] * xc**2
    py = py + math.pi / cfg.wavelength * beta[1] * yc**2
    return Codeword(level, index, px, py, "wide", m)


def axis_pattern(cfg: SystemConfig, profile: np.ndarray, u: np.ndarray, u_inc: float, axis: int = 0):
    """|sum_q exp(j(profile_q + k (u_inc + u) x_q))|^2 along one RIS axis."""
    k = TWO_PI / cfg.wavelength
    x = _axes(cfg)[axis]
    return np.abs(np.exp(1j * (profile[None, :] + k * np.outer(u_inc + np.asarray(u), x))).sum(axis=1)) ** 2


def power_in_subarea(cfg: SystemConfig, cw: Codeword, grid: SubareaGrid, m: int,
                     n: int = 1201) -> float:
    """Fraction of the reflected power (pure LoS) falling inside subarea ``m``.

    Radiant power is integrated over direction-cosine space (projected
    solid angle) on an ``n`` x ``n`` grid covering the unit disk.
    """
    u_i = incident_cosines(cfg)
    u = np.linspace(-1, 1, n)
    Px = axis_pattern(cfg, cw.px, u, u_i[0], 0)
    Py = axis_pattern(cfg, cw.py, u, u_i[1], 1)
    ux, uy = np.meshgrid(u, u, indexing="ij")
    rho2 = ux**2 + uy**2
    visible = rho2 < 1
    P = np.outer(Px, Py) * visible
    x_A = cfg.area_center[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = x_A / ux
        uz = np.sqrt(np.clip(1 - rho2, 0, None))
        y, z = t * uy, t * uz
    (y0, y1), (z0, z1) = grid.bounds(m)
    hit = visible & (t > 0) & (y >= y0) & (y <= y1) & (z >= z0) & (z <= z1)
    return float(P[hit].sum() / P.sum())


@dataclass(eq=False)
class CodebookLevel:
    """All codewords of one level, stored as stacked 1-D profiles."""

    level: int
    grid: SubareaGrid
    regime: Regime
    px: np.ndarray = field(repr=False)
    py: np.ndarray = field(repr=False)
    kinds: tuple = field(repr=False, default=())

    @property
    def size(self) -> int:
        return self.px.shape[0]

    def codeword(self, m: int) -> Codeword:
        return self._codewords[m]

    @cached_property
    def _codewords(self):
        return [Codeword(self.level, self.grid.unravel(m), self.px[m], self.py[m], self.kinds[m], m)
                for m in range(self.size)]

    @cached_property
    def _ex(self):
        return np.exp(1j * self.px).astype(np.complex64)

    @cached_property
    def _ey(self):
        return np.exp(1j * self.py).astype(np.complex64)

    def gains(self, e: np.ndarray, subset=None) -> np.ndarray:
        """sum_q exp(j psi_mq) e_q for every codeword (or ``subset``).

        ``e`` is a length-Q vector or a (D, Q) batch; the result has shape
        (M,) or (D, M).
        """
        ex, ey = self._ex, self._ey
        if subset is not None:
            ex, ey = ex[subset], ey[subset]
        side = self.px.shape[1]
        E = np.asarray(e).astype(np.complex64).reshape(-1, side, side)
        out = np.einsum("mx,dxy,my->dm", ex, E, ey, optimize=True)
        return out[0] if np.ndim(e) == 1 else out


def build_level(cfg: SystemConfig, M: int, level: int = 1, split=None, kappa: float = 1.0,
                design: str = "auto") -> CodebookLevel:
    """One codebook level over an M-cell partition.

    ``design`` is ``"auto"`` (narrow for NBR, wide otherwise), ``"wide"`` or
    ``"narrow"``.
    """
    grid = level_grid(cfg, M, level, split)
    return _level_from_grid(cfg, grid, kappa, design)


def _level_from_grid(cfg, grid, kappa=1.0, design="auto") -> CodebookLevel:
    regime = classify_regime(cfg, grid, kappa).classification
    use_narrow = design == "narrow" or (design == "auto" and regime is Regime.NBR)
    cws = []
    for m in range(grid.size):
        if use_narrow:
            cws.append(narrow_beam_codeword(cfg, aod_to_point(grid.centers[m]), None, grid.level,
                                            grid.unravel(m), m))
        else:
            cws.append(wide_beam_codeword(cfg, grid, m))
    return CodebookLevel(grid.level, grid, regime, np.stack([c.px for c in cws]),
                         np.stack([c.py for c in cws]), tuple(c.kind for c in cws))


@dataclass(eq=False)
class HierarchicalCodebook:
    M0: int
    k: int
    levels: list
    split: tuple  # (along z, along y) per refinement

    @property
    def L(self) -> int:
        return len(self.levels)

    @property
    def top(self) -> CodebookLevel:
        return self.levels[-1]

    def children(self, level: int, m: int) -> np.ndarray:
        """Indices at ``level + 1`` (1-based levels) whose cells tile cell ``m``."""
        if not 1 <= level < self.L:
            raise ValueError("no children below the top level")
        parent = self.levels[level - 1].grid
        child = self.levels[level].grid
        m_x, m_y = parent.unravel(m)
        sx, sy = self.split
        return np.array([child.index(m_x * sx + a, m_y * sy + b) for a in range(sx) for b in range(sy)])


def build_hierarchy(cfg: SystemConfig, M0: int, k: int, L: int, kappa: float = 1.0) -> HierarchicalCodebook:
    if L < 1:
        raise ValueError("L must be >= 1")
    if k < 2 and L > 1:
        raise ValueError("k must be >= 2")
    M_x, M_y = factorize_level(M0, cfg.area_extent)
    cell = (cfg.area_extent[0] / M_y, cfg.area_extent[1] / M_x)
    sx, sy = factorize_level(k, cell) if L > 1 else (1, 1)
    levels = []
    for l in range(L):
        grid = partition_grid(cfg, M_x * sx**l, M_y * sy**l, l + 1)
        levels.append(_level_from_grid(cfg, grid, kappa))
    return HierarchicalCodebook(M0, k, levels, (sx, sy))


def ts_neighborhood(grid_top: SubareaGrid, m_star: int) -> np.ndarray:
    """Moore neighbors of ``m_star`` (excluding itself), clipped to the grid."""
    m_x, m_y = grid_top.unravel(m_star)
    out = []
    for a in (-1, 0, 1):
        for b in (-1, 0, 1):
            if a == 0 and b == 0:
                continue
            i, j = m_x + a, m_y + b
            if 0 <= i < grid_top.M_x and 0 <= j < grid_top.M_y:
                out.append(grid_top.index(i, j))
    return np.array(out, dtype=int)


def export_codebook_csv(levels, path) -> None:
    """CSV rows (level, m_x, m_y, q, psi) for every codeword of ``levels``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["level", "m_x", "m_y", "q", "psi"])
        for lev in levels:
            for m in range(lev.size):
                cw = lev.codeword(m)
                for q, psi in enumerate(cw.phases):
                    w.writerow([lev.level, cw.index[0], cw.index[1], q, repr(float(psi))])
