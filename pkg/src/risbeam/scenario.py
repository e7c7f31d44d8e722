"""Static scenario description and coverage-area geometry.

Coordinate convention: the RIS sits at the origin in the x-y plane with its
broadside along +z.  The coverage area is a rectangle in the plane
``x = x_A`` spanning ``A_y`` metres along y and ``A_z`` metres along z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Tuple

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0

Point = Tuple[float, float, float]


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def kmh(v_kmh: float) -> float:
    """Convert km/h to m/s."""
    return v_kmh / 3.6


_DEFAULT_WAVELENGTH = SPEED_OF_LIGHT / 28e9


@dataclass(frozen=True)
class SystemConfig:
    """Immutable radio/geometry scenario.  SI units throughout.

    ``unit_cell_gain`` is the magnitude of the unit-cell factor; ``None``
    means the aperture-limited value ``4*pi*d_x*d_y/lambda**2``.
    """

    num_unit_cells: int = 3600
    num_bs_antennas: int = 16
    unit_cell_len_x: float = _DEFAULT_WAVELENGTH / 2
    unit_cell_len_y: float = _DEFAULT_WAVELENGTH / 2
    bs_antenna_spacing: float = _DEFAULT_WAVELENGTH / 2
    tx_power: float = dbm_to_watt(15.0)
    tx_gain: float = 1.0
    rx_gain: float = 1.0
    wavelength: float = _DEFAULT_WAVELENGTH
    noise_psd: float = dbm_to_watt(-174.0)
    noise_figure: float = db_to_linear(6.0)
    pilot_bandwidth: float = 1e6
    area_factor: float = 1.0
    unit_cell_gain: float | None = None
    # calibrated, not a published value (see README)
    min_training_snr: float = db_to_linear(15.0)
    bs_position: Point = (0.0, 40.0, 50.0)
    area_center: Point = (-10.0, -20.0, 100.0)
    area_extent: Tuple[float, float] = (100.0, 50.0)

    def __post_init__(self):
        errors = self.validate()
        if errors:
            raise ValueError("; ".join(errors))

    def validate(self) -> list[str]:
        errors = []
        root = math.isqrt(self.num_unit_cells) if self.num_unit_cells > 0 else 0
        if self.num_unit_cells <= 0 or root * root != self.num_unit_cells:
            errors.append("Q must be a perfect square")
        if self.num_bs_antennas < 1:
            errors.append("num_bs_antennas must be >= 1")
        positive = (
            "unit_cell_len_x", "unit_cell_len_y", "bs_antenna_spacing", "tx_power",
            "tx_gain", "rx_gain", "wavelength", "noise_psd", "noise_figure",
            "pilot_bandwidth", "area_factor", "min_training_snr",
        )
        for name in positive:
            if not getattr(self, name) > 0:
                errors.append(f"{name} must be strictly positive")
        if self.unit_cell_gain is not None and not self.unit_cell_gain > 0:
            errors.append("unit_cell_gain must be strictly positive")
        if any(not e > 0 for e in self.area_extent):
            errors.append("area_extent entries must be strictly positive")
        if self.area_center[0] == 0.0:
            errors.append("coverage plane must not contain the RIS (area_center x != 0)")
        return errors

    @property
    def side(self) -> int:
        """Unit cells per RIS side, sqrt(Q)."""
        return math.isqrt(self.num_unit_cells)

    @property
    def noise_power(self) -> float:
        return self.noise_psd * self.noise_figure * self.pilot_bandwidth

    @property
    def ucell_gain(self) -> float:
        if self.unit_cell_gain is not None:
            return self.unit_cell_gain
        return 4 * math.pi * self.unit_cell_len_x * self.unit_cell_len_y / self.wavelength**2

    @property
    def link_snr_factor(self) -> float:
        """P G_t G_r / sigma^2, the SNR per unit squared channel gain."""
        return self.tx_power * self.tx_gain * self.rx_gain / self.noise_power

    @property
    def bs_distance(self) -> float:
        return float(np.linalg.norm(self.bs_position))

    @property
    def area_center_distance(self) -> float:
        return float(np.linalg.norm(self.area_center))

    @property
    def area(self) -> float:
        return self.area_extent[0] * self.area_extent[1]

    def with_(self, **changes) -> "SystemConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class TimingConfig:
    """Protocol timing.  ``pilot_symbol_duration`` must equal 1/B."""

    ris_response_time: float = 1e-6
    pilot_symbol_duration: float = 1e-6
    feedback_delay: float = 1e-4
    estimation_overhead: float = 40e-6
    frame_factor: float = 0.15
    velocity: float = kmh(3.0)

    def __post_init__(self):
        errors = self.validate()
        if errors:
            raise ValueError("; ".join(errors))

    def validate(self) -> list[str]:
        errors = []
        for name in ("ris_response_time", "pilot_symbol_duration", "feedback_delay",
                     "estimation_overhead", "velocity"):
            if getattr(self, name) < 0:
                errors.append(f"{name} must be nonnegative")
        if not self.frame_factor > 0:
            errors.append("frame_factor must be > 0")
        if not self.pilot_symbol_duration > 0:
            errors.append("pilot_symbol_duration must be > 0")
        return errors

    def with_(self, **changes) -> "TimingConfig":
        return replace(self, **changes)


def check_pilot_bandwidth(cfg: SystemConfig, tc: TimingConfig, rtol: float = 1e-9) -> None:
    if abs(cfg.pilot_bandwidth * tc.pilot_symbol_duration - 1.0) > rtol:
        raise ValueError("pilot_symbol_duration * pilot_bandwidth must equal 1")


@dataclass(frozen=True)
class SubareaGrid:
    """Equal-size partition of the coverage area.

    Centers are stored row-major with ``m_x`` (z direction) as the outer
    index and ``m_y`` (y direction) as the inner one.
    """

    level: int
    M_x: int
    M_y: int
    centers: np.ndarray = field(repr=False)
    diameter: float
    distances: np.ndarray = field(repr=False)
    cell_size: Tuple[float, float]  # (along y, along z)

    @property
    def size(self) -> int:
        return self.M_x * self.M_y

    def index(self, m_x: int, m_y: int) -> int:
        """Flat index of the 0-based cell (m_x, m_y)."""
        return m_x * self.M_y + m_y

    def unravel(self, m: int) -> Tuple[int, int]:
        return divmod(int(m), self.M_y)

    def locate(self, point) -> int:
        """Flat index of the cell containing ``point`` (clipped to the grid)."""
        y0 = self.centers[:, 1].min() - self.cell_size[0] / 2
        z0 = self.centers[:, 2].min() - self.cell_size[1] / 2
        m_y = int(np.clip((point[1] - y0) // self.cell_size[0], 0, self.M_y - 1))
        m_x = int(np.clip((point[2] - z0) // self.cell_size[1], 0, self.M_x - 1))
        return self.index(m_x, m_y)

    def bounds(self, m: int) -> Tuple[Tuple[float, float], Tuple[float, float]]:
        """((y_lo, y_hi), (z_lo, z_hi)) of cell ``m``."""
        c = self.centers[m]
        hy, hz = self.cell_size[0] / 2, self.cell_size[1] / 2
        return (c[1] - hy, c[1] + hy), (c[2] - hz, c[2] + hz)


def subarea_diameter(cfg: SystemConfig, M_x: int, M_y: int) -> float:
    A_y, A_z = cfg.area_extent
    return math.hypot(A_y / M_y, A_z / M_x)


def partition_grid(cfg: SystemConfig, M_x: int, M_y: int, level: int = 1) -> SubareaGrid:
    if M_x < 1 or M_y < 1:
        raise ValueError("subarea counts must be >= 1")
    x_A, y_A, z_A = cfg.area_center
    A_y, A_z = cfg.area_extent
    m_x = np.arange(1, M_x + 1)
    m_y = np.arange(1, M_y + 1)
    z = z_A + A_z / (2 * M_x) * (2 * m_x - 1 - M_x)
    y = y_A + A_y / (2 * M_y) * (2 * m_y - 1 - M_y)
    zz, yy = np.meshgrid(z, y, indexing="ij")
    centers = np.column_stack([np.full(M_x * M_y, x_A), yy.ravel(), zz.ravel()])
    return SubareaGrid(
        level=level,
        M_x=M_x,
        M_y=M_y,
        centers=centers,
        diameter=subarea_diameter(cfg, M_x, M_y),
        distances=np.linalg.norm(centers, axis=1),
        cell_size=(A_y / M_y, A_z / M_x),
    )


def factorize_level(M: int, area_extent: Tuple[float, float]) -> Tuple[int, int]:
    """Split ``M`` subareas into (M_x, M_y) with the most nearly square cells.

    Ties go to the larger ``M_y``.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    A_y, A_z = area_extent
    best = None
    for M_x in range(1, M + 1):
        if M % M_x:
            continue
        M_y = M // M_x
        deviation = abs((A_y / M_y) / (A_z / M_x) - 1.0)
        key = (round(deviation, 12), -M_y)
        if best is None or key < best[0]:
            best = (key, (M_x, M_y))
    return best[1]


def level_grid(cfg: SystemConfig, M: int, level: int = 1, split=None) -> SubareaGrid:
    M_x, M_y = split if split is not None else factorize_level(M, cfg.area_extent)
    if M_x * M_y != M:
        raise ValueError(f"split {split} does not multiply to {M}")
    return partition_grid(cfg, M_x, M_y, level)


def aod_to_point(p) -> Tuple[float, float]:
    """Elevation from the RIS broadside (+z) and azimuth in the x-y plane."""
    p = np.asarray(p, dtype=float)
    r = np.linalg.norm(p)
    if r == 0:
        raise ValueError("direction undefined at the origin")
    theta = math.acos(max(-1.0, min(1.0, p[2] / r)))
    if math.hypot(p[0], p[1]) < 1e-12 * r:
        return theta, 0.0
    return theta, math.atan2(p[1], p[0])


def direction_cosines(points) -> np.ndarray:
    """(u_x, u_y) = (sin t cos p, sin t sin p) for each row of ``points``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.linalg.norm(points, axis=1, keepdims=True)
    return points[:, :2] / r


def in_area(cfg: SystemConfig, point, tol: float = 1e-9) -> bool:
    _, y_A, z_A = cfg.area_center
    A_y, A_z = cfg.area_extent
    return abs(point[1] - y_A) <= A_y / 2 + tol and abs(point[2] - z_A) <= A_z / 2 + tol
