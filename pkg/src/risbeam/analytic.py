"""Closed-form SNR machinery: beam widths, regimes, scaling laws, pilot bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .scenario import SubareaGrid, SystemConfig

FOOTPRINT_CONSTANT = 1.77
_HPBW_CONSTANT = 2.782


class Regime(str, Enum):
    WBR = "WBR"
    NBR = "NBR"
    TRANSITION = "Transition"


class OverheadRegime(str, Enum):
    IOR = "IOR"
    DOR = "DOR"


def _check_q(Q: int) -> None:
    if Q <= 13:
        raise ValueError("beam width formula requires Q > 13")


def beam_width(Q: int) -> float:
    """Exact 3 dB broadside beam width (rad) of a sqrt(Q) x sqrt(Q) RIS."""
    _check_q(Q)
    x = _HPBW_CONSTANT / (math.pi * math.sqrt(Q))
    return abs(math.pi / 2 - math.acos(x)) + abs(math.pi / 2 - math.acos(-x))


def beam_width_approx(Q: int) -> float:
    _check_q(Q)
    return 2 * _HPBW_CONSTANT / (math.pi * math.sqrt(Q))


def footprint_diameter(R: float, Q: int) -> tuple[float, float]:
    """Minimum beam-footprint diameter at distance R: (exact, approximate)."""
    if not R > 0:
        raise ValueError("R must be positive")
    exact = 2 * R * math.tan(beam_width(Q) / 2)
    return exact, FOOTPRINT_CONSTANT * R / math.sqrt(Q)


@dataclass(frozen=True)
class SnrConstants:
    c_wb: float
    c_nb: float
    R_i: float
    R_r: float
    area_factor: float
    ucell_gain_sq: float
    area: float


def snr_constants(cfg: SystemConfig, R_r: float | None = None) -> SnrConstants:
    """Scaling-law constants; ``R_r`` defaults to the area-center distance."""
    R_i = cfg.bs_distance
    R_r = cfg.area_center_distance if R_r is None else R_r
    lam = cfg.wavelength
    common = cfg.link_snr_factor * cfg.num_bs_antennas
    c_wb = common * lam**2 * cfg.unit_cell_len_x * cfg.unit_cell_len_y * cfg.area_factor / (
        (4 * math.pi * R_i) ** 2 * cfg.area
    )
    c_nb = common * lam**4 * cfg.ucell_gain**2 / ((4 * math.pi * R_i) ** 2 * (4 * math.pi * R_r) ** 2)
    return SnrConstants(c_wb, c_nb, R_i, R_r, cfg.area_factor, cfg.ucell_gain**2, cfg.area)


@dataclass(frozen=True)
class RegimeReport:
    level: int
    size: int
    rhs_wbr: float
    rhs_nbr: float
    classification: Regime
    margin_factor: float

    def csv_row(self) -> list:
        return [self.level, self.size, self.rhs_wbr, self.rhs_nbr, self.classification.value]


def regime_rhs(cfg: SystemConfig, grid: SubareaGrid) -> tuple[float, float]:
    denom = grid.diameter**2
    rhs_wbr = (FOOTPRINT_CONSTANT * grid.distances.max()) ** 2 / denom
    rhs_nbr = (FOOTPRINT_CONSTANT * grid.distances.min()) ** 2 / denom
    return float(rhs_wbr), float(rhs_nbr)


def classify_regime(cfg: SystemConfig, grid: SubareaGrid, kappa: float = 1.0) -> RegimeReport:
    """WBR iff Q >= kappa*rhs_wbr, NBR iff Q <= rhs_nbr/kappa, else transition.

    ``margin_factor`` is Q/rhs_wbr for WBR, rhs_nbr/Q for NBR and the smaller
    of the two for the transition regime.
    """
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    Q = cfg.num_unit_cells
    rhs_wbr, rhs_nbr = regime_rhs(cfg, grid)
    if Q >= kappa * rhs_wbr:
        cls, margin = Regime.WBR, Q / rhs_wbr
    elif Q <= rhs_nbr / kappa:
        cls, margin = Regime.NBR, rhs_nbr / Q
    else:
        cls, margin = Regime.TRANSITION, min(Q / rhs_wbr, rhs_nbr / Q)
    return RegimeReport(grid.level, grid.size, rhs_wbr, rhs_nbr, cls, margin)


def snr_scaling(cfg: SystemConfig, grid: SubareaGrid, regime: Regime, R_r: float | None = None):
    """Per-symbol SNR predicted by the scaling laws.

    Returns a float for WBR/NBR and a ``(wbr, nbr)`` pair of lower/upper
    bounds in the transition regime.
    """
    const = snr_constants(cfg, R_r)
    Q = cfg.num_unit_cells
    wide = const.c_wb * Q * grid.size
    narrow = const.c_nb * Q**2
    if regime == Regime.WBR:
        return wide
    if regime == Regime.NBR:
        return narrow
    return wide, narrow


def ris_gain_pattern(Q: int, steer, obs, spacing, wavelength: float, ucell_gain: float):
    """|G|^2 of a linearly phased RIS steered at ``steer`` seen from ``obs``.

    ``steer`` and ``obs`` are (theta, phi) pairs; ``obs`` entries may be
    arrays.  ``spacing`` is (d_x, d_y).
    """
    side = math.isqrt(Q)
    if side * side != Q:
        raise ValueError("Q must be a perfect square")
    d_x, d_y = spacing
    th_s, ph_s = steer
    th_o, ph_o = np.asarray(obs[0], dtype=float), np.asarray(obs[1], dtype=float)
    W_x = math.pi * d_x / wavelength * (np.sin(th_o) * np.cos(ph_o) - math.sin(th_s) * math.cos(ph_s))
    W_y = math.pi * d_y / wavelength * (np.sin(th_o) * np.sin(ph_o) - math.sin(th_s) * math.sin(ph_s))
    return ucell_gain**2 * _dirichlet_sq(side, W_x) * _dirichlet_sq(side, W_y)


def _dirichlet_sq(n: int, W):
    W = np.asarray(W, dtype=float)
    s = np.sin(W)
    near = np.abs(s) < 1e-9
    safe = np.where(near, 1.0, s)
    ratio = np.where(near, n * np.cos(n * W) / np.where(near, np.cos(W), 1.0), np.sin(n * W) / safe)
    return ratio**2


def min_pilots(gamma_min: float, gamma_star: float) -> tuple[int, OverheadRegime]:
    if not (gamma_min > 0 and gamma_star > 0):
        raise ValueError("SNRs must be positive")
    ratio = gamma_min / gamma_star
    if ratio <= 1:
        return 1, OverheadRegime.IOR
    return math.ceil(ratio - 1e-12), OverheadRegime.DOR
