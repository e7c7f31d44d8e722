"""Geometric Rician channels for the BS-RIS-user link.

The BS is a uniform linear array whose LoS angle of departure towards the
RIS is ``omega = 0`` (array broadside faces the RIS), and the precoder
steers along that angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .scenario import SystemConfig, aod_to_point


@dataclass(frozen=True)
class RicianParams:
    """K-factors and NLoS path counts.  ``math.inf`` K gives a pure LoS link."""

    K_i: float = 4.0
    K_r: float = 4.0
    C_i: int = 6
    C_r: int = 6
    omega: float = 0.0
    redraw_nlos_angles: bool = True

    def __post_init__(self):
        if self.K_i < 0 or self.K_r < 0:
            raise ValueError("K-factors must be nonnegative")
        if self.C_i < 0 or self.C_r < 0:
            raise ValueError("NLoS path counts must be nonnegative")

    @classmethod
    def pure_los(cls) -> "RicianParams":
        return cls(K_i=math.inf, K_r=math.inf, C_i=0, C_r=0)


def _rician_weights(K: float, C: int) -> tuple[float, float]:
    if math.isinf(K):
        return 1.0, 0.0
    los = math.sqrt(K / (K + 1))
    nlos = math.sqrt(1 / ((K + 1) * C)) if C > 0 else 0.0
    return los, nlos


def free_space_gain(distance: float, wavelength: float) -> float:
    """eta = (lambda / (4 pi R))^2."""
    return (wavelength / (4 * math.pi * distance)) ** 2


def _ris_axis_phase(cfg: SystemConfig, theta, phi):
    """k d_x q_x sin(t)cos(p) and k d_y q_y sin(t)sin(p), shapes (n, side)."""
    k = 2 * math.pi / cfg.wavelength
    q = np.arange(cfg.side)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    ux = np.sin(theta) * np.cos(phi)
    uy = np.sin(theta) * np.sin(phi)
    return k * cfg.unit_cell_len_x * np.outer(ux, q), k * cfg.unit_cell_len_y * np.outer(uy, q)


def array_response(kind: str, cfg: SystemConfig, theta, phi=None):
    """Steering vectors.

    ``kind`` is ``"ris_arrival"``, ``"ris_departure"`` or ``"bs"``.  For the
    RIS kinds the element (q_x, q_y) sits at flat index ``q_x*sqrt(Q) + q_y``.
    Scalar angles give a vector, array angles a (n, Q) or (n, N) matrix.
    """
    scalar = np.ndim(theta) == 0
    if kind == "bs":
        k = 2 * math.pi / cfg.wavelength
        n = np.arange(cfg.num_bs_antennas)
        omega = np.atleast_1d(np.asarray(theta, dtype=float))
        out = np.exp(-1j * k * cfg.bs_antenna_spacing * np.outer(np.sin(omega), n))
    elif kind in ("ris_arrival", "ris_departure"):
        sign = 1.0 if kind == "ris_arrival" else -1.0
        px, py = _ris_axis_phase(cfg, theta, phi)
        ax, ay = np.exp(sign * 1j * px), np.exp(sign * 1j * py)
        out = (ax[:, :, None] * ay[:, None, :]).reshape(ax.shape[0], -1)
    else:
        raise ValueError(f"unknown array kind {kind!r}")
    return out[0] if scalar else out


def bs_precoder(cfg: SystemConfig, omega: float = 0.0) -> np.ndarray:
    """Unit-norm precoder aligned with the BS-RIS LoS path."""
    return array_response("bs", cfg, omega) / math.sqrt(cfg.num_bs_antennas)


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the BS-RIS matrix and RIS-user vector.

    LoS and NLoS parts are kept separately (already K-weighted, without
    path loss); ``H_i`` and ``h_r`` assemble them.
    """

    H_los: np.ndarray = field(repr=False)
    H_nlos: np.ndarray = field(repr=False)
    h_los: np.ndarray = field(repr=False)
    h_nlos: np.ndarray = field(repr=False)
    eta_i: float
    eta_r: float
    seed: object = None
    user_position: tuple | None = None

    @property
    def H_i(self) -> np.ndarray:
        return math.sqrt(self.eta_i) * (self.H_los + self.H_nlos)

    @property
    def h_r(self) -> np.ndarray:
        return math.sqrt(self.eta_r) * (self.h_los + self.h_nlos)

    def moved_to(self, cfg: SystemConfig, position) -> "ChannelRealization":
        """Same draw with the RIS-user LoS path recomputed at ``position``.

        NLoS terms and LoS phases are kept; only the LoS direction and the
        RIS-user path loss follow the user.
        """
        if self.user_position is None:
            raise ValueError("realization carries no user position")
        old = array_response("ris_departure", cfg, *aod_to_point(self.user_position))
        new = array_response("ris_departure", cfg, *aod_to_point(position))
        h_los = self.h_los * new * old.conj()
        eta_r = free_space_gain(float(np.linalg.norm(position)), cfg.wavelength)
        return ChannelRealization(self.H_los, self.H_nlos, h_los, self.h_nlos, self.eta_i, eta_r,
                                  self.seed, tuple(float(c) for c in position))


def _nlos_angles(rng: np.random.Generator, C: int):
    return rng.uniform(0, math.pi / 2, C), rng.uniform(0, 2 * math.pi, C)


def generate_channels(cfg: SystemConfig, rp: RicianParams, user_position, seed=None,
                      angle_rng: np.random.Generator | None = None) -> ChannelRealization:
    """Draw (H_i, h_r) for a user at ``user_position``.

    ``seed`` may be anything accepted by ``np.random.default_rng``.  When
    ``angle_rng`` is given, NLoS angles come from it instead (angles held
    fixed across frames by reusing a generator seeded per trajectory).
    """
    rng = np.random.default_rng(seed)
    a_rng = rng if angle_rng is None else angle_rng
    Q, N = cfg.num_unit_cells, cfg.num_bs_antennas
    w_los_i, w_nlos_i = _rician_weights(rp.K_i, rp.C_i)
    w_los_r, w_nlos_r = _rician_weights(rp.K_r, rp.C_r)

    psi_i, psi_r = rng.uniform(0, 2 * math.pi, 2)
    th_i, ph_i = aod_to_point(cfg.bs_position)
    th_r, ph_r = aod_to_point(user_position)

    a_bs = array_response("bs", cfg, rp.omega)
    H_los = w_los_i * np.exp(1j * psi_i) * np.outer(array_response("ris_arrival", cfg, th_i, ph_i), a_bs.conj())
    h_los = w_los_r * np.exp(-1j * psi_r) * array_response("ris_departure", cfg, th_r, ph_r)

    H_nlos = np.zeros((Q, N), dtype=complex)
    if w_nlos_i > 0:
        th, ph = _nlos_angles(a_rng, rp.C_i)
        omega_c = a_rng.uniform(0, 2 * math.pi, rp.C_i)
        coeff = (rng.standard_normal(rp.C_i) + 1j * rng.standard_normal(rp.C_i)) / math.sqrt(2)
        A = array_response("ris_arrival", cfg, th, ph)
        B = array_response("bs", cfg, omega_c)
        H_nlos = w_nlos_i * (A.T * coeff) @ B.conj()
    h_nlos = np.zeros(Q, dtype=complex)
    if w_nlos_r > 0:
        th, ph = _nlos_angles(a_rng, rp.C_r)
        coeff = (rng.standard_normal(rp.C_r) + 1j * rng.standard_normal(rp.C_r)) / math.sqrt(2)
        h_nlos = w_nlos_r * (array_response("ris_departure", cfg, th, ph).T @ coeff)

    eta_i = free_space_gain(cfg.bs_distance, cfg.wavelength)
    eta_r = free_space_gain(float(np.linalg.norm(user_position)), cfg.wavelength)
    return ChannelRealization(H_los, H_nlos, h_los, h_nlos, eta_i, eta_r, seed,
                              tuple(float(c) for c in user_position))


@dataclass(frozen=True)
class RisReflection:
    """Phase-only RIS configuration G = diag(g exp(j psi))."""

    phases: np.ndarray
    g: complex

    @classmethod
    def from_config(cls, cfg: SystemConfig, phases) -> "RisReflection":
        return cls(np.asarray(phases, dtype=float), 1j * cfg.ucell_gain)

    @property
    def diagonal(self) -> np.ndarray:
        return self.g * np.exp(1j * self.phases)


def end_to_end_gain(cfg: SystemConfig, ch: ChannelRealization, refl: RisReflection,
                    f: np.ndarray) -> tuple[complex, float]:
    """h_m^H f = h_r^H G_m H_i f and its per-symbol SNR."""
    H_i, h_r = ch.H_i, ch.h_r
    if refl.phases.shape != (H_i.shape[0],) or f.shape != (H_i.shape[1],) or h_r.shape != (H_i.shape[0],):
        raise ValueError("dimension mismatch between channel, reflection and precoder")
    h = np.vdot(h_r, refl.diagonal * (H_i @ f))
    return h, cfg.link_snr_factor * abs(h) ** 2


def cascade(cfg: SystemConfig, ch: ChannelRealization, f: np.ndarray, normalize: bool = True) -> np.ndarray:
    """Per-cell coefficients e with h_m^H f = sum_q exp(j psi_mq) e_q.

    With ``normalize`` the result is scaled by sqrt(P G_t G_r / sigma^2) so
    that |sum|^2 is directly the per-symbol SNR.
    """
    e = 1j * cfg.ucell_gain * np.conj(ch.h_r) * (ch.H_i @ f)
    if normalize:
        e = e * math.sqrt(cfg.link_snr_factor)
    return e


def dump_channel_csv(ch: ChannelRealization, path) -> None:
    """Write the flattened entries of H_i then h_r as (re, im) rows."""
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["matrix", "row", "col", "re", "im"])
        H = ch.H_i
        for (r, c), val in np.ndenumerate(H):
            w.writerow(["H_i", r, c, repr(val.real), repr(val.imag)])
        for r, val in enumerate(ch.h_r):
            w.writerow(["h_r", r, 0, repr(val.real), repr(val.imag)])
