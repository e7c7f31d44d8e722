"""Flat ``section.key = value`` scenario files.

Values may carry a unit (``28 GHz``, ``0.1 ms``, ``3 km/h``, ``15 dBm``);
without one the SI unit (or dBm/dB for the logarithmic keys) is assumed.
Vectors are comma separated.  ``#`` starts a comment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .channel import RicianParams
from .scenario import SPEED_OF_LIGHT, SystemConfig, TimingConfig, db_to_linear, dbm_to_watt, kmh

_UNITS = {
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9},
    "freq": {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9},
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3},
    "speed": {"m/s": 1.0, "km/h": 1 / 3.6},
    "dbm": {"dbm": 1.0},
    "dbm_hz": {"dbm/hz": 1.0},
    "db": {"db": 1.0},
}

# key -> (kind, default); kinds are unit families, "int", "float", "bool",
# "vec3", "vec2", "pilots" or "wl" (multiples of the wavelength)
SCHEMA = {
    "system.carrier_frequency": ("freq", 28e9),
    "system.num_unit_cells": ("int", 3600),
    "system.num_bs_antennas": ("int", 16),
    "system.unit_cell_spacing": ("wl", 0.5),
    "system.bs_antenna_spacing": ("wl", 0.5),
    "system.tx_power": ("dbm", 15.0),
    "system.tx_gain": ("db", 0.0),
    "system.rx_gain": ("db", 0.0),
    "system.noise_psd": ("dbm_hz", -174.0),
    "system.noise_figure": ("db", 6.0),
    "system.pilot_bandwidth": ("freq", 1e6),
    "system.area_factor": ("float", 1.0),
    "system.unit_cell_gain": ("float", 0.0),
    "system.min_training_snr": ("db", 15.0),
    "system.bs_position": ("vec3", (0.0, 40.0, 50.0)),
    "system.area_center": ("vec3", (-10.0, -20.0, 100.0)),
    "system.area_extent": ("vec2", (100.0, 50.0)),
    "timing.ris_response_time": ("time", 1e-6),
    "timing.pilot_symbol_duration": ("time", 1e-6),
    "timing.feedback_delay": ("time", 1e-4),
    "timing.estimation_symbols": ("float", 40.0),
    "timing.frame_factor": ("float", 0.15),
    "timing.velocity": ("speed", kmh(3.0)),
    "channel.K_i": ("float", 4.0),
    "channel.K_r": ("float", 4.0),
    "channel.C_i": ("int", 6),
    "channel.C_r": ("int", 6),
    "channel.redraw_nlos_angles": ("bool", True),
    "codebook.M0": ("int", 8),
    "codebook.k": ("int", 4),
    "codebook.L": ("int", 5),
    "codebook.kappa": ("float", 1.0),
    "sim.pilots": ("pilots", None),
    "sim.noise_scale": ("float", 1.0),
    "sim.data_samples": ("int", 4),
    "sim.trajectory_length": ("length", 1000.0),
    "sim.max_frames": ("int", 50),
    "sim.draws": ("int", 4),
    "sim.ts_reinit_period": ("int", 0),
    "sim.integer_subframes": ("bool", False),
    "sim.genie_selection": ("bool", False),
}

_NONNEGATIVE = {"timing.ris_response_time", "timing.feedback_delay", "timing.estimation_symbols",
                "timing.velocity", "channel.K_i", "channel.K_r", "channel.C_i", "channel.C_r",
                "sim.noise_scale", "sim.data_samples", "sim.ts_reinit_period", "system.unit_cell_gain"}
_POSITIVE = {"system.carrier_frequency", "system.num_bs_antennas", "system.unit_cell_spacing",
             "system.bs_antenna_spacing", "system.pilot_bandwidth", "system.area_factor",
             "timing.pilot_symbol_duration", "timing.frame_factor", "codebook.M0", "codebook.k",
             "codebook.L", "sim.trajectory_length", "sim.max_frames", "sim.draws"}


def parse_value(key: str, text: str):
    """Convert ``text`` for ``key`` to SI; raises ValueError with the key name."""
    kind = SCHEMA[key][0]
    text = text.strip()
    try:
        if kind == "bool":
            low = text.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError
        if kind == "int":
            f = float(text)
            if f != int(f):
                raise ValueError
            return int(f)
        if kind in ("float", "wl"):
            return float(text)
        if kind in ("vec3", "vec2"):
            vals = tuple(float(v) for v in text.split(","))
            if len(vals) != (3 if kind == "vec3" else 2):
                raise ValueError
            return vals
        if kind == "pilots":
            if text.lower() == "auto":
                return None
            vals = tuple(float(v) for v in text.split(","))
            return vals[0] if len(vals) == 1 else vals
    except ValueError:
        raise ValueError(f"{key}: cannot parse {text!r} as {kind}") from None
    parts = text.split()
    if not parts or len(parts) > 2:
        raise ValueError(f"{key}: cannot parse {text!r}")
    try:
        number = float(parts[0])
    except ValueError:
        raise ValueError(f"{key}: cannot parse {text!r} as a number") from None
    if len(parts) == 2:
        unit = parts[1].lower()
        table = _UNITS[kind]
        if unit not in table:
            raise ValueError(f"{key}: unit {parts[1]!r} not allowed (expected one of {', '.join(table)})")
        # km/h goes through kmh() so file values equal the built-in defaults bit for bit
        number = kmh(number) if unit == "km/h" else number * table[unit]
    return number


def parse_text(text: str):
    """Parse config text into ``(values, errors)`` without validation."""
    values, errors = {}, []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value'")
            continue
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        try:
            values[key] = parse_value(key, val)
        except ValueError as exc:
            errors.append(f"line {lineno}: {exc}")
    return values, errors


def defaults() -> dict:
    return {k: v[1] for k, v in SCHEMA.items()}


@dataclass
class ExperimentConfig:
    """Normalized scenario plus simulation settings."""

    system: SystemConfig
    timing: TimingConfig
    rician: RicianParams
    M0: int = 8
    k: int = 4
    L: int = 5
    kappa: float = 1.0
    sim: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)

    def echo(self) -> dict:
        """Normalized values plus derived quantities."""
        out = dict(self.values)
        out["derived.wavelength_m"] = self.system.wavelength
        out["derived.noise_power_W"] = self.system.noise_power
        out["derived.estimation_overhead_s"] = self.timing.estimation_overhead
        out["derived.unit_cell_gain"] = self.system.ucell_gain
        return out


def _check_ranges(values: dict) -> list:
    errors = []
    for key in sorted(_NONNEGATIVE):
        if values[key] < 0:
            errors.append(f"{key} must be nonnegative (got {values[key]})")
    for key in sorted(_POSITIVE):
        if not values[key] > 0:
            errors.append(f"{key} must be positive (got {values[key]})")
    Q = values["system.num_unit_cells"]
    if Q <= 0 or math.isqrt(Q) ** 2 != Q:
        errors.append(f"system.num_unit_cells: Q must be a perfect square (got {Q})")
    if values["system.area_center"][0] == 0:
        errors.append("system.area_center: coverage plane must not contain the RIS")
    if any(e <= 0 for e in values["system.area_extent"]):
        errors.append("system.area_extent entries must be positive")
    if abs(values["system.pilot_bandwidth"] * values["timing.pilot_symbol_duration"] - 1) > 1e-9:
        errors.append("timing.pilot_symbol_duration must equal 1/system.pilot_bandwidth")
    if values["codebook.L"] > 1 and values["codebook.k"] < 2:
        errors.append("codebook.k must be >= 2 when codebook.L > 1")
    if not values["codebook.kappa"] >= 1:
        errors.append("codebook.kappa must be >= 1")
    pil = values["sim.pilots"]
    if pil is not None:
        seq = pil if isinstance(pil, tuple) else (pil,)
        if any(p < 1 for p in seq):
            errors.append("sim.pilots entries must be >= 1")
        if isinstance(pil, tuple) and len(pil) != values["codebook.L"]:
            errors.append("sim.pilots must have one entry per level or be a single number")
    return errors


def build_config(values: dict):
    """Merge ``values`` over the defaults; returns ``(ExperimentConfig | None, errors)``."""
    merged = defaults()
    merged.update(values)
    errors = _check_ranges(merged)
    if errors:
        return None, errors
    lam = SPEED_OF_LIGHT / merged["system.carrier_frequency"]
    ucg = merged["system.unit_cell_gain"]
    system = SystemConfig(
        num_unit_cells=merged["system.num_unit_cells"],
        num_bs_antennas=merged["system.num_bs_antennas"],
        unit_cell_len_x=merged["system.unit_cell_spacing"] * lam,
        unit_cell_len_y=merged["system.unit_cell_spacing"] * lam,
        bs_antenna_spacing=merged["system.bs_antenna_spacing"] * lam,
        tx_power=dbm_to_watt(merged["system.tx_power"]),
        tx_gain=db_to_linear(merged["system.tx_gain"]),
        rx_gain=db_to_linear(merged["system.rx_gain"]),
        wavelength=lam,
        noise_psd=dbm_to_watt(merged["system.noise_psd"]),
        noise_figure=db_to_linear(merged["system.noise_figure"]),
        pilot_bandwidth=merged["system.pilot_bandwidth"],
        area_factor=merged["system.area_factor"],
        unit_cell_gain=ucg if ucg > 0 else None,
        min_training_snr=db_to_linear(merged["system.min_training_snr"]),
        bs_position=merged["system.bs_position"],
        area_center=merged["system.area_center"],
        area_extent=merged["system.area_extent"],
    )
    T_p = merged["timing.pilot_symbol_duration"]
    timing = TimingConfig(
        ris_response_time=merged["timing.ris_response_time"],
        pilot_symbol_duration=T_p,
        feedback_delay=merged["timing.feedback_delay"],
        estimation_overhead=merged["timing.estimation_symbols"] * T_p,
        frame_factor=merged["timing.frame_factor"],
        velocity=merged["timing.velocity"],
    )
    rician = RicianParams(merged["channel.K_i"], merged["channel.K_r"], merged["channel.C_i"],
                          merged["channel.C_r"], redraw_nlos_angles=merged["channel.redraw_nlos_angles"])
    sim = {k.split(".", 1)[1]: v for k, v in merged.items() if k.startswith("sim.")}
    return ExperimentConfig(system, timing, rician, merged["codebook.M0"], merged["codebook.k"],
                            merged["codebook.L"], merged["codebook.kappa"], sim, merged), []


def validate_config(path):
    """Load and validate a config file; returns ``(ExperimentConfig | None, errors)``.

    All problems are reported, not just the first.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    values, errors = parse_text(text)
    cfg, more = build_config(values)
    errors = errors + more
    return (cfg if not errors else None), errors
