"""Timing and overhead calculus for FS, HS and TS beam training."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .analytic import OverheadRegime, Regime, classify_regime, min_pilots, snr_scaling
from .scenario import SubareaGrid, SystemConfig, TimingConfig, level_grid

TS_NEIGHBORS = 8
HS_BOUND_FACTOR = 1.25
_SUBFRAME_CONSTANT = math.sqrt(9 / (16 * math.pi))
_ESTIMATION_CONSTANT = 4 * math.sqrt(math.pi) / 3


class Strategy(str, Enum):
    FS = "FS"
    HS = "HS"
    TS = "TS"


@dataclass(frozen=True)
class StrategyParams:
    """Codebook sizes and per-level training/pilot counts of one strategy.

    ``trained[l]`` is the number of codewords scanned at level l and
    ``pilots[l]`` the pilot symbols per scanned codeword.
    """

    kind: Strategy
    M_L: int
    trained: tuple[int, ...]
    pilots: tuple[float, ...]
    M0: int = 0
    k: int = 0

    def __post_init__(self):
        if len(self.trained) != len(self.pilots):
            raise ValueError("trained and pilots must have one entry per level")
        if any(n < 1 for n in self.pilots):
            raise ValueError("at least one pilot symbol per codeword is required")

    @property
    def L(self) -> int:
        return len(self.trained)

    @property
    def total_trained(self) -> int:
        return sum(self.trained)

    @property
    def level_sizes(self) -> tuple[int, ...]:
        if self.kind is Strategy.HS:
            return tuple(self.M0 * self.k**l for l in range(self.L))
        return (self.M_L,)

    @classmethod
    def fs(cls, M_L: int, pilots: float = 1) -> "StrategyParams":
        if M_L < 1:
            raise ValueError("M_L must be >= 1")
        return cls(Strategy.FS, M_L, (M_L,), (pilots,))

    @classmethod
    def ts(cls, M_L: int, pilots: float = 1) -> "StrategyParams":
        if M_L <= TS_NEIGHBORS:
            raise ValueError("tracking search needs M_L > 8")
        return cls(Strategy.TS, M_L, (TS_NEIGHBORS,), (pilots,))

    @classmethod
    def hs(cls, M0: int, k: int, L: int, pilots: float | Sequence[float] = 1) -> "StrategyParams":
        if k <= 1:
            raise ValueError("hierarchical search needs k > 1")
        if L <= 1:
            raise ValueError("hierarchical search needs L > 1")
        if M0 <= k:
            raise ValueError("hierarchical search needs M0 > k")
        if isinstance(pilots, (int, float)):
            pilots = (pilots,) * L
        trained = (M0,) + (k,) * (L - 1)
        return cls(Strategy.HS, M0 * k ** (L - 1), trained, tuple(pilots), M0=M0, k=k)

    def with_pilots(self, pilots: Sequence[float]) -> "StrategyParams":
        return StrategyParams(self.kind, self.M_L, self.trained, tuple(pilots), self.M0, self.k)


@dataclass(frozen=True)
class TrainingOverhead:
    response: float
    feedback: float
    pilots: float

    @property
    def total(self) -> float:
        return self.response + self.feedback + self.pilots


def general_training_overhead(tau: float, delta: float, T_p: float,
                              trained: Sequence[int], pilots: Sequence[float]) -> TrainingOverhead:
    """T_t = tau + L*delta + sum_l (tau + T_p N_l) M~_l, split into its terms."""
    return TrainingOverhead(
        response=tau * (1 + sum(trained)),
        feedback=len(trained) * delta,
        pilots=T_p * sum(n * m for n, m in zip(pilots, trained)),
    )


def training_overhead(sp: StrategyParams, tc: TimingConfig) -> TrainingOverhead:
    return general_training_overhead(
        tc.ris_response_time, tc.feedback_delay, tc.pilot_symbol_duration, sp.trained, sp.pilots
    )


def pilot_factor(trained: int, gamma_min: float, gamma_star: float) -> float:
    """Pilot-symbol factor chi = M~ * max(1, gamma_min / gamma*) (unrounded)."""
    return trained * max(1.0, gamma_min / gamma_star)


def level_pilots(cfg: SystemConfig, grid: SubareaGrid, kappa: float = 1.0,
                 R_r: float | None = None) -> tuple[int, OverheadRegime, Regime]:
    """Pilots needed at one codebook level.  The transition regime uses the
    wide-beam (lower) SNR, i.e. the conservative pilot count."""
    regime = classify_regime(cfg, grid, kappa).classification
    gamma = snr_scaling(cfg, grid, regime, R_r)
    if regime is Regime.TRANSITION:
        gamma = gamma[0]
    n, oreg = min_pilots(cfg.min_training_snr, gamma)
    return n, oreg, regime


def resolve_pilots(cfg: SystemConfig, sp: StrategyParams, kappa: float = 1.0,
                   splits: dict | None = None) -> StrategyParams:
    """Replace ``sp.pilots`` by the per-level minimum pilot counts."""
    splits = splits or {}
    counts = []
    for l, M in enumerate(sp.level_sizes):
        grid = level_grid(cfg, M, l + 1, splits.get(M))
        counts.append(level_pilots(cfg, grid, kappa)[0])
    return sp.with_pilots(counts)


def path_ratio(grid_top: SubareaGrid, area_extent) -> float:
    """C = sqrt((A_y M_Lx)^2 + (A_z M_Ly)^2)."""
    A_y, A_z = area_extent
    return math.hypot(A_y * grid_top.M_x, A_z * grid_top.M_y)


@dataclass(frozen=True)
class FrameTiming:
    frame: float
    subframe: float
    C: float


def frame_durations(tc: TimingConfig, grid_top: SubareaGrid, area_extent, wavelength: float) -> FrameTiming:
    C = path_ratio(grid_top, area_extent)
    v = tc.velocity
    if v == 0:
        return FrameTiming(math.inf, math.inf, C)
    return FrameTiming(tc.frame_factor * C / (v * grid_top.size), _SUBFRAME_CONSTANT * wavelength / v, C)


def estimation_fraction(tc: TimingConfig, wavelength: float) -> float:
    """eps_e = T_e / T_sf."""
    return tc.estimation_overhead * _ESTIMATION_CONSTANT * tc.velocity / wavelength


@dataclass(frozen=True)
class OverallOverhead:
    sigma: float
    raw: float
    eps_e: float
    beta: float
    frame: float
    infeasible: bool


def overall_overhead(T_t: float, tc: TimingConfig, grid_top: SubareaGrid, area_extent,
                     wavelength: float) -> OverallOverhead:
    """sigma = beta M_L T_t + eps_e, clamped to [0, 1].

    ``infeasible`` flags frames with no time left for data
    (T_f <= T_t + T_e); their ``sigma`` is reported as 1.
    """
    if T_t < 0:
        raise ValueError("T_t must be nonnegative")
    timing = frame_durations(tc, grid_top, area_extent, wavelength)
    eps = estimation_fraction(tc, wavelength)
    beta = tc.velocity * (1 - eps) / (tc.frame_factor * timing.C)
    raw = beta * grid_top.size * T_t + eps
    infeasible = timing.frame <= T_t + tc.estimation_overhead
    sigma = 1.0 if infeasible else min(1.0, max(0.0, raw))
    return OverallOverhead(sigma, raw, eps, beta, timing.frame, infeasible)


def overhead_integer_subframes(T_t: float, tc: TimingConfig, grid_top: SubareaGrid, area_extent,
                               wavelength: float) -> float:
    """Overall overhead with floor((T_f - T_t)/T_sf) subframes (at least one).

    The leftover fraction of a subframe is merged into the last subframe.
    """
    timing = frame_durations(tc, grid_top, area_extent, wavelength)
    if math.isinf(timing.frame):
        return 0.0
    n_sf = max(1, math.floor((timing.frame - T_t) / timing.subframe))
    return min(1.0, (T_t + n_sf * tc.estimation_overhead) / timing.frame)


@dataclass(frozen=True)
class ParabolaCoeffs:
    a: float
    b: float

    def sigma(self, v):
        return (self.a + self.b) * v - self.a * self.b * v**2

    def slope(self, v):
        return self.a + self.b - 2 * self.a * self.b * v

    @property
    def vertex(self) -> float:
        return (self.a + self.b) / (2 * self.a * self.b)

    @property
    def peak(self) -> float:
        return (self.a + self.b) ** 2 / (4 * self.a * self.b)

    def roots(self, rho: float) -> tuple[float, float]:
        s, p = self.a + self.b, self.a * self.b
        disc = math.sqrt(s * s - 4 * p * rho)
        # stable lower root
        lower = 2 * rho / (s + disc) if rho > 0 else 0.0
        return lower, (s + disc) / (2 * p)


def parabola_coeffs(T_t: float, tc: TimingConfig, grid_top: SubareaGrid, area_extent,
                    wavelength: float) -> ParabolaCoeffs:
    if not (T_t > 0 and tc.estimation_overhead > 0):
        raise ValueError("parabola needs T_t > 0 and T_e > 0")
    C = path_ratio(grid_top, area_extent)
    a = grid_top.size * T_t / (tc.frame_factor * C)
    b = tc.estimation_overhead * _ESTIMATION_CONSTANT / wavelength
    return ParabolaCoeffs(a, b)


def velocity_bound(coeffs: ParabolaCoeffs, rho: float) -> float:
    """Largest velocity with sigma(v) < rho (lower root of sigma(v) = rho)."""
    if not 0 <= rho < 1:
        raise ValueError("rho must lie in [0, 1)")
    return coeffs.roots(rho)[0]


def training_overhead_bound(tc: TimingConfig, L: int, M_L: int, N_L: float) -> float:
    """T_bound = 1.25 N_L M_L T_p + (1 + M_L) tau + L delta."""
    return (HS_BOUND_FACTOR * N_L * M_L * tc.pilot_symbol_duration
            + (1 + M_L) * tc.ris_response_time + L * tc.feedback_delay)


@dataclass(frozen=True)
class GeneralBound:
    T_bound: float
    v_bar: float
    coeffs: ParabolaCoeffs


def overhead_upper_bound(tc: TimingConfig, M0: int, k: int, L: int, N_L: float,
                         grid_top: SubareaGrid, area_extent, wavelength: float,
                         rho: float = 0.1) -> GeneralBound:
    """Strategy-independent overhead bound and velocity bound v_bar."""
    # the 1.25 factor needs k >= 2 and M0 >= 8 (strict at M0 = 8 via the -1
    # in the geometric partial sum)
    if not (M0 >= 8 and k >= 2):
        raise ValueError("bound requires M0 >= 8 and k >= 2")
    M_L = M0 * k ** (L - 1)
    if grid_top.size != M_L:
        raise ValueError("grid_top does not match M0 * k**(L-1)")
    T_bound = training_overhead_bound(tc, L, M_L, N_L)
    coeffs = parabola_coeffs(T_bound, tc, grid_top, area_extent, wavelength)
    return GeneralBound(T_bound, velocity_bound(coeffs, rho), coeffs)


def feedback_delay_bound(sp_hs: StrategyParams, tc: TimingConfig, N_L: float | None = None) -> float:
    """Feedback delay above which FS has lower overhead than HS."""
    if sp_hs.L <= 1:
        raise ValueError("feedback-delay bound needs L > 1")
    N_L = sp_hs.pilots[-1] if N_L is None else N_L
    return (sp_hs.M_L - sp_hs.total_trained) / (sp_hs.L - 1) * (
        tc.ris_response_time + tc.pilot_symbol_duration * N_L)


@dataclass(frozen=True)
class OverheadBreakdown:
    kind: Strategy
    training: TrainingOverhead
    overall: OverallOverhead
    regimes: tuple[str, ...] = field(default=())

    CSV_HEADER = ("strategy", "response_s", "feedback_s", "pilots_s", "T_t_s", "eps_e", "sigma", "infeasible")

    @property
    def T_t(self) -> float:
        return self.training.total

    @property
    def sigma(self) -> float:
        return self.overall.sigma

    def csv_row(self) -> list:
        t = self.training
        return [self.kind.value, t.response, t.feedback, t.pilots, t.total,
                self.overall.eps_e, self.overall.sigma, int(self.overall.infeasible)]


def breakdown(cfg: SystemConfig, sp: StrategyParams, tc: TimingConfig, grid_top: SubareaGrid,
              regimes: Sequence[str] = ()) -> OverheadBreakdown:
    training = training_overhead(sp, tc)
    overall = overall_overhead(training.total, tc, grid_top, cfg.area_extent, cfg.wavelength)
    return OverheadBreakdown(sp.kind, training, overall, tuple(regimes))
