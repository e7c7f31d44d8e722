"""Monte-Carlo beam-training engine.

A run walks frames of duration T_f along one user trajectory.  Each
channel draw is an independent chain of frames (tracking search keeps its
last selection along the chain).  Within a frame all strategies see the
same channel realization; only pilot noise differs between them.

Throughout, the cascaded coefficients are scaled by sqrt(P G_t G_r / sigma^2)
so that |codeword gain|^2 is the per-symbol SNR and matched-filter noise
has unit variance per pilot symbol.
"""

from __future__ import annotations

import csv
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .analytic import snr_scaling
from .channel import RicianParams, bs_precoder, cascade, generate_channels
from .codebook import (CodebookLevel, HierarchicalCodebook, build_hierarchy, narrow_beam_codeword,
                       ts_neighborhood)
from .mobility import Trajectory, generate_trajectory
from .overhead import (Strategy, StrategyParams, breakdown, overhead_integer_subframes,
                       resolve_pilots)
from .scenario import SystemConfig, TimingConfig, aod_to_point, level_grid

_STRATEGY_CODE = {Strategy.FS: 1, Strategy.HS: 2, Strategy.TS: 3}
_TRAJECTORY_KEY = 1_000_003
_ANGLE_KEY = 1_000_033


@dataclass(frozen=True)
class SimSettings:
    """Knobs of the Monte-Carlo engine.

    ``noise_scale`` multiplies the pilot-noise amplitude (0 = noiseless).
    ``data_samples`` is the number of slice midpoints of the frame at which
    the data SNR is evaluated (0 = frame start only).
    ``ts_reinit_period`` > 0 re-initializes TS by a full search every that
    many frames.
    """

    rician: RicianParams = RicianParams()
    noise_scale: float = 1.0
    data_samples: int = 4
    genie_selection: bool = False
    ts_reinit_period: int = 0
    integer_subframes: bool = False
    kappa: float = 1.0


@dataclass
class Setup:
    """Everything shared read-only by all trials of one experiment."""

    cfg: SystemConfig
    tc: TimingConfig
    hierarchy: HierarchicalCodebook
    strategies: dict
    settings: SimSettings = SimSettings()
    sigma: dict = field(default_factory=dict)
    T_t: dict = field(default_factory=dict)
    infeasible: dict = field(default_factory=dict)

    @property
    def top(self) -> CodebookLevel:
        return self.hierarchy.top

    def __post_init__(self):
        grid = self.top.grid
        sps = dict(self.strategies)
        sps.setdefault("FS_init", StrategyParams.fs(grid.size, _top_pilots(self.strategies)))
        for key, sp in sps.items():
            b = breakdown(self.cfg, sp, self.tc, grid)
            self.T_t[key] = b.T_t
            self.infeasible[key] = b.overall.infeasible
            if self.settings.integer_subframes and not b.overall.infeasible:
                self.sigma[key] = overhead_integer_subframes(b.T_t, self.tc, grid, self.cfg.area_extent,
                                                             self.cfg.wavelength)
            else:
                self.sigma[key] = b.sigma


def _top_pilots(strategies) -> float:
    return max(sp.pilots[-1] for sp in strategies.values())


def make_setup(cfg: SystemConfig, tc: TimingConfig, M0: int, k: int, L: int, kinds=("FS", "HS", "TS"),
               pilots=None, settings: SimSettings = SimSettings()) -> Setup:
    """Build codebooks and strategy parameters.

    ``pilots`` is None (minimum pilots from the SNR scaling laws), a number
    (same N at every level) or a per-level sequence for HS (FS/TS use the
    last entry).
    """
    hierarchy = build_hierarchy(cfg, M0, k, L, settings.kappa)
    M_L = hierarchy.top.size
    strategies = {}
    for kind in kinds:
        kind = Strategy(kind.upper()) if isinstance(kind, str) else kind
        if kind is Strategy.FS:
            sp = StrategyParams.fs(M_L)
        elif kind is Strategy.TS:
            sp = StrategyParams.ts(M_L)
        else:
            sp = StrategyParams.hs(M0, k, L)
        if pilots is None:
            splits = {lev.size: (lev.grid.M_x, lev.grid.M_y) for lev in hierarchy.levels}
            sp = resolve_pilots(cfg, sp, settings.kappa, splits)
        else:
            seq = [pilots] * L if np.ndim(pilots) == 0 else list(pilots)
            sp = sp.with_pilots(seq if kind is Strategy.HS else [seq[-1]])
        strategies[kind] = sp
    return Setup(cfg, tc, hierarchy, strategies, settings)


def simulate_training_level(level: CodebookLevel, e: np.ndarray, subset, pilots: float,
                            rng: np.random.Generator, noise_scale: float = 1.0):
    """Sweep the codewords in ``subset`` with ``pilots`` symbols each.

    Returns the selected codeword index and the matched-filter powers
    |s^H y_m|^2 in units of the noise power per symbol; without noise these
    equal ``pilots**2 * gamma_m``.  Ties go to the first entry of ``subset``.
    """
    subset = np.asarray(subset, dtype=int)
    if subset.size == 0:
        raise ValueError("empty codeword set")
    z = pilots * level.gains(e, subset)
    if noise_scale > 0:
        w = rng.standard_normal(subset.size) + 1j * rng.standard_normal(subset.size)
        z = z + noise_scale * math.sqrt(pilots / 2) * w
    powers = np.abs(z) ** 2
    return int(subset[int(np.argmax(powers))]), powers


@dataclass(frozen=True)
class FrameResult:
    frame: int
    draw: int
    strategy: str
    position: tuple
    m_star: int
    m_opt: int
    gamma_d: float
    gamma_cb: float
    gamma_focus: float
    gamma_d0: float
    gamma_cb0: float
    rate: float
    spectral: float
    rate_focus: float
    T_t: float
    sigma: float
    init: bool
    infeasible: bool
    levels: tuple = ()

    @property
    def ratio(self) -> float:
        return self.gamma_d0 / self.gamma_cb0 if self.gamma_cb0 > 0 else 1.0


TRACE_COLUMNS = [f.name for f in fields(FrameResult)]


@dataclass
class FrameChannel:
    """Per-frame quantities shared by all strategies."""

    e: np.ndarray
    gains_top: np.ndarray
    m_opt: int
    data_e: list
    gamma_focus: np.ndarray
    position: tuple


def _focus_gain(cfg: SystemConfig, e: np.ndarray, position) -> complex:
    cw = narrow_beam_codeword(cfg, aod_to_point(position))
    return complex(np.exp(1j * (cw.px[:, None] + cw.py[None, :])).ravel() @ e)


def _data_positions(traj: Trajectory, s0: float, T_f: float, v: float, n: int):
    """Midpoints of ``n`` equal slices of the frame (frame start if n = 0)."""
    if n <= 0 or not math.isfinite(T_f):
        return [traj.position_at(s0)]
    t = (np.arange(n) + 0.5) * T_f / n
    return [traj.position_at(min(s0 + v * ti, traj.total_length)) for ti in t]


def prepare_frame(setup: Setup, traj: Trajectory, s0: float, T_f: float, seed_ch, angle_seed) -> FrameChannel:
    cfg, st = setup.cfg, setup.settings
    f = bs_precoder(cfg, st.rician.omega)
    pos = traj.position_at(s0)
    angle_rng = None if st.rician.redraw_nlos_angles else np.random.default_rng(angle_seed)
    ch = generate_channels(cfg, st.rician, pos, seed_ch, angle_rng)
    e = cascade(cfg, ch, f)
    gains = setup.top.gains(e)
    m_opt = int(np.argmax(np.abs(gains)))
    data_pos = _data_positions(traj, s0, T_f, setup.tc.velocity, st.data_samples)
    data_e = [cascade(cfg, ch.moved_to(cfg, p), f) for p in data_pos]
    focus = np.array([abs(_focus_gain(cfg, de, p)) ** 2 for de, p in zip(data_e, data_pos)])
    return FrameChannel(e, gains, m_opt, data_e, focus, tuple(float(c) for c in pos))


def run_frame(setup: Setup, kind, fc: FrameChannel, rng: np.random.Generator, prev: int | None = None,
              frame: int = 0, draw: int = 0) -> FrameResult:
    """Train one strategy on a prepared frame and account for its data rate."""
    kind = Strategy(kind)
    st, top = setup.settings, setup.top
    sp = setup.strategies[kind]
    key, init, levels = kind, False, ()
    if st.genie_selection:
        m_star = fc.m_opt
    elif kind is Strategy.FS or (kind is Strategy.TS and (
            prev is None or (st.ts_reinit_period > 0 and frame % st.ts_reinit_period == 0))):
        if kind is Strategy.TS:
            key, init = "FS_init", True
        m_star, _ = simulate_training_level(top, fc.e, np.arange(top.size), sp.pilots[-1], rng, st.noise_scale)
    elif kind is Strategy.TS:
        cand = np.concatenate([[prev], ts_neighborhood(top.grid, prev)])
        m_star, _ = simulate_training_level(top, fc.e, cand, sp.pilots[0], rng, st.noise_scale)
    else:
        h = setup.hierarchy
        subset = np.arange(h.levels[0].size)
        picks = []
        for l, lev in enumerate(h.levels):
            m, _ = simulate_training_level(lev, fc.e, subset, sp.pilots[l], rng, st.noise_scale)
            picks.append(m)
            if l + 1 < h.L:
                subset = h.children(l + 1, m)
        m_star, levels = picks[-1], tuple(picks)
    if kind is Strategy.TS and st.genie_selection and prev is None:
        key, init = "FS_init", True

    sigma, T_t, infeasible = setup.sigma[key], setup.T_t[key], setup.infeasible[key]
    g_d = np.array([abs(top.gains(de, [m_star])[0]) ** 2 for de in fc.data_e])
    g_cb = np.array([abs(top.gains(de, [fc.m_opt])[0]) ** 2 for de in fc.data_e])
    spectral = float(np.mean(np.log2(1 + g_d)))
    return FrameResult(
        frame=frame, draw=draw, strategy=kind.value, position=fc.position, m_star=int(m_star),
        m_opt=fc.m_opt, gamma_d=float(g_d.mean()), gamma_cb=float(g_cb.mean()),
        gamma_focus=float(fc.gamma_focus.mean()), gamma_d0=float(abs(fc.gains_top[m_star]) ** 2),
        gamma_cb0=float(abs(fc.gains_top[fc.m_opt]) ** 2), rate=(1 - sigma) * spectral, spectral=spectral,
        rate_focus=float(np.mean(np.log2(1 + fc.gamma_focus))), T_t=T_t, sigma=sigma, init=init,
        infeasible=infeasible, levels=levels,
    )


@dataclass(frozen=True)
class RunSummary:
    strategy: str
    rate: float
    rate_halfwidth: float
    rate_focus: float
    mean_sigma: float
    reliability: float
    reliability_halfwidth: float
    misselected: int
    infeasible: int
    frames: int
    draws: int
    gamma_d: float
    gamma_cb: float
    gamma_focus: float
    seed: int
    config: dict = field(default_factory=dict, repr=False)


def _halfwidth(per_draw: np.ndarray) -> float:
    if per_draw.size < 2:
        return float("nan")
    return float(1.96 * per_draw.std(ddof=1) / math.sqrt(per_draw.size))


def summarize(results: list, seed: int, config: dict | None = None) -> RunSummary:
    """Aggregate the frame results of one strategy."""
    rates = np.array([r.rate for r in results])
    draws = np.array([r.draw for r in results])
    ratio = np.array([r.ratio for r in results])
    ids = np.unique(draws)
    per_rate = np.array([rates[draws == d].mean() for d in ids])
    per_rel = np.array([ratio[draws == d].mean() for d in ids])
    # with one chain the frames themselves are the samples
    if ids.size < 2:
        per_rate, per_rel = rates, ratio
    return RunSummary(
        strategy=results[0].strategy,
        rate=float(rates.mean()),
        rate_halfwidth=_halfwidth(per_rate),
        rate_focus=float(np.mean([r.rate_focus for r in results])),
        mean_sigma=float(np.mean([r.sigma for r in results])),
        reliability=float(ratio.mean()),
        reliability_halfwidth=_halfwidth(per_rel),
        misselected=int(sum(r.m_star != r.m_opt for r in results)),
        infeasible=int(sum(r.infeasible for r in results)),
        frames=len({r.frame for r in results}),
        draws=int(ids.size),
        gamma_d=float(np.mean([r.gamma_d for r in results])),
        gamma_cb=float(np.mean([r.gamma_cb for r in results])),
        gamma_focus=float(np.mean([r.gamma_focus for r in results])),
        seed=seed,
        config=dict(config or {}),
    )


def frame_schedule(setup: Setup, traj: Trajectory, max_frames: int | None = None, spread: bool = False):
    """Start arc lengths of the frames and the frame duration.

    With ``spread`` the ``max_frames`` frames are picked evenly over the
    whole trajectory instead of taking the first ones (position-averaged
    metrics; not meaningful for tracking search, which needs consecutive
    frames).
    """
    from .overhead import frame_durations

    timing = frame_durations(setup.tc, setup.top.grid, setup.cfg.area_extent, setup.cfg.wavelength)
    T_f, v = timing.frame, setup.tc.velocity
    if not math.isfinite(T_f) or v == 0:
        n = max_frames or 1
        return np.zeros(n), T_f
    step = v * T_f
    n = max(1, int(traj.total_length // step))
    idx = np.arange(n)
    if max_frames is not None and max_frames < n:
        idx = np.linspace(0, n - 1, max_frames).round().astype(int) if spread else idx[:max_frames]
    return idx * step, T_f


def run_chain(setup: Setup, traj: Trajectory, draw: int, master_seed: int, starts, T_f: float,
              kinds=None) -> list:
    """All frames of one channel-draw chain for every strategy."""
    kinds = list(setup.strategies) if kinds is None else [Strategy(k) for k in kinds]
    prev = {k: None for k in kinds}
    out = []
    angle_seed = np.random.SeedSequence(master_seed, spawn_key=(_ANGLE_KEY, draw))
    for i, s0 in enumerate(starts):
        seed_ch = np.random.SeedSequence(master_seed, spawn_key=(draw, i, 0))
        fc = prepare_frame(setup, traj, float(s0), T_f, seed_ch, angle_seed)
        for kind in kinds:
            rng = np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(draw, i, _STRATEGY_CODE[kind])))
            res = run_frame(setup, kind, fc, rng, prev[kind], i, draw)
            prev[kind] = res.m_star
            out.append(res)
    return out


def _chain_task(args):
    return run_chain(*args)


def run_experiment(setup: Setup, trajectory: Trajectory | None = None, num_channel_draws: int = 1,
                   master_seed: int = 0, max_frames: int | None = None, total_length: float = 1000.0,
                   workers: int = 1, progress: bool = False, spread: bool = False):
    """Run every strategy of ``setup`` and return ``(summaries, traces)``.

    ``summaries`` maps strategy name to :class:`RunSummary`; ``traces`` is
    the list of all :class:`FrameResult` objects ordered by (draw, frame).
    """
    if trajectory is None:
        trajectory = generate_trajectory(setup.cfg, total_length, setup.tc.velocity,
                                         np.random.SeedSequence(master_seed, spawn_key=(_TRAJECTORY_KEY,)))
    starts, T_f = frame_schedule(setup, trajectory, max_frames, spread)
    tasks = [(setup, trajectory, d, master_seed, starts, T_f) for d in range(num_channel_draws)]
    traces = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for d, chunk in enumerate(pool.map(_chain_task, tasks)):
                traces.extend(chunk)
                if progress:
                    print(f"draw {d + 1}/{num_channel_draws}", file=sys.stderr)
    else:
        for d, task in enumerate(tasks):
            traces.extend(_chain_task(task))
            if progress:
                print(f"draw {d + 1}/{num_channel_draws}", file=sys.stderr)
    return summaries_from(setup, traces, master_seed), traces


def retime(setup: Setup, traces: list) -> list:
    """Re-account traces for the timing of ``setup``.

    Seeds do not depend on timing parameters and the distance walked per
    frame (alpha*C/M_L) does not depend on velocity, so a run under other
    tau, delta, T_e or v selects exactly the same codewords; only the
    overhead changes.
    """
    from dataclasses import replace

    out = []
    for r in traces:
        key = "FS_init" if r.init else Strategy(r.strategy)
        sigma = setup.sigma[key]
        out.append(replace(r, sigma=sigma, T_t=setup.T_t[key], infeasible=setup.infeasible[key],
                           rate=(1 - sigma) * r.spectral))
    return out


def summaries_from(setup: Setup, traces: list, seed: int) -> dict:
    out = {}
    for kind in setup.strategies:
        res = [r for r in traces if r.strategy == kind.value]
        out[kind.value] = summarize(res, seed, {"pilots": setup.strategies[kind].pilots,
                                                "M_L": setup.top.size})
    return out


def write_traces(traces: list, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for r in traces:
            row = []
            for name in TRACE_COLUMNS:
                val = getattr(r, name)
                if isinstance(val, tuple):
                    val = " ".join(f"{x:.6g}" if isinstance(x, float) else str(x) for x in val)
                elif isinstance(val, float):
                    val = repr(val)
                row.append(val)
            w.writerow(row)


def calibrate_gamma_min(cfg: SystemConfig, tc: TimingConfig, sizes=(8, 32, 128, 512, 2048),
                        draws: int = 4, max_frames: int = 50, threshold: float = 0.9,
                        seed: int = 0, settings: SimSettings = SimSettings()):
    """Bracket gamma_min from simulated single-pilot reliability.

    For each level size the FS reliability with one pilot is simulated.
    Sizes meeting ``threshold`` must be IOR (gamma* >= gamma_min) and the
    others DOR, so gamma_min lies in (max gamma* over failing sizes,
    min gamma* over passing sizes].  Returns ``(lo, hi, suggestion,
    reliabilities)`` with the geometric mean as suggestion; the bracket is
    empty (lo >= hi) when the simulated boundary is not monotone in M.
    """
    rel, gstar = {}, {}
    for M in sizes:
        setup = make_setup(cfg, tc, M, 4, 1, kinds=("FS",), pilots=1, settings=settings)
        summ, _ = run_experiment(setup, num_channel_draws=draws, master_seed=seed, max_frames=max_frames)
        rel[M] = summ["FS"].reliability
        grid = level_grid(cfg, M)
        gstar[M] = snr_scaling(cfg, grid, setup.top.regime)
        if isinstance(gstar[M], tuple):
            gstar[M] = gstar[M][0]
    passing = [gstar[M] for M in sizes if rel[M] >= threshold]
    failing = [gstar[M] for M in sizes if rel[M] < threshold]
    lo = max(failing) if failing else 0.0
    hi = min(passing) if passing else math.inf
    if lo > 0 and math.isfinite(hi):
        suggestion = math.sqrt(lo * hi)
    else:
        suggestion = hi if lo == 0 else lo * 2
    return lo, hi, suggestion, rel
