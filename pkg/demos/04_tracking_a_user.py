"""
Following a moving user with FS, HS and TS
==========================================

Simulates a walk through the coverage area and compares the effective rate
of the three training strategies.  The same traces are then re-timed for a
slow surface, which changes only the overhead.
"""

import numpy as np

from risbeam.mobility import generate_trajectory
from risbeam.scenario import SystemConfig, TimingConfig, kmh
from risbeam.simulator import SimSettings, Setup, make_setup, retime, run_experiment, summaries_from

cfg = SystemConfig()
tc = TimingConfig(ris_response_time=1e-6, velocity=kmh(3))
setup = make_setup(cfg, tc, M0=8, k=4, L=4, pilots=8, settings=SimSettings(data_samples=2))
traj = generate_trajectory(cfg, 1000.0, tc.velocity, seed=7)
print(f"trajectory: {len(traj.waypoints) - 1} segments, {traj.total_length:.0f} m")

summ, traces = run_experiment(setup, traj, num_channel_draws=2, master_seed=7, max_frames=40)
print(f"\n{'':4}{'rate':>8}{'sigma':>9}{'reliab.':>9}{'wrong':>7}")
for name, s in summ.items():
    print(f"{name:4}{s.rate:8.3f}{s.mean_sigma:9.4f}{s.reliability:9.3f}{s.misselected:7d}")
print(f"focusing upper bound {summ['FS'].rate_focus:.3f} bit/s/Hz")

# Seeds and frame positions do not depend on the timing, so a 1 ms RIS
# response time at 100 km/h only re-accounts the overhead of the same frames.
slow = Setup(cfg, TimingConfig(ris_response_time=1e-3, velocity=kmh(100)), setup.hierarchy, setup.strategies,
             setup.settings)
slow_summ = summaries_from(slow, retime(slow, traces), 7)
print("\n1 ms response, 100 km/h:", {k: round(v.rate, 3) for k, v in slow_summ.items()})
print("frames without time for data:", {k: v.infeasible for k, v in slow_summ.items()})

# trained top-level codewords per strategy
print("\nHS level picks of the first frame:", next(r.levels for r in traces if r.strategy == "HS"))
print("TS selections, first 10 frames:", [r.m_star for r in traces if r.strategy == "TS"][:10])
