"""
How much of a frame goes to beam training?
==========================================

Frame length follows from how long the user stays inside one subarea.
The overall overhead is a parabola in the user velocity, which gives a
velocity bound below which training costs less than 10 % of the time.
"""

import numpy as np

from risbeam.overhead import (StrategyParams, feedback_delay_bound, frame_durations, overall_overhead,
                              overhead_upper_bound, parabola_coeffs, training_overhead)
from risbeam.scenario import SystemConfig, TimingConfig, kmh, level_grid

cfg = SystemConfig()
grid = level_grid(cfg, 512)
tc = TimingConfig(ris_response_time=1e-6, velocity=kmh(3))

ft = frame_durations(tc, grid, cfg.area_extent, cfg.wavelength)
print(f"M_L = 512 at 3 km/h: frame {ft.frame * 1e3:.1f} ms, subframe {ft.subframe * 1e3:.2f} ms")

# training time of the three strategies, 8 pilots per codeword
sps = {"FS": StrategyParams.fs(512, 8), "HS": StrategyParams.hs(8, 4, 4, 8), "TS": StrategyParams.ts(512, 8)}
for name, sp in sps.items():
    T_t = training_overhead(sp, tc).total
    o = overall_overhead(T_t, tc, grid, cfg.area_extent, cfg.wavelength)
    print(f"{name}: T_t = {T_t * 1e3:.3f} ms, sigma = {o.sigma:.4f}")

# sigma(v) = (a + b) v - a b v^2 ; the peak of the parabola is at least 1,
# i.e. every strategy eventually runs out of time for data
pc = parabola_coeffs(training_overhead(sps["FS"], tc).total, tc, grid, cfg.area_extent, cfg.wavelength)
v = np.array([1, 10, 50, 100, 200]) / 3.6
print("\nFS overhead vs velocity:", np.round(pc.sigma(v), 4), f"(peak {pc.peak:.2f} at {pc.vertex * 3.6:.0f} km/h)")

# strategy-independent velocity bound
for tau in (1e-6, 1e-3):
    b = overhead_upper_bound(TimingConfig(ris_response_time=tau), 8, 4, 4, 8, grid, cfg.area_extent,
                             cfg.wavelength, rho=0.1)
    print(f"tau = {tau * 1e6:g} us: T_bound {b.T_bound * 1e3:.3f} ms, sigma < 0.1 for v < {b.v_bar * 3.6:.2f} km/h")

# feedback delay above which exhaustive search beats the tree search
for tau in (1e-6, 30e-6):
    db = feedback_delay_bound(StrategyParams.hs(8, 4, 4, 4), TimingConfig(ris_response_time=tau))
    print(f"tau = {tau * 1e6:g} us: FS has less overhead than HS once delta > {db * 1e3:.2f} ms")
