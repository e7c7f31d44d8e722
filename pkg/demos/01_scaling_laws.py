"""
Which beam regime applies at each codebook level?
=================================================

Walks through the closed-form side of the package: beam width of the
surface, the wide/narrow beam classification of every level of the default
hierarchy, and the pilot count each level needs.
"""

import numpy as np

from risbeam.analytic import (beam_width, classify_regime, footprint_diameter, min_pilots, snr_constants,
                              snr_scaling)
from risbeam.scenario import SystemConfig, level_grid

cfg = SystemConfig()
print(f"wavelength {cfg.wavelength * 1e3:.3f} mm, {cfg.side}x{cfg.side} unit cells")

# A 60x60 surface has a 3 dB beam width of about 1.7 degrees, so the
# footprint at the coverage area is only a few metres wide.
print(f"beam width {np.degrees(beam_width(cfg.num_unit_cells)):.3f} deg, "
      f"footprint at the area center {footprint_diameter(cfg.area_center_distance, cfg.num_unit_cells)[1]:.2f} m")

# Subareas shrink by k = 4 per level.  Once a subarea is smaller than the
# footprint, widening the beam no longer helps and the SNR stops growing.
const = snr_constants(cfg)
print(f"\nwide-beam constant {const.c_wb:.3e}, narrow-beam SNR {10 * np.log10(const.c_nb * cfg.num_unit_cells**2):.2f} dB")
print(f"{'level':>5} {'M':>6} {'rhs WBR':>9} {'rhs NBR':>9} {'regime':>10} {'gamma* dB':>10} {'N':>3} {'':>4}")
for l in range(5):
    M = 8 * 4**l
    grid = level_grid(cfg, M, l + 1)
    rep = classify_regime(cfg, grid)
    g = snr_scaling(cfg, grid, rep.classification)
    g = g[0] if isinstance(g, tuple) else g
    n, oreg = min_pilots(cfg.min_training_snr, g)
    print(f"{l + 1:>5} {M:>6} {rep.rhs_wbr:>9.1f} {rep.rhs_nbr:>9.1f} {rep.classification.value:>10} "
          f"{10 * np.log10(g):>10.2f} {n:>3} {oreg.value:>4}")

# Levels that need more than one pilot per codeword sit in the
# "decreasing overhead" regime: going finer raises the per-codeword SNR and
# cuts the pilots needed.
