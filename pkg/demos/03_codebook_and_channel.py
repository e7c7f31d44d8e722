"""
Codewords, channels and what the user actually receives
=======================================================

Builds the codebook hierarchy, draws one Rician channel and compares the
SNR of the best codeword at each level with a beam focused on the user.
"""

import numpy as np

from risbeam.channel import RicianParams, bs_precoder, cascade, generate_channels
from risbeam.codebook import build_hierarchy, power_in_subarea
from risbeam.scenario import SystemConfig, aod_to_point, direction_cosines

cfg = SystemConfig()
h = build_hierarchy(cfg, M0=8, k=4, L=5)
for lev in h.levels:
    print(f"level {lev.level}: {lev.size:>5} codewords ({lev.grid.M_x} x {lev.grid.M_y}), "
          f"{lev.regime.value}, {lev.kinds.count('wide')} wide beams")

# The coverage plane is seen at grazing incidence: neighbouring subareas
# along z are very close in angle.
g3 = h.levels[2].grid
cz = direction_cosines(g3.centers[[g3.index(0, 0), g3.index(1, 0)]])
cy = direction_cosines(g3.centers[[g3.index(0, 0), g3.index(0, 1)]])
print(f"\nlevel-3 neighbours differ by {np.abs(np.diff(cz, axis=0)).max():.4f} (along z) and "
      f"{np.abs(np.diff(cy, axis=0)).max():.4f} (along y) in direction cosine")

# share of the reflected power that lands in the targeted subarea
lev = h.levels[0]
fr = [power_in_subarea(cfg, lev.codeword(m), lev.grid, m, n=801) for m in range(lev.size)]
print("level-1 power share per subarea:", np.round(fr, 2))

# one channel draw, user at the area center
user = np.array(cfg.area_center) + np.array([0.0, 7.0, -4.0])
ch = generate_channels(cfg, RicianParams(), user, seed=1)
e = cascade(cfg, ch, bs_precoder(cfg))
print(f"\nuser at {user}, direction {np.degrees(aod_to_point(user))} deg")
for lev in h.levels:
    g = np.abs(lev.gains(e)) ** 2
    print(f"level {lev.level}: best codeword {int(g.argmax()):>5}, SNR {10 * np.log10(g.max()):6.2f} dB")
