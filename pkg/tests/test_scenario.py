import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from risbeam.scenario import (SystemConfig, TimingConfig, aod_to_point, check_pilot_bandwidth, db_to_linear,
                              dbm_to_watt, direction_cosines, factorize_level, in_area, kmh, level_grid,
                              partition_grid)

CFG = SystemConfig()


def test_unit_helpers():
    assert dbm_to_watt(30) == pytest.approx(1.0)
    assert db_to_linear(10) == pytest.approx(10.0)
    assert kmh(3.6) == pytest.approx(1.0)


def test_noise_power_default():
    # -174 dBm/Hz + 6 dB + 60 dB(Hz) = -108 dBm
    assert CFG.noise_power == pytest.approx(dbm_to_watt(-108.0), rel=1e-12)
    assert CFG.noise_power == pytest.approx(1.585e-14, rel=1e-3)


def test_default_geometry():
    assert CFG.side == 60
    assert CFG.wavelength == pytest.approx(0.0107069, rel=1e-5)
    assert CFG.bs_distance == pytest.approx(64.0312, rel=1e-5)
    assert CFG.area_center_distance == pytest.approx(102.4695, rel=1e-5)
    assert CFG.ucell_gain == pytest.approx(math.pi)


def test_invalid_q_rejected():
    with pytest.raises(ValueError, match="perfect square"):
        SystemConfig(num_unit_cells=3601)


def test_validate_collects_all_errors():
    cfg = object.__new__(SystemConfig)
    for f, v in vars(CFG).items():
        object.__setattr__(cfg, f, v)
    object.__setattr__(cfg, "num_unit_cells", 10)
    object.__setattr__(cfg, "tx_power", -1.0)
    errs = cfg.validate()
    assert len(errs) == 2


def test_timing_rejects_negative():
    with pytest.raises(ValueError, match="ris_response_time"):
        TimingConfig(ris_response_time=-1e-6)


def test_pilot_bandwidth_check():
    check_pilot_bandwidth(CFG, TimingConfig())
    with pytest.raises(ValueError):
        check_pilot_bandwidth(CFG, TimingConfig(pilot_symbol_duration=2e-6))


@pytest.mark.parametrize("M,split", [(1, (1, 1)), (8, (2, 4)), (32, (4, 8)), (128, (8, 16)),
                                     (512, (16, 32)), (2048, (32, 64))])
def test_factorize_gives_square_cells(M, split):
    assert factorize_level(M, CFG.area_extent) == split


def test_partition_centers_and_diameter():
    g = partition_grid(CFG, 2, 4)
    # z centers 87.5, 112.5; y centers -57.5, -32.5, -7.5, 17.5
    assert sorted(set(g.centers[:, 2])) == pytest.approx([87.5, 112.5])
    assert sorted(set(g.centers[:, 1])) == pytest.approx([-57.5, -32.5, -7.5, 17.5])
    assert np.all(g.centers[:, 0] == -10)
    assert g.diameter == pytest.approx(math.hypot(25, 25))


def test_single_subarea_is_whole_area():
    g = level_grid(CFG, 1)
    assert g.centers[0] == pytest.approx(CFG.area_center)
    assert g.diameter == pytest.approx(math.hypot(100, 50))


@given(st.integers(1, 40), st.integers(1, 40))
def test_cells_tile_area(M_x, M_y):
    g = partition_grid(CFG, M_x, M_y)
    assert g.size == M_x * M_y
    total = sum((b[0][1] - b[0][0]) * (b[1][1] - b[1][0]) for b in map(g.bounds, range(g.size)))
    assert total == pytest.approx(CFG.area)
    for m in range(0, g.size, max(1, g.size // 7)):
        assert g.locate(g.centers[m]) == m
        assert g.unravel(g.index(*g.unravel(m))) == g.unravel(m)


def test_aod_and_direction_cosines():
    th, ph = aod_to_point((0, 0, 5))
    assert th == 0
    th, ph = aod_to_point((1, 0, 0))
    assert th == pytest.approx(math.pi / 2) and ph == pytest.approx(0)
    p = np.array([-10.0, -20.0, 100.0])
    th, ph = aod_to_point(p)
    u = direction_cosines(p)[0]
    assert u == pytest.approx([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph)])


def test_in_area():
    assert in_area(CFG, CFG.area_center)
    assert not in_area(CFG, (-10, 40, 100))
