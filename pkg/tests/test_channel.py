import math

import numpy as np
import pytest

from risbeam.analytic import snr_constants
from risbeam.channel import (RicianParams, RisReflection, array_response, bs_precoder, cascade,
                             end_to_end_gain, free_space_gain, generate_channels)
from risbeam.codebook import narrow_beam_codeword
from risbeam.scenario import SystemConfig, aod_to_point

CFG = SystemConfig()
SMALL = SystemConfig(num_unit_cells=64, num_bs_antennas=4)
USER = np.array(CFG.area_center)


@pytest.mark.parametrize("kind", ["ris_arrival", "ris_departure", "bs"])
def test_broadside_all_ones(kind):
    a = array_response(kind, CFG, 0.0, 0.0)
    assert np.allclose(a, 1.0)
    n = CFG.num_bs_antennas if kind == "bs" else CFG.num_unit_cells
    assert np.vdot(a, a).real == pytest.approx(n)


def test_unit_modulus_and_self_product():
    a = array_response("ris_departure", CFG, 0.7, 1.9)
    assert np.allclose(np.abs(a), 1.0)
    assert np.vdot(a, a).real == pytest.approx(CFG.num_unit_cells)
    batch = array_response("ris_arrival", CFG, np.array([0.1, 0.2]), np.array([0.3, 0.4]))
    assert batch.shape == (2, CFG.num_unit_cells)
    assert np.allclose(batch[1], array_response("ris_arrival", CFG, 0.2, 0.4))


def test_array_kind_rejected():
    with pytest.raises(ValueError):
        array_response("ula", CFG, 0.0, 0.0)


def test_huge_k_is_los():
    ch = generate_channels(SMALL, RicianParams(K_i=1e12, K_r=1e12), USER, seed=3)
    ratio = np.linalg.norm(ch.H_nlos) ** 2 / np.linalg.norm(ch.H_los) ** 2
    assert ratio < 1e-6
    assert np.linalg.norm(ch.h_nlos) ** 2 / np.linalg.norm(ch.h_los) ** 2 < 1e-6


def test_zero_paths_gives_zero_nlos():
    ch = generate_channels(SMALL, RicianParams(C_i=0, C_r=0), USER, seed=1)
    assert not ch.H_nlos.any() and not ch.h_nlos.any()


def test_nlos_energy_normalization():
    rp = RicianParams()
    vals = [np.linalg.norm(generate_channels(SMALL, rp, USER, seed=s).H_nlos) ** 2 / (64 * 4) for s in range(1000)]
    assert np.mean(vals) == pytest.approx(0.2, rel=0.05)


@pytest.mark.parametrize("C", [1, 3, 12])
def test_nlos_entry_variance_independent_of_paths(C):
    rp = RicianParams(K_i=4, C_i=C)
    samples = np.array([generate_channels(SMALL, rp, USER, seed=s).H_nlos[5, 2] for s in range(3000)])
    var = np.mean(np.abs(samples) ** 2)
    # 3 sigma band of the sample mean of |x|^2; heavier tails for few paths
    sd = np.std(np.abs(samples) ** 2) / math.sqrt(len(samples))
    assert abs(var - 0.2) < 3 * sd + 1e-3


def test_free_space_gain_example():
    # (0.010707 / (4 pi 102.47))^2 = (8.3150e-6)^2
    assert free_space_gain(102.47, 0.010707) == pytest.approx(6.914e-11, rel=1e-3)


def _aligned_phases(cfg, ch, user):
    """Cophase every cell: psi_q = -(arg of arrival and departure LoS terms)."""
    a_in = array_response("ris_arrival", cfg, *aod_to_point(cfg.bs_position))
    a_out = array_response("ris_departure", cfg, *aod_to_point(user))
    return -np.angle(a_in * np.conj(a_out))


def test_aligned_pure_los_closed_form():
    ch = generate_channels(CFG, RicianParams.pure_los(), USER, seed=0)
    f = bs_precoder(CFG)
    refl = RisReflection.from_config(CFG, _aligned_phases(CFG, ch, USER))
    h, gamma = end_to_end_gain(CFG, ch, refl, f)
    expected = math.sqrt(ch.eta_i * ch.eta_r) * CFG.ucell_gain * CFG.num_unit_cells * math.sqrt(CFG.num_bs_antennas)
    assert abs(h) == pytest.approx(expected, rel=1e-9)
    assert gamma == pytest.approx(CFG.link_snr_factor * expected**2, rel=1e-9)


def test_narrow_beam_matches_analytic_nbr():
    ch = generate_channels(CFG, RicianParams.pure_los(), USER, seed=0)
    cw = narrow_beam_codeword(CFG, aod_to_point(USER))
    _, gamma = end_to_end_gain(CFG, ch, RisReflection.from_config(CFG, cw.phases), bs_precoder(CFG))
    target = snr_constants(CFG).c_nb * CFG.num_unit_cells**2
    assert abs(10 * math.log10(gamma / target)) < 0.5


def test_global_phase_and_power_linearity():
    ch = generate_channels(SMALL, RicianParams(), USER, seed=7)
    f = bs_precoder(SMALL)
    rng = np.random.default_rng(0)
    psi = rng.uniform(0, 2 * math.pi, 64)
    g0 = end_to_end_gain(SMALL, ch, RisReflection.from_config(SMALL, psi), f)[1]
    g1 = end_to_end_gain(SMALL, ch, RisReflection.from_config(SMALL, psi + 1.234), f)[1]
    assert g1 == pytest.approx(g0, rel=1e-10)
    zero = end_to_end_gain(SMALL, ch, RisReflection.from_config(SMALL, np.zeros(64)), f)[1]
    shifted = end_to_end_gain(SMALL, ch, RisReflection.from_config(SMALL, np.full(64, 2.0)), f)[1]
    assert shifted == pytest.approx(zero, rel=1e-10)
    loud = SMALL.with_(tx_power=2 * SMALL.tx_power)
    g2 = end_to_end_gain(loud, ch, RisReflection.from_config(loud, psi), f)[1]
    assert g2 == pytest.approx(2 * g0, rel=1e-10)


def test_cascade_consistent_with_end_to_end():
    ch = generate_channels(SMALL, RicianParams(), USER, seed=11)
    f = bs_precoder(SMALL)
    psi = np.linspace(0, 6, 64)
    e = cascade(SMALL, ch, f)
    assert abs(np.sum(np.exp(1j * psi) * e)) ** 2 == pytest.approx(
        end_to_end_gain(SMALL, ch, RisReflection.from_config(SMALL, psi), f)[1], rel=1e-9)


def test_dimension_mismatch_rejected():
    ch = generate_channels(SMALL, RicianParams(), USER, seed=1)
    with pytest.raises(ValueError):
        end_to_end_gain(SMALL, ch, RisReflection.from_config(SMALL, np.zeros(63)), bs_precoder(SMALL))
    with pytest.raises(ValueError):
        end_to_end_gain(SMALL, ch, RisReflection.from_config(SMALL, np.zeros(64)), np.ones(3))


def test_seed_reuse_bit_identical():
    a = generate_channels(SMALL, RicianParams(), USER, seed=42)
    b = generate_channels(SMALL, RicianParams(), USER, seed=42)
    assert np.array_equal(a.H_i, b.H_i) and np.array_equal(a.h_r, b.h_r)
    c = generate_channels(SMALL, RicianParams(), USER, seed=43)
    assert not np.array_equal(a.H_i, c.H_i)


def test_moved_to_keeps_nlos_and_follows_user():
    ch = generate_channels(SMALL, RicianParams(), USER, seed=5)
    new = USER + np.array([0.0, 10.0, -5.0])
    moved = ch.moved_to(SMALL, new)
    assert np.array_equal(moved.h_nlos, ch.h_nlos)
    assert moved.eta_r == pytest.approx(free_space_gain(np.linalg.norm(new), SMALL.wavelength))
    fresh = generate_channels(SMALL, RicianParams(), new, seed=5)
    assert np.allclose(moved.h_los, fresh.h_los)
