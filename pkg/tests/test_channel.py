import math

import numpy as np
import pytest

from ofec.channel import (GRAY_PAM4, ChannelModel, prefec_ber_theoretical, snr_for_ber,
                          transmit_hard)


def bits(n, seed=0):
    return np.random.default_rng(seed).integers(0, 2, n, dtype=np.uint8)


def test_gray_map_constant():
    # neighbouring amplitudes differ in exactly one bit
    order = sorted(GRAY_PAM4, key=GRAY_PAM4.get)
    for a, b in zip(order, order[1:]):
        assert sum(x != y for x, y in zip(a, b)) == 1


@pytest.mark.parametrize("kind", ["qam16", "bpsk"])
def test_noiseless_roundtrip(kind):
    b = bits(4000)
    assert np.array_equal(transmit_hard(b, ChannelModel(kind, snr_db=math.inf)), b)


def test_high_snr_roundtrip():
    b = bits(40000)
    assert np.array_equal(transmit_hard(b, ChannelModel("qam16", snr_db=40.0)), b)


def test_bsc():
    b = bits(10**6)
    assert np.array_equal(transmit_hard(b, ChannelModel("bsc", p=0.0)), b)
    flips = np.count_nonzero(transmit_hard(b, ChannelModel("bsc", p=0.5, rng_seed=3)) != b)
    sd = math.sqrt(10**6 * 0.25)
    assert abs(flips - 5e5) < 3 * sd


def test_invalid_models():
    with pytest.raises(ValueError):
        ChannelModel("bsc", p=0.7)
    with pytest.raises(ValueError):
        ChannelModel("qam16")
    with pytest.raises(ValueError):
        ChannelModel("ook", snr_db=3)
    with pytest.raises(ValueError):
        transmit_hard(bits(6), ChannelModel("qam16", snr_db=10))
    with pytest.raises(ValueError):
        prefec_ber_theoretical(ChannelModel("bsc", p=0.1))


def test_sigma_convention():
    m = ChannelModel("qam16", snr_db=10.0)
    assert m.sigma ** 2 == pytest.approx(1 / (2 * 10.0))


def test_bpsk_theory_value():
    assert prefec_ber_theoretical(ChannelModel("bpsk", snr_db=0.0)) == pytest.approx(0.0786, abs=1e-4)
    assert prefec_ber_theoretical(ChannelModel("bpsk", snr_db=math.inf)) == 0.0


def test_qam_theory_matches_region_sum():
    # independent route: sum over sent level x decision region of bit differences
    from scipy.stats import norm
    snr_db = 12.0
    sigma = math.sqrt(1 / (2 * 10 ** (snr_db / 10)))
    d = 1 / math.sqrt(10)
    levels = {-3: (0, 0), -1: (0, 1), 1: (1, 1), 3: (1, 0)}
    edges = [-math.inf, -2 * d, 0.0, 2 * d, math.inf]
    total = 0.0
    for lvl, bb in levels.items():
        for k, dec in enumerate(sorted(levels)):
            lo, hi = edges[k], edges[k + 1]
            pr = norm.cdf(hi, lvl * d, sigma) - norm.cdf(lo, lvl * d, sigma)
            total += pr * sum(x != y for x, y in zip(bb, levels[dec]))
    ber = total / (4 * 2)
    assert prefec_ber_theoretical(ChannelModel("qam16", snr_db=snr_db)) == pytest.approx(ber, rel=1e-6)


def test_theory_monotone():
    vals = [prefec_ber_theoretical(ChannelModel("qam16", snr_db=s)) for s in np.arange(0, 25, 0.5)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_qam_empirical_close_to_theory():
    s = snr_for_ber(0.02)
    m = ChannelModel("qam16", snr_db=s, rng_seed=11)
    b = bits(2 * 10**6, seed=1)
    ber = np.count_nonzero(transmit_hard(b, m) != b) / b.size
    assert ber == pytest.approx(0.02, rel=0.03)


def test_determinism():
    b = bits(4000)
    m = ChannelModel("qam16", snr_db=8.0, rng_seed=5)
    assert np.array_equal(transmit_hard(b, m), transmit_hard(b, m))


def test_axis_separability():
    m = ChannelModel("qam16", snr_db=9.0, rng_seed=2)
    b = bits(4 * 200000, seed=4)
    e = (transmit_hard(b, m) != b).reshape(-1, 4).astype(float)
    i_err = e[:, :2].any(axis=1).astype(float)
    q_err = e[:, 2:].any(axis=1).astype(float)
    r = np.corrcoef(i_err, q_err)[0, 1]
    assert abs(r) < 4 / math.sqrt(len(i_err))


def test_empirical_monotone_in_snr():
    b = bits(400000, seed=9)
    rates = [np.count_nonzero(transmit_hard(b, ChannelModel("qam16", snr_db=s, rng_seed=1)) != b)
             for s in (6, 9, 12, 15)]
    assert all(a >= b for a, b in zip(rates, rates[1:]))
