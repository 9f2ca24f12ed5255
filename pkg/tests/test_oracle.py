import numpy as np
import pytest
from conftest import random_channel

from polarsr.exceptions import OracleSizeError
from polarsr.oracle import (
    encoder_law,
    exact_kinds,
    layer_setup,
    oracle_bhattacharyya,
    oracle_l1_gap,
    oracle_posterior,
    oracle_z_profile,
    rd_oracle,
    sr_oracle,
    wz_mismatch,
)
from polarsr.pmf import BinaryInputChannel, build_bss_rd, build_bss_sr, build_dsbs_wz, channel


def test_bhattacharyya_examples():
    assert oracle_bhattacharyya(0.5, BinaryInputChannel.null(), 1, 2) == pytest.approx(1.0, abs=1e-12)
    for i in range(4):
        assert oracle_bhattacharyya(0.4, BinaryInputChannel.identity(), i, 4) == pytest.approx(0, abs=1e-12)
    # n = 1 four-term sum: 2 * sum_y P(y) sqrt(P(0|y) P(1|y)) = 2 sqrt(0.11 * 0.89)
    z = oracle_bhattacharyya(0.5, BinaryInputChannel.bsc(0.11), 0, 1)
    assert z == pytest.approx(2 * sum(0.5 * np.sqrt(0.11 * 0.89) for _ in range(2)), abs=1e-12)
    assert z == pytest.approx(0.625779, abs=1e-6)
    with pytest.raises(OracleSizeError):
        oracle_bhattacharyya(0.5, BinaryInputChannel.bsc(0.1), 0, 16)


def test_profile_matches_pointwise(rng):
    ch = random_channel(rng, 3)
    prof = oracle_z_profile(0.3, ch, 4)
    for i in range(4):
        assert prof[i] == pytest.approx(oracle_bhattacharyya(0.3, ch, i, 4), abs=1e-12)
        assert 0 <= prof[i] <= 1 + 1e-12


def test_posterior_normalizes(rng):
    ch = BinaryInputChannel.bsc(0.11)
    y = np.array([0, 1, 1, 0])
    p = oracle_posterior(0.5, ch, y, [])
    assert sum(p) == pytest.approx(1.0)


def test_all_information_partition_is_exact():
    j = build_bss_rd(0.11)
    exact, bound = oracle_l1_gap(j, np.ones(4, dtype=int), 4)
    assert exact == pytest.approx(0, abs=1e-12) and bound == 0


def test_encoder_law_is_a_law(rng):
    setup = layer_setup(build_bss_rd(0.2), "T", ("X",), (), 4)
    kinds = rng.integers(0, 3, 4)
    q = encoder_law(setup, kinds)
    assert q.sum() == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(q.sum(axis=1), setup.J_s.sum(axis=1), atol=1e-12)


@pytest.mark.parametrize("n", [4, 8])
def test_gap_bounds_random_partitions(n, rng):
    j = build_bss_rd(0.11)
    for _ in range(5):
        kinds = rng.integers(0, 3, n)
        exact, bound = oracle_l1_gap(j, kinds, n)
        assert exact <= bound + 1e-9
        assert 0 <= bound <= 2 * n
    gap, dist = rd_oracle(j, rng.integers(0, 3, n), n)
    assert dist.holds


def test_sr_oracle_holds():
    j = build_bss_sr(0.25, 0.11)
    prior, ch = channel(j, "T", ("X",))
    k1 = exact_kinds(oracle_z_profile(prior, ch, 4), np.ones(4), 0.2)
    pw, chw = channel(j, "W", ("T", "X"))
    _, chwt = channel(j, "W", ("T",))
    k2 = exact_kinds(oracle_z_profile(pw, chw, 4), oracle_z_profile(pw, chwt, 4), 0.2)
    o = sr_oracle(j, k1, k2, 4)
    assert o.holds


def test_wz_mismatch_perfect_side_information():
    # Z = X exactly: decoder and encoder L rules coincide
    src = build_dsbs_wz(0.11, 1e-12)
    rep = wz_mismatch(src.joint, np.array([2, 2, 1, 2]), 4)
    assert rep.p_law == pytest.approx(0, abs=1e-9)
