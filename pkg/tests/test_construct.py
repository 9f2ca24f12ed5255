import json

import numpy as np
import pytest
from conftest import random_channel

from polarsr.construct import (
    Construction,
    IndexPartition,
    ZProfile,
    construct_layer,
    default_delta,
    estimate_z_profile,
    exact_z_profile,
    load_construction,
    partition_by_rate,
    partition_indices,
    save_construction,
)
from polarsr.exceptions import ConfigurationError, ParameterError
from polarsr.oracle import oracle_bhattacharyya
from polarsr.pmf import BinaryInputChannel, build_bss_rd, channel

NULL = BinaryInputChannel.null()


def test_null_uniform_is_exactly_one():
    enc, dec = estimate_z_profile(0.5, BinaryInputChannel.bsc(0.2), NULL, 2, 500, 1)
    assert dec.z[1] == 1.0 and dec.stderr[1] == 0.0
    assert enc.samples == 500 and enc.seed == 1


def test_samples_zero_refused():
    with pytest.raises(ParameterError):
        estimate_z_profile(0.5, NULL, NULL, 4, 0, 0)


@pytest.mark.parametrize("n", [2, 4, 8])
def test_estimates_agree_with_oracle(n, rng):
    inside = total = 0
    for seed in range(4):
        prior = rng.uniform(0.2, 0.8)
        ch_e = random_channel(rng, 3)
        ch_d = random_channel(rng, 2)
        enc, dec = estimate_z_profile(prior, ch_e, ch_d, n, 4000, seed)
        for prof, ch in ((enc, ch_e), (dec, ch_d)):
            for i in range(n):
                ref = oracle_bhattacharyya(prior, ch, i, n)
                inside += abs(prof.z[i] - ref) <= max(4 * prof.stderr[i], 1e-9)
                total += 1
    assert inside / total >= 0.95


def test_estimate_is_deterministic():
    ch = BinaryInputChannel.bsc(0.11)
    a, _ = estimate_z_profile(0.5, ch, NULL, 32, 3000, 7)
    b, _ = estimate_z_profile(0.5, ch, NULL, 32, 3000, 7)
    c, _ = estimate_z_profile(0.5, ch, NULL, 32, 3000, 8)
    assert np.array_equal(a.z, b.z)
    assert not np.array_equal(a.z, c.z)


def test_default_delta():
    assert default_delta(1 << 12) == pytest.approx(2.0 ** -(4096**0.3))
    assert default_delta(1 << 30) == 1e-6
    with pytest.raises(ParameterError):
        default_delta(16, beta=0.6)


def test_partition_identity_channel():
    prof = exact_z_profile(0.5, BinaryInputChannel.identity(), 8)
    p = partition_indices(prof, prof, 0.5)
    assert p.L == tuple(range(8)) and p.H == () and p.I == ()


def test_partition_overlap_goes_to_h():
    z = np.full(4, 0.5)
    prof = ZProfile(4, z, np.zeros(4), 1, 0)
    p = partition_indices(prof, prof, 0.5)
    assert p.H == (0, 1, 2, 3) and p.overlaps == 4


def test_same_channel_both_sides():
    j = build_bss_rd(0.11)
    prior, ch = channel(j, "T", ("X",))
    enc, _ = estimate_z_profile(prior, ch, ch, 256, 2000, 0)
    p = partition_indices(enc, enc, 0.01)
    mid = (enc.z > 0.01) & (enc.z < 0.99)
    assert set(p.I) == set(np.flatnonzero(mid))
    assert 0 < p.rate < 1


def test_partition_by_rate():
    j = build_bss_rd(0.11)
    prior, ch = channel(j, "T", ("X",))
    enc, dec = estimate_z_profile(prior, ch, NULL, 1024, 500, 0)
    assert partition_by_rate(enc, dec, 0.0).I == ()
    assert partition_by_rate(enc, dec, 1.0).I == tuple(range(1024))
    assert len(partition_by_rate(enc, dec, 0.5).I) == 512
    # exact ties break toward lower indices
    flat = ZProfile(8, np.full(8, 0.3), np.zeros(8), 1, 0)
    assert partition_by_rate(flat, flat, 0.25).I == (0, 1)
    with pytest.raises(ParameterError):
        partition_by_rate(enc, dec, 1.5)


@pytest.mark.parametrize("n", [4, 8])
def test_inclusions_with_exact_profiles(n, rng):
    for _ in range(5):
        prior = rng.uniform(0.05, 0.95)
        ch = random_channel(rng, 3)
        z_obs = exact_z_profile(prior, ch, n).z
        z_none = exact_z_profile(prior, NULL, n).z
        assert np.all(z_obs <= z_none + 1e-12)
        for delta in (0.05, 0.1, 0.2):
            h_obs = set(np.flatnonzero(z_obs >= 1 - delta))
            h_none = set(np.flatnonzero(z_none >= 1 - delta))
            l_obs = set(np.flatnonzero(z_obs <= delta))
            l_none = set(np.flatnonzero(z_none <= delta))
            assert h_obs <= h_none and l_none <= l_obs


def test_polarization_trend():
    prior, ch = channel(build_bss_rd(0.11), "T", ("X",))
    fractions = []
    for m in (6, 8, 10):
        enc, _ = estimate_z_profile(prior, ch, NULL, 1 << m, 2000, 0)
        fractions.append(np.mean((enc.z > 0.01) & (enc.z < 0.99)))
    assert fractions[0] >= fractions[1] >= fractions[2]


def test_partition_validation_and_json(tmp_path):
    with pytest.raises(ConfigurationError):
        IndexPartition(4, (0, 1), (1,), (2, 3))
    with pytest.raises(ConfigurationError):
        IndexPartition(4, (0,), (1,), (2,))
    c = construct_layer(build_bss_rd(0.2), "T", ("X",), (), 16, samples=300, seed=3)
    path = tmp_path / "c.json"
    save_construction(c, path)
    back = load_construction(path)
    assert back.partition.digest == c.partition.digest
    np.testing.assert_array_equal(back.enc.z, c.enc.z)
    doc = json.loads(path.read_text())
    doc["partition"]["H"], doc["partition"]["I"] = doc["partition"]["I"], doc["partition"]["H"]
    with pytest.raises(ConfigurationError):
        Construction.from_dict(doc)


def test_construct_layer_exact_and_rules():
    j = build_bss_rd(0.11)
    c = construct_layer(j, "T", ("X",), (), 8, method="exact", delta=0.1)
    assert c.partition.provenance["enc"] == "exact"
    r = construct_layer(j, "T", ("X",), (), 8, method="exact", rule="rate", target_rate=0.5)
    assert len(r.partition.I) == 4
    with pytest.raises(ConfigurationError):
        construct_layer(j, "T", ("X",), (), 8, rule="rate")
    with pytest.raises(ConfigurationError):
        construct_layer(j, "T", ("X",), (), 8, method="magic")


def test_rd_rate_at_4096_calibrated():
    # measured value of this construction at 10^4 samples, seed 1
    c = construct_layer(build_bss_rd(0.11), "T", ("X",), (), 4096, samples=10_000, seed=1)
    assert c.partition.rate == pytest.approx(0.6606, abs=0.01)
