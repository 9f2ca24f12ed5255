"""Acceptance checks, one test per criterion.

Each test records a pass/fail line that the terminal summary prints under
"acceptance criteria". Criteria 6 and 7 build large constructions and take
most of the suite's runtime.
"""

import math
import time

import numpy as np
import pytest
from conftest import random_channel
from test_xform import _naive_g

from polarsr.construct import construct_layer, default_delta
from polarsr.harness import ConstructionCache, parse_config, run_experiment
from polarsr.oracle import (
    exact_kinds,
    oracle_bhattacharyya,
    oracle_z_profile,
    rd_oracle,
    sr_oracle,
    wz_mismatch,
)
from polarsr.pmf import (
    BinaryInputChannel,
    binary_entropy,
    build_bss_rd,
    build_bss_sr,
    build_dsbs_wz,
    channel,
)
from polarsr.sc import ScSession, genie_posteriors
from polarsr.xform import polar_transform

# construction used for the distortion and decoding runs
POLICY = {"rule": "delta", "beta": 0.3, "samples": 20_000, "seed": 0}
EXAMPLES = {
    "rd": {"builder": "bss_rd", "params": {"D": 0.11}},
    "sr": {"builder": "bss_sr", "params": {"D1": 0.25, "D2": 0.11}},
    "wz": {"builder": "dsbs_wz", "params": {"D": 0.11, "p": 0.25}},
    "srwz": {"builder": "srwz_degenerate", "params": {"D1": 0.25, "D2": 0.11}},
}


@pytest.fixture(scope="module")
def cache(tmp_path_factory):
    return ConstructionCache(tmp_path_factory.mktemp("constructions"))


def _config(scheme, m, seeds, trials=None):
    doc = {"scheme": scheme, "source": EXAMPLES[scheme], "m": list(m),
           "construction": dict(POLICY), "seeds": seeds}
    if trials is not None:
        doc["trials"] = trials
    return parse_config(doc)


# -- exact enumeration references ----------------------------------------


def _path_masses(prior, ch, y):
    """``P(t^n, y^n)`` for every ``t`` code and the matching ``u = t G``."""
    n = len(y)
    g = _naive_g(n)
    t = (np.arange(1 << n)[:, None] >> np.arange(n - 1, -1, -1)) & 1
    p = np.prod(np.where(t == 1, prior, 1 - prior) * ch.rows[t, y[None, :]], axis=1)
    return p, (t @ g) % 2


def _brute_posterior(p, u, prefix):
    i = len(prefix)
    sel = np.all(u[:, :i] == prefix, axis=1)
    mass = np.array([p[sel & (u[:, i] == b)].sum() for b in (0, 1)])
    s = mass.sum()
    return mass / s if s > 0 else np.array([0.5, 0.5])


def _brute_z(prior, ch, n):
    """Every ``Z(U_i | U^{i-1}, Y^n)`` by enumerating all ``(y^n, t^n)``."""
    S = ch.outputs
    ys = (np.arange(S**n)[:, None] // S ** np.arange(n - 1, -1, -1)) % S
    z = np.zeros(n)
    for y in ys:
        p, u = _path_masses(prior, ch, y)
        w = 1 << np.arange(n - 1, -1, -1)
        for i in range(n):
            key = (u[:, :i] @ w[n - i:]) if i else np.zeros(len(u), dtype=int)
            m0 = np.bincount(key[u[:, i] == 0], p[u[:, i] == 0], minlength=1 << i)
            m1 = np.bincount(key[u[:, i] == 1], p[u[:, i] == 1], minlength=1 << i)
            z[i] += 2 * np.sqrt(m0 * m1).sum()
    return z


# -- 1 ---------------------------------------------------------------------


def test_c1_oracle_equivalence(criterion):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst_post = worst_z = 0.0
    for n in (2, 4, 8):
        for _ in range(200):
            prior = rng.uniform(0.02, 0.98)
            ch = random_channel(rng, int(rng.integers(1, 4)))
            y = rng.integers(0, ch.outputs, n)
            p, u = _path_masses(prior, ch, y)
            s = ScSession(prior, ch, y)
            prefix = []
            for i in range(n):
                post = np.array(s.next_posterior())
                worst_post = max(worst_post, np.abs(post - _brute_posterior(p, u, prefix)).max())
                bit = int(rng.random() < post[1])
                s.feed(bit)
                prefix.append(bit)
            # the batch genie pass along the same path
            t = polar_transform(np.array(prefix))
            g = genie_posteriors(prior, ch, t, y)
            for i in range(n):
                ref = _brute_posterior(p, u, prefix[:i])
                worst_post = max(worst_post, np.abs(g[i] - ref).max())
        for _ in range(20 if n == 8 else 60):
            prior = rng.uniform(0.02, 0.98)
            ch = random_channel(rng, int(rng.integers(1, 3 if n == 8 else 4)))
            ref = _brute_z(prior, ch, n)
            prof = oracle_z_profile(prior, ch, n)
            single = [oracle_bhattacharyya(prior, ch, i, n) for i in range(n)]
            worst_z = max(worst_z, np.abs(prof - ref).max(), np.abs(np.array(single) - ref).max())
    elapsed = time.perf_counter() - start
    ok = worst_post <= 1e-12 and worst_z <= 1e-12 and elapsed < 60
    criterion(1, ok, f"max posterior err {worst_post:.2e}, max Z err {worst_z:.2e}, {elapsed:.1f}s")
    assert ok


# -- 2 ---------------------------------------------------------------------


def test_c2_transform_algebra(criterion):
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    bad = []
    for m in range(1, 17):
        n = 1 << m
        a = rng.integers(0, 2, (100, n), dtype=np.uint8)
        b = rng.integers(0, 2, (100, n), dtype=np.uint8)
        ta, tb = polar_transform(a), polar_transform(b)
        if not np.array_equal(polar_transform(ta), a):
            bad.append(f"involution n={n}")
        if not np.array_equal(polar_transform(a ^ b), ta ^ tb):
            bad.append(f"linearity n={n}")
        if m <= 8 and not np.array_equal(ta, (a.astype(int) @ _naive_g(n)) % 2):
            bad.append(f"matrix n={n}")
    elapsed = time.perf_counter() - start
    criterion(2, not bad, f"n = 2 .. 2^16, 100 vectors each, {elapsed:.1f}s {bad or ''}")
    assert not bad


# -- 3 ---------------------------------------------------------------------


def test_c3_z_inequality_and_inclusions(criterion):
    rng = np.random.default_rng(3)
    null = BinaryInputChannel.null()
    worst, failures = -np.inf, []
    cases = [channel(build_bss_rd(0.11), "T", ("X",)), channel(build_dsbs_wz(0.11, 0.25).joint, "T", ("Z",))]
    cases += [(rng.uniform(0.05, 0.95), random_channel(rng, int(rng.integers(2, 4)))) for _ in range(40)]
    for n in (4, 8):
        for prior, ch in cases:
            z_obs = oracle_z_profile(prior, ch, n)
            z_none = oracle_z_profile(prior, null, n)
            worst = max(worst, (z_obs - z_none).max())
            if np.any(z_obs > z_none + 1e-12):
                failures.append(("Z", n, prior))
            for delta in (0.05, 0.1, 0.2):
                h_obs, h_none = z_obs >= 1 - delta, z_none >= 1 - delta
                l_obs, l_none = z_obs <= delta, z_none <= delta
                if np.any(h_obs & ~h_none) or np.any(l_none & ~l_obs):
                    failures.append(("sets", n, delta))
    criterion(3, not failures, f"{2 * len(cases)} profiles, max Z(.|Y) - Z(.) = {worst:.3g}")
    assert not failures


# -- 4 ---------------------------------------------------------------------


def _partitions(z_enc, z_dec, n, rng, n_random):
    out = [exact_kinds(z_enc, z_dec, d) for d in (default_delta(n), 0.05, 0.1, 0.2, 0.3)]
    out.append(np.ones(n, dtype=int))
    out.append(np.zeros(n, dtype=int))
    out += [rng.integers(0, 3, n) for _ in range(n_random)]
    return out


def test_c4_gap_and_distortion_bounds(criterion):
    rng = np.random.default_rng(4)
    rd = build_bss_rd(0.11)
    sr = build_bss_sr(0.25, 0.11)
    null = BinaryInputChannel.null()
    checked, failures = 0, []
    worst_gap = worst_dist = -np.inf
    for n in (4, 8):
        prior, ch = channel(rd, "T", ("X",))
        z_x, z_0 = oracle_z_profile(prior, ch, n), oracle_z_profile(prior, null, n)
        for kinds in _partitions(z_x, z_0, n, rng, 20):
            gap, dist = rd_oracle(rd, kinds, n)
            worst_gap = max(worst_gap, gap.exact - gap.bound)
            worst_dist = max(worst_dist, dist.expected - dist.bound)
            if not (gap.holds and dist.holds):
                failures.append(("rd", n, tuple(kinds)))
            checked += 1
        p1, c1 = channel(sr, "T", ("X",))
        p2, c2 = channel(sr, "W", ("T", "X"))
        _, c2l = channel(sr, "W", ("T",))
        k1s = _partitions(oracle_z_profile(p1, c1, n), oracle_z_profile(p1, null, n), n, rng, 6 if n == 4 else 1)
        k2s = _partitions(oracle_z_profile(p2, c2, n), oracle_z_profile(p2, c2l, n), n, rng, 6 if n == 4 else 1)
        for k1, k2 in zip(k1s, k2s):
            o = sr_oracle(sr, k1, k2, n)
            worst_gap = max(worst_gap, o.gap1.exact - o.gap1.bound, o.gap2_exact - o.gap2_full_bound)
            worst_dist = max(worst_dist, o.dist1.expected - o.dist1.bound, o.dist2.expected - o.dist2.bound)
            if not o.holds:
                failures.append(("sr", n, tuple(k1), tuple(k2)))
            checked += 1
    criterion(4, not failures, f"{checked} partitions, max(gap - bound) = {worst_gap:.3g}, "
              f"max(E d - bound) = {worst_dist:.3g}")
    assert not failures


# -- 5 ---------------------------------------------------------------------


def test_c5_wz_mismatch_bound(criterion):
    rng = np.random.default_rng(5)
    joint = build_dsbs_wz(0.11, 0.25).joint
    prior, c_xz = channel(joint, "T", ("X", "Z"))
    _, c_z = channel(joint, "T", ("Z",))
    failures, rows, nonempty = [], 0, 0
    worst = -np.inf
    for n in (4, 8):
        z_enc, z_dec = oracle_z_profile(prior, c_xz, n), oracle_z_profile(prior, c_z, n)
        for kinds in _partitions(z_enc, z_dec, n, rng, 30):
            rep = wz_mismatch(joint, kinds, n)
            worst = max(worst, rep.p_law - rep.bound)
            nonempty += bool(np.any(kinds == 2))
            if rep.p_law > rep.bound + 1e-9:
                failures.append((n, tuple(kinds)))
            rows += 1
    criterion(5, not failures, f"{rows} partitions ({nonempty} with nonempty L), "
              f"max(mismatch - bound) = {worst:.3g}")
    assert not failures


# -- 6 ---------------------------------------------------------------------

RD_RATE = 1 - binary_entropy(0.11)


@pytest.mark.slow
def test_c6_rate_convergence(criterion):
    joint = build_bss_rd(0.11)
    medians = {}
    for m in (8, 10, 12, 14):
        rates = [construct_layer(joint, "T", ("X",), (), 1 << m, samples=100_000, seed=s).partition.rate
                 for s in range(5)]
        medians[m] = float(np.median(rates))
    gaps = [abs(medians[m] - RD_RATE) for m in sorted(medians)]
    monotone = all(b < a for a, b in zip(gaps, gaps[1:]))
    ok = monotone and gaps[-1] < gaps[0]
    table = ", ".join(f"2^{m}: {r:.4f}" for m, r in medians.items())
    criterion(6, ok, f"median |I|/n {table} (target {RD_RATE:.5f})")
    assert ok


# -- 7 ---------------------------------------------------------------------

C7_M = tuple(range(8, 15))
C7_SEEDS = {"master": 7, "frozen": [0, 1, 2, 3, 4], "rounding": [100, 101, 102, 103, 104]}
C7_MARGIN = 0.05


def _median_se(x):
    return 1.2533 * np.std(x, ddof=1) / math.sqrt(len(x))


@pytest.mark.slow
def test_c7_distortion_convergence(criterion, cache):
    strict_ok, noise_ok, margin_ok = True, True, True
    parts = []
    for scheme in ("rd", "sr", "wz", "srwz"):
        table = run_experiment(_config(scheme, C7_M, C7_SEEDS), cache=cache, write=False)
        layers = ("dist1", "dist2") if scheme in ("sr", "srwz") else ("dist1",)
        for k, col in enumerate(layers, 1):
            target = table.column(f"target_D{k}")[0]
            med = [float(np.median(table.column(col, m))) for m in C7_M]
            se = [_median_se(table.column(col, m)) for m in C7_M]
            for a in range(len(C7_M) - 1):
                if med[a + 1] > med[a]:
                    strict_ok = False
                    if med[a + 1] - med[a] > 2 * math.hypot(se[a], se[a + 1]):
                        noise_ok = False
            excess = med[-1] - target
            margin_ok &= excess < C7_MARGIN
            parts.append(f"{scheme}/L{k} " + " ".join(f"{v:.4f}" for v in med) + f" (D={target:.2f})")
    ok = noise_ok and margin_ok
    criterion(7, ok, f"medians over m={C7_M[0]}..{C7_M[-1]}: " + "; ".join(parts)
              + f"; strictly non-increasing: {strict_ok}; within noise: {noise_ok}")
    assert ok


# -- 8 ---------------------------------------------------------------------


@pytest.mark.slow
def test_c8_bit_exact_decode(criterion, cache):
    failures, trials = [], 0
    for scheme in ("rd", "sr"):
        table = run_experiment(_config(scheme, range(1, 15), {"master": 8}, trials=100),
                               cache=cache, write=False)
        for r in table.records:
            trials += 1
            if not r.exact_decode or r.mismatch_L:
                failures.append((scheme, r.n, r.trial))
    criterion(8, not failures, f"{trials} trials over RD and SR, n = 2 .. 2^14, "
              f"{len(failures)} decoding differences")
    assert not failures


# -- 9 ---------------------------------------------------------------------


def test_c9_reproducibility(criterion, tmp_path):
    doc = {"scheme": "sr", "source": EXAMPLES["sr"], "m": [6, 8, 10],
           "construction": {"samples": 2000, "seed": 3}, "trials": 8, "seeds": {"master": 9}}
    blobs = []
    for run, threads in enumerate((1, 1, 4)):
        cfg = parse_config({**doc, "output": f"run{run}.csv"}, tmp_path)
        run_experiment(cfg, cache=ConstructionCache(), threads=threads)
        blobs.append((tmp_path / f"run{run}.csv").read_bytes())
    ok = blobs[0] == blobs[1] == blobs[2]
    rows = blobs[0].count(b"\n") - 1
    criterion(9, ok, f"3 runs (threads 1, 1, 4), {rows} rows, identical bytes: {ok}")
    assert ok
