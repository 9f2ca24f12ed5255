import itertools

import numpy as np
import pytest
from conftest import random_channel

from polarsr.exceptions import ConfigurationError, ParameterError, SessionError
from polarsr.oracle import oracle_posterior, path_law
from polarsr.pmf import BinaryInputChannel
from polarsr.sc import ScSession, genie_posteriors, genie_z_sums, leaf_pairs, open_session, run_pass
from polarsr.xform import polar_transform
from test_xform import _naive_g


def brute_posterior(prior, ch, y, prefix):
    """Independent enumeration over t^n with an explicitly built G_n."""
    n = len(y)
    g = _naive_g(n)
    i = len(prefix)
    mass = np.zeros(2)
    for t in itertools.product((0, 1), repeat=n):
        t = np.array(t)
        u = (t @ g) % 2
        if not np.array_equal(u[:i], prefix):
            continue
        p = np.prod(np.where(t == 1, prior, 1 - prior) * ch.rows[t, y])
        mass[u[i]] += p
    s = mass.sum()
    return mass / s if s > 0 else np.array([0.5, 0.5])


@pytest.mark.parametrize("n", [2, 4, 8])
def test_session_matches_enumeration(n, rng):
    for _ in range(15):
        prior = rng.uniform(0.05, 0.95)
        ch = random_channel(rng, int(rng.integers(1, 4)))
        y = rng.integers(0, ch.outputs, n)
        s = open_session(prior, ch, y)
        seen = []
        for i in range(n):
            post = np.array(s.next_posterior())
            ref = brute_posterior(prior, ch, y, np.array(seen, dtype=int))
            np.testing.assert_allclose(post, ref, atol=1e-12)
            np.testing.assert_allclose(post, oracle_posterior(prior, ch, y, seen), atol=1e-12)
            bit = int(rng.random() < post[1])
            s.feed(bit)
            seen.append(bit)


def test_null_uniform_and_identity():
    s = ScSession(0.5, BinaryInputChannel.null(), np.zeros(16, dtype=int))
    for _ in range(16):
        assert s.next_posterior() == pytest.approx((0.5, 0.5))
        s.feed(1)
    y = np.array([1, 0, 0, 1, 1, 1, 0, 1])
    u_true = polar_transform(y)
    s = ScSession(0.3, BinaryInputChannel.identity(), y)
    for i in range(8):
        p0, p1 = s.next_posterior()
        assert max(p0, p1) == pytest.approx(1.0)
        s.feed(int(p1 > p0))
    assert np.array_equal(s.u, u_true)
    assert np.array_equal(s.reproduction(), y)
    s = ScSession(0.0, BinaryInputChannel.bsc(0.2), np.zeros(8, dtype=int))
    for _ in range(8):
        assert s.next_posterior() == pytest.approx((1.0, 0.0))
        s.feed(0)


def test_complement_feeds_stay_normalized(rng):
    ch = random_channel(rng, 3)
    y = rng.integers(0, 3, 32)
    s = ScSession(0.4, ch, y)
    while not s.done:
        p0, p1 = s.next_posterior()
        assert p0 + p1 == pytest.approx(1.0, abs=1e-9)
        s.feed(int(p1 <= p0))


def test_chain_rule(rng):
    for n in (2, 4, 8):
        prior = rng.uniform(0.1, 0.9)
        ch = random_channel(rng, 2)
        y = rng.integers(0, 2, n)
        law = path_law(prior, ch, y)  # P(u^n, y^n) per u code
        s = ScSession(prior, ch, y)
        prob = 1.0
        bits = rng.integers(0, 2, n)
        for b in bits:
            prob *= s.next_posterior()[b]
            s.feed(int(b))
        code = int("".join(map(str, bits)), 2)
        assert prob == pytest.approx(law[code] / law.sum(), abs=1e-10)


def test_session_errors():
    s = ScSession(0.5, BinaryInputChannel.bsc(0.1), np.zeros(2, dtype=int))
    with pytest.raises(SessionError):
        s.feed(2)
    with pytest.raises(SessionError):
        s.reproduction()
    s.feed(0)
    s.feed(0)
    with pytest.raises(SessionError):
        s.next_posterior()
    with pytest.raises(ConfigurationError):
        ScSession(0.5, BinaryInputChannel.bsc(0.1), np.array([0, 2]))
    with pytest.raises(ParameterError):
        ScSession(0.5, BinaryInputChannel.bsc(0.1), np.zeros(3, dtype=int))


def test_genie_matches_session(rng):
    ch = random_channel(rng, 3)
    for n in (8, 64):
        t = rng.integers(0, 2, n).astype(np.uint8)
        y = rng.integers(0, 3, n)
        g = genie_posteriors(0.35, ch, t, y)
        g = g / g.sum(axis=1, keepdims=True)
        u = polar_transform(t)
        s = ScSession(0.35, ch, y)
        for i in range(n):
            np.testing.assert_allclose(g[i], s.next_posterior(), atol=1e-12)
            s.feed(int(u[i]))
        t2 = rng.integers(0, 2, (5, n)).astype(np.uint8)
        y2 = rng.integers(0, 3, (5, n))
        zs, zq = genie_z_sums(0.35, ch, t2, y2)
        ref = np.zeros(n)
        for r in range(5):
            p = genie_posteriors(0.35, ch, t2[r], y2[r])
            ref += 2 * np.sqrt(p[:, 0] * p[:, 1]) / p.sum(axis=1)
        np.testing.assert_allclose(zs, ref, atol=1e-10)


def test_run_pass_kinds(rng):
    n = 16
    ch = BinaryInputChannel.bsc(0.1)
    y = rng.integers(0, 2, n)
    leaf = leaf_pairs(0.5, ch, y)
    fixed = rng.integers(0, 2, n).astype(np.uint8)
    assert np.array_equal(run_pass(leaf, np.zeros(n), fixed, np.zeros(n)), fixed)
    # argmax everywhere equals a greedy session
    u = run_pass(leaf, np.full(n, 2), fixed, np.zeros(n))
    s = ScSession(0.5, ch, y)
    for i in range(n):
        p0, p1 = s.next_posterior()
        assert u[i] == int(p1 > p0)
        s.feed(int(u[i]))
    # sampling with uniforms at 0 picks 1 unless the posterior of 1 is 0
    batch = run_pass(np.stack([leaf, leaf]), np.ones(n), fixed, np.zeros((2, n)))
    assert batch.shape == (2, n) and np.array_equal(batch[0], batch[1])
