"""Successive-cancellation posteriors for ``U^n = T^n G_n``.

``T_j`` are i.i.d. binary with ``P(T=1) = prior`` and each ``Y_j`` is drawn
from a :class:`~polarsr.pmf.BinaryInputChannel` given ``T_j``. The engine
returns the exact conditionals ``P(U_i = a | u^{i-1}, y^n)``.

Implementation notes
--------------------
Since ``G_n = B_n F^{(x)m}``, decoding ``U`` in order is the natural-order
recursion for ``F^{(x)m}`` applied to the bit-reversed letters. Each
node of the recursion carries normalized likelihood pairs
``(P(c=0, obs), P(c=1, obs))`` in the linear domain; every combine step
renormalizes its output. A pair whose mass vanishes is a zero-probability
path and is replaced by ``(1/2, 1/2)``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .exceptions import ConfigurationError, SessionError
from .pmf import BinaryInputChannel
from .xform import bit_reversal, log2_exact


@njit(cache=True, nogil=True, inline="always")
def _normalize(p0, p1):
    s = p0 + p1
    if s > 0.0:
        r = 1.0 / s
        return p0 * r, p1 * r
    return 0.5, 0.5


@njit(cache=True, nogil=True)
def _posterior(P, C, i, m):
    """Refresh the recursion path of leaf ``i`` and return its posterior.

    ``P[d, :n >> d]`` holds the likelihood pairs of the current node at depth
    ``d`` (depth 0 is the channel); ``C[d, :n >> d]`` the completed partial
    sums of its left sibling.
    """
    n = P.shape[1]
    start = 1
    if i > 0:
        t = 0
        while (i >> t) & 1 == 0:
            t += 1
        d = m - t
        k = n >> d
        for j in range(k):
            c = C[d, j]
            a0 = P[d - 1, j, c]
            a1 = P[d - 1, j, 1 - c]
            p0, p1 = _normalize(a0 * P[d - 1, k + j, 0], a1 * P[d - 1, k + j, 1])
            P[d, j, 0] = p0
            P[d, j, 1] = p1
        start = d + 1
    for d in range(start, m + 1):
        k = n >> d
        for j in range(k):
            a0 = P[d - 1, j, 0]
            a1 = P[d - 1, j, 1]
            b0 = P[d - 1, k + j, 0]
            b1 = P[d - 1, k + j, 1]
            p0, p1 = _normalize(a0 * b0 + a1 * b1, a0 * b1 + a1 * b0)
            P[d, j, 0] = p0
            P[d, j, 1] = p1
    return P[m, 0, 0], P[m, 0, 1]


@njit(cache=True, nogil=True)
def _feed(C, T, i, bit, m):
    """Fix ``u_i = bit`` and propagate completed partial sums upward.

    Returns True when the root completed; ``T`` then holds the
    bit-reversed input sequence.
    """
    T[0] = bit
    k = 1
    d = m
    while d > 0:
        if (i >> (m - d)) & 1 == 0:
            for j in range(k):
                C[d, j] = T[j]
            return False
        for j in range(k):
            T[k + j] = T[j]
            T[j] ^= C[d, j]
        k *= 2
        d -= 1
    return True


@njit(cache=True, nogil=True)
def _sc_run(leaf_a, leaf_b, use_b, kinds, fixed, unif, m):
    """One SC pass with two conditioning trees sharing the same decisions.

    ``kinds[i]``: 0 take ``fixed[i]``; 1 sample from tree A using
    ``unif[i]``; 2 argmax of tree B (tree A when ``use_b`` is False), ties
    to 0.
    """
    n = leaf_a.shape[0]
    PA = np.empty((m + 1, n, 2))
    PA[0] = leaf_a
    CA = np.zeros((m + 1, n), dtype=np.uint8)
    TA = np.zeros(n, dtype=np.uint8)
    nb = n if use_b else 1
    PB = np.empty((m + 1, nb, 2))
    CB = np.zeros((m + 1, nb), dtype=np.uint8)
    TB = np.zeros(nb, dtype=np.uint8)
    if use_b:
        PB[0] = leaf_b
    u = np.empty(n, dtype=np.uint8)
    for i in range(n):
        a0, a1 = _posterior(PA, CA, i, m)
        if use_b:
            b0, b1 = _posterior(PB, CB, i, m)
        else:
            b0, b1 = a0, a1
        kind = kinds[i]
        if kind == 0:
            bit = fixed[i]
        elif kind == 1:
            bit = 1 if unif[i] < a1 else 0
        else:
            bit = 1 if b1 > b0 else 0
        u[i] = bit
        _feed(CA, TA, i, bit, m)
        if use_b:
            _feed(CB, TB, i, bit, m)
    return u


@njit(cache=True, nogil=True)
def _sc_run_batch(leaf_a, leaf_b, use_b, kinds, fixed, unif, m):
    rows = leaf_a.shape[0]
    n = leaf_a.shape[1]
    out = np.empty((rows, n), dtype=np.uint8)
    for r in range(rows):
        lb = leaf_b[r] if use_b else leaf_a[r]
        out[r] = _sc_run(leaf_a[r], lb, use_b, kinds, fixed[r], unif[r], m)
    return out


@njit(cache=True, nogil=True)
def _genie_leaves(L, X, m):
    """In-place level-wise SC with every decision known in advance.

    On entry ``L`` holds the bit-reversed channel pairs and ``X`` the
    bit-reversed true input; on exit ``L[i]`` is the posterior of ``U_i``
    given the true prefix and ``X[i] = u_i``.
    """
    n = L.shape[0]
    for d in range(m):
        k = n >> d
        h = k >> 1
        for s in range(1 << d):
            base = s * k
            for j in range(h):
                lo = base + j
                hi = base + h + j
                a0 = L[lo, 0]
                a1 = L[lo, 1]
                b0 = L[hi, 0]
                b1 = L[hi, 1]
                c = X[lo] ^ X[hi]
                # mass is preserved here: (a0 + a1)(b0 + b1) = 1
                L[lo, 0] = a0 * b0 + a1 * b1
                L[lo, 1] = a0 * b1 + a1 * b0
                if c == 0:
                    g0, g1 = _normalize(a0 * b0, a1 * b1)
                else:
                    g0, g1 = _normalize(a1 * b0, a0 * b1)
                L[hi, 0] = g0
                L[hi, 1] = g1
                X[lo] = c


@njit(cache=True, nogil=True)
def _genie_accumulate(prior0, prior1, rows, t, y, perm, m, zsum, zsq):
    """Accumulate ``2 sqrt(p0 p1)`` per index over the rows of ``t``/``y``."""
    count = t.shape[0]
    n = t.shape[1]
    L = np.empty((n, 2))
    X = np.empty(n, dtype=np.uint8)
    for r in range(count):
        for j in range(n):
            src = perm[j]
            yy = y[r, src]
            p0, p1 = _normalize(prior0 * rows[0, yy], prior1 * rows[1, yy])
            L[j, 0] = p0
            L[j, 1] = p1
            X[j] = t[r, src]
        _genie_leaves(L, X, m)
        for i in range(n):
            z = 2.0 * np.sqrt(L[i, 0] * L[i, 1])
            zsum[i] += z
            zsq[i] += z * z


def leaf_pairs(prior: float, channel: BinaryInputChannel, y) -> np.ndarray:
    """Normalized ``P(t, y_j)`` pairs in SC (bit-reversed) order.

    Works on ``(..., n)`` observation arrays.
    """
    y = np.asarray(y, dtype=np.intp)
    n = y.shape[-1]
    log2_exact(n)
    if y.size and (y.min() < 0 or y.max() >= channel.outputs):
        raise ConfigurationError(
            f"observations outside channel alphabet of size {channel.outputs}"
        )
    y = y[..., bit_reversal(n)]
    w = np.stack([(1 - prior) * channel.rows[0][y], prior * channel.rows[1][y]], axis=-1)
    s = w.sum(axis=-1, keepdims=True)
    zero = s <= 0
    return np.where(zero, 0.5, w / np.where(zero, 1.0, s))


def _rows_f64(channel: BinaryInputChannel) -> np.ndarray:
    return np.ascontiguousarray(channel.rows, dtype=np.float64)


class ScSession:
    """Interactive successive-cancellation pass.

    Call :meth:`next_posterior` for index ``cursor`` and then :meth:`feed`
    to fix that bit. Indices are 0-based.
    """

    def __init__(self, prior: float, channel: BinaryInputChannel, y=None):
        if not 0.0 <= prior <= 1.0:
            raise ConfigurationError(f"prior {prior} outside [0, 1]")
        if y is None:
            raise ConfigurationError("observation sequence required")
        y = np.asarray(y)
        if y.ndim != 1:
            raise ConfigurationError("a session decodes a single block")
        self.n = y.shape[0]
        self.m = log2_exact(self.n)
        self.prior = float(prior)
        self.channel = channel
        self._P = np.empty((self.m + 1, self.n, 2))
        self._P[0] = leaf_pairs(prior, channel, y)
        self._C = np.zeros((self.m + 1, self.n), dtype=np.uint8)
        self._T = np.zeros(self.n, dtype=np.uint8)
        self._u = np.zeros(self.n, dtype=np.uint8)
        self._post: tuple[float, float] | None = None
        self.cursor = 0

    def next_posterior(self) -> tuple[float, float]:
        if self.cursor >= self.n:
            raise SessionError("session exhausted")
        if self._post is None:
            self._post = _posterior(self._P, self._C, self.cursor, self.m)
        return self._post

    def feed(self, bit: int) -> None:
        if bit not in (0, 1):
            raise SessionError(f"bit must be 0 or 1, got {bit!r}")
        self.next_posterior()
        _feed(self._C, self._T, self.cursor, int(bit), self.m)
        self._u[self.cursor] = bit
        self._post = None
        self.cursor += 1

    @property
    def u(self) -> np.ndarray:
        """Bits fed so far."""
        return self._u[: self.cursor].copy()

    @property
    def done(self) -> bool:
        return self.cursor == self.n

    def reproduction(self) -> np.ndarray:
        """``t^n = u^n G_n`` once every bit has been fed."""
        if not self.done:
            raise SessionError("reproduction available only after a full pass")
        out = np.empty(self.n, dtype=np.uint8)
        out[bit_reversal(self.n)] = self._T
        return out


def open_session(prior: float, channel: BinaryInputChannel, y) -> ScSession:
    return ScSession(prior, channel, y)


def run_pass(
    leaf_a: np.ndarray,
    kinds: np.ndarray,
    fixed: np.ndarray,
    unif: np.ndarray,
    leaf_b: np.ndarray | None = None,
) -> np.ndarray:
    """Batch SC pass over rows of leaf pairs; see :func:`_sc_run` for ``kinds``."""
    leaf_a = np.ascontiguousarray(leaf_a, dtype=np.float64)
    squeeze = leaf_a.ndim == 2
    if squeeze:
        leaf_a = leaf_a[None]
    rows, n = leaf_a.shape[:2]
    m = log2_exact(n)
    use_b = leaf_b is not None
    lb = leaf_a if leaf_b is None else np.ascontiguousarray(leaf_b, dtype=np.float64).reshape(leaf_a.shape)
    fixed = np.ascontiguousarray(np.broadcast_to(fixed, (rows, n)), dtype=np.uint8)
    unif = np.ascontiguousarray(np.broadcast_to(unif, (rows, n)), dtype=np.float64)
    kinds = np.ascontiguousarray(kinds, dtype=np.uint8)
    out = _sc_run_batch(leaf_a, lb, use_b, kinds, fixed, unif, m)
    return out[0] if squeeze else out


def genie_posteriors(prior: float, channel: BinaryInputChannel, t, y) -> np.ndarray:
    """Posteriors of every ``U_i`` given the true prefix, shape ``(n, 2)``."""
    t = np.asarray(t, dtype=np.uint8)
    n = t.shape[-1]
    m = log2_exact(n)
    L = np.ascontiguousarray(leaf_pairs(prior, channel, y))
    X = np.ascontiguousarray(t[bit_reversal(n)])
    _genie_leaves(L, X, m)
    return L


def genie_z_sums(prior: float, channel: BinaryInputChannel, t, y) -> tuple[np.ndarray, np.ndarray]:
    """Per-index sums of ``2 sqrt(p0 p1)`` and its square over rows of ``t``."""
    t = np.ascontiguousarray(t, dtype=np.uint8)
    y = np.ascontiguousarray(y, dtype=np.intp)
    n = t.shape[1]
    m = log2_exact(n)
    zsum = np.zeros(n)
    zsq = np.zeros(n)
    _genie_accumulate(
        1.0 - prior, prior, _rows_f64(channel), t, y,
        np.ascontiguousarray(bit_reversal(n)), m, zsum, zsq,
    )
    return zsum, zsq
