"""Brute-force enumeration of the laws behind polar source codes.

These functions define correctness for the SC engine and verify the
total-variation and mismatch bounds on tiny block lengths. Every quantity
is summed over explicit sequences; nothing here calls the SC recursion or
the butterfly transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import ConfigurationError, OracleSizeError
from .pmf import BinaryInputChannel, DistortionMeasure, JointPmf, channel, conditional, marginalize
from .xform import generator_matrix, log2_exact

MAX_PATH_N = 16
MAX_TABLE = 1 << 25


def _digits(base: int, n: int) -> np.ndarray:
    """All length-``n`` sequences over ``range(base)``, first letter most significant."""
    count = base**n
    idx = np.arange(count)
    out = np.empty((count, n), dtype=np.int64)
    for j in range(n - 1, -1, -1):
        out[:, j] = idx % base
        idx = idx // base
    return out


@lru_cache(maxsize=16)
def _u_of_t(n: int) -> np.ndarray:
    """Integer code of ``u = t G_n`` for every ``t`` (both MSB-first)."""
    t = _digits(2, n)
    u = (t @ generator_matrix(n)) % 2
    weights = 1 << np.arange(n - 1, -1, -1)
    out = u @ weights
    out.setflags(write=False)
    return out


@lru_cache(maxsize=16)
def _t_of_u(n: int) -> np.ndarray:
    inv = np.empty(1 << n, dtype=np.int64)
    inv[_u_of_t(n)] = np.arange(1 << n)
    inv.setflags(write=False)
    return inv


def _check_path(n: int, limit: int = MAX_PATH_N):
    log2_exact(n)
    if n > limit:
        raise OracleSizeError(f"n={n} exceeds the enumeration limit {limit}")


def path_law(prior: float, ch: BinaryInputChannel, y) -> np.ndarray:
    """``P(u^n, y^n)`` for a fixed observation, indexed by the integer code of ``u``."""
    y = np.asarray(y, dtype=np.int64)
    n = y.shape[0]
    _check_path(n)
    t = _digits(2, n)
    pt = np.array([1 - prior, prior])
    w = np.prod(pt[t] * ch.rows[t, y[None, :]], axis=1)
    out = np.empty_like(w)
    out[_u_of_t(n)] = w
    return out


def oracle_posterior(prior: float, ch: BinaryInputChannel, y, prefix) -> tuple[float, float]:
    """Exact ``P(U_i = a | u^{i-1}, y^n)`` with ``i = len(prefix)`` (0-based).

    A zero-probability conditioning event returns ``(0.5, 0.5)``.
    """
    law = path_law(prior, ch, y)
    n = len(y)
    prefix = [int(b) for b in prefix]
    i = len(prefix)
    if i >= n:
        raise ConfigurationError(f"prefix of length {i} leaves no index in n={n}")
    code = 0
    for b in prefix:
        code = 2 * code + b
    block = law.reshape(1 << i, 2, -1).sum(axis=-1)[code]
    s = block.sum()
    if s <= 0:
        return 0.5, 0.5
    return float(block[0] / s), float(block[1] / s)


def joint_table(prior: float, ch: BinaryInputChannel, n: int) -> np.ndarray:
    """``J[y, u] = P(u^n, y^n)`` over every observation sequence."""
    log2_exact(n)
    M = ch.outputs
    if M**n * 2**n > MAX_TABLE:
        raise OracleSizeError(f"enumeration of {M}^{n} x 2^{n} cells refused")
    y = _digits(M, n)
    t = _digits(2, n)
    pt = np.array([1 - prior, prior])
    J = np.ones((M**n, 2**n))
    for j in range(n):
        J *= (pt[t[:, j]][None, :]) * ch.rows[t[None, :, j], y[:, j, None]]
    out = np.empty_like(J)
    out[:, _u_of_t(n)] = J
    return out


def prefix_masses(J: np.ndarray, i: int) -> np.ndarray:
    """``A[y, prefix, a] = P(u^{i-1} = prefix, u_i = a, y^n)``."""
    n = int(J.shape[1]).bit_length() - 1
    return J.reshape(J.shape[0], 1 << i, 2, 1 << (n - i - 1)).sum(axis=-1)


def z_profile_from_table(J: np.ndarray) -> np.ndarray:
    n = int(J.shape[1]).bit_length() - 1
    z = np.empty(n)
    for i in range(n):
        A = prefix_masses(J, i)
        z[i] = 2.0 * np.sqrt(A[..., 0] * A[..., 1]).sum()
    return z


def oracle_z_profile(prior: float, ch: BinaryInputChannel, n: int) -> np.ndarray:
    """Exact ``Z(U_i | U^{i-1}, Y^n)`` for every index."""
    return z_profile_from_table(joint_table(prior, ch, n))


def oracle_bhattacharyya(prior: float, ch: BinaryInputChannel, i: int, n: int) -> float:
    """Exact ``Z(U_i | U^{i-1}, Y^n)`` for one 0-based index ``i``."""
    if n > 8:
        raise OracleSizeError("oracle_bhattacharyya supports n <= 8")
    if not 0 <= i < n:
        raise ConfigurationError(f"index {i} outside [0, {n})")
    return float(oracle_z_profile(prior, ch, n)[i])


# -- encoder-induced laws -------------------------------------------------


def _conditionals(A: np.ndarray) -> np.ndarray:
    s = A.sum(axis=-1, keepdims=True)
    zero = s <= 0
    return np.where(zero, 0.5, A / np.where(zero, 1.0, s))


def _argmax_tables(J: np.ndarray) -> list[np.ndarray]:
    """Per index: argmax bit of ``P(u_i | prefix, obs)``, ties to 0."""
    out = []
    n = int(J.shape[1]).bit_length() - 1
    for i in range(n):
        A = prefix_masses(J, i)
        out.append((A[..., 1] > A[..., 0]).astype(np.int64))
    return out


@dataclass(frozen=True)
class LayerSetup:
    """Enumerated laws for one coding layer.

    ``J_s[s, u] = P(u^n, s^n)`` for the encoder observation ``S`` and
    ``J_r`` likewise for the L-rule observation ``R``; ``s_to_r`` maps each
    ``s^n`` code to the ``r^n`` code it determines.
    """

    n: int
    J_s: np.ndarray
    J_r: np.ndarray
    s_to_r: np.ndarray
    s_digits: np.ndarray
    sample_given: tuple[str, ...]
    sizes: tuple[int, ...]


def layer_setup(joint: JointPmf, target: str, sample_given, l_given, n: int) -> LayerSetup:
    sample_given = tuple(sample_given)
    l_given = tuple(l_given)
    if not set(l_given) <= set(sample_given):
        raise ConfigurationError("L-rule conditioning must be a function of the encoder observation")
    log2_exact(n)
    prior, ch_s = channel(joint, target, sample_given)
    _, ch_r = channel(joint, target, l_given)
    sizes = tuple(joint.size(a) for a in sample_given)
    J_s = joint_table(prior, ch_s, n)
    J_r = joint_table(prior, ch_r, n)
    S = ch_s.outputs
    sdig = _digits(S, n)
    # split per-letter symbol into its axis digits, keep the R axes
    letters = np.stack(np.unravel_index(sdig, sizes), axis=-1) if sizes else np.zeros(sdig.shape + (0,), dtype=np.int64)
    r_sizes = tuple(joint.size(a) for a in l_given)
    if l_given:
        sel = [sample_given.index(a) for a in l_given]
        rl = np.ravel_multi_index(tuple(letters[..., k] for k in sel), r_sizes)
    else:
        rl = np.zeros(sdig.shape, dtype=np.int64)
    R = ch_r.outputs
    weights = R ** np.arange(n - 1, -1, -1)
    s_to_r = rl @ weights
    return LayerSetup(n, J_s, J_r, s_to_r, sdig, sample_given, sizes)


def encoder_law(setup: LayerSetup, kinds, s_law: np.ndarray | None = None) -> np.ndarray:
    """``Q[s, u]``: frozen uniform, sampled, or argmax bits per ``kinds``.

    ``kinds`` uses 0 = frozen (H), 1 = information (I), 2 = deterministic (L).
    ``s_law`` defaults to the true marginal of ``S^n``.
    """
    kinds = np.asarray(kinds)
    n = setup.n
    if kinds.shape != (n,):
        raise ConfigurationError("kinds must have one entry per index")
    Sn = setup.J_s.shape[0]
    q = np.ones((Sn, 1))
    dec = _argmax_tables(setup.J_r)
    for i in range(n):
        if kinds[i] == 0:
            factor = np.full((Sn, 1 << i, 2), 0.5)
        elif kinds[i] == 1:
            factor = _conditionals(prefix_masses(setup.J_s, i))
        else:
            bit = dec[i][setup.s_to_r]  # (Sn, 2^i)
            factor = np.stack([1 - bit, bit], axis=-1).astype(float)
        q = (q[..., None] * factor).reshape(Sn, 1 << (i + 1))
    if s_law is None:
        s_law = setup.J_s.sum(axis=1)
    return s_law[:, None] * q


@dataclass(frozen=True)
class GapReport:
    exact: float
    bound: float
    l_terms: float
    h_terms: float
    n_H: int
    n_L: int
    flagged_L: tuple[int, ...]  # L indices whose Z is near 1

    @property
    def holds(self) -> bool:
        return self.exact <= self.bound + 1e-9


def tv_bound(z_l: np.ndarray, z_h: np.ndarray, kinds) -> tuple[float, float]:
    """``sum_L Z(.|R) + sum_H 2 sqrt(1/2 - Z(.|S)/2)``, returned as its two parts."""
    kinds = np.asarray(kinds)
    l_terms = float(z_l[kinds == 2].sum())
    h_terms = float((2.0 * np.sqrt(np.clip(0.5 - 0.5 * z_h[kinds == 0], 0.0, None))).sum())
    return l_terms, h_terms


def layer_gap(setup: LayerSetup, kinds, s_law=None) -> tuple[GapReport, np.ndarray]:
    """Exact ``||P_{U S} - Q_{U S}||_1`` for one layer and its bound.

    With ``s_law`` the encoder input follows that law rather than the true
    one; the report then covers only the conditional part, i.e. the sum
    over ``s`` of ``P(s) |P(u|s) - Q(u|s)|`` is what the bound controls.
    """
    kinds = np.asarray(kinds)
    P = setup.J_s
    z_s = z_profile_from_table(setup.J_s)
    z_r = z_profile_from_table(setup.J_r)
    l_terms, h_terms = tv_bound(z_r, z_s, kinds)
    Q = encoder_law(setup, kinds, s_law)
    exact = float(np.abs(P - Q).sum())
    flagged = tuple(int(i) for i in np.flatnonzero((kinds == 2) & (z_r > 0.9)))
    report = GapReport(exact, l_terms + h_terms, l_terms, h_terms,
                       int((kinds == 0).sum()), int((kinds == 2).sum()), flagged)
    return report, Q


def _reproduction_bits(n: int) -> np.ndarray:
    """``t^n`` (rows) for every ``u`` code."""
    t = _digits(2, n)
    return t[_t_of_u(n)]


def layer_distortion(setup: LayerSetup, law: np.ndarray, src_axis: str, d: DistortionMeasure) -> float:
    """Per-letter ``E d(X, T)`` under ``law[s, u]`` with ``t = u G_n``."""
    n = setup.n
    k = setup.sample_given.index(src_axis)
    letters = np.unravel_index(setup.s_digits, setup.sizes)[k]  # (Sn, n)
    tbits = _reproduction_bits(n)  # (2^n, n)
    cost = d.matrix
    total = 0.0
    for j in range(n):
        xs = letters[:, j]
        ts = tbits[:, j]
        # mass on (x_j, t_j) pairs
        for a in range(cost.shape[0]):
            rows = law[xs == a]
            if rows.size == 0:
                continue
            col = rows.sum(axis=0)
            total += cost[a, 0] * col[ts == 0].sum() + cost[a, 1] * col[ts == 1].sum()
    return total / n


@dataclass(frozen=True)
class DistortionCheck:
    expected: float
    design: float
    gap: float
    max_d: float

    @property
    def bound(self) -> float:
        return self.design + self.max_d * self.gap

    @property
    def holds(self) -> bool:
        return self.expected <= self.bound + 1e-9


def oracle_l1_gap(joint: JointPmf, kinds, n: int, target="T", sample_given=("X",), l_given=()):
    """Exact gap between the true and encoder-induced laws of one layer.

    Returns ``(exact, bound)``; see :func:`layer_gap` for the full report.
    """
    if n > 8:
        raise OracleSizeError("oracle_l1_gap supports n <= 8")
    report, _ = layer_gap(layer_setup(joint, target, sample_given, l_given, n), kinds)
    return report.exact, report.bound


def rd_oracle(joint: JointPmf, kinds, n: int, d: DistortionMeasure | None = None):
    """Gap and distortion checks for the single-layer lossy code."""
    d = d or DistortionMeasure.hamming()
    setup = layer_setup(joint, "T", ("X",), (), n)
    gap, Q = layer_gap(setup, kinds)
    design = layer_distortion(setup, setup.J_s, "X", d)
    dist = DistortionCheck(layer_distortion(setup, Q, "X", d), design, gap.exact, d.max)
    return gap, dist


@dataclass(frozen=True)
class SrOracle:
    gap1: GapReport
    dist1: DistortionCheck
    gap2_conditional: GapReport
    gap2_exact: float
    dist2: DistortionCheck

    @property
    def gap2_bound(self) -> float:
        return self.gap2_conditional.bound + self.gap1.exact

    @property
    def gap2_full_bound(self) -> float:
        return self.gap2_conditional.bound + self.gap1.bound

    @property
    def holds(self) -> bool:
        return (
            self.gap1.holds and self.dist1.holds and self.gap2_conditional.holds
            and self.gap2_exact <= self.gap2_bound + 1e-9
            and self.gap2_exact <= self.gap2_full_bound + 1e-9
            and self.dist2.holds
        )


def sr_oracle(joint: JointPmf, kinds1, kinds2, n: int, d: DistortionMeasure | None = None) -> SrOracle:
    """Both layers of the successive-refinement code.

    Layer 2 runs on ``(t^n, x^n)`` produced by layer 1, so its true-input
    law is replaced by the layer-1 encoder law.
    """
    d = d or DistortionMeasure.hamming()
    if n > 8:
        raise OracleSizeError("sr_oracle supports n <= 8")
    gap1, dist1 = rd_oracle(marginalize(joint, ("T", "X")), kinds1, n, d)
    s1 = layer_setup(marginalize(joint, ("T", "X")), "T", ("X",), (), n)
    Q1 = encoder_law(s1, kinds1)  # Q1[x, u]

    s2 = layer_setup(joint, "W", ("T", "X"), ("T",), n)
    gap2c, _ = layer_gap(s2, kinds2)
    # layer-2 inputs (t^n, x^n) under Q1
    letters = np.unravel_index(s2.s_digits, s2.sizes)
    weights = 1 << np.arange(n - 1, -1, -1)
    t_code = letters[0] @ weights
    x_code = letters[1] @ weights
    u_code = _u_of_t(n)[t_code]
    q_s = Q1[x_code, u_code]
    Q2 = encoder_law(s2, kinds2, q_s)
    gap2 = float(np.abs(s2.J_s - Q2).sum())
    design2 = layer_distortion(s2, s2.J_s, "X", d)
    dist2 = DistortionCheck(layer_distortion(s2, Q2, "X", d), design2, gap2, d.max)
    return SrOracle(gap1, dist1, gap2c, gap2, dist2)


@dataclass(frozen=True)
class MismatchReport:
    p_law: float  # probability of any L disagreement with u^n drawn from P
    scheme: float  # same event under the encoder's own law
    bound: float  # sum_L [Z(.|X) + Z(.|Z)]
    scheme_bound: float

    @property
    def holds(self) -> bool:
        return self.p_law <= self.bound + 1e-9 and self.scheme <= self.scheme_bound + 1e-9


def _recompute(dec_tables, kinds, obs_count) -> np.ndarray:
    """``E[o, u]``: code of ``u`` with its L bits recomputed by argmax given ``o``."""
    n = len(kinds)
    u = np.broadcast_to(np.arange(1 << n), (obs_count, 1 << n)).copy()
    obs = np.arange(obs_count)[:, None]
    for i in np.flatnonzero(np.asarray(kinds) == 2):
        shift = n - 1 - i
        prefix = u >> (shift + 1)
        bit = dec_tables[i][obs, prefix]
        u = (u & ~(1 << shift)) | (bit << shift)
    return u


def wz_mismatch(joint: JointPmf, kinds, n: int) -> MismatchReport:
    """Exact decoder mismatch probability for the Wyner-Ziv code."""
    if n > 8:
        raise OracleSizeError("wz_mismatch supports n <= 8")
    kinds = np.asarray(kinds)
    prior, ch_x = channel(joint, "T", ("X",))
    _, ch_z = channel(joint, "T", ("Z",))
    J_x = joint_table(prior, ch_x, n)
    J_z = joint_table(prior, ch_z, n)
    z_x = z_profile_from_table(J_x)
    z_z = z_profile_from_table(J_z)
    Xn, Zn = J_x.shape[0], J_z.shape[0]
    enc = _recompute(_argmax_tables(J_x), kinds, Xn)   # (Xn, 2^n)
    dec = _recompute(_argmax_tables(J_z), kinds, Zn)   # (Zn, 2^n)

    cz = conditional(marginalize(joint, ("X", "Z")), "Z", "X").probs  # (x, z)
    xd = _digits(joint.size("X"), n)
    zd = _digits(joint.size("Z"), n)
    pz_x = np.ones((Xn, Zn))
    for j in range(n):
        pz_x *= cz[xd[:, j][:, None], zd[:, j][None, :]]

    setup = layer_setup(marginalize(joint, ("T", "X")), "T", ("X",), ("X",), n)
    Q = encoder_law(setup, kinds)  # Q[x, u], L bits by the encoder's rule
    p_law = 0.0
    scheme = 0.0
    for x in range(Xn):
        miss_p = enc[x][None, :] != dec  # (Zn, 2^n)
        p_law += float((J_x[x][None, :] * pz_x[x][:, None] * miss_p).sum())
        miss_q = dec != np.arange(1 << n)[None, :]
        scheme += float((Q[x][None, :] * pz_x[x][:, None] * miss_q).sum())
    lsel = kinds == 2
    bound = float(z_x[lsel].sum() + z_z[lsel].sum())
    l_terms, h_terms = tv_bound(z_x, z_x, kinds)
    scheme_bound = 0.5 * bound + 0.5 * (l_terms + h_terms)
    return MismatchReport(p_law, scheme, bound, scheme_bound)


def exact_kinds(z_enc: np.ndarray, z_dec: np.ndarray, delta: float) -> np.ndarray:
    """Threshold partition on exact profiles (H wins overlaps)."""
    kinds = np.ones(len(z_enc), dtype=np.int64)
    kinds[z_dec <= delta] = 2
    kinds[z_enc >= 1 - delta] = 0
    return kinds


def enumeration_size(joint: JointPmf, target: str, given, n: int) -> int:
    return math.prod(joint.size(a) for a in given) ** n * 2**n
