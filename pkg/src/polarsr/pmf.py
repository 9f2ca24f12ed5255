"""Finite-alphabet probability tables and information measures.

Everything here is exact and dense: alphabets are tiny (at most 8 symbols
per axis), so a joint distribution is just an ``ndarray`` with one named
axis per random variable. All information measures are in bits.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .exceptions import ConfigurationError, ParameterError

MASS_TOL = 1e-12
MARKOV_TOL = 1e-10
MAX_ALPHABET = 8


def _as_names(axes) -> tuple[str, ...]:
    if axes is None:
        return ()
    if isinstance(axes, str):
        return (axes,)
    return tuple(axes)


@dataclass(frozen=True, eq=False)
class JointPmf:
    """Dense joint probability table over named finite alphabets.

    Parameters
    ----------
    axes : sequence of (name, size)
        Axis declarations, in table order.
    table : array-like
        Nonnegative probabilities of shape ``tuple(size for _, size in axes)``.
    """

    axes: tuple[tuple[str, int], ...]
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        axes = tuple((str(name), int(size)) for name, size in self.axes)
        names = [name for name, _ in axes]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"duplicate axis names in {names}")
        for name, size in axes:
            if not 1 <= size <= MAX_ALPHABET:
                raise ConfigurationError(f"axis {name!r} has unsupported size {size}")
        table = np.array(self.table, dtype=float)
        shape = tuple(size for _, size in axes)
        if table.size != math.prod(shape):
            raise ConfigurationError(
                f"table has {table.size} entries, axes require {math.prod(shape)}"
            )
        table = table.reshape(shape)
        if not np.all(np.isfinite(table)) or np.any(table < 0):
            raise ConfigurationError("probabilities must be finite and nonnegative")
        total = table.sum()
        if abs(total - 1.0) > MASS_TOL:
            raise ConfigurationError(f"total mass {total!r} differs from 1")
        table.setflags(write=False)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "table", table)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.axes)

    def size(self, name: str) -> int:
        return self.axes[self.index(name)][1]

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ConfigurationError(f"unknown axis {name!r}; have {self.names}") from None

    def marginal(self, keep) -> "JointPmf":
        return marginalize(self, keep)

    def with_copy(self, source: str, name: str) -> "JointPmf":
        """Add an axis that is an exact copy of ``source``."""
        k = self.size(source)
        eye = np.eye(k)
        src = self.index(source)
        ax = list(range(self.table.ndim))
        table = np.einsum(self.table, ax, eye, [src, len(ax)], ax + [len(ax)])
        return JointPmf(self.axes + ((name, k),), table)

    def with_constant(self, name: str) -> "JointPmf":
        """Add a degenerate axis with a single symbol."""
        return JointPmf(self.axes + ((name, 1),), self.table[..., None])

    def digest(self) -> str:
        h = hashlib.blake2b(digest_size=8)
        h.update(repr(self.axes).encode())
        h.update(np.ascontiguousarray(self.table, dtype="<f8").tobytes())
        return h.hexdigest()

    def __repr__(self):
        return f"JointPmf({', '.join(f'{n}:{s}' for n, s in self.axes)})"


@dataclass(frozen=True, eq=False)
class BinaryInputChannel:
    """Conditional law ``W(y|u)`` of a finite output given a binary input."""

    rows: np.ndarray

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[0] != 2 or rows.shape[1] < 1:
            raise ConfigurationError(f"channel rows must have shape (2, M), got {rows.shape}")
        if np.any(rows < 0) or not np.all(np.isfinite(rows)):
            raise ConfigurationError("channel probabilities must be finite and nonnegative")
        if np.any(np.abs(rows.sum(axis=1) - 1.0) > MASS_TOL):
            raise ConfigurationError("channel rows must sum to 1")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def outputs(self) -> int:
        return self.rows.shape[1]

    @property
    def is_null(self) -> bool:
        return self.outputs == 1

    @classmethod
    def null(cls) -> "BinaryInputChannel":
        return cls(np.ones((2, 1)))

    @classmethod
    def bsc(cls, p: float) -> "BinaryInputChannel":
        return cls(np.array([[1 - p, p], [p, 1 - p]]))

    @classmethod
    def identity(cls) -> "BinaryInputChannel":
        return cls(np.eye(2))

    def __repr__(self):
        return f"BinaryInputChannel(outputs={self.outputs})"


@dataclass(frozen=True, eq=False)
class DistortionMeasure:
    """Distortion matrix ``d[x, t]`` over source alphabet x binary reproduction."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[1] != 2:
            raise ConfigurationError(f"distortion matrix must have shape (|X|, 2), got {m.shape}")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise ConfigurationError("distortion entries must be finite and >= 0")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def hamming(cls) -> "DistortionMeasure":
        return cls(1.0 - np.eye(2))

    @property
    def max(self) -> float:
        return float(self.matrix.max())

    def empirical(self, x, t) -> float:
        """Per-letter average distortion between two sequences."""
        x = np.asarray(x, dtype=np.intp)
        t = np.asarray(t, dtype=np.intp)
        return float(self.matrix[x, t].mean())


@dataclass(frozen=True, eq=False)
class Conditional:
    """Conditional table ``P(target | given)``.

    ``probs`` has shape ``given_sizes + target_sizes``. Rows whose
    conditioning event has zero mass are flagged in ``undefined`` and
    filled with the uniform law.
    """

    target: tuple[str, ...]
    given: tuple[str, ...]
    probs: np.ndarray
    undefined: np.ndarray


# -- basic operations ------------------------------------------------------


def marginalize(j: JointPmf, keep) -> JointPmf:
    """Sum out every axis not in ``keep``; result axes follow ``keep`` order."""
    keep = _as_names(keep)
    idx = [j.index(name) for name in keep]
    if len(set(idx)) != len(idx):
        raise ConfigurationError(f"repeated axis in {keep}")
    drop = tuple(a for a in range(j.table.ndim) if a not in idx)
    table = j.table.sum(axis=drop) if drop else j.table
    order = sorted(range(len(idx)), key=lambda k: idx[k])
    # after summing, remaining axes are in original order; permute to ``keep`` order
    perm = [order.index(k) for k in range(len(idx))]
    table = np.transpose(table, perm) if idx else np.asarray(table)
    return JointPmf(tuple(j.axes[a] for a in idx), table)


def _marginal_table(j: JointPmf, names: tuple[str, ...]) -> np.ndarray:
    if not names:
        return np.asarray(j.table.sum())
    return marginalize(j, names).table


def conditional(j: JointPmf, target, given=()) -> Conditional:
    """Conditional distribution of ``target`` axes given ``given`` axes."""
    target = _as_names(target)
    given = _as_names(given)
    if not target:
        raise ConfigurationError("conditional needs at least one target axis")
    if set(target) & set(given):
        raise ConfigurationError(f"target {target} and given {given} overlap")
    joint = _marginal_table(j, given + target)
    g_shape = joint.shape[: len(given)]
    t_shape = joint.shape[len(given):]
    flat = joint.reshape(g_shape + (-1,))
    mass = flat.sum(axis=-1)
    undefined = mass <= 0
    safe = np.where(undefined, 1.0, mass)[..., None]
    probs = np.where(undefined[..., None], 1.0 / flat.shape[-1], flat / safe)
    return Conditional(target, given, probs.reshape(g_shape + t_shape), undefined)


def channel(j: JointPmf, input_axis: str, outputs=()) -> tuple[float, BinaryInputChannel]:
    """Prior ``P(input=1)`` and the channel from a binary axis to ``outputs``.

    Output symbols are the mixed-radix index of the ``outputs`` tuple in the
    given order; no outputs yields the null (single-symbol) channel.
    """
    outputs = _as_names(outputs)
    if j.size(input_axis) != 2:
        raise ConfigurationError(f"axis {input_axis!r} is not binary")
    prior = _marginal_table(j, (input_axis,))
    if not outputs:
        return float(prior[1]), BinaryInputChannel.null()
    cond = conditional(j, outputs, (input_axis,))
    rows = cond.probs.reshape(2, -1)
    return float(prior[1]), BinaryInputChannel(rows)


def entropy(j: JointPmf, axes) -> float:
    """Joint entropy of ``axes`` in bits."""
    axes = _as_names(axes)
    if not axes:
        return 0.0
    p = _marginal_table(j, axes).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def mutual_information(j: JointPmf, a, b, c=()) -> float:
    """Conditional mutual information ``I(A;B|C)`` in bits."""
    a, b, c = _as_names(a), _as_names(b), _as_names(c)
    for name in a + b + c:
        j.index(name)
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
        raise ConfigurationError(f"axis sets must be disjoint: {a}, {b}, {c}")
    return entropy(j, a + c) + entropy(j, b + c) - entropy(j, a + b + c) - entropy(j, c)


class MarkovCheck(NamedTuple):
    passed: bool
    max_violation: float
    violations: tuple[float, ...]


def check_markov(j: JointPmf, chain: Sequence, tol: float = MARKOV_TOL) -> MarkovCheck:
    """Test a Markov chain ``G1 -> G2 -> ... -> Gk`` of axis groups.

    For each interior group ``Gi`` the past ``G1..G(i-1)`` must be
    conditionally independent of ``G(i+1)`` given ``Gi``.
    """
    groups = [_as_names(g) for g in chain]
    flat = [name for g in groups for name in g]
    for name in flat:
        j.index(name)
    if len(set(flat)) != len(flat):
        raise ConfigurationError(f"chain groups overlap: {groups}")
    violations = []
    for i in range(1, len(groups) - 1):
        past = tuple(name for g in groups[:i] for name in g)
        violations.append(mutual_information(j, past, groups[i + 1], groups[i]))
    worst = max(violations, default=0.0)
    return MarkovCheck(worst <= tol, max(worst, 0.0), tuple(violations))


def expected_distortion(j: JointPmf, src_axis: str, rep_axis: str, d: DistortionMeasure) -> float:
    """``E d(X, T)`` under the joint."""
    table = marginalize(j, (src_axis, rep_axis)).table
    if table.shape != d.matrix.shape:
        raise ConfigurationError(
            f"distortion matrix {d.matrix.shape} does not match alphabets {table.shape}"
        )
    return float((table * d.matrix).sum())


def reconstruction_distortion(j: JointPmf, src: str, rep: str, side: str, f, d: DistortionMeasure) -> float:
    """``E d(X, f(T, S))`` for a reconstruction table ``f[t, s]``."""
    f = np.asarray(f, dtype=np.intp)
    table = marginalize(j, (src, rep, side)).table
    if f.shape != table.shape[1:]:
        raise ConfigurationError(f"reconstruction map shape {f.shape} != {table.shape[1:]}")
    if f.min() < 0 or f.max() > 1:
        raise ConfigurationError("reconstruction map must take values in {0, 1}")
    if d.matrix.shape[0] != table.shape[0]:
        raise ConfigurationError("distortion matrix does not match source alphabet")
    cost = d.matrix[:, f]  # (x, t, s)
    return float((table * cost).sum())


def binary_entropy(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return float(-p * math.log2(p) - (1 - p) * math.log2(1 - p))


def binary_convolution(a: float, b: float) -> float:
    return a * (1 - b) + (1 - a) * b


def independent(*parts: JointPmf) -> JointPmf:
    """Product distribution of independent joints."""
    axes: tuple = ()
    table = np.ones(())
    for part in parts:
        axes = axes + part.axes
        table = np.multiply.outer(table, part.table)
    return JointPmf(axes, table)


def bernoulli(name: str, p: float) -> JointPmf:
    return JointPmf(((name, 2),), [1 - p, p])


# -- builders --------------------------------------------------------------


def _check_open(name: str, value: float, lo: float = 0.0, hi: float = 0.5):
    if not lo < value < hi:
        raise ParameterError(f"{name}={value} must lie in ({lo}, {hi})")


def build_bss_rd(D: float) -> JointPmf:
    """Backward BSC test channel for a uniform binary source at distortion ``D``."""
    _check_open("D", D)
    table = np.array([[1 - D, D], [D, 1 - D]]) / 2
    return JointPmf((("T", 2), ("X", 2)), table)


def sr_crossover(D1: float, D2: float) -> float:
    """Crossover ``q`` with ``D2 * q = D1`` in binary convolution."""
    return (D1 - D2) / (1 - 2 * D2)


def build_bss_sr(D1: float, D2: float) -> JointPmf:
    """Uniform binary source refined from ``D1`` to ``D2`` along ``X -> W -> T``."""
    _check_open("D2", D2)
    _check_open("D1", D1)
    if D2 > D1:
        raise ParameterError(f"need D2 <= D1, got D1={D1}, D2={D2}")
    q = sr_crossover(D1, D2)
    bsc_q = np.array([[1 - q, q], [q, 1 - q]])
    bsc_d = np.array([[1 - D2, D2], [D2, 1 - D2]])
    # P(t, w, x) = P(w) P(t|w) P(x|w)
    table = 0.5 * np.einsum("wt,wx->twx", bsc_q, bsc_d)
    return JointPmf((("T", 2), ("W", 2), ("X", 2)), table)


class WynerZivSource(NamedTuple):
    """Joint over ``(T, X, Z)`` with decoder map ``f[t, z]``."""

    joint: JointPmf
    f: np.ndarray

    @property
    def rate(self) -> float:
        return mutual_information(self.joint, "X", "T", "Z")


def build_dsbs_wz(D: float, p: float) -> WynerZivSource:
    """Doubly symmetric binary source with side information ``Z = X + Bern(p)``."""
    _check_open("D", D)
    _check_open("p", p)
    bsc_d = np.array([[1 - D, D], [D, 1 - D]])
    bsc_p = np.array([[1 - p, p], [p, 1 - p]])
    table = 0.5 * np.einsum("tx,xz->txz", bsc_d, bsc_p)
    joint = JointPmf((("T", 2), ("X", 2), ("Z", 2)), table)
    f = np.array([[0, 0], [1, 1]])
    return WynerZivSource(joint, f)


class SrwzSource(NamedTuple):
    joint: JointPmf
    f1: np.ndarray
    f2: np.ndarray


def build_srwz_degenerate(D1: float, D2: float) -> SrwzSource:
    """SR joint extended with ``Y = X`` and a constant ``Z``.

    Reconstructions ignore side information: ``f1(t, z) = t``,
    ``f2(w, y) = w``.
    """
    joint = build_bss_sr(D1, D2).with_copy("X", "Y").with_constant("Z")
    f1 = np.array([[0], [1]])
    f2 = np.array([[0, 0], [1, 1]])
    return SrwzSource(joint, f1, f2)


BUILDERS = {
    "bss_rd": build_bss_rd,
    "bss_sr": build_bss_sr,
    "dsbs_wz": build_dsbs_wz,
    "srwz_degenerate": build_srwz_degenerate,
}


# -- side-information refinement checks ---------------------------------


class ConditionCheck(NamedTuple):
    name: str
    value: float
    residual: float
    passed: bool | None  # None: reported only


@dataclass(frozen=True)
class SrwzReport:
    checks: tuple[ConditionCheck, ...]

    def __getitem__(self, name: str) -> ConditionCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def passed(self, names: Iterable[str] | None = None) -> bool:
        chosen = self.checks if names is None else [self[n] for n in names]
        return all(c.passed is not False for c in chosen)

    def format(self) -> str:
        lines = []
        for c in self.checks:
            status = "info" if c.passed is None else ("pass" if c.passed else "FAIL")
            lines.append(f"{c.name:<28s} value={c.value:.6g} residual={c.residual:.3g} {status}")
        return "\n".join(lines)


SRWZ_AXES = ("T", "W", "X", "Y", "Z")
#: checks that must hold for the SRWZ codec to run
SRWZ_REQUIRED = ("markov_TW_X_Y_Z", "markov_T_WY_X")


def validate_srwz_conditions(
    j: JointPmf, f1, f2, D1: float, D2: float,
    d: DistortionMeasure | None = None, tol: float = MARKOV_TOL,
) -> SrwzReport:
    """Check the structural conditions a joint needs for SR with side information.

    The rate equalities are reported as the computed mutual informations;
    their optimality is not certified.
    """
    for name in SRWZ_AXES:
        j.index(name)
    d = d or DistortionMeasure.hamming()
    dist1 = reconstruction_distortion(j, "X", "T", "Z", f1, d)
    dist2 = reconstruction_distortion(j, "X", "W", "Y", f2, d)
    m3 = check_markov(j, [("T", "W"), "X", "Y", "Z"], tol)
    m4 = check_markov(j, ["T", ("W", "Y"), "X"], tol)
    i5 = mutual_information(j, "T", "Y", "Z")
    checks = (
        ConditionCheck("rate1_I(X;T|Z)", mutual_information(j, "X", "T", "Z"), 0.0, None),
        ConditionCheck("distortion1", dist1, max(dist1 - D1, 0.0), dist1 <= D1 + tol),
        ConditionCheck("rate2_I(X;W|Y)", mutual_information(j, "X", "W", "Y"), 0.0, None),
        ConditionCheck("distortion2", dist2, max(dist2 - D2, 0.0), dist2 <= D2 + tol),
        ConditionCheck("markov_TW_X_Y_Z", m3.max_violation, m3.max_violation, m3.passed),
        ConditionCheck("markov_T_WY_X", m4.max_violation, m4.max_violation, m4.passed),
        ConditionCheck("I(T;Y|Z)", i5, max(i5, 0.0), i5 <= tol),
    )
    return SrwzReport(checks)


# -- text file format ------------------------------------------------------


def load_pmf(path) -> JointPmf:
    """Read a joint from text: ``axis <name> <size>`` lines, then probabilities.

    Probabilities are a flat row-major list (whitespace separated, any
    number per line). ``#`` starts a comment.
    """
    axes = []
    values: list[float] = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "axis":
            if values or len(parts) != 3:
                raise ConfigurationError(f"{path}:{lineno}: malformed axis declaration")
            axes.append((parts[1], int(parts[2])))
        else:
            try:
                values.extend(float(v) for v in parts)
            except ValueError:
                raise ConfigurationError(f"{path}:{lineno}: bad probability value") from None
    if not axes:
        raise ConfigurationError(f"{path}: no axis declarations")
    return JointPmf(tuple(axes), np.array(values))


def save_pmf(j: JointPmf, path) -> None:
    lines = [f"axis {name} {size}" for name, size in j.axes]
    lines.append(" ".join(repr(float(v)) for v in j.table.ravel()))
    Path(path).write_text("\n".join(lines) + "\n")


def sample(j: JointPmf, axes, n: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Draw ``n`` i.i.d. letters of the marginal on ``axes``."""
    axes = _as_names(axes)
    table = marginalize(j, axes).table
    cdf = np.cumsum(table.ravel())
    cdf[-1] = 1.0
    flat = np.searchsorted(cdf, rng.random(n), side="right")
    flat = np.minimum(flat, cdf.size - 1)
    idx = np.unravel_index(flat, table.shape)
    return {name: idx[k].astype(np.uint8) for k, name in enumerate(axes)}
