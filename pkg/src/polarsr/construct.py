"""Index partitions from Bhattacharyya profiles.

Profiles are estimated by genie-aided Monte Carlo: sample ``t^n`` and the
observations, run one SC pass feeding the true bits, and average
``2 sqrt(p0 p1)`` per index. At tiny ``n`` the exact oracle can stand in.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np

from .exceptions import ConfigurationError, ParameterError
from .oracle import oracle_z_profile
from .pmf import BinaryInputChannel, JointPmf, channel
from .sc import genie_z_sums
from .xform import log2_exact

#: samples per independently seeded chunk; part of the reproducibility contract
CHUNK = 1024
_SUB = 128

H, I, L = 0, 1, 2


@dataclass(frozen=True, eq=False)
class ZProfile:
    """Per-index Bhattacharyya estimates with standard errors."""

    n: int
    z: np.ndarray
    stderr: np.ndarray
    samples: int
    seed: int | None
    method: str = "mc"
    label: str = ""

    def __post_init__(self):
        z = np.clip(np.asarray(self.z, dtype=float), 0.0, 1.0)
        se = np.asarray(self.stderr, dtype=float)
        if z.shape != (self.n,) or se.shape != (self.n,):
            raise ConfigurationError("profile arrays must have length n")
        if np.any(se < 0):
            raise ConfigurationError("standard errors must be nonnegative")
        z.setflags(write=False)
        se.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "stderr", se)

    def to_dict(self) -> dict:
        return {
            "n": self.n, "z": self.z.tolist(), "stderr": self.stderr.tolist(),
            "samples": self.samples, "seed": self.seed, "method": self.method, "label": self.label,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ZProfile":
        return cls(int(d["n"]), np.array(d["z"]), np.array(d["stderr"]), int(d["samples"]),
                   d.get("seed"), d.get("method", "mc"), d.get("label", ""))


@dataclass(frozen=True, eq=False)
class IndexPartition:
    """Disjoint cover of ``range(n)`` by frozen (H), deterministic (L) and information (I) indices."""

    n: int
    H: tuple[int, ...]
    L: tuple[int, ...]
    I: tuple[int, ...]
    delta: float | None = None
    rule: str = "delta"
    overlaps: int = 0
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("H", "L", "I"):
            object.__setattr__(self, name, tuple(sorted(int(i) for i in getattr(self, name))))
        allidx = self.H + self.L + self.I
        if len(allidx) != self.n or set(allidx) != set(range(self.n)):
            raise ConfigurationError("H, L and I must partition range(n)")

    @classmethod
    def from_kinds(cls, kinds, **kw) -> "IndexPartition":
        kinds = np.asarray(kinds)
        return cls(len(kinds), tuple(np.flatnonzero(kinds == H)), tuple(np.flatnonzero(kinds == L)),
                   tuple(np.flatnonzero(kinds == I)), **kw)

    @property
    def kinds(self) -> np.ndarray:
        k = np.full(self.n, I, dtype=np.uint8)
        k[list(self.H)] = H
        k[list(self.L)] = L
        return k

    @property
    def rate(self) -> float:
        return len(self.I) / self.n

    def _canonical(self) -> bytes:
        return json.dumps({"n": self.n, "H": self.H, "L": self.L, "I": self.I},
                          separators=(",", ":")).encode()

    @property
    def digest(self) -> int:
        """64-bit hash of the index sets."""
        return int.from_bytes(hashlib.blake2b(self._canonical(), digest_size=8).digest(), "big")

    def to_dict(self) -> dict:
        return {"n": self.n, "H": list(self.H), "L": list(self.L), "I": list(self.I),
                "delta": self.delta, "rule": self.rule, "overlaps": self.overlaps,
                "provenance": self.provenance, "digest": f"{self.digest:016x}"}

    @classmethod
    def from_dict(cls, d: dict) -> "IndexPartition":
        part = cls(int(d["n"]), tuple(d["H"]), tuple(d["L"]), tuple(d["I"]), d.get("delta"),
                   d.get("rule", "delta"), int(d.get("overlaps", 0)), dict(d.get("provenance", {})))
        if "digest" in d and d["digest"] != f"{part.digest:016x}":
            raise ConfigurationError("partition digest does not match its index sets")
        return part


def default_delta(n: int, beta: float = 0.3, floor: float = 1e-6) -> float:
    """``max(2 ** -(n ** beta), floor)``."""
    if not 0 < beta < 0.5:
        raise ParameterError(f"beta={beta} must lie in (0, 1/2)")
    return max(2.0 ** -(n**beta), floor)


def _draw_outputs(ch: BinaryInputChannel, t: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    if ch.is_null:
        return np.zeros(t.shape, dtype=np.uint8)
    u = rng.random(t.shape)
    out = np.empty(t.shape, dtype=np.uint8)
    for a in (0, 1):
        cdf = np.cumsum(ch.rows[a])
        cdf[-1] = 1.0
        sel = t == a
        out[sel] = np.minimum(np.searchsorted(cdf, u[sel], side="right"), ch.outputs - 1)
    return out


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))


def estimate_z_profile(
    prior: float,
    channel_enc: BinaryInputChannel,
    channel_dec: BinaryInputChannel,
    n: int,
    samples: int = 100_000,
    seed: int = 0,
) -> tuple[ZProfile, ZProfile]:
    """Monte-Carlo profiles ``Z(U_i|U^{i-1},Y_enc^n)`` and ``Z(U_i|U^{i-1},Y_dec^n)``.

    Samples are drawn in chunks of ``CHUNK`` with generators derived from
    ``(seed, chunk index)``, so results depend only on ``(seed, samples)``.
    """
    log2_exact(n)
    if samples < 1:
        raise ParameterError("samples must be >= 1")
    channels = (channel_enc, channel_dec)
    # a uniform prior seen through a null channel gives uniform U^n exactly
    exact_one = [ch.is_null and prior == 0.5 for ch in channels]
    sums = [np.zeros(n) for _ in channels]
    sqs = [np.zeros(n) for _ in channels]
    for c in range(math.ceil(samples / CHUNK)):
        rng = chunk_rng(seed, c)
        todo = min(CHUNK, samples - c * CHUNK)
        while todo > 0:
            b = min(_SUB, todo)
            todo -= b
            t = (rng.random((b, n)) < prior).astype(np.uint8)
            for k, ch in enumerate(channels):
                if exact_one[k]:
                    continue
                y = _draw_outputs(ch, t, rng)
                zs, zq = genie_z_sums(prior, ch, t, y)
                sums[k] += zs
                sqs[k] += zq
    out = []
    for k, label in enumerate(("enc", "dec")):
        if exact_one[k]:
            out.append(ZProfile(n, np.ones(n), np.zeros(n), samples, seed, "mc", label))
            continue
        mean = sums[k] / samples
        if samples > 1:
            var = np.maximum(sqs[k] - samples * mean**2, 0.0) / (samples - 1)
        else:
            var = np.zeros(n)
        out.append(ZProfile(n, mean, np.sqrt(var / samples), samples, seed, "mc", label))
    return out[0], out[1]


def exact_z_profile(prior: float, ch: BinaryInputChannel, n: int, label: str = "") -> ZProfile:
    return ZProfile(n, oracle_z_profile(prior, ch, n), np.zeros(n), 0, None, "exact", label)


def _resolve_delta(n: int, delta) -> float:
    if delta is None or delta == "default":
        return default_delta(n)
    if callable(delta):
        return float(delta(n))
    return float(delta)


def partition_indices(enc: ZProfile, dec: ZProfile, delta: float | Callable | None = None) -> IndexPartition:
    """Threshold rule: H where the encoder-side ``Z >= 1 - delta``, L where the
    decoder-side ``Z <= delta``, I elsewhere.

    An index passing both tests goes to H; the count is kept in ``overlaps``.
    """
    if enc.n != dec.n:
        raise ConfigurationError("profiles have different block lengths")
    d = _resolve_delta(enc.n, delta)
    in_h = enc.z >= 1 - d
    in_l = dec.z <= d
    kinds = np.full(enc.n, I)
    kinds[in_l] = L
    kinds[in_h] = H
    prov = {"enc": enc.method, "dec": dec.method, "samples": enc.samples, "seed": enc.seed}
    return IndexPartition.from_kinds(kinds, delta=d, rule="delta",
                                     overlaps=int((in_h & in_l).sum()), provenance=prov)


def partition_by_rate(enc: ZProfile, dec: ZProfile, target_rate: float) -> IndexPartition:
    """Pick ``ceil(rate * n)`` information indices with the largest ``Z_dec - Z_enc``.

    Remaining indices go to H when the encoder-side ``Z > 1/2``, else to L.
    """
    if enc.n != dec.n:
        raise ConfigurationError("profiles have different block lengths")
    if not 0 <= target_rate <= 1:
        raise ParameterError(f"target rate {target_rate} outside [0, 1]")
    n = enc.n
    k = min(n, math.ceil(round(target_rate * n, 9)))
    order = np.argsort(-(dec.z - enc.z), kind="stable")
    kinds = np.where(enc.z > 0.5, H, L)
    kinds[order[:k]] = I
    prov = {"enc": enc.method, "dec": dec.method, "samples": enc.samples, "seed": enc.seed,
            "target_rate": target_rate}
    return IndexPartition.from_kinds(kinds, rule="rate", provenance=prov)


class Construction(NamedTuple):
    enc: ZProfile
    dec: ZProfile
    partition: IndexPartition

    def to_dict(self) -> dict:
        return {"enc": self.enc.to_dict(), "dec": self.dec.to_dict(),
                "partition": self.partition.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "Construction":
        return cls(ZProfile.from_dict(d["enc"]), ZProfile.from_dict(d["dec"]),
                   IndexPartition.from_dict(d["partition"]))


def construct_layer(
    joint: JointPmf,
    target: str,
    h_given,
    l_given,
    n: int,
    *,
    rule: str = "delta",
    delta=None,
    target_rate: float | None = None,
    samples: int = 100_000,
    seed: int = 0,
    method: str = "mc",
) -> Construction:
    """Profiles and partition for the layer coding axis ``target``.

    ``h_given`` names the observations that define the frozen set and
    ``l_given`` those available to the decoder.
    """
    prior, ch_h = channel(joint, target, h_given)
    _, ch_l = channel(joint, target, l_given)
    if method == "exact":
        enc = exact_z_profile(prior, ch_h, n, "enc")
        dec = exact_z_profile(prior, ch_l, n, "dec")
    elif method == "mc":
        enc, dec = estimate_z_profile(prior, ch_h, ch_l, n, samples, seed)
    else:
        raise ConfigurationError(f"unknown profile method {method!r}")
    if rule == "delta":
        part = partition_indices(enc, dec, delta)
    elif rule == "rate":
        if target_rate is None:
            raise ConfigurationError("rate rule needs target_rate")
        part = partition_by_rate(enc, dec, target_rate)
    else:
        raise ConfigurationError(f"unknown partition rule {rule!r}")
    return Construction(enc, dec, part)


def save_construction(c: Construction, path) -> None:
    Path(path).write_text(json.dumps(c.to_dict(), indent=1))


def load_construction(path) -> Construction:
    return Construction.from_dict(json.loads(Path(path).read_text()))
