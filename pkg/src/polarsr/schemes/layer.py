"""One coding layer: frozen, sampled and argmax bits over a shared SC pass."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..construct import H, I, L, IndexPartition
from ..exceptions import ConfigurationError, DigestMismatchError
from ..pmf import BinaryInputChannel, JointPmf, channel
from ..sc import leaf_pairs, run_pass
from ..xform import log2_exact, polar_transform

SCHEME_IDS = {"rd": 1, "sr": 2, "wz": 3, "srwz": 4}
HEADER_BYTES = 8
# the header keeps the top 40 bits of the 64-bit partition digest
_DIGEST_SHIFT = 24


@dataclass(frozen=True)
class LayerRole:
    """Which observations each rule of a layer conditions on.

    ``h_given`` defines the frozen set and ``l_given`` the deterministic set
    at construction time. At coding time the encoder samples I-bits given
    ``sample_given`` and takes L-bits by argmax given ``enc_l_given``; the
    decoder takes L-bits by argmax given ``dec_l_given``.
    """

    target: str
    h_given: tuple[str, ...]
    l_given: tuple[str, ...]
    sample_given: tuple[str, ...]
    enc_l_given: tuple[str, ...]
    dec_l_given: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class LayerCodeSpec:
    """Everything needed to run one layer's encoder and decoder."""

    n: int
    partition: IndexPartition
    frozen_seed: int
    role: LayerRole
    prior: float
    sample_channel: BinaryInputChannel
    enc_l_channel: BinaryInputChannel
    dec_l_channel: BinaryInputChannel
    sizes: dict
    scheme: str = "rd"
    layer: int = 1

    def __post_init__(self):
        log2_exact(self.n)
        if self.partition.n != self.n:
            raise ConfigurationError("partition length differs from layer length")
        if self.scheme not in SCHEME_IDS:
            raise ConfigurationError(f"unknown scheme {self.scheme!r}")

    @classmethod
    def from_joint(cls, joint: JointPmf, role: LayerRole, partition: IndexPartition,
                   frozen_seed: int, scheme: str = "rd", layer: int = 1) -> "LayerCodeSpec":
        prior, ch_s = channel(joint, role.target, role.sample_given)
        _, ch_e = channel(joint, role.target, role.enc_l_given)
        _, ch_d = channel(joint, role.target, role.dec_l_given)
        axes = set(role.sample_given) | set(role.enc_l_given) | set(role.dec_l_given)
        sizes = {a: joint.size(a) for a in axes}
        return cls(partition.n, partition, int(frozen_seed), role, prior, ch_s, ch_e, ch_d,
                   sizes, scheme, layer)

    @property
    def digest(self) -> int:
        return self.partition.digest

    @property
    def info_bits(self) -> int:
        return len(self.partition.I)

    @property
    def rate(self) -> float:
        return self.partition.rate

    def frozen_bits(self) -> np.ndarray:
        """Full-length bit vector from the shared frozen seed; only H entries are used.

        Each layer draws from its own stream ``(frozen_seed, layer)``.
        """
        rng = np.random.default_rng([self.frozen_seed, self.layer])
        return rng.integers(0, 2, self.n).astype(np.uint8)

    def symbols(self, given: tuple[str, ...], obs: dict) -> np.ndarray:
        """Mixed-radix observation symbols for the axes ``given``."""
        if not given:
            return np.zeros(self.n, dtype=np.intp)
        missing = [a for a in given if a not in obs]
        if missing:
            raise ConfigurationError(f"missing observations for axes {missing}")
        cols = []
        for a in given:
            v = np.asarray(obs[a])
            if v.shape != (self.n,):
                raise ConfigurationError(f"observation {a!r} must have shape ({self.n},), got {v.shape}")
            if v.size and (v.min() < 0 or v.max() >= self.sizes[a]):
                raise ConfigurationError(f"observation {a!r} outside alphabet of size {self.sizes[a]}")
            cols.append(v.astype(np.intp))
        return np.ravel_multi_index(tuple(cols), tuple(self.sizes[a] for a in given))


@dataclass(frozen=True, eq=False)
class EncodedLayer:
    """Payload of one layer: information bits in index order."""

    bits: np.ndarray
    n: int
    digest: int
    scheme: str = "rd"
    layer: int = 1

    def __post_init__(self):
        b = np.asarray(self.bits, dtype=np.uint8)
        if b.ndim != 1 or (b.size and b.max() > 1):
            raise ConfigurationError("payload must be a bit vector")
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    def to_bytes(self) -> bytes:
        header = bytes([SCHEME_IDS[self.scheme], self.layer, log2_exact(self.n)])
        header += (self.digest >> _DIGEST_SHIFT).to_bytes(5, "big")
        return header + np.packbits(self.bits).tobytes()

    @classmethod
    def from_bytes(cls, data: bytes, info_bits: int) -> "EncodedLayer":
        if len(data) != HEADER_BYTES + (info_bits + 7) // 8:
            raise ConfigurationError("payload length does not match the information-bit count")
        names = {v: k for k, v in SCHEME_IDS.items()}
        if data[0] not in names:
            raise ConfigurationError(f"unknown scheme id {data[0]}")
        digest = int.from_bytes(data[3:8], "big") << _DIGEST_SHIFT
        bits = np.unpackbits(np.frombuffer(data[8:], dtype=np.uint8))[:info_bits]
        return cls(bits, 1 << data[2], digest, names[data[0]], data[1])

    def matches(self, spec: LayerCodeSpec) -> bool:
        return (self.n == spec.n and len(self.bits) == spec.info_bits
                and self.digest >> _DIGEST_SHIFT == spec.digest >> _DIGEST_SHIFT)


def encode_layer(spec: LayerCodeSpec, obs: dict, rng: np.random.Generator) -> tuple[np.ndarray, EncodedLayer]:
    """Run the encoder pass; returns ``u^n`` and the I-bit payload.

    ``rng`` supplies the ``n`` uniforms of the randomized rounding.
    """
    role = spec.role
    leaf_a = leaf_pairs(spec.prior, spec.sample_channel, spec.symbols(role.sample_given, obs))
    leaf_b = None
    if role.enc_l_given != role.sample_given:
        leaf_b = leaf_pairs(spec.prior, spec.enc_l_channel, spec.symbols(role.enc_l_given, obs))
    unif = rng.random(spec.n)
    u = run_pass(leaf_a, spec.partition.kinds, spec.frozen_bits(), unif, leaf_b)
    info = np.asarray(spec.partition.I, dtype=np.intp)
    return u, EncodedLayer(u[info], spec.n, spec.digest, spec.scheme, spec.layer)


def decode_layer(spec: LayerCodeSpec, payload: EncodedLayer, obs: dict) -> np.ndarray:
    """Rebuild ``u^n`` from frozen bits, payload and decoder-side argmax."""
    if not payload.matches(spec):
        raise DigestMismatchError("payload does not belong to this layer construction")
    role = spec.role
    leaf = leaf_pairs(spec.prior, spec.dec_l_channel, spec.symbols(role.dec_l_given, obs))
    fixed = spec.frozen_bits()
    fixed[np.asarray(spec.partition.I, dtype=np.intp)] = payload.bits
    # H and I are both fixed at the decoder
    kinds = np.where(spec.partition.kinds == L, 2, 0).astype(np.uint8)
    return run_pass(leaf, kinds, fixed, np.zeros(spec.n))


def reproduce(u: np.ndarray) -> np.ndarray:
    """Reproduction sequence ``u^n G_n``."""
    return polar_transform(u)


def mismatches(u: np.ndarray, u_hat: np.ndarray, spec: LayerCodeSpec) -> int:
    """Number of L-indices where encoder and decoder paths disagree."""
    lset = np.asarray(spec.partition.L, dtype=np.intp)
    return int((u[lset] != u_hat[lset]).sum())


__all__ = [
    "H", "I", "L", "LayerRole", "LayerCodeSpec", "EncodedLayer",
    "encode_layer", "decode_layer", "reproduce", "mismatches", "SCHEME_IDS",
]
