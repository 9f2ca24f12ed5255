"""scikit-learn style front end.

``fit`` builds the index partitions for the configured source, ``transform``
compresses blocks of source letters into payload bits, and
``inverse_transform`` rebuilds reproductions from payloads (plus decoder
side information where the scheme has it).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import ConfigurationError
from .pmf import build_bss_rd, build_bss_sr, build_dsbs_wz, build_srwz_degenerate
from .schemes import (
    ConstructionPolicy,
    EncodedLayer,
    SchemeSource,
    construct_scheme,
    decode_layer,
    encode_layer,
    layer_specs,
    reproduce,
)
from .xform import log2_exact


def _check_blocks(X, n: int | None, alphabet: int, name: str = "X") -> np.ndarray:
    X = check_array(X, dtype=None, ensure_2d=True)
    if not np.issubdtype(X.dtype, np.integer):
        if not np.all(np.mod(X, 1) == 0):
            raise ValueError(f"{name} must hold integer symbols")
        X = X.astype(np.int64)
    if n is not None and X.shape[1] != n:
        raise ValueError(f"{name} has {X.shape[1]} columns, expected block length {n}")
    if X.min() < 0 or X.max() >= alphabet:
        raise ValueError(f"{name} symbols must lie in [0, {alphabet})")
    return X.astype(np.uint8)


class _PolarCoder(TransformerMixin, BaseEstimator):
    """Shared machinery; subclasses define the source and the layer wiring."""

    scheme = "rd"

    def _source(self) -> SchemeSource:
        raise NotImplementedError

    def _policy(self) -> ConstructionPolicy:
        rates = tuple(self.target_rates) if self.target_rates is not None else ()
        return ConstructionPolicy(rule=self.rule, delta=self.delta, beta=self.beta,
                                  target_rates=rates, samples=self.samples,
                                  seed=self.construction_seed, method=self.method)

    def fit(self, X=None, y=None):
        """Build the construction. ``X`` (optional) fixes the block length when
        ``block_length`` is None and is otherwise only validated."""
        n = self.block_length
        if n is None:
            if X is None:
                raise ValueError("block_length is None and no X given to infer it")
            n = check_array(X, dtype=None).shape[1]
        log2_exact(n)
        source = self._source()
        if X is not None:
            _check_blocks(X, n, source.joint.size("X"))
        self.source_ = source
        self.n_ = n
        self.constructions_ = construct_scheme(source, n, self._policy())
        self.specs_ = layer_specs(source, self.constructions_, self.frozen_seed)
        self.rates_ = tuple(s.rate for s in self.specs_)
        self.info_bits_ = tuple(s.info_bits for s in self.specs_)
        self._rng = np.random.default_rng(self.random_state)
        return self

    def _split(self, P) -> list[list[EncodedLayer]]:
        P = check_array(P, dtype=None)
        total = sum(self.info_bits_)
        if P.shape[1] != total:
            raise ValueError(f"payload has {P.shape[1]} columns, expected {total}")
        if P.size and (P.min() < 0 or P.max() > 1):
            raise ValueError("payload must hold bits")
        out = []
        for row in P.astype(np.uint8):
            layers, start = [], 0
            for s in self.specs_:
                bits = row[start:start + s.info_bits]
                start += s.info_bits
                layers.append(EncodedLayer(bits, s.n, s.digest, s.scheme, s.layer))
            out.append(layers)
        return out

    def transform(self, X):
        """Payload bits of every block, layers concatenated in order."""
        check_is_fitted(self, "specs_")
        X = _check_blocks(X, self.n_, self.source_.joint.size("X"))
        rows = []
        for x in X:
            rows.append(np.concatenate([p.bits for p in self._encode_block(x)]))
        return np.array(rows, dtype=np.uint8).reshape(len(X), sum(self.info_bits_))

    def _encode_block(self, x) -> list[EncodedLayer]:
        obs = {"X": x}
        payloads = []
        for k, spec in enumerate(self.specs_):
            u, p = encode_layer(spec, obs, self._rng)
            obs = {**obs, spec.role.target: reproduce(u)}
            payloads.append(p)
        return payloads


class PolarRDCoder(_PolarCoder):
    """Lossy coder for a binary symmetric source at Hamming distortion ``D``.

    Parameters
    ----------
    D : float
        Design distortion of the backward test channel.
    block_length : int or None
        Power-of-two block length; inferred from ``X`` in ``fit`` when None.
    rule, delta, beta, target_rates, samples, construction_seed, method
        Construction policy, see :class:`~polarsr.schemes.ConstructionPolicy`.
    frozen_seed : int
        Seed of the frozen bits shared by encoder and decoder.
    random_state : int or None
        Seed of the randomized rounding at the encoder.
    """

    scheme = "rd"

    def __init__(self, D=0.11, block_length=None, rule="delta", delta=None, beta=0.3,
                 target_rates=None, samples=20_000, construction_seed=0, method="mc",
                 frozen_seed=0, random_state=None):
        self.D = D
        self.block_length = block_length
        self.rule = rule
        self.delta = delta
        self.beta = beta
        self.target_rates = target_rates
        self.samples = samples
        self.construction_seed = construction_seed
        self.method = method
        self.frozen_seed = frozen_seed
        self.random_state = random_state

    def _source(self):
        return SchemeSource("rd", build_bss_rd(self.D))

    def inverse_transform(self, P):
        check_is_fitted(self, "specs_")
        spec = self.specs_[0]
        return np.array([reproduce(decode_layer(spec, layers[0], {})) for layers in self._split(P)],
                        dtype=np.uint8).reshape(-1, self.n_)


class PolarSRCoder(_PolarCoder):
    """Two-layer refinement coder; ``inverse_transform(P, layer=1)`` gives the
    coarse reproduction and ``layer=2`` the refined one."""

    scheme = "sr"

    def __init__(self, D1=0.25, D2=0.11, block_length=None, rule="delta", delta=None, beta=0.3,
                 target_rates=None, samples=20_000, construction_seed=0, method="mc",
                 frozen_seed=0, random_state=None):
        self.D1 = D1
        self.D2 = D2
        self.block_length = block_length
        self.rule = rule
        self.delta = delta
        self.beta = beta
        self.target_rates = target_rates
        self.samples = samples
        self.construction_seed = construction_seed
        self.method = method
        self.frozen_seed = frozen_seed
        self.random_state = random_state

    def _source(self):
        return SchemeSource("sr", build_bss_sr(self.D1, self.D2))

    def inverse_transform(self, P, layer=2):
        check_is_fitted(self, "specs_")
        if layer not in (1, 2):
            raise ValueError("layer must be 1 or 2")
        s1, s2 = self.specs_
        out = []
        for p1, p2 in self._split(P):
            t = reproduce(decode_layer(s1, p1, {}))
            out.append(t if layer == 1 else reproduce(decode_layer(s2, p2, {"T": t})))
        return np.array(out, dtype=np.uint8).reshape(-1, self.n_)


class PolarWZCoder(_PolarCoder):
    """Coder with side information ``Z = X + Bern(p)`` known only at the decoder."""

    scheme = "wz"

    def __init__(self, D=0.11, p=0.25, block_length=None, rule="delta", delta=None, beta=0.3,
                 target_rates=None, samples=20_000, construction_seed=0, method="mc",
                 frozen_seed=0, random_state=None):
        self.D = D
        self.p = p
        self.block_length = block_length
        self.rule = rule
        self.delta = delta
        self.beta = beta
        self.target_rates = target_rates
        self.samples = samples
        self.construction_seed = construction_seed
        self.method = method
        self.frozen_seed = frozen_seed
        self.random_state = random_state

    def _source(self):
        built = build_dsbs_wz(self.D, self.p)
        return SchemeSource("wz", built.joint, built.f)

    def inverse_transform(self, P, side_info=None):
        """Reconstruct ``f(t, z)`` from payloads and side information rows ``z``."""
        check_is_fitted(self, "specs_")
        if side_info is None:
            raise ValueError("the decoder needs side information")
        blocks = self._split(P)
        Z = _check_blocks(side_info, self.n_, self.source_.joint.size("Z"), "side_info")
        if len(Z) != len(blocks):
            raise ValueError("side_info must have one row per payload")
        f = np.asarray(self.source_.f1, dtype=np.intp)
        spec = self.specs_[0]
        out = [f[reproduce(decode_layer(spec, layers[0], {"Z": z})), z] for layers, z in zip(blocks, Z)]
        return np.array(out, dtype=np.uint8).reshape(-1, self.n_)


class PolarSRWZCoder(_PolarCoder):
    """Refinement coder with degraded side information (``Y = X``, constant ``Z``)."""

    scheme = "srwz"

    def __init__(self, D1=0.25, D2=0.11, block_length=None, rule="delta", delta=None, beta=0.3,
                 target_rates=None, samples=20_000, construction_seed=0, method="mc",
                 frozen_seed=0, random_state=None):
        self.D1 = D1
        self.D2 = D2
        self.block_length = block_length
        self.rule = rule
        self.delta = delta
        self.beta = beta
        self.target_rates = target_rates
        self.samples = samples
        self.construction_seed = construction_seed
        self.method = method
        self.frozen_seed = frozen_seed
        self.random_state = random_state

    def _source(self):
        built = build_srwz_degenerate(self.D1, self.D2)
        return SchemeSource("srwz", built.joint, built.f1, built.f2)

    def inverse_transform(self, P, side_info=None, layer=2):
        """``side_info`` maps ``"Y"`` (refined decoder) and ``"Z"`` (coarse decoder) to rows."""
        check_is_fitted(self, "specs_")
        if layer not in (1, 2):
            raise ValueError("layer must be 1 or 2")
        if not isinstance(side_info, dict):
            raise ValueError("side_info must be a dict with 'Y' and/or 'Z' rows")
        blocks = self._split(P)
        need = "Z" if layer == 1 else "Y"
        if need not in side_info:
            raise ConfigurationError(f"layer {layer} decoding needs side_info[{need!r}]")
        S = _check_blocks(side_info[need], self.n_, self.source_.joint.size(need), "side_info")
        if len(S) != len(blocks):
            raise ValueError("side_info must have one row per payload")
        s1, s2 = self.specs_
        f1 = np.asarray(self.source_.f1, dtype=np.intp)
        f2 = np.asarray(self.source_.f2, dtype=np.intp)
        out = []
        for (p1, p2), side in zip(blocks, S):
            t = reproduce(decode_layer(s1, p1, {}))
            if layer == 1:
                out.append(f1[t, side])
            else:
                w = reproduce(decode_layer(s2, p2, {"T": t, "Y": side}))
                out.append(f2[w, side])
        return np.array(out, dtype=np.uint8).reshape(-1, self.n_)
