"""Two-layer successive refinement: coarse ``T`` then refinement ``W`` given ``T``."""

from __future__ import annotations

import numpy as np

from ..pmf import DistortionMeasure, JointPmf, expected_distortion, mutual_information
from .layer import EncodedLayer, LayerCodeSpec, decode_layer, encode_layer, mismatches, reproduce
from .record import TrialRecord


def sr_encode(specs, x, rng: np.random.Generator, return_paths: bool = False):
    """Payloads of both layers for one source block.

    Layer 1 codes ``x^n`` into ``u^n``; layer 2 codes ``v^n`` given
    ``(t^n, x^n)`` with ``t^n = u^n G_n``. With ``return_paths`` the encoder
    paths ``u^n, v^n`` are appended to the result.
    """
    s1, s2 = specs
    x = np.asarray(x)
    u, p1 = encode_layer(s1, {"X": x}, rng)
    t = reproduce(u)
    v, p2 = encode_layer(s2, {"T": t, "X": x}, rng)
    return (p1, p2, u, v) if return_paths else (p1, p2)


def sr_decode(specs, payload1: EncodedLayer, payload2: EncodedLayer, return_paths: bool = False):
    """Coarse and refined reproductions ``(t^n, w^n)``."""
    s1, s2 = specs
    u = decode_layer(s1, payload1, {})
    t = reproduce(u)
    v = decode_layer(s2, payload2, {"T": t})
    w = reproduce(v)
    return (t, w, u, v) if return_paths else (t, w)


def sr_roundtrip(specs, x, rng: np.random.Generator, d: DistortionMeasure | None = None,
                 **meta) -> tuple[tuple[np.ndarray, np.ndarray], TrialRecord]:
    d = d or DistortionMeasure.hamming()
    x = np.asarray(x)
    p1, p2, u, v = sr_encode(specs, x, rng, return_paths=True)
    t, w, u_hat, v_hat = sr_decode(specs, p1, p2, return_paths=True)
    exact = bool(np.array_equal(u, u_hat) and np.array_equal(v, v_hat))
    rec = TrialRecord(
        "sr", specs[0].n, specs[0].rate, d.empirical(x, t), specs[1].rate, d.empirical(x, w),
        mismatch_L=mismatches(u, u_hat, specs[0]) + mismatches(v, v_hat, specs[1]),
        exact_decode=exact, **meta,
    )
    return (t, w), rec


def rimoldi_operating_point(joint: JointPmf, d: DistortionMeasure | None = None) -> tuple[float, float, float, float]:
    """``(I(X;T), I(X;W,T), E d(X,T), E d(X,W))`` for any joint on ``T, W, X``.

    No Markov structure is assumed; these are the cumulative rates and
    distortions the two-layer codec targets.
    """
    d = d or DistortionMeasure.hamming()
    return (
        mutual_information(joint, "X", "T"),
        mutual_information(joint, "X", ("W", "T")),
        expected_distortion(joint, "X", "T", d),
        expected_distortion(joint, "X", "W", d),
    )
