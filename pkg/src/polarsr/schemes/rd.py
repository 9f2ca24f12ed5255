"""Single-layer lossy coding of ``X`` with reproduction ``T``."""

from __future__ import annotations

import numpy as np

from ..pmf import DistortionMeasure
from .layer import LayerCodeSpec, decode_layer, encode_layer, mismatches, reproduce
from .record import TrialRecord


def rd_roundtrip(spec: LayerCodeSpec, x, rng: np.random.Generator,
                 d: DistortionMeasure | None = None, **meta) -> tuple[np.ndarray, TrialRecord]:
    """Encode ``x^n``, decode, and score the reproduction ``t^n``.

    ``meta`` is copied into the record (seeds, trial index, targets).
    """
    d = d or DistortionMeasure.hamming()
    x = np.asarray(x)
    u, payload = encode_layer(spec, {"X": x}, rng)
    u_hat = decode_layer(spec, payload, {})
    t = reproduce(u_hat)
    rec = TrialRecord("rd", spec.n, spec.rate, d.empirical(x, t),
                      mismatch_L=mismatches(u, u_hat, spec),
                      exact_decode=bool(np.array_equal(u, u_hat)), **meta)
    return t, rec
