"""Lossy coding with side information ``Z`` at the decoder only."""

from __future__ import annotations

import numpy as np

from ..pmf import DistortionMeasure
from .layer import LayerCodeSpec, decode_layer, encode_layer, mismatches, reproduce
from .record import TrialRecord


def wz_roundtrip(spec: LayerCodeSpec, f, x, z, rng: np.random.Generator,
                 d: DistortionMeasure | None = None, **meta) -> tuple[np.ndarray, TrialRecord]:
    """Encode from ``x^n``, decode from ``z^n``, reconstruct ``s_j = f(t_j, z_j)``.

    The encoder takes L-bits by argmax given ``x^n`` and the decoder given
    ``z^n``; disagreements are counted in ``mismatch_L``.
    """
    d = d or DistortionMeasure.hamming()
    x = np.asarray(x)
    z = np.asarray(z)
    f = np.asarray(f, dtype=np.intp)
    u, payload = encode_layer(spec, {"X": x}, rng)
    u_hat = decode_layer(spec, payload, {"Z": z})
    t = reproduce(u_hat)
    s = f[t, z]
    rec = TrialRecord("wz", spec.n, spec.rate, d.empirical(x, s),
                      mismatch_L=mismatches(u, u_hat, spec),
                      exact_decode=bool(np.array_equal(u, u_hat)), **meta)
    return s, rec
