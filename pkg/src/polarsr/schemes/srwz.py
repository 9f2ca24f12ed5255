"""Successive refinement with degraded side information ``X -> Y -> Z``.

The coarse decoder holds ``Z`` and the refined decoder holds ``Y``.
"""

from __future__ import annotations

import numpy as np

from ..exceptions import ValidationError
from ..pmf import SRWZ_REQUIRED, SrwzReport, validate_srwz_conditions
from .design import SchemeSource
from .layer import decode_layer, encode_layer, mismatches, reproduce
from .record import TrialRecord


def check_srwz_source(source: SchemeSource, strict: bool = True, tol: float = 1e-10) -> SrwzReport:
    """Validate the joint; raise unless the required chains hold or ``strict`` is off."""
    dist = source.targets()
    report = validate_srwz_conditions(source.joint, source.f1, source.f2, dist[2], dist[3], source.d, tol)
    if strict and not report.passed(SRWZ_REQUIRED):
        raise ValidationError("joint fails the Markov conditions:\n" + report.format())
    return report


def srwz_roundtrip(source: SchemeSource, specs, x, y, z, rng: np.random.Generator,
                   validate: bool = True, **meta):
    """Returns ``((r^n, s^n), record)`` with ``r = f1(t, z)`` and ``s = f2(w, y)``.

    Layer-2 L-bits are chosen given ``(t^n, x^n)`` at the encoder and
    ``(t^n, y^n)`` at the decoder; disagreements are counted.
    """
    if validate:
        check_srwz_source(source)
    s1, s2 = specs
    d = source.d
    x, y, z = (np.asarray(a) for a in (x, y, z))
    f1 = np.asarray(source.f1, dtype=np.intp)
    f2 = np.asarray(source.f2, dtype=np.intp)
    u, p1 = encode_layer(s1, {"X": x}, rng)
    v, p2 = encode_layer(s2, {"T": reproduce(u), "X": x}, rng)
    u_hat = decode_layer(s1, p1, {})
    t = reproduce(u_hat)
    v_hat = decode_layer(s2, p2, {"T": t, "Y": y})
    w = reproduce(v_hat)
    r = f1[t, z]
    s = f2[w, y]
    exact = bool(np.array_equal(u, u_hat) and np.array_equal(v, v_hat))
    rec = TrialRecord(
        "srwz", s1.n, s1.rate, d.empirical(x, r), s2.rate, d.empirical(x, s),
        mismatch_L=mismatches(u, u_hat, s1) + mismatches(v, v_hat, s2),
        exact_decode=exact, **meta,
    )
    return (r, s), rec
