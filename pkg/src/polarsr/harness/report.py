"""Exact-versus-bound oracle reports and information summaries."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..construct import default_delta
from ..exceptions import ConfigurationError, OracleSizeError
from ..oracle import (
    exact_kinds,
    layer_gap,
    layer_setup,
    oracle_z_profile,
    rd_oracle,
    sr_oracle,
    wz_mismatch,
)
from ..pmf import channel, marginalize, mutual_information, validate_srwz_conditions
from ..schemes import SchemeSource, rimoldi_operating_point

PARTITIONS = ("exact", "all-info", "corrupt")


@dataclass
class OracleReport:
    scheme: str
    n: int
    rows: list = field(default_factory=list)  # (name, exact, bound, holds)
    notes: list = field(default_factory=list)

    def add(self, name: str, exact: float, bound: float, holds: bool | None = None):
        if holds is None:
            holds = exact <= bound + 1e-9
        self.rows.append((name, float(exact), float(bound), bool(holds)))

    @property
    def holds(self) -> bool:
        return all(r[3] for r in self.rows)

    def format(self) -> str:
        lines = [f"oracle report: scheme={self.scheme} n={self.n}",
                 f"{'check':<30s} {'exact':>14s} {'bound':>14s}  status"]
        for name, ex, bd, ok in self.rows:
            lines.append(f"{name:<30s} {ex:14.6g} {bd:14.6g}  {'ok' if ok else 'VIOLATED'}")
        lines.extend(f"note: {s}" for s in self.notes)
        return "\n".join(lines)


def layer_kinds(source: SchemeSource, layer: int, n: int, partition: str, delta: float) -> np.ndarray:
    """Exact profiles and the requested partition for one layer."""
    role = source.roles[layer]
    prior, ch_h = channel(source.joint, role.target, role.h_given)
    _, ch_l = channel(source.joint, role.target, role.l_given)
    z_enc = oracle_z_profile(prior, ch_h, n)
    z_dec = oracle_z_profile(prior, ch_l, n)
    if partition == "exact":
        return exact_kinds(z_enc, z_dec, delta)
    if partition == "all-info":
        return np.ones(n, dtype=np.int64)
    if partition == "corrupt":
        # deterministic class on the least predictable half of the indices
        kinds = exact_kinds(z_enc, z_dec, delta)
        kinds[np.argsort(-z_dec, kind="stable")[: n // 2]] = 2
        return kinds
    raise ConfigurationError(f"partition must be one of {PARTITIONS}")


def _z_inequality(report: OracleReport, source: SchemeSource, layer: int, n: int):
    role = source.roles[layer]
    prior, ch_h = channel(source.joint, role.target, role.h_given)
    _, null = channel(source.joint, role.target, ())
    excess = oracle_z_profile(prior, ch_h, n) - oracle_z_profile(prior, null, n)
    report.add(f"layer{layer + 1} Z(.|obs) - Z(.)", excess.max(), 1e-12)


def oracle_report(source: SchemeSource, n: int, partition: str = "exact",
                  delta: float | None = None) -> OracleReport:
    if n > 8:
        raise OracleSizeError("oracle reports support n <= 8")
    delta = default_delta(n) if delta is None else delta
    rep = OracleReport(source.scheme, n)
    kinds = [layer_kinds(source, k, n, partition, delta) for k in range(len(source.roles))]
    for k in range(len(source.roles)):
        _z_inequality(rep, source, k, n)
    j, d = source.joint, source.d
    if source.scheme == "rd":
        gap, dist = rd_oracle(j, kinds[0], n, d)
        rep.add("layer1 ||P-Q||_1", gap.exact, gap.bound)
        rep.add("layer1 E_Q d", dist.expected, dist.bound)
        flagged = gap.flagged_L
    elif source.scheme == "sr":
        o = sr_oracle(j, kinds[0], kinds[1], n, d)
        rep.add("layer1 ||P-Q||_1", o.gap1.exact, o.gap1.bound)
        rep.add("layer1 E_Q d", o.dist1.expected, o.dist1.bound)
        rep.add("layer2 conditional gap", o.gap2_conditional.exact, o.gap2_conditional.bound)
        rep.add("layer2 ||P-Q||_1 (exact in)", o.gap2_exact, o.gap2_bound)
        rep.add("layer2 ||P-Q||_1 (bounds)", o.gap2_exact, o.gap2_full_bound)
        rep.add("layer2 E_Q d", o.dist2.expected, o.dist2.bound)
        flagged = o.gap1.flagged_L + o.gap2_conditional.flagged_L
    elif source.scheme == "wz":
        setup = layer_setup(marginalize(j, ("T", "X")), "T", ("X",), ("X",), n)
        gap, _ = layer_gap(setup, kinds[0])
        rep.add("encoder ||P-Q||_1", gap.exact, gap.bound)
        mm = wz_mismatch(j, kinds[0], n)
        rep.add("mismatch P-law", mm.p_law, mm.bound)
        rep.add("mismatch scheme law", mm.scheme, mm.scheme_bound)
        flagged = gap.flagged_L
    else:
        s1 = layer_setup(marginalize(j, ("T", "X")), "T", ("X",), (), n)
        g1, _ = layer_gap(s1, kinds[0])
        rep.add("layer1 ||P-Q||_1", g1.exact, g1.bound)
        s2 = layer_setup(j, "W", ("T", "X"), ("T", "X"), n)
        g2, _ = layer_gap(s2, kinds[1])
        rep.add("layer2 conditional gap", g2.exact, g2.bound)
        flagged = g1.flagged_L + g2.flagged_L
    if flagged:
        rep.notes.append(f"{len(flagged)} L indices have Z near 1; the bound is vacuous there")
    return rep


def info_report(source: SchemeSource) -> list[str]:
    """Rates and distortions a joint implies for its scheme."""
    j = source.joint
    r1, r2, d1, d2 = source.targets()
    lines = [f"scheme {source.scheme}: joint {j.names} digest {j.digest()}"]
    if source.scheme in ("rd", "sr"):
        lines.append(f"I(X;T) = {mutual_information(j, 'X', 'T'):.6f}   E d(X,T) = {d1:.6f}")
    if source.scheme == "sr":
        R1, R2, D1, D2 = rimoldi_operating_point(j, source.d)
        lines.append(f"Rimoldi point: R1 = I(X;T) = {R1:.6f}, R1+R2 = I(X;W,T) = {R2:.6f}, "
                     f"D1 = {D1:.6f}, D2 = {D2:.6f}")
        lines.append(f"refinement rate I(X;W|T) = {r2:.6f}")
    if source.scheme == "wz":
        lines.append(f"I(X;T|Z) = {r1:.6f}   I(X;T) = {mutual_information(j, 'X', 'T'):.6f}   "
                     f"E d(X,f(T,Z)) = {d1:.6f}")
    if source.scheme == "srwz":
        lines.append(f"layer rates: I(X;T) = {r1:.6f}, I(X;W|T,Y) = {r2:.6f}")
        lines.append(validate_srwz_conditions(j, source.f1, source.f2, d1, d2, source.d).format())
    return lines
