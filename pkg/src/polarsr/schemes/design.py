"""Per-scheme layer roles, construction policy and design targets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..construct import Construction, construct_layer, default_delta
from ..exceptions import ConfigurationError, ParameterError
from ..pmf import (
    DistortionMeasure,
    JointPmf,
    expected_distortion,
    mutual_information,
    reconstruction_distortion,
)
from .layer import LayerCodeSpec, LayerRole

ROLES: dict[str, tuple[LayerRole, ...]] = {
    "rd": (LayerRole("T", ("X",), (), ("X",), (), ()),),
    "sr": (
        LayerRole("T", ("X",), (), ("X",), (), ()),
        LayerRole("W", ("T", "X"), ("T",), ("T", "X"), ("T",), ("T",)),
    ),
    # frozen set from (X, Z), which equals conditioning on X along T -> X -> Z
    "wz": (LayerRole("T", ("X", "Z"), ("Z",), ("X",), ("X",), ("Z",)),),
    "srwz": (
        LayerRole("T", ("X",), (), ("X",), (), ()),
        LayerRole("W", ("X", "T", "Y"), ("T", "Y"), ("T", "X"), ("T", "X"), ("T", "Y")),
    ),
}

#: axes each scheme needs in its joint, and the source axes drawn per trial
SCHEME_AXES = {
    "rd": (("T", "X"), ("X",)),
    "sr": (("T", "W", "X"), ("X",)),
    "wz": (("T", "X", "Z"), ("X", "Z")),
    "srwz": (("T", "W", "X", "Y", "Z"), ("X", "Y", "Z")),
}


@dataclass(frozen=True, eq=False)
class SchemeSource:
    """A joint plus the reconstruction maps and distortion a scheme uses.

    ``f1[t, z]`` (WZ and SRWZ coarse layer) and ``f2[w, y]`` (SRWZ refined
    layer); plain RD and SR reproduce the coded sequences directly.
    """

    scheme: str
    joint: JointPmf
    f1: np.ndarray | None = None
    f2: np.ndarray | None = None
    d: DistortionMeasure = field(default_factory=DistortionMeasure.hamming)

    def __post_init__(self):
        if self.scheme not in ROLES:
            raise ConfigurationError(f"unknown scheme {self.scheme!r}")
        needed, _ = SCHEME_AXES[self.scheme]
        missing = [a for a in needed if a not in self.joint.names]
        if missing:
            raise ConfigurationError(f"{self.scheme} needs joint axes {missing}")
        if self.scheme in ("wz", "srwz") and self.f1 is None:
            raise ConfigurationError(f"{self.scheme} needs a reconstruction map f1")
        if self.scheme == "srwz" and self.f2 is None:
            raise ConfigurationError("srwz needs a reconstruction map f2")

    @property
    def roles(self) -> tuple[LayerRole, ...]:
        return ROLES[self.scheme]

    @property
    def source_axes(self) -> tuple[str, ...]:
        return SCHEME_AXES[self.scheme][1]

    def targets(self) -> tuple[float, float, float, float]:
        """Design ``(rate1, rate2, D1, D2)``; unused layer-2 entries are NaN."""
        j, d = self.joint, self.d
        nan = math.nan
        if self.scheme == "rd":
            return mutual_information(j, "X", "T"), nan, expected_distortion(j, "X", "T", d), nan
        if self.scheme == "sr":
            return (mutual_information(j, "X", "T"), mutual_information(j, "X", "W", "T"),
                    expected_distortion(j, "X", "T", d), expected_distortion(j, "X", "W", d))
        if self.scheme == "wz":
            return (mutual_information(j, "X", "T", "Z"), nan,
                    reconstruction_distortion(j, "X", "T", "Z", self.f1, d), nan)
        return (mutual_information(j, "X", "T"), mutual_information(j, "X", "W", ("T", "Y")),
                reconstruction_distortion(j, "X", "T", "Z", self.f1, d),
                reconstruction_distortion(j, "X", "W", "Y", self.f2, d))


@dataclass(frozen=True)
class ConstructionPolicy:
    """How index partitions are built.

    ``rule`` is ``"delta"`` (thresholds, ``delta=None`` uses the default
    schedule with exponent ``beta``) or ``"rate"`` (``target_rates`` per layer).
    """

    rule: str = "delta"
    delta: float | None = None
    beta: float = 0.3
    target_rates: tuple[float, ...] = ()
    samples: int = 100_000
    seed: int = 0
    method: str = "mc"

    def __post_init__(self):
        if self.rule not in ("delta", "rate"):
            raise ConfigurationError(f"unknown partition rule {self.rule!r}")
        if self.method not in ("mc", "exact"):
            raise ConfigurationError(f"unknown profile method {self.method!r}")
        if self.method == "mc" and self.samples < 1:
            raise ParameterError("samples must be >= 1")
        if self.delta is not None and not 0 < self.delta < 1:
            raise ParameterError(f"delta={self.delta} outside (0, 1)")

    def delta_for(self, n: int) -> float:
        return self.delta if self.delta is not None else default_delta(n, self.beta)

    def layer_seed(self, layer: int) -> int:
        """Construction seed of layer ``layer`` (0-based), derived from ``seed``."""
        return int(np.random.SeedSequence([self.seed, layer]).generate_state(1)[0])

    def key(self) -> dict:
        return {"rule": self.rule, "delta": self.delta, "beta": self.beta,
                "target_rates": list(self.target_rates), "samples": self.samples,
                "seed": self.seed, "method": self.method}


def construct_scheme(source: SchemeSource, n: int, policy: ConstructionPolicy) -> list[Construction]:
    """Profiles and partitions for every layer of ``source.scheme``."""
    out = []
    for k, role in enumerate(source.roles):
        rate = None
        if policy.rule == "rate":
            if len(policy.target_rates) != len(source.roles):
                raise ConfigurationError("rate rule needs one target rate per layer")
            rate = policy.target_rates[k]
        seed = policy.layer_seed(k)
        out.append(construct_layer(
            source.joint, role.target, role.h_given, role.l_given, n,
            rule=policy.rule, delta=policy.delta_for(n), target_rate=rate,
            samples=policy.samples, seed=seed, method=policy.method,
        ))
    return out


def layer_specs(source: SchemeSource, constructions, frozen_seed: int) -> list[LayerCodeSpec]:
    if len(constructions) != len(source.roles):
        raise ConfigurationError("one construction per layer required")
    return [
        LayerCodeSpec.from_joint(source.joint, role, c.partition, frozen_seed, source.scheme, k + 1)
        for k, (role, c) in enumerate(zip(source.roles, constructions))
    ]
