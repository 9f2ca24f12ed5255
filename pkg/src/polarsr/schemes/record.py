"""Per-trial outcome records."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

CSV_COLUMNS = (
    "scheme", "m", "n", "trial", "frozen_seed", "rounding_seed", "source_seed",
    "rate1", "rate2", "dist1", "dist2", "mismatch_L",
    "target_rate1", "target_rate2", "target_D1", "target_D2",
)


@dataclass(frozen=True)
class TrialRecord:
    """One simulated block. Single-layer schemes leave the layer-2 fields NaN."""

    scheme: str
    n: int
    rate1: float
    dist1: float
    rate2: float = math.nan
    dist2: float = math.nan
    mismatch_L: int = 0
    exact_decode: bool = True
    trial: int = 0
    frozen_seed: int | None = None
    rounding_seed: int | None = None
    source_seed: int | None = None
    target_rate1: float = math.nan
    target_rate2: float = math.nan
    target_D1: float = math.nan
    target_D2: float = math.nan

    def __post_init__(self):
        for name in ("rate1", "rate2"):
            v = getattr(self, name)
            if not math.isnan(v) and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        for name in ("dist1", "dist2"):
            v = getattr(self, name)
            if not math.isnan(v) and v < 0:
                raise ValueError(f"{name}={v} is negative")

    @property
    def m(self) -> int:
        return self.n.bit_length() - 1

    def row(self) -> dict:
        d = asdict(self)
        d["m"] = self.m
        return {k: d[k] for k in CSV_COLUMNS}

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))
