"""Experiment configuration files (YAML)."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from ..exceptions import ConfigurationError
from ..pmf import BUILDERS, DistortionMeasure, load_pmf
from ..schemes import ROLES, ConstructionPolicy, SchemeSource

_SOURCE_KEYS = {"builder", "params", "pmf", "f1", "f2", "distortion"}
_TOP_KEYS = {"scheme", "source", "m", "construction", "trials", "seeds", "output",
             "cache_dir", "threads", "strict"}
_BUILDER_SCHEME = {"bss_rd": "rd", "bss_sr": "sr", "dsbs_wz": "wz", "srwz_degenerate": "srwz"}


@dataclass(frozen=True)
class SeedPlan:
    """Master seed plus optional explicit frozen x rounding grid."""

    master: int = 0
    frozen: tuple[int, ...] = ()
    rounding: tuple[int, ...] = ()

    @property
    def grid(self) -> bool:
        return bool(self.frozen)


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: str
    source: dict
    m: tuple[int, ...]
    construction: ConstructionPolicy
    trials: int
    seeds: SeedPlan
    output: Path | None = None
    cache_dir: Path | None = None
    threads: int = 1
    strict: bool = True
    base_dir: Path = field(default=Path("."), compare=False)
    raw: dict = field(default_factory=dict, compare=False)

    @property
    def digest(self) -> str:
        """Hash of the normalized configuration (output and cache paths excluded)."""
        doc = {k: v for k, v in self.raw.items() if k not in ("output", "cache_dir", "threads")}
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"), default=str).encode()
        return hashlib.blake2b(blob, digest_size=8).hexdigest()

    def make_source(self) -> SchemeSource:
        return build_source(self.scheme, self.source, self.base_dir)


def _int_tuple(v, name) -> tuple[int, ...]:
    if isinstance(v, int):
        return (v,)
    if isinstance(v, dict):
        try:
            return tuple(range(int(v["start"]), int(v["stop"]) + 1, int(v.get("step", 1))))
        except KeyError as e:
            raise ConfigurationError(f"{name} range needs start and stop") from e
    if isinstance(v, (list, tuple)) and all(isinstance(x, int) for x in v):
        return tuple(v)
    raise ConfigurationError(f"{name} must be an integer, a list of integers or a start/stop range")


def build_source(scheme: str, src: dict, base_dir: Path = Path(".")) -> SchemeSource:
    """Materialize a ``source`` section into a :class:`SchemeSource`."""
    unknown = set(src) - _SOURCE_KEYS
    if unknown:
        raise ConfigurationError(f"unknown source keys {sorted(unknown)}")
    f1 = src.get("f1")
    f2 = src.get("f2")
    d = DistortionMeasure(np.array(src["distortion"])) if "distortion" in src else DistortionMeasure.hamming()
    if "builder" in src:
        name = src["builder"]
        if name not in BUILDERS:
            raise ConfigurationError(f"unknown builder {name!r}; choose from {sorted(BUILDERS)}")
        if _BUILDER_SCHEME[name] != scheme:
            raise ConfigurationError(f"builder {name!r} does not produce a {scheme} source")
        try:
            built = BUILDERS[name](**src.get("params", {}))
        except TypeError as e:
            raise ConfigurationError(f"bad parameters for builder {name!r}: {e}") from e
        if scheme == "wz":
            joint, f1 = built.joint, built.f
        elif scheme == "srwz":
            joint, f1, f2 = built.joint, built.f1, built.f2
        else:
            joint = built
    elif "pmf" in src:
        path = Path(src["pmf"])
        if not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise ConfigurationError(f"pmf file {path} does not exist")
        joint = load_pmf(path)
    else:
        raise ConfigurationError("source needs either 'builder' or 'pmf'")
    return SchemeSource(scheme, joint,
                        None if f1 is None else np.asarray(f1),
                        None if f2 is None else np.asarray(f2), d)


def parse_config(doc: dict, base_dir: Path = Path(".")) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigurationError("config must be a mapping")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigurationError(f"unknown config keys {sorted(unknown)}")
    scheme = doc.get("scheme")
    if scheme not in ROLES:
        raise ConfigurationError(f"scheme must be one of {sorted(ROLES)}, got {scheme!r}")
    if "source" not in doc or not isinstance(doc["source"], dict):
        raise ConfigurationError("config needs a 'source' section")
    m = _int_tuple(doc.get("m"), "m")
    if not m:
        raise ConfigurationError("m-range is empty")
    if any(k < 1 or k > 20 for k in m):
        raise ConfigurationError("m values must lie in [1, 20]")
    c = dict(doc.get("construction") or {})
    if "target_rates" in c:
        c["target_rates"] = tuple(float(r) for r in c["target_rates"])
    try:
        policy = ConstructionPolicy(**c)
    except TypeError as e:
        raise ConfigurationError(f"bad construction section: {e}") from e
    s = doc.get("seeds") or {}
    if isinstance(s, int):
        s = {"master": s}
    seeds = SeedPlan(int(s.get("master", 0)), tuple(s.get("frozen", ())), tuple(s.get("rounding", ())))
    if bool(seeds.frozen) != bool(seeds.rounding):
        raise ConfigurationError("seed grid needs both 'frozen' and 'rounding' lists")
    if seeds.grid:
        trials = len(seeds.frozen) * len(seeds.rounding)
        if doc.get("trials", trials) != trials:
            raise ConfigurationError("trials must equal the size of the frozen x rounding grid")
    else:
        trials = doc.get("trials", 1)
    if not isinstance(trials, int) or trials < 1:
        raise ConfigurationError("trials must be an integer >= 1")
    threads = doc.get("threads", 1)
    if not isinstance(threads, int) or threads < 1:
        raise ConfigurationError("threads must be an integer >= 1")
    out = doc.get("output")
    cache = doc.get("cache_dir")
    cfg = ExperimentConfig(
        scheme, dict(doc["source"]), m, policy, trials, seeds,
        None if out is None else base_dir / out,
        None if cache is None else base_dir / cache,
        threads, bool(doc.get("strict", True)), base_dir, dict(doc),
    )
    cfg.make_source()  # fail before any trial runs
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file {path} does not exist")
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as e:
        raise ConfigurationError(f"{path}: {e}") from e
    return parse_config(doc, path.parent)
