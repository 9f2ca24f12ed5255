"""Trial orchestration and result tables."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .. import __version__
from ..pmf import sample
from ..schemes import (
    CSV_COLUMNS,
    SchemeSource,
    TrialRecord,
    check_srwz_source,
    layer_specs,
    rd_roundtrip,
    sr_roundtrip,
    srwz_roundtrip,
    wz_roundtrip,
)
from .cache import ConstructionCache
from .config import ExperimentConfig

RNG_ALGORITHM = "numpy.random.PCG64 seeded by SeedSequence"
# stream roles in the counter-mode seed expansion
FROZEN, ROUNDING, SOURCE = 0, 1, 2


def derive_seed(master: int, role: int, m: int, trial: int) -> int:
    """32-bit seed for ``(role, m, trial)`` under ``master``."""
    ss = np.random.SeedSequence(master, spawn_key=(role, m, trial))
    return int(ss.generate_state(1)[0])


def trial_seeds(cfg: ExperimentConfig, m: int, trial: int) -> tuple[int, int, int]:
    """``(frozen, rounding, source)`` seeds of one trial."""
    s = cfg.seeds
    source = derive_seed(s.master, SOURCE, m, trial)
    if s.grid:
        f, r = divmod(trial, len(s.rounding))
        return int(s.frozen[f]), int(s.rounding[r]), source
    return derive_seed(s.master, FROZEN, m, trial), derive_seed(s.master, ROUNDING, m, trial), source


def run_trial(source: SchemeSource, constructions, m: int, trial: int, seeds, targets) -> TrialRecord:
    frozen, rounding, src_seed = seeds
    n = 1 << m
    specs = layer_specs(source, constructions, frozen)
    obs = sample(source.joint, source.source_axes, n, np.random.default_rng(src_seed))
    rng = np.random.default_rng(rounding)
    meta = dict(trial=trial, frozen_seed=frozen, rounding_seed=rounding, source_seed=src_seed,
                target_rate1=targets[0], target_rate2=targets[1],
                target_D1=targets[2], target_D2=targets[3])
    if source.scheme == "rd":
        _, rec = rd_roundtrip(specs[0], obs["X"], rng, source.d, **meta)
    elif source.scheme == "sr":
        _, rec = sr_roundtrip(specs, obs["X"], rng, source.d, **meta)
    elif source.scheme == "wz":
        _, rec = wz_roundtrip(specs[0], source.f1, obs["X"], obs["Z"], rng, source.d, **meta)
    else:
        _, rec = srwz_roundtrip(source, specs, obs["X"], obs["Y"], obs["Z"], rng, validate=False, **meta)
    return rec


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return "" if v is None else str(v)


@dataclass
class ResultsTable:
    records: list[TrialRecord]
    config_digest: str
    version: str = __version__
    construction_digests: dict | None = None

    def sorted(self) -> "ResultsTable":
        recs = sorted(self.records, key=lambda r: (r.m, r.trial))
        return replace(self, records=recs)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.sorted().records:
            row = r.row()
            w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
        return buf.getvalue()

    def column(self, name: str, m: int | None = None) -> np.ndarray:
        recs = [r for r in self.records if m is None or r.m == m]
        return np.array([r.row()[name] if name in CSV_COLUMNS else getattr(r, name) for r in recs])

    def sidecar(self, cfg: ExperimentConfig) -> dict:
        return {
            "config_digest": self.config_digest,
            "version": self.version,
            "rng": RNG_ALGORITHM,
            "scheme": cfg.scheme,
            "m": list(cfg.m),
            "trials": cfg.trials,
            "master_seed": cfg.seeds.master,
            "construction": cfg.construction.key(),
            "partition_digests": self.construction_digests or {},
            "rows": len(self.records),
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        }

    def write(self, path, cfg: ExperimentConfig) -> tuple[Path, Path]:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv())
        side = path.with_suffix(path.suffix + ".json")
        side.write_text(json.dumps(self.sidecar(cfg), indent=1))
        return path, side


def build_constructions(cfg: ExperimentConfig, cache: ConstructionCache | None = None) -> dict:
    """Constructions for every ``m`` of the config, via the cache."""
    cache = cache or ConstructionCache(cfg.cache_dir)
    source = cfg.make_source()
    return {m: cache.scheme(source, 1 << m, cfg.construction) for m in cfg.m}


def run_experiment(cfg: ExperimentConfig, cache: ConstructionCache | None = None,
                   threads: int | None = None, write: bool = True) -> ResultsTable:
    """Run every ``(m, trial)`` of the config; output is independent of ``threads``."""
    source = cfg.make_source()
    if source.scheme == "srwz":
        check_srwz_source(source, strict=cfg.strict)
    targets = source.targets()
    cons = build_constructions(cfg, cache)
    jobs = [(m, k) for m in cfg.m for k in range(cfg.trials)]

    def work(job):
        m, k = job
        return run_trial(source, cons[m], m, k, trial_seeds(cfg, m, k), targets)

    threads = threads or cfg.threads
    if threads == 1:
        recs = [work(j) for j in jobs]
    else:
        with ThreadPoolExecutor(threads) as pool:
            recs = list(pool.map(work, jobs))
    digests = {str(m): [f"{c.partition.digest:016x}" for c in cons[m]] for m in cfg.m}
    table = ResultsTable(recs, cfg.digest, construction_digests=digests).sorted()
    if write and cfg.output is not None:
        table.write(cfg.output, cfg)
    return table
