"""On-disk cache of layer constructions.

Profiles are keyed by what determines them (channel laws, n, sample count,
seed, method) so that partitions under different rules reuse them.
Constructions are keyed by joint digest, scheme, layer, n and policy.
"""

from __future__ import annotations

import hashlib
import json
import threading
from pathlib import Path

import numpy as np

from ..construct import (
    Construction,
    ZProfile,
    estimate_z_profile,
    exact_z_profile,
    partition_by_rate,
    partition_indices,
)
from ..exceptions import ConfigurationError
from ..pmf import channel
from ..schemes import ConstructionPolicy, SchemeSource


def _key_hash(key: dict) -> str:
    blob = json.dumps(key, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.blake2b(blob, digest_size=12).hexdigest()


def _channel_id(prior, ch) -> str:
    h = hashlib.blake2b(digest_size=8)
    h.update(np.float64(prior).tobytes())
    h.update(np.ascontiguousarray(ch.rows, dtype=np.float64).tobytes())
    return h.hexdigest()


class ConstructionCache:
    """Thread-safe construction store; ``root=None`` keeps it in memory only."""

    def __init__(self, root=None):
        self.root = None if root is None else Path(root)
        self._mem: dict[str, dict] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def _get(self, kind: str, key: dict) -> dict | None:
        name = f"{kind}-{_key_hash(key)}"
        doc = self._mem.get(name)
        if doc is None and self.root is not None:
            path = self.root / f"{name}.json"
            if path.exists():
                doc = json.loads(path.read_text())
        if doc is None:
            return None
        if doc["key"] != key:
            raise ConfigurationError(f"cache collision in {name}: stored key differs")
        self._mem[name] = doc
        return doc

    def _put(self, kind: str, key: dict, value: dict) -> None:
        name = f"{kind}-{_key_hash(key)}"
        doc = {"key": key, "value": value}
        self._mem[name] = doc
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)
            tmp = self.root / f".{name}.tmp"
            tmp.write_text(json.dumps(doc))
            tmp.replace(self.root / f"{name}.json")

    def profiles(self, source: SchemeSource, layer: int, n: int, policy: ConstructionPolicy):
        role = source.roles[layer]
        prior, ch_h = channel(source.joint, role.target, role.h_given)
        _, ch_l = channel(source.joint, role.target, role.l_given)
        seed = policy.layer_seed(layer)
        key = {"enc": _channel_id(prior, ch_h), "dec": _channel_id(prior, ch_l), "n": n,
               "method": policy.method, "samples": policy.samples if policy.method == "mc" else 0,
               "seed": seed if policy.method == "mc" else None}
        with self._lock:
            doc = self._get("profile", key)
        if doc is not None:
            self.hits += 1
            v = doc["value"]
            return ZProfile.from_dict(v["enc"]), ZProfile.from_dict(v["dec"])
        self.misses += 1
        if policy.method == "exact":
            enc = exact_z_profile(prior, ch_h, n, "enc")
            dec = exact_z_profile(prior, ch_l, n, "dec")
        else:
            enc, dec = estimate_z_profile(prior, ch_h, ch_l, n, policy.samples, seed)
        with self._lock:
            self._put("profile", key, {"enc": enc.to_dict(), "dec": dec.to_dict()})
        return enc, dec

    def construction(self, source: SchemeSource, layer: int, n: int, policy: ConstructionPolicy) -> Construction:
        key = {"joint": source.joint.digest(), "scheme": source.scheme, "layer": layer, "n": n,
               "policy": policy.key()}
        with self._lock:
            doc = self._get("construction", key)
        if doc is not None:
            return Construction.from_dict(doc["value"])
        enc, dec = self.profiles(source, layer, n, policy)
        if policy.rule == "rate":
            if len(policy.target_rates) != len(source.roles):
                raise ConfigurationError("rate rule needs one target rate per layer")
            part = partition_by_rate(enc, dec, policy.target_rates[layer])
        else:
            part = partition_indices(enc, dec, policy.delta_for(n))
        c = Construction(enc, dec, part)
        with self._lock:
            self._put("construction", key, c.to_dict())
        return c

    def scheme(self, source: SchemeSource, n: int, policy: ConstructionPolicy) -> list[Construction]:
        return [self.construction(source, k, n, policy) for k in range(len(source.roles))]
