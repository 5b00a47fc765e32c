"""On-disk cache for sampled Gram data.

An entry is a JSON metadata file plus an ``.npz`` payload.  The file name
is the SHA-256 of every input that affects the samples (domain, basis,
sample count, seed, batch count), so a stale key can never be served.
The metadata also stores a digest of the payload; a mismatch raises
:class:`CacheCorruption`, which :func:`cached_gram` answers by recomputing.
"""
import hashlib
import json
import os
from pathlib import Path

import numpy as np

from .bergman import N_BATCHES, GramData, GramKernel, mc_gram
from .errors import CacheCorruption

ENV_VAR = "PSCX_CACHE_DIR"
SCHEMA = 1


def resolve_cache_dir(cache_dir=None):
    """The environment variable wins over the argument; ``None`` disables caching."""
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path(cache_dir) if cache_dir else None


def gram_key(dom, basis, samples, seed, n_batches=N_BATCHES):
    blob = json.dumps({"schema": SCHEMA, "domain": dom.content_hash(), "basis": basis.cache_key(),
                       "samples": int(samples), "seed": int(seed), "batches": int(n_batches)},
                      sort_keys=True, default=repr)
    return hashlib.sha256(blob.encode()).hexdigest()


def _digest(data: GramData):
    h = hashlib.sha256()
    for arr in (data.grams, data.accepted, data.drawn, np.float64(data.box_volume)):
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()


class GramCache:
    def __init__(self, root):
        self.root = Path(root)

    def _paths(self, key):
        return self.root / f"gram-{key}.json", self.root / f"gram-{key}.npz"

    def load(self, key):
        """Stored data for ``key`` or ``None``; raises on a corrupt entry."""
        meta_p, data_p = self._paths(key)
        if not meta_p.exists() or not data_p.exists():
            return None
        try:
            meta = json.loads(meta_p.read_text())
            with np.load(data_p) as z:
                data = GramData(z["grams"], z["accepted"], z["drawn"], float(z["box_volume"]))
        except Exception as exc:  # unreadable entry counts as corrupt
            raise CacheCorruption(f"unreadable cache entry {key[:12]}: {exc}") from exc
        if meta.get("key") != key or meta.get("digest") != _digest(data):
            raise CacheCorruption(f"digest mismatch for cache entry {key[:12]}")
        return data

    def store(self, key, data: GramData, info=None):
        self.root.mkdir(parents=True, exist_ok=True)
        meta_p, data_p = self._paths(key)
        tmp = data_p.with_suffix(".tmp.npz")
        np.savez(tmp, grams=data.grams, accepted=data.accepted, drawn=data.drawn,
                 box_volume=np.float64(data.box_volume))
        os.replace(tmp, data_p)
        meta = {"key": key, "digest": _digest(data), "schema": SCHEMA, "info": info or {}}
        meta_p.write_text(json.dumps(meta, sort_keys=True, indent=2, default=repr))


def cached_gram(dom, basis, samples, seed, cache_dir=None):
    """A :class:`GramKernel`, reusing cached samples when available."""
    root = resolve_cache_dir(cache_dir)
    if root is None:
        return GramKernel(dom, basis, samples, seed)
    cache = GramCache(root)
    key = gram_key(dom, basis, samples, seed)
    try:
        data = cache.load(key)
    except CacheCorruption:
        data = None
    if data is None:
        data = mc_gram(dom, basis, samples, seed)
        cache.store(key, data, {"domain": dom.name, "basis": basis.label,
                                "samples": int(samples), "seed": int(seed)})
    return GramKernel(dom, basis, samples, seed, gram_data=data)
