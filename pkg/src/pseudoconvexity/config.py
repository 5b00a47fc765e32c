"""Versioned pipeline configuration.

The JSON form stores reals as 17-significant-digit strings and always
carries ``version`` and ``seed``.  There is no default seed.
"""
import json
from dataclasses import asdict, dataclass, fields

from . import serialization
from .errors import ConfigError

CONFIG_VERSION = 1

# (lo, hi, lo_open, hi_open) per numeric field
_RANGES = {
    "eps": (0.0, 1.0, True, True),
    "C1": (0.0, None, True, False),
    "C2": (0.0, None, True, False),
    "r0": (0.0, 0.5, True, False),
    "depth": (0, 14, False, False),
    "grid": (8, 4096, False, False),
    "mc_samples": (1000, 10_000_000, False, False),
    "scan_steps": (3, 64, False, False),
    "inside_degree": (0, 16, False, False),
    "outside_degree": (0, 16, False, False),
    "z2_degree": (0, 16, False, False),
    "greedy_degree": (0, 12, False, False),
    "greedy_levels": (1, 10, False, False),
    "witness_points": (1, 64, False, False),
    "domain_samples": (1000, 10_000_000, False, False),
    "psh_probes": (10, 100_000, False, False),
    "holder_pairs": (100, 10_000_000, False, False),
    "plateau_samples": (10, 1_000_000, False, False),
    "convexity_pairs": (100, 10_000_000, False, False),
    "seed": (0, 2**64 - 1, False, False),
}

_INTS = {"depth", "grid", "mc_samples", "scan_steps", "inside_degree", "outside_degree",
         "z2_degree", "greedy_degree", "greedy_levels", "witness_points", "domain_samples",
         "psh_probes", "holder_pairs", "plateau_samples", "convexity_pairs", "seed"}


@dataclass(frozen=True)
class PipelineConfig:
    """All knobs of the pipelines.  ``seed`` must be given explicitly."""

    seed: int
    eps: float = 0.5
    C1: float = 1.0
    C2: float = 1.0
    r0: float = 0.3
    depth: int = 10
    grid: int = 512
    mc_samples: int = 100_000
    scan_steps: int = 8
    inside_degree: int = 10
    outside_degree: int = 10
    z2_degree: int = 6
    greedy_degree: int = 10
    greedy_levels: int = 5
    witness_points: int = 16
    domain_samples: int = 100_000
    psh_probes: int = 1000
    holder_pairs: int = 100_000
    plateau_samples: int = 1000
    convexity_pairs: int = 10_000
    out_dir: str = "out"
    cache_dir: str = ""

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name, (lo, hi, lo_open, hi_open) in _RANGES.items():
            v = getattr(self, name)
            if name in _INTS and (isinstance(v, bool) or int(v) != v):
                raise ConfigError(f"{name} must be an integer, got {v!r}")
            bad = (lo is not None and (v <= lo if lo_open else v < lo)) or \
                  (hi is not None and (v >= hi if hi_open else v > hi))
            if bad:
                raise ConfigError(f"{name}={v!r} outside its allowed range")

    def replace(self, **kw):
        d = asdict(self)
        d.update(kw)
        return PipelineConfig(**d)

    def to_json(self):
        d = asdict(self)
        d["version"] = CONFIG_VERSION
        return serialization.dumps(d)

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if d.pop("version", None) != CONFIG_VERSION:
            raise ConfigError(f"config version must be {CONFIG_VERSION}")
        if "seed" not in d:
            raise ConfigError("config must set a seed")
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        out = {}
        for k, v in d.items():
            if k in ("out_dir", "cache_dir"):
                out[k] = str(v)
            elif k in _INTS:
                out[k] = int(v)
            else:
                out[k] = serialization.parse_real(v)
        return cls(**out)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(fh.read())
