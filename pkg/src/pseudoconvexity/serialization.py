"""JSON helpers that keep floats bit-faithful.

Every real is written as a decimal string with 17 significant digits,
which is enough to round-trip any IEEE double exactly.
"""
import json

import numpy as np


def fmt_real(x):
    """Format a real as a 17-significant-digit decimal string."""
    return format(float(x), ".17g")


def parse_real(s):
    return float(s)


def encode(obj):
    """Recursively replace floats (and numpy scalars/arrays) by strings."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return fmt_real(obj)
    if isinstance(obj, complex) or isinstance(obj, np.complexfloating):
        return {"re": fmt_real(obj.real), "im": fmt_real(obj.imag)}
    if isinstance(obj, np.ndarray):
        return [encode(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    return obj


def dumps(obj):
    """Deterministic JSON text (sorted keys, fixed separators)."""
    return json.dumps(encode(obj), sort_keys=True, indent=2, separators=(",", ": "))
