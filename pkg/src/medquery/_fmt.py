"""Deterministic JSON/CSV formatting shared by reports, CLI, and service.

Floats are quantized to 4 decimal places and keys are sorted, so any
two runs over identical inputs serialize to identical bytes.
"""

from __future__ import annotations

import json

PLACES = 4


def quantize(obj):
    """Recursively round floats to PLACES decimals."""
    if isinstance(obj, float):
        return round(obj, PLACES)
    if isinstance(obj, dict):
        return {k: quantize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [quantize(v) for v in obj]
    return obj


def stable_dumps(obj) -> str:
    """Byte-stable JSON: quantized floats, sorted keys, trailing newline."""
    return json.dumps(quantize(obj), sort_keys=True, indent=2,
                      ensure_ascii=False) + "\n"


def fmt_float(x: float) -> str:
    """Fixed 4-decimal rendering for CSV cells."""
    return f"{x:.{PLACES}f}"
