"""Experiment reports and the seeded random streams behind them.

Reports serialize with sorted keys and every float written with 17
significant digits, so two runs with the same parameters diff cleanly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = 1
SEED_LIMIT = 1 << 64


def rng_stream(seed: int, *indices: int) -> np.random.Generator:
    """Independent Philox stream keyed by ``(seed, *indices)``.

    Streams for different trial indices never overlap, so the order in which
    trials run cannot change their draws.
    """
    if not 0 <= seed < SEED_LIMIT:
        raise ValueError(f"rng seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *indices])))


def _scalar(value):
    if isinstance(value, np.generic):
        return value.item()
    return value


def _encode(value, indent: int, level: int) -> str:
    value = _scalar(value)
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if value is None or isinstance(value, bool):
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            return "null"
        text = format(value, ".17g")
        return text if any(c in text for c in ".e") else text + ".0"
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_encode(v, indent, level + 1)}"
            for k, v in sorted(value.items(), key=lambda kv: str(kv[0]))
        ]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        if len(value) == 0:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(value, indent: int = 2) -> str:
    """Canonical JSON: sorted keys, ``.17g`` floats, non-finite floats as null."""
    return _encode(value, indent, 0)


@dataclass
class ExperimentReport:
    experiment: str
    params: dict
    rng_seed: int
    metrics: dict
    runtime_ms: int = 0
    schema_version: int = field(default=SCHEMA_VERSION)

    @property
    def violations(self) -> int:
        return int(self.metrics.get("violations", 0))

    def as_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "experiment": self.experiment,
            "params": self.params,
            "rng_seed": self.rng_seed,
            "metrics": self.metrics,
            "runtime_ms": self.runtime_ms,
        }

    def to_json(self) -> str:
        return dumps(self.as_dict()) + "\n"
