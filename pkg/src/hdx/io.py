"""JSON files for complexes, cochains and reports, plus run manifests."""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from .complex import SimplicialComplex


def _plain(x: Any) -> Any:
    """Make numpy scalars, fractions and tuples JSON friendly."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, Fraction):
        return str(x)
    return x


def dumps(data: Any) -> str:
    return json.dumps(_plain(data), indent=1, sort_keys=True) + "\n"


def write_json(path: str | Path, data: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(data))
    return path


def read_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text())


def file_hash(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def complex_to_json(X: SimplicialComplex, source: dict | None = None) -> dict:
    d = X.dimension
    den = X.denominator(d)
    out = {
        "kind": "complex",
        "dimension": d,
        "vertex_count": X.vertex_count,
        "maximal_faces": [list(t) for t in X.top_faces],
        "weights": [str(Fraction(int(m), den)) for m in X.mass(d)],
        "colors": None if X.colors is None else [int(c) for c in X.colors],
        "labels": None if X.labels is None else [_label(v) for v in X.labels],
    }
    src = source if source is not None else getattr(X, "source", None)
    if src is not None:
        out["source"] = src
    return out


def _label(v):
    if isinstance(v, (tuple, list)):
        return [_label(x) for x in v]
    if isinstance(v, (np.integer, int)):
        return int(v)
    return str(v)


def complex_from_json(data: dict) -> SimplicialComplex:
    X = SimplicialComplex(
        data["maximal_faces"],
        weights=[Fraction(w) for w in data["weights"]],
        colors=data.get("colors"),
        vertex_count=data.get("vertex_count"),
        labels=None if data.get("labels") is None else [tuple(l) if isinstance(l, list) else l for l in data["labels"]],
    )
    if "source" in data:
        X.source = data["source"]
    return X


def load_complex(path: str | Path) -> SimplicialComplex:
    return complex_from_json(read_json(path))


@dataclass
class RunManifest:
    """What was run, on which inputs, and where the outputs went."""

    command: str
    parameters: dict
    seed: int | None = None
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    wall_time: float = 0.0
    _start: float = field(default_factory=time.perf_counter, repr=False)

    def add_input(self, path: str | Path) -> None:
        self.inputs[str(path)] = file_hash(path)

    def finish(self) -> None:
        self.wall_time = time.perf_counter() - self._start

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "parameters": self.parameters,
            "seed": self.seed,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "wall_time": self.wall_time,
        }
