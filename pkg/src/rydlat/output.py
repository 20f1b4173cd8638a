"""Deterministic CSV/JSON emission and the provenance manifest."""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import numpy as np


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return f"{float(v):.17g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":"), allow_nan=True)


def write_csv(path, header, rows, metadata: dict | None = None) -> Path:
    """UTF-8, comma-separated, ``\\n`` line ends, 17 significant digits, metadata trailer."""
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    lines.append("# metadata " + dumps(metadata or {}))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_csv(path) -> tuple[list[str], np.ndarray, dict]:
    header, rows, meta = None, [], {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# metadata "):
                meta = json.loads(line[len("# metadata ") :])
            elif header is None:
                header = line.split(",")
            elif line:
                rows.append([float(v) for v in line.split(",")])
    return header, np.array(rows), meta


def write_json(path, obj) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n")
    return path


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def surface_rows(surface):
    """(x1_m, x2_m, U_rad_per_s) rows of a :class:`~rydlat.lattice.PotentialSurface`."""
    return list(surface.rows())


def write_surface_csv(path, surface, metadata=None, value_name="U_rad_per_s") -> Path:
    meta = dict(surface.metadata or {})
    meta.update(metadata or {})
    return write_csv(path, ["x1_m", "x2_m", value_name], surface_rows(surface), meta)


def write_surface_json(path, surface, metadata=None) -> Path:
    meta = dict(surface.metadata or {})
    meta.update(metadata or {})
    obj = {
        "axis1_m": surface.axis1,
        "axis2_m": surface.axis2,
        "values_rad_per_s": surface.values,
        "metadata": meta,
    }
    return write_json(path, obj)


class Emitter:
    """Collects written files in order and writes the manifest last."""

    def __init__(self, out_dir, inputs: dict):
        self.out_dir = Path(out_dir)
        self.inputs = inputs
        self.files: list[Path] = []

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def csv(self, name, header, rows, metadata=None) -> Path:
        p = write_csv(self.path(name), header, rows, metadata)
        self.files.append(p)
        return p

    def json(self, name, obj) -> Path:
        p = write_json(self.path(name), obj)
        self.files.append(p)
        return p

    def add(self, p) -> None:
        self.files.append(Path(p))

    def manifest(self) -> Path:
        entries = [{"path": os.path.relpath(p, self.out_dir), "sha256": sha256_file(p)} for p in self.files]
        return write_json(self.path("manifest.json"), {"inputs": self.inputs, "files": entries})
