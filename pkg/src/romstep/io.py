"""Manifest + raw binary containers.

A container ``name`` is two files: ``name.manifest`` holds ``key = value`` text
lines, ``name.bin`` holds 64-bit little-endian floats.  Arrays are written in
manifest order, each in column-major layout; the manifest lists them as
``array.<name> = rows,cols``.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np


class MissingArtifact(FileNotFoundError):
    pass


def _fmt(v) -> str:
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_container(stem, meta: dict, arrays: list) -> None:
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    lines = ["endianness = little", "dtype = float64"]
    lines += [f"{k} = {_fmt(v)}" for k, v in meta.items()]
    with open(stem.with_suffix(".bin"), "wb") as fh:
        for name, arr in arrays:
            arr = np.asarray(arr, dtype="<f8")
            if arr.ndim == 1:
                arr = arr.reshape(-1, 1)
            lines.append(f"array.{name} = {arr.shape[0]},{arr.shape[1]}")
            fh.write(np.asfortranarray(arr).tobytes(order="F"))
    stem.with_suffix(".manifest").write_text("\n".join(lines) + "\n")


def read_manifest(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, val = line.partition("=")
        out[key.strip()] = val.strip()
    return out


def read_container(stem):
    """Return (meta, arrays) with arrays as an ordered dict of 2D arrays."""
    stem = Path(stem)
    man, binf = stem.with_suffix(".manifest"), stem.with_suffix(".bin")
    for p in (man, binf):
        if not p.exists():
            raise MissingArtifact(f"missing artifact: {p}")
    meta = read_manifest(man)
    if meta.get("endianness", "little") != "little":
        raise ValueError("only little-endian containers are supported")
    raw = np.fromfile(binf, dtype="<f8")
    arrays, pos = {}, 0
    for key, val in meta.items():
        if key.startswith("array."):
            r, c = (int(s) for s in val.split(","))
            arrays[key[6:]] = raw[pos:pos + r * c].reshape((r, c), order="F")
            pos += r * c
    if pos != raw.size:
        raise ValueError(f"{binf}: {raw.size} values, manifest describes {pos}")
    meta = {k: v for k, v in meta.items() if not k.startswith("array.")}
    return meta, arrays


def write_csv(path, header: list, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = np.asarray(rows, dtype=float)
    if rows.ndim == 1:
        rows = rows.reshape(1, -1)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(repr(float(x)) for x in r) + "\n")


def read_csv(path):
    path = Path(path)
    if not path.exists():
        raise MissingArtifact(f"missing artifact: {path}")
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data
