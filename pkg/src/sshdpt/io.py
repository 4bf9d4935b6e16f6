"""Output formats: delimited tables, JSON records and the raw trajectory file.

Raw trajectory layout (little-endian)::

    offset  size  field
    0       8     magic b"SSHTRAJ1"
    8       8     float64 dt between stored samples (s)
    16      8     uint64 oscillator count
    24      8     uint64 sample count
    32      8     float64 time of the first sample (s)
    40      ...   float64 displacements, row-major (sample, oscillator)
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .mech import Trajectory

MAGIC = b"SSHTRAJ1"
_HEADER = struct.Struct("<8sdQQd")


def write_table(path, names, data, delimiter: str = ",") -> Path:
    path = Path(path)
    data = np.atleast_2d(np.asarray(data, dtype=float))
    with open(path, "w", newline="\n") as fh:
        fh.write(delimiter.join(names) + "\n")
        for row in data:
            fh.write(delimiter.join(_fmt(x) for x in row) + "\n")
    return path


def _fmt(x: float) -> str:
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def read_table(path, delimiter: str = ","):
    with open(path) as fh:
        names = fh.readline().strip().split(delimiter)
    data = np.loadtxt(path, delimiter=delimiter, skiprows=1, ndmin=2)
    return names, data


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else None
    return obj


def write_record(path, record: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_plain(record), indent=2, sort_keys=True) + "\n")
    return path


def read_record(path) -> dict:
    return json.loads(Path(path).read_text())


def write_trajectory(path, traj: Trajectory) -> Path:
    path = Path(path)
    z = np.ascontiguousarray(traj.z, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, traj.dt, z.shape[1], z.shape[0], traj.t0))
        fh.write(z.tobytes(order="C"))
    return path


def read_trajectory(path) -> Trajectory:
    raw = Path(path).read_bytes()
    magic, dt, n, k, t0 = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: not a trajectory file")
    z = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if z.size != n * k:
        raise ValueError(f"{path}: expected {n * k} samples, found {z.size}")
    return Trajectory(t0, dt, z.reshape(k, n).copy())
