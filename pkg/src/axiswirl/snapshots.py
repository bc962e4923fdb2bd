"""Snapshot files: a self-describing binary record per time level.

Layout of one ``.axs`` file::

    AXISNAP1\\n
    <one line of JSON header>\\n
    <raw little-endian float64 arrays, concatenated>

The header holds ``grid`` (``Grid2D`` fields), ``t``, ``arrays`` (names in
storage order), ``shape`` ``[n_rho + 1, nz_nodes]``, ``dtype`` (``"<f8"``) and
a free-form ``provenance`` mapping.  Arrays are stored row-major with the
``rho`` index outermost, so a file round-trips bit-exactly.  A trajectory
directory holds ``snap_00000.axs, snap_00001.axs, ...`` plus
``trajectory.json`` with ``dt``, provenance, blow-up status and the file list.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .fields import AxiField, Grid2D, ScalarField2D

__all__ = [
    "MAGIC",
    "SnapshotFormatError",
    "write_snapshot",
    "read_snapshot",
    "write_trajectory",
    "read_trajectory",
    "write_zoom",
]

MAGIC = b"AXISNAP1\n"
_DTYPE = "<f8"
_VELOCITY = ("v_rho", "v_phi", "v_z")


class SnapshotFormatError(ValueError):
    pass


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False, default=_jsonable)


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    return str(x)


def write_snapshot(path, velocity: AxiField, pressure: ScalarField2D | None = None, provenance=None) -> Path:
    path = Path(path)
    grid = velocity.grid
    arrays = dict(zip(_VELOCITY, velocity.components()))
    if pressure is not None:
        if pressure.grid != grid:
            raise ValueError("pressure and velocity grids differ")
        arrays["q"] = pressure.values
    header = {
        "grid": grid.to_dict(),
        "t": float(velocity.t),
        "arrays": list(arrays),
        "shape": list(grid.shape),
        "dtype": _DTYPE,
        "provenance": dict(provenance or {}),
    }
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_json(header).encode() + b"\n")
        for a in arrays.values():
            fh.write(np.ascontiguousarray(a, dtype=_DTYPE).tobytes())
    return path


def read_snapshot(path):
    """Return ``(velocity, pressure_or_None, header)``."""
    path = Path(path)
    with open(path, "rb") as fh:
        if fh.read(len(MAGIC)) != MAGIC:
            raise SnapshotFormatError(f"{path}: not a snapshot file")
        try:
            header = json.loads(fh.readline())
        except json.JSONDecodeError as exc:
            raise SnapshotFormatError(f"{path}: corrupt header") from exc
        payload = fh.read()
    grid = Grid2D(**header["grid"])
    shape = tuple(header["shape"])
    if shape != grid.shape or header.get("dtype") != _DTYPE:
        raise SnapshotFormatError(f"{path}: header does not match its grid")
    names = header["arrays"]
    size = shape[0] * shape[1]
    data = np.frombuffer(payload, dtype=_DTYPE)
    if data.size != size * len(names):
        raise SnapshotFormatError(f"{path}: expected {size * len(names)} values, found {data.size}")
    arrays = {n: data[i * size:(i + 1) * size].reshape(shape).astype(float) for i, n in enumerate(names)}
    if any(n not in arrays for n in _VELOCITY):
        raise SnapshotFormatError(f"{path}: missing velocity components")
    t = float(header["t"])
    v = AxiField(grid, t, arrays["v_rho"], arrays["v_phi"], arrays["v_z"])
    q = ScalarField2D(grid, t, arrays["q"]) if "q" in arrays else None
    return v, q, header


def write_trajectory(directory, traj) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    files = []
    for j, snap in enumerate(traj.snapshots):
        name = f"snap_{j:05d}.axs"
        write_snapshot(d / name, snap.velocity, snap.pressure, {"index": j})
        files.append(name)
    blow = traj.blowup
    meta = {
        "dt": traj.dt,
        "provenance": dict(traj.provenance),
        "monotone": bool(traj.monotone),
        "blowup": None if blow is None else {"step": blow.step, "t": blow.t, "reason": blow.reason},
        "files": files,
    }
    (d / "trajectory.json").write_text(_json(meta) + "\n")
    return d


def read_trajectory(directory):
    from .solver import Snapshot, Trajectory

    d = Path(directory)
    meta_path = d / "trajectory.json"
    if not meta_path.exists():
        raise FileNotFoundError(f"{d}: no trajectory.json")
    meta = json.loads(meta_path.read_text())
    snaps = []
    for name in meta["files"]:
        v, q, _ = read_snapshot(d / name)
        if q is None:
            q = ScalarField2D(v.grid, v.t, np.zeros(v.grid.shape))
        snaps.append(Snapshot(v, q))
    if not snaps:
        raise SnapshotFormatError(f"{d}: trajectory has no snapshots")
    return Trajectory(tuple(snaps), float(meta["dt"]), meta.get("provenance", {}), None, bool(meta.get("monotone", True)))


def write_zoom(directory, zoomed) -> Path:
    """Write a ``ZoomSnapshot`` as a trajectory directory with its zoom provenance."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    prov = zoomed.provenance()
    files = []
    for j, (u, p) in enumerate(zip(zoomed.u_fields, zoomed.p_fields)):
        name = f"snap_{j:05d}.axs"
        write_snapshot(d / name, u, p, prov)
        files.append(name)
    ts = zoomed.times
    meta = {"dt": float(ts[1] - ts[0]), "provenance": prov, "monotone": True, "blowup": None, "files": files}
    (d / "trajectory.json").write_text(_json(meta) + "\n")
    return d
