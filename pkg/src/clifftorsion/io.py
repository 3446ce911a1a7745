"""Snapshot files: raw little-endian float64 payload plus a JSON sidecar."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1
FIELD_KINDS = ("torsion_potential", "torsion_momentum", "twisted_spinor", "field_strength", "scalar")


class SnapshotError(ValueError):
    pass


def _paths(stem) -> tuple[Path, Path]:
    stem = Path(stem)
    if stem.suffix in (".bin", ".json"):
        stem = stem.with_suffix("")
    return stem.with_suffix(".bin"), stem.with_suffix(".json")


def save_snapshot(stem, data: np.ndarray, field_kind: str, dims: tuple[int, ...]) -> Path:
    """Write ``stem.bin`` and ``stem.json``; complex arrays get a trailing (re, im) axis."""
    if field_kind not in FIELD_KINDS:
        raise SnapshotError(f"unknown field kind {field_kind!r}")
    a = np.asarray(data)
    is_complex = np.iscomplexobj(a)
    payload = np.stack([a.real, a.imag], axis=-1) if is_complex else a
    payload = np.ascontiguousarray(payload, dtype="<f8")
    bin_path, meta_path = _paths(stem)
    bin_path.parent.mkdir(parents=True, exist_ok=True)
    bin_path.write_bytes(payload.tobytes())
    meta = {
        "schema_version": SCHEMA_VERSION,
        "dims": list(dims),
        "shape": list(a.shape),
        "field_kind": field_kind,
        "frame": "orthonormal",
        "dtype": "float64",
        "byte_order": "little",
        "complex": bool(is_complex),
    }
    meta_path.write_text(json.dumps(meta, sort_keys=True, indent=1) + "\n")
    return bin_path


def load_snapshot(stem, expected_shape: tuple[int, ...] | None = None, field_kind: str | None = None) -> np.ndarray:
    bin_path, meta_path = _paths(stem)
    if not meta_path.exists() or not bin_path.exists():
        raise SnapshotError(f"snapshot {Path(stem)} is missing its .bin or .json part")
    try:
        meta = json.loads(meta_path.read_text())
    except json.JSONDecodeError as exc:
        raise SnapshotError(f"sidecar {meta_path} is not valid JSON: {exc}") from None
    for key in ("dims", "shape", "field_kind", "frame"):
        if key not in meta:
            raise SnapshotError(f"sidecar {meta_path} lacks the {key!r} key")
    if meta["frame"] != "orthonormal":
        raise SnapshotError(f"unsupported frame {meta['frame']!r} in {meta_path}")
    if field_kind is not None and meta["field_kind"] != field_kind:
        raise SnapshotError(f"{meta_path} holds a {meta['field_kind']}, expected a {field_kind}")
    shape = tuple(int(s) for s in meta["shape"])
    if expected_shape is not None and shape != tuple(expected_shape):
        raise SnapshotError(f"{meta_path} has shape {shape}, expected {tuple(expected_shape)}")
    is_complex = bool(meta.get("complex", False))
    raw = np.frombuffer(bin_path.read_bytes(), dtype="<f8")
    want = int(np.prod(shape)) * (2 if is_complex else 1)
    if raw.size != want:
        raise SnapshotError(f"{bin_path} holds {raw.size} values, the sidecar implies {want}")
    if not np.all(np.isfinite(raw)):
        raise SnapshotError(f"{bin_path} contains non-finite values")
    if is_complex:
        r = raw.reshape(shape + (2,))
        return r[..., 0] + 1j * r[..., 1]
    return raw.reshape(shape).astype(float)
