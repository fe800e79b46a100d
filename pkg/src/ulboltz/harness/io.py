"""Run-directory artifacts: time-series CSV, ULBZ field dumps and the report."""

import csv
import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"ULBZ"
FORMAT_VERSION = 1
CSV_HEADER = ("t", "quantity", "k", "ell", "value")
INCOMPLETE = "INCOMPLETE"


class RunDirectoryError(FileExistsError):
    pass


def prepare_run_dir(path, force=False):
    """Create ``path``; refuse to reuse a non-empty directory unless forced."""
    path = Path(path)
    if path.exists() and any(path.iterdir()):
        if not force:
            raise RunDirectoryError(
                f"{path} already contains files; pass --force to overwrite")
        for child in path.iterdir():
            if child.is_file():
                child.unlink()
    path.mkdir(parents=True, exist_ok=True)
    (path / INCOMPLETE).write_text("run in progress or aborted\n")
    return path


def mark_complete(path):
    marker = Path(path) / INCOMPLETE
    if marker.exists():
        marker.unlink()


def _fmt(x):
    return format(float(x), ".17g")


def write_csv(path, rows):
    """Rows of (t, quantity, k, ell, value); floats written round-trip exact."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(CSV_HEADER)
        for t, quantity, k, ell, value in rows:
            wr.writerow([_fmt(t), quantity, int(k), _fmt(ell), _fmt(value)])


def read_csv(path):
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = tuple(next(rd))
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected CSV header {header}")
        return [(float(t), q, int(k), float(ell), float(v)) for t, q, k, ell, v in rd]


def write_dump(path, array, sidecar_text=None):
    """ULBZ dump: magic, u32 LE version, u32 LE ndim, u32 LE dims, f64 LE data.

    The dims are preceded by their count so readers need no side channel.
    """
    arr = np.ascontiguousarray(array, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<I", arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        fh.write(arr.tobytes(order="C"))
    if sidecar_text is not None:
        Path(str(path) + ".txt").write_text(sidecar_text)


def read_dump(path):
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise ValueError(f"{path}: not a ULBZ dump")
    version, ndim = struct.unpack_from("<II", data, 4)
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported ULBZ version {version}")
    shape = struct.unpack_from(f"<{ndim}I", data, 12)
    offset = 12 + 4 * ndim
    expected = int(np.prod(shape)) * 8
    if len(data) - offset != expected:
        raise ValueError(f"{path}: truncated dump ({len(data) - offset} of {expected} bytes)")
    return np.frombuffer(data, dtype="<f8", offset=offset).reshape(shape).copy()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def write_json(path, obj):
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())
