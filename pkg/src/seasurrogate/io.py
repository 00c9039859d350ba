"""On-disk formats: a versioned binary tensor container and plain CSV tables.

Container layout (all integers little-endian)::

    8 bytes   magic  b"SSRGBIN\\0"
    u32       format version
    u64       header length in bytes
    header    UTF-8 JSON: {"kind", "meta", "tensors": [{"name", "shape"}, ...]}
    payload   tensors in header order, float64 little-endian, C order

Every writer goes through :func:`atomic_write`, so a crashed run never leaves
a truncated file under the final name.
"""

import contextlib
import csv
import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import ArtifactIOError, ConfigError, MissingArtifactError

MAGIC = b"SSRGBIN\0"
VERSION = 1
_F64 = np.dtype("<f8")


@contextlib.contextmanager
def atomic_write(path, mode="w"):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    except OSError as exc:
        raise ArtifactIOError(f"cannot write {path}: {exc}") from exc
    try:
        newline = "" if "b" not in mode else None
        with os.fdopen(fd, mode, newline=newline) as fh:
            yield fh
        os.replace(tmp, path)
    except OSError as exc:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise ArtifactIOError(f"cannot write {path}: {exc}") from exc
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def write_container(path, kind, tensors, meta=None):
    """Write named float64 tensors plus JSON metadata."""
    names = list(tensors)
    arrays = [np.ascontiguousarray(tensors[k], dtype=_F64) for k in names]
    header = {
        "kind": kind,
        "meta": meta or {},
        "tensors": [{"name": k, "shape": list(a.shape)} for k, a in zip(names, arrays)],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    with atomic_write(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IQ", VERSION, len(blob)))
        fh.write(blob)
        for a in arrays:
            fh.write(a.tobytes(order="C"))


def read_container(path, kind=None):
    """Return ``(kind, meta, tensors)`` from a container file."""
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(path)
    data = path.read_bytes()
    if data[:8] != MAGIC:
        raise ConfigError(f"{path} is not a seasurrogate container")
    version, hlen = struct.unpack_from("<IQ", data, 8)
    if version != VERSION:
        raise ConfigError(f"{path}: unsupported container version {version}")
    start = 8 + struct.calcsize("<IQ")
    header = json.loads(data[start:start + hlen].decode())
    if kind is not None and header["kind"] != kind:
        raise ConfigError(f"{path} holds a {header['kind']!r}, expected {kind!r}")
    offset = start + hlen
    tensors = {}
    for spec in header["tensors"]:
        shape = tuple(spec["shape"])
        count = int(np.prod(shape, dtype=np.int64))
        arr = np.frombuffer(data, dtype=_F64, count=count, offset=offset).reshape(shape)
        tensors[spec["name"]] = arr.astype(np.float64)
        offset += count * 8
    if offset != len(data):
        raise ConfigError(f"{path}: trailing or missing payload bytes")
    return header["kind"], header["meta"], tensors


def write_csv(path, header, columns):
    """Write equal-length numeric columns with round-trip precision."""
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    n = len(cols[0]) if cols else 0
    if any(len(c) != n for c in cols):
        raise ValueError("CSV columns must have equal length")
    with atomic_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in zip(*cols):
            writer.writerow([repr(float(v)) for v in row])


def write_rows(path, header, rows):
    """Write heterogeneous rows (strings and numbers) as CSV."""
    with atomic_write(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])


def read_csv(path):
    """Read a numeric CSV written by :func:`write_csv` into ``{column: array}``."""
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path} is empty") from None
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return {name: data[:, j].copy() for j, name in enumerate(header)}


def write_json(path, obj):
    with atomic_write(path) as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(path)
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
