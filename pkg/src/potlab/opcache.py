"""Persistent per-shape operator cache.

Files live at ``<cache_dir>/ops_v<version>_<N>x<m_1>-..-<m_N>.bin`` in a
self-describing container: an ASCII-JSON header naming each matrix
(name, storage dense|csr, rows, cols) followed by raw little-endian
blocks (float64 data, int64 indices), with a CRC32 of the payload in the
header. Writers stage to a temporary file and atomically rename;
readers checksum-validate, so concurrent writers are tolerated and a
corrupt file triggers a rebuild instead of bad math.
"""
from __future__ import annotations

import json
import os
import struct
import tempfile
import warnings
import zlib
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .games import GameShape
from .hodge import (
    DEFAULT_DENSE_PI_BUDGET,
    DEFAULT_FACTOR_BUDGET,
    DEFAULT_SHAPE_CEILING,
    DecompositionOperators,
    ResponseGraph,
    build_operators,
    build_response_graph,
)

__all__ = ["FORMAT_VERSION", "OperatorCache", "operator_cache_get", "cache_file_name"]

FORMAT_VERSION = 1
MAGIC = b"POTLABOP"

# Dense projections are persisted only below this size; larger shapes
# store just the factor and re-densify on demand.
PI_PERSIST_BYTES = 128 * 1024**2


class CacheFormatError(Exception):
    pass


def cache_file_name(shape: GameShape) -> str:
    return f"ops_v{FORMAT_VERSION}_{shape.label()}.bin"


def _pack_matrices(matrices: dict[str, np.ndarray | sp.csr_matrix]) -> bytes:
    entries = []
    payload = bytearray()
    for name, mat in matrices.items():
        if sp.issparse(mat):
            mat = mat.tocsr()
            entry = {
                "name": name,
                "storage": "csr",
                "rows": int(mat.shape[0]),
                "cols": int(mat.shape[1]),
                "nnz": int(mat.nnz),
            }
            payload += np.ascontiguousarray(mat.indptr, dtype="<i8").tobytes()
            payload += np.ascontiguousarray(mat.indices, dtype="<i8").tobytes()
            payload += np.ascontiguousarray(mat.data, dtype="<f8").tobytes()
        else:
            arr = np.ascontiguousarray(mat, dtype="<f8")
            entry = {
                "name": name,
                "storage": "dense",
                "rows": int(arr.shape[0]),
                "cols": int(arr.shape[1]) if arr.ndim > 1 else 1,
            }
            payload += arr.tobytes()
        entries.append(entry)
    payload = bytes(payload)
    header = {
        "format_version": FORMAT_VERSION,
        "matrices": entries,
        "checksum": zlib.crc32(payload),
    }
    return entries, header, payload


def write_cache_file(path: Path, shape: GameShape, matrices: dict) -> None:
    _, header, payload = _pack_matrices(matrices)
    header["players"] = shape.num_players
    header["actions"] = list(shape.actions)
    blob = json.dumps(header, sort_keys=True).encode("ascii")
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<I", len(blob)))
            fh.write(blob)
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_cache_file(path: Path, shape: GameShape) -> dict[str, np.ndarray | sp.csr_matrix]:
    raw = path.read_bytes()
    if raw[: len(MAGIC)] != MAGIC:
        raise CacheFormatError("bad magic")
    (blob_len,) = struct.unpack_from("<I", raw, len(MAGIC))
    start = len(MAGIC) + 4
    header = json.loads(raw[start : start + blob_len].decode("ascii"))
    if header.get("format_version") != FORMAT_VERSION:
        raise CacheFormatError(f"format version {header.get('format_version')}")
    if header.get("players") != shape.num_players or tuple(header.get("actions", ())) != shape.actions:
        raise CacheFormatError("file describes a different shape")
    payload = raw[start + blob_len :]
    if zlib.crc32(payload) != header["checksum"]:
        raise CacheFormatError("checksum mismatch")
    out = {}
    offset = 0
    for entry in header["matrices"]:
        rows, cols = entry["rows"], entry["cols"]
        if entry["storage"] == "csr":
            nnz = entry["nnz"]
            indptr = np.frombuffer(payload, "<i8", rows + 1, offset)
            offset += indptr.nbytes
            indices = np.frombuffer(payload, "<i8", nnz, offset)
            offset += indices.nbytes
            data = np.frombuffer(payload, "<f8", nnz, offset)
            offset += data.nbytes
            out[entry["name"]] = sp.csr_matrix((data, indices, indptr), shape=(rows, cols))
        else:
            data = np.frombuffer(payload, "<f8", rows * cols, offset)
            offset += data.nbytes
            out[entry["name"]] = data.reshape(rows, cols).copy()
    if offset != len(payload):
        raise CacheFormatError("trailing bytes in payload")
    return out


class OperatorCache:
    """Two-level (memory, disk) cache of DecompositionOperators per shape.

    ``builds``, ``memory_hits`` and ``disk_hits`` count where each request
    was satisfied. With ``cache_dir=None`` the cache is memory-only.
    """

    def __init__(
        self,
        cache_dir: str | Path | None = None,
        *,
        ceiling: dict[int, int] | None = DEFAULT_SHAPE_CEILING,
        factor_budget: int = DEFAULT_FACTOR_BUDGET,
        dense_pi_budget: int = DEFAULT_DENSE_PI_BUDGET,
    ):
        self.cache_dir = Path(cache_dir) if cache_dir is not None else None
        self.ceiling = ceiling
        self.factor_budget = factor_budget
        self.dense_pi_budget = dense_pi_budget
        self._memory: dict[GameShape, DecompositionOperators] = {}
        self.builds = 0
        self.memory_hits = 0
        self.disk_hits = 0

    def path_for(self, shape: GameShape) -> Path | None:
        if self.cache_dir is None:
            return None
        return self.cache_dir / cache_file_name(shape)

    def get(self, shape: GameShape) -> DecompositionOperators:
        ops = self._memory.get(shape)
        if ops is not None:
            self.memory_hits += 1
            return ops
        path = self.path_for(shape)
        if path is not None and path.exists():
            try:
                ops = self._load(path, shape)
                self.disk_hits += 1
                self._memory[shape] = ops
                return ops
            except (CacheFormatError, ValueError, KeyError, OSError) as exc:
                warnings.warn(f"corrupt operator cache {path} ({exc}); rebuilding")
        ops = build_operators(
            shape,
            ceiling=self.ceiling,
            factor_budget=self.factor_budget,
            dense_pi_budget=self.dense_pi_budget,
        )
        self.builds += 1
        if path is not None:
            self._persist(path, ops)
        self._memory[shape] = ops
        return ops

    def _load(self, path: Path, shape: GameShape) -> DecompositionOperators:
        mats = read_cache_file(path, shape)
        graph = build_response_graph(
            shape, ceiling=self.ceiling, factor_budget=self.factor_budget
        )
        ops = DecompositionOperators(
            graph,
            mats["deviation"].tocsr(),
            mats["grad"].tocsr(),
            np.ascontiguousarray(mats["pi_factor"]),
            self.dense_pi_budget,
        )
        if "pi" in mats:
            ops._pi = mats["pi"]
        return ops

    def _persist(self, path: Path, ops: DecompositionOperators) -> None:
        mats = {
            "deviation": ops.deviation,
            "grad": ops.grad,
            "pi_factor": ops.pi_factor,
        }
        if 8 * ops.num_edges**2 <= min(PI_PERSIST_BYTES, self.dense_pi_budget):
            mats["pi"] = ops.Pi
        write_cache_file(path, ops.shape, mats)


def operator_cache_get(shape: GameShape, cache_dir: str | Path | None) -> DecompositionOperators:
    """Load the shape's operators from the cache directory, building on a miss."""
    return OperatorCache(cache_dir).get(shape)
