"""Bit-exact binary serialization of factor chains and vectors.

Factor file layout (all little-endian):

    magic "BFAC" | version u32 | n u64 | levels u32 | rank u32 | count u32
    then per factor:
        kind u8 (0 leaf-left, 1 transfer-left, 2 middle, 3 transfer-right,
                 4 leaf-right) | level u32 | block_count u64
        then per block:
            row_off u64 | col_off u64 | rows u32 | cols u32 | payload
    payload: kind 2 stores the rank real weights as f64; every other kind
    stores rows*cols complex values as (re, im) f64 pairs, column-major.

Factors appear in product order: leaf-left, transfer-left descending by
level, middle, transfer-right ascending, leaf-right.  Vector files are a u64
length followed by that many complex f64 pairs.
"""

from __future__ import annotations

import struct

import numpy as np

from .construct import _level_geometry
from .factors import (BlockDiagonalFactor, ButterflyFactors, MiddleFactor,
                      TransferFactor)
from .partition import DyadicPartition

MAGIC = b"BFAC"
VERSION = 1

KIND_U_OUTER = 0
KIND_G = 1
KIND_MIDDLE = 2
KIND_H = 3
KIND_V_OUTER = 4


class FormatError(ValueError):
    """Malformed factor or vector file; ``offset`` is the failing byte."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, count: int) -> bytes:
        if self.offset + count > len(self.data):
            raise FormatError(
                f"truncated: wanted {count} bytes, file ends", self.offset)
        out = self.data[self.offset:self.offset + count]
        self.offset += count
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def _write_factor(out, kind: int, level: int, factor):
    blocks = list(factor.iter_blocks())
    out.append(struct.pack("<BIQ", kind, level, len(blocks)))
    for row_off, col_off, payload in blocks:
        if kind == KIND_MIDDLE:
            rows = cols = payload.shape[0]
            data = np.asarray(payload, dtype="<f8").tobytes()
        else:
            rows, cols = payload.shape
            data = np.asarray(payload, dtype="<c16").tobytes(order="F")
        out.append(struct.pack("<QQII", row_off, col_off, rows, cols))
        out.append(data)


def save_factors(f: ButterflyFactors, path) -> None:
    """Write the chain so that save -> load -> save is byte-identical."""
    chunks = [MAGIC, struct.pack("<IQII", VERSION, f.n, f.partition.levels,
                                 f.rank)]
    count = 3 + len(f.g_chain) + len(f.h_chain)
    chunks.append(struct.pack("<I", count))
    _write_factor(chunks, KIND_U_OUTER, f.partition.levels, f.u_outer)
    for tf in reversed(f.g_chain):
        _write_factor(chunks, KIND_G, tf.level, tf)
    _write_factor(chunks, KIND_MIDDLE, f.partition.half, f.middle)
    for tf in f.h_chain:
        _write_factor(chunks, KIND_H, tf.level, tf)
    _write_factor(chunks, KIND_V_OUTER, f.partition.levels, f.v_outer)
    with open(path, "wb") as fh:
        fh.write(b"".join(chunks))


def _read_blocks(rd: _Reader, kind: int, expected, rank: int):
    """Fill a preallocated factor array in canonical block order."""
    (declared,) = rd.unpack("<Q")
    blocks = list(expected.iter_blocks())
    if declared != len(blocks):
        raise FormatError(
            f"factor kind {kind} declares {declared} blocks, "
            f"geometry implies {len(blocks)}", rd.offset)
    for row_off, col_off, target in blocks:
        r0, c0, rows, cols = rd.unpack("<QQII")
        if kind == KIND_MIDDLE:
            want = (rank, rank)
        else:
            want = target.shape
        if (r0, c0) != (row_off, col_off) or (rows, cols) != want:
            raise FormatError(
                f"block header mismatch: got offsets ({r0}, {c0}) shape "
                f"({rows}, {cols}), expected ({row_off}, {col_off}) {want}",
                rd.offset)
        if kind == KIND_MIDDLE:
            raw = rd.take(8 * rank)
            target[...] = np.frombuffer(raw, dtype="<f8")
        else:
            raw = rd.take(16 * rows * cols)
            target[...] = np.frombuffer(raw, dtype="<c16").reshape(
                (rows, cols), order="F")


def load_factors(path) -> ButterflyFactors:
    with open(path, "rb") as fh:
        rd = _Reader(fh.read())
    if rd.take(4) != MAGIC:
        raise FormatError("bad magic", 0)
    version, n, levels, rank = rd.unpack("<IQII")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    p = DyadicPartition(int(n), int(levels))
    (count,) = rd.unpack("<I")
    shapes, leaf_shape = _level_geometry(p, rank)
    if count != 3 + 2 * len(shapes):
        raise FormatError(f"factor count {count} does not match geometry",
                          rd.offset)

    def empty_chain():
        return {lvl: TransferFactor(lvl, np.zeros(shape, dtype=np.complex128))
                for lvl, _, shape in shapes}

    u_outer = BlockDiagonalFactor(np.zeros(leaf_shape, dtype=np.complex128))
    v_outer = BlockDiagonalFactor(np.zeros(leaf_shape, dtype=np.complex128))
    middle = MiddleFactor(np.zeros((p.mid_nodes, p.mid_nodes, rank)))
    g_chain, h_chain = empty_chain(), empty_chain()
    targets = {KIND_U_OUTER: u_outer, KIND_V_OUTER: v_outer}

    for _ in range(count):
        kind, level = rd.unpack("<BI")
        if kind in targets:
            _read_blocks(rd, kind, targets[kind], rank)
        elif kind == KIND_MIDDLE:
            _read_blocks(rd, kind, middle, rank)
        elif kind in (KIND_G, KIND_H):
            chain = g_chain if kind == KIND_G else h_chain
            if level not in chain:
                raise FormatError(f"unexpected transfer level {level}", rd.offset)
            _read_blocks(rd, kind, chain[level], rank)
        else:
            raise FormatError(f"unknown factor kind {kind}", rd.offset)
    if rd.offset != len(rd.data):
        raise FormatError("trailing bytes after last factor", rd.offset)
    order = [lvl for lvl, _, _ in shapes]
    return ButterflyFactors(p, rank, u_outer,
                            tuple(g_chain[lvl] for lvl in order), middle,
                            tuple(h_chain[lvl] for lvl in order), v_outer)


def write_vector(path, g: np.ndarray) -> None:
    g = np.asarray(g, dtype="<c16")
    if g.ndim != 1:
        raise ValueError("vector files hold one-dimensional data")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", g.shape[0]))
        fh.write(g.tobytes())


def read_vector(path) -> np.ndarray:
    with open(path, "rb") as fh:
        rd = _Reader(fh.read())
    (count,) = rd.unpack("<Q")
    raw = rd.take(16 * count)
    if rd.offset != len(rd.data):
        raise FormatError("trailing bytes after vector payload", rd.offset)
    return np.frombuffer(raw, dtype="<c16").copy()
