"""Sparse factor chain storage and its fast application.

A factorization of an n-by-n operator K is the product

    U G(L-1) ... G(h) M H(h)* ... H(L-1)* V*

held here as structured block arrays rather than generic sparse matrices:
every block at one level has the same shape, so applying a level is one
batched matmul.  Levels at depth >= log2(n) no longer split rows (nodes
already hold a single index); those transfer factors only merge column
groups and carry a reduced block set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .partition import DyadicPartition


@dataclass(frozen=True)
class BlockDiagonalFactor:
    """Uniform block diagonal: blocks[b] sits at (b*rows, b*cols)."""

    blocks: np.ndarray  # (nb, rows, cols) complex

    @property
    def nnz(self) -> int:
        return self.blocks.size

    @property
    def shape(self):
        nb, rows, cols = self.blocks.shape
        return (nb * rows, nb * cols)

    def iter_blocks(self):
        nb, rows, cols = self.blocks.shape
        for b in range(nb):
            yield b * rows, b * cols, self.blocks[b]

    def dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.complex128)
        for r0, c0, blk in self.iter_blocks():
            out[r0:r0 + blk.shape[0], c0:c0 + blk.shape[1]] = blk
        return out

    def forward(self, w: np.ndarray) -> np.ndarray:
        nb, rows, cols = self.blocks.shape
        return (self.blocks @ w.reshape(nb, cols, -1)).reshape(nb * rows, -1)

    def adjoint(self, w: np.ndarray) -> np.ndarray:
        nb, rows, cols = self.blocks.shape
        out = self.blocks.conj().transpose(0, 2, 1) @ w.reshape(nb, rows, -1)
        return out.reshape(nb * cols, -1)


@dataclass(frozen=True)
class TransferFactor:
    """One level of the recursive chain: r x 2r blocks merging sibling groups.

    At a splitting level the block array is (groups, 2, pairs, r, 2r); the
    diagonal group for input node i holds the blocks of output nodes 2i (top
    half) and 2i+1 (bottom half).  At a merge-only level (input nodes already
    single-index) it is (nodes, pairs, r, 2r).
    """

    level: int
    blocks: np.ndarray

    @property
    def splits(self) -> bool:
        return self.blocks.ndim == 5

    @property
    def rank(self) -> int:
        return self.blocks.shape[-2]

    @property
    def pairs(self) -> int:
        return self.blocks.shape[-3]

    @property
    def nnz(self) -> int:
        return self.blocks.size

    @property
    def shape(self):
        r, p = self.rank, self.pairs
        if self.splits:
            g = self.blocks.shape[0]
            return (2 * g * p * r, 2 * g * p * r)
        nodes = self.blocks.shape[0]
        return (nodes * p * r, 2 * nodes * p * r)

    def iter_blocks(self):
        r, p = self.rank, self.pairs
        if self.splits:
            g = self.blocks.shape[0]
            for i in range(g):
                for t in range(2):
                    for j in range(p):
                        yield ((2 * i + t) * p * r + j * r,
                               i * 2 * p * r + 2 * j * r,
                               self.blocks[i, t, j])
        else:
            for node in range(self.blocks.shape[0]):
                for j in range(p):
                    yield (node * p * r + j * r,
                           node * 2 * p * r + 2 * j * r,
                           self.blocks[node, j])

    def dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.complex128)
        for r0, c0, blk in self.iter_blocks():
            out[r0:r0 + blk.shape[0], c0:c0 + blk.shape[1]] = blk
        return out

    def forward(self, w: np.ndarray) -> np.ndarray:
        r, p = self.rank, self.pairs
        k = w.shape[-1]
        if self.splits:
            g = self.blocks.shape[0]
            win = w.reshape(g, 1, p, 2 * r, k)
            return (self.blocks @ win).reshape(2 * g * p * r, k)
        nodes = self.blocks.shape[0]
        win = w.reshape(nodes, p, 2 * r, k)
        return (self.blocks @ win).reshape(nodes * p * r, k)

    def adjoint(self, w: np.ndarray) -> np.ndarray:
        r, p = self.rank, self.pairs
        k = w.shape[-1]
        bstar = self.blocks.conj().swapaxes(-1, -2)
        if self.splits:
            g = self.blocks.shape[0]
            win = w.reshape(g, 2, p, r, k)
            out = (bstar @ win).sum(axis=1)
            return out.reshape(g * p * 2 * r, k)
        nodes = self.blocks.shape[0]
        win = w.reshape(nodes, p, r, k)
        return (bstar @ win).reshape(nodes * p * 2 * r, k)


@dataclass(frozen=True)
class MiddleFactor:
    """Weighted block permutation: weights[i, j] on the (j, i) slot of M[i, j]."""

    weights: np.ndarray  # (m, m, r) real, nonnegative

    @property
    def m(self) -> int:
        return self.weights.shape[0]

    @property
    def rank(self) -> int:
        return self.weights.shape[2]

    @property
    def nnz(self) -> int:
        return self.weights.size

    @property
    def shape(self):
        n = self.m * self.m * self.rank
        return (n, n)

    def iter_blocks(self):
        m, r = self.m, self.rank
        for i in range(m):
            for j in range(m):
                yield i * m * r + j * r, j * m * r + i * r, self.weights[i, j]

    def dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.complex128)
        for r0, c0, w in self.iter_blocks():
            out[r0:r0 + self.rank, c0:c0 + self.rank] = np.diag(w)
        return out

    def forward(self, w: np.ndarray) -> np.ndarray:
        m, r = self.m, self.rank
        win = w.reshape(m, m, r, -1)
        out = self.weights[..., None] * win.swapaxes(0, 1)
        return out.reshape(m * m * r, -1)

    def adjoint(self, w: np.ndarray) -> np.ndarray:
        m, r = self.m, self.rank
        win = w.reshape(m, m, r, -1)
        out = (self.weights[..., None] * win).swapaxes(0, 1)
        return out.reshape(m * m * r, -1)


@dataclass(frozen=True)
class ButterflyFactors:
    """Complete factor chain plus the partition geometry it lives on."""

    partition: DyadicPartition
    rank: int
    u_outer: BlockDiagonalFactor
    g_chain: tuple  # TransferFactor, levels half .. levels-1 ascending
    middle: MiddleFactor
    h_chain: tuple  # same layout, column side
    v_outer: BlockDiagonalFactor

    @property
    def n(self) -> int:
        return self.partition.n

    def apply(self, g: np.ndarray) -> np.ndarray:
        """Evaluate K @ g through the sparse chain in O(n log n)."""
        return self._chain(g, adjoint=False)

    def apply_adjoint(self, g: np.ndarray) -> np.ndarray:
        """Evaluate K* @ g (conjugate-transposed chain, reversed)."""
        return self._chain(g, adjoint=True)

    def _chain(self, g: np.ndarray, adjoint: bool) -> np.ndarray:
        g = np.asarray(g)
        vec = g.ndim == 1
        if g.shape[0] != self.n:
            raise ValueError(f"input length {g.shape[0]} != {self.n}")
        w = g.reshape(self.n, -1).astype(np.complex128, copy=False)
        lead, mid_op, trail = (
            (self.v_outer, self.middle.forward, self.u_outer)
            if not adjoint
            else (self.u_outer, self.middle.adjoint, self.v_outer)
        )
        down = self.h_chain if not adjoint else self.g_chain
        up = self.g_chain if not adjoint else self.h_chain
        w = lead.adjoint(w)
        for tf in reversed(down):
            w = tf.adjoint(w)
        w = mid_op(w)
        for tf in up:
            w = tf.forward(w)
        w = trail.forward(w)
        return w[:, 0] if vec else w

    def dense(self, chunk: int = 512) -> np.ndarray:
        """Materialize the factored operator (tests and verify only)."""
        n = self.n
        out = np.empty((n, n), dtype=np.complex128)
        eye = np.eye(n, dtype=np.complex128)
        for c0 in range(0, n, chunk):
            out[:, c0:c0 + chunk] = self.apply(eye[:, c0:c0 + chunk])
        return out

    def nnz_report(self) -> "NnzReport":
        return NnzReport(
            u_outer=self.u_outer.nnz,
            g={tf.level: tf.nnz for tf in self.g_chain},
            middle=self.middle.nnz,
            h={tf.level: tf.nnz for tf in self.h_chain},
            v_outer=self.v_outer.nnz,
        )


@dataclass(frozen=True)
class NnzReport:
    """Stored-entry counts per factor of one chain."""

    u_outer: int
    g: dict = field(default_factory=dict)
    middle: int = 0
    h: dict = field(default_factory=dict)
    v_outer: int = 0

    @property
    def total(self) -> int:
        return (self.u_outer + self.v_outer + self.middle
                + sum(self.g.values()) + sum(self.h.values()))


def factors_equal(a: ButterflyFactors, b: ButterflyFactors) -> bool:
    """Bit-exact equality of two chains (same partition, same arrays)."""
    if a.partition != b.partition or a.rank != b.rank:
        return False
    if len(a.g_chain) != len(b.g_chain) or len(a.h_chain) != len(b.h_chain):
        return False
    pairs = [(a.u_outer.blocks, b.u_outer.blocks),
             (a.v_outer.blocks, b.v_outer.blocks),
             (a.middle.weights, b.middle.weights)]
    pairs += [(x.blocks, y.blocks) for x, y in zip(a.g_chain, b.g_chain)]
    pairs += [(x.blocks, y.blocks) for x, y in zip(a.h_chain, b.h_chain)]
    return all(x.shape == y.shape and np.array_equal(x, y) for x, y in pairs)
