"""Dyadic index trees over {0, ..., n-1} and the block algebra built on them.

A partition fixes an even tree depth ``levels`` shared by the row tree and
the column tree.  Level ``lvl`` of the row tree has ``2**lvl`` nodes; node
``i`` covers the index range ``[i*n/2**lvl, (i+1)*n/2**lvl)``.  The depth may
exceed ``log2(n)``: nodes below the single-index level are empty or hold one
index (range boundaries are rounded up), which is what lets the middle level
sit deeper than ``sqrt(n)`` blocks and is how the reference accuracies are
reached.  Block ``(lvl, i, j)`` pairs row node ``i`` at level ``lvl`` with
column node ``j`` at level ``levels - lvl``.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class DyadicPartition:
    """Shared row/column tree geometry for one n-by-n operator."""

    n: int
    levels: int

    def __post_init__(self):
        n, levels = self.n, self.levels
        if n < 4 or n & (n - 1):
            raise ValueError(f"matrix dimension must be a power of two >= 4, got {n}")
        if levels < 2 or levels % 2:
            raise ValueError(f"tree depth must be even and >= 2, got {levels}")
        if 2 ** (levels // 2) > n:
            raise ValueError(
                f"depth {levels} puts more than {n} nodes on the middle level"
            )

    @property
    def half(self) -> int:
        return self.levels // 2

    @property
    def mid_nodes(self) -> int:
        """Number of nodes per side at the middle level (m = 2**half)."""
        return 2 ** self.half

    @property
    def mid_side(self) -> int:
        """Row/column count of one middle-level block."""
        return self.n // self.mid_nodes

    @property
    def point_levels(self) -> int:
        """Depth at which nodes hold exactly one index."""
        return self.n.bit_length() - 1

    @property
    def leaf_size(self):
        """n / 2**levels; below 1 when the tree outruns the index grid."""
        if self.levels <= self.point_levels:
            return self.n >> self.levels
        return self.n / 2 ** self.levels

    def node_range(self, lvl: int, i: int) -> range:
        if not 0 <= lvl <= self.levels:
            raise ValueError(f"level {lvl} outside [0, {self.levels}]")
        if not 0 <= i < 2 ** lvl:
            raise ValueError(f"node {i} outside level {lvl}")
        scale = 2 ** lvl
        start = -((-i * self.n) // scale)
        stop = -((-(i + 1) * self.n) // scale)
        return range(start, stop)


@dataclass(frozen=True)
class BlockId:
    """Names the block K[rows(level, row_node), cols(levels - level, col_node)]."""

    level: int
    row_node: int
    col_node: int


def make_partition(n, target_leaf) -> DyadicPartition:
    """Build the deepest even-depth partition whose leaves hold >= target_leaf.

    ``target_leaf`` may be fractional; e.g. 0.25 yields the depth
    ``log2(n) + 2`` trees used for the reference accuracy experiments, while
    integer targets keep every leaf at one index or more.
    """
    if not isinstance(n, int) or n < 4 or n & (n - 1):
        lo = max(4, 2 ** max(2, (int(n).bit_length() - 1)))
        raise ValueError(
            f"n={n} admits no dyadic decomposition; nearest admissible sizes "
            f"are powers of two such as {lo} and {2 * lo}"
        )
    if target_leaf <= 0:
        raise ValueError("target_leaf must be positive")
    levels = -1
    for cand in range(2, 2 * (n.bit_length() - 1) + 1, 2):
        if n / 2 ** cand >= target_leaf:
            levels = cand
    if levels < 0:
        raise ValueError(
            f"no even depth >= 2 leaves at least {target_leaf} indices per "
            f"leaf for n={n}; admissible n start at {2 ** max(2, int(4 * target_leaf).bit_length() - 1)}"
        )
    return DyadicPartition(n, levels)


def block_rows(p: DyadicPartition, ident: BlockId) -> range:
    return p.node_range(ident.level, ident.row_node)


def block_cols(p: DyadicPartition, ident: BlockId) -> range:
    return p.node_range(p.levels - ident.level, ident.col_node)
