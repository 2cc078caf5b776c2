import pytest

from butterfly import BlockId, DyadicPartition, block_cols, block_rows, \
    make_partition


def test_make_partition_picks_deepest_even_depth():
    p = make_partition(64, 2)
    assert (p.levels, p.leaf_size, p.half) == (4, 4, 2)


def test_make_partition_integer_leaf_target():
    p = make_partition(1024, 16)
    assert (p.levels, p.leaf_size, p.half) == (6, 16, 3)
    assert p.mid_nodes == 8


def test_make_partition_rejects_odd_factor_sizes():
    with pytest.raises(ValueError, match="admissible"):
        make_partition(48, 2)


def test_make_partition_fractional_leaf_goes_past_single_indices():
    p = make_partition(1024, 0.25)
    assert p.levels == 12
    assert p.leaf_size == 0.25
    assert p.mid_side == 16


@pytest.mark.parametrize("bad", [0, -4, 3, 20, 1000])
def test_make_partition_rejects_non_powers_of_two(bad):
    with pytest.raises(ValueError):
        make_partition(bad, 2)


def test_block_ranges_formula():
    p = DyadicPartition(64, 4)
    assert block_rows(p, BlockId(2, 1, 0)) == range(16, 32)
    assert block_cols(p, BlockId(2, 1, 0)) == range(0, 16)
    assert block_rows(p, BlockId(4, 15, 0)) == range(60, 64)
    assert block_cols(p, BlockId(4, 15, 0)) == range(0, 64)


def test_block_rows_tile_each_level():
    p = DyadicPartition(64, 4)
    for lvl in range(p.levels + 1):
        covered = []
        for i in range(2 ** lvl):
            covered.extend(p.node_range(lvl, i))
        assert covered == list(range(64))


def test_deep_levels_tile_with_empty_nodes():
    p = DyadicPartition(16, 8)
    for lvl in range(p.levels + 1):
        covered = []
        for i in range(2 ** lvl):
            covered.extend(p.node_range(lvl, i))
        assert covered == list(range(16))


def test_midlevel_identities():
    for n, leaf in [(64, 1), (256, 16), (1024, 0.25)]:
        p = make_partition(n, leaf)
        assert p.half * 2 == p.levels
        assert p.mid_nodes ** 2 == 2 ** p.levels


def test_invalid_block_id_raises():
    p = DyadicPartition(64, 4)
    with pytest.raises(ValueError):
        block_rows(p, BlockId(2, 4, 0))
    with pytest.raises(ValueError):
        block_cols(p, BlockId(5, 0, 0))
