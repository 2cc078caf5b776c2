import numpy as np
import pytest

from butterfly.construct import _level_geometry
from butterfly.factors import (BlockDiagonalFactor, ButterflyFactors,
                               MiddleFactor, TransferFactor)


def complex_gaussian(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def prescribed_svd_matrix(rng, m, n, sigmas):
    """Dense matrix with exactly the given singular values (its own oracle)."""
    u, _ = np.linalg.qr(complex_gaussian(rng, (m, len(sigmas))))
    v, _ = np.linalg.qr(complex_gaussian(rng, (n, len(sigmas))))
    return (u * np.asarray(sigmas)) @ v.conj().T


def random_exact_chain(p, r, rng) -> ButterflyFactors:
    """Random chain with orthonormal-row transfer blocks: every block of the
    resulting dense matrix has exact rank <= r and decent conditioning."""

    def orth_rows(shape):
        a = complex_gaussian(rng, shape)
        flat = a.reshape(-1, *shape[-2:])
        q, _ = np.linalg.qr(flat.swapaxes(-1, -2))
        return np.ascontiguousarray(q.swapaxes(-1, -2).reshape(shape))

    shapes, leaf_shape = _level_geometry(p, r)
    u_outer = BlockDiagonalFactor(orth_rows(leaf_shape).conj())
    v_outer = BlockDiagonalFactor(orth_rows(leaf_shape).conj())
    g_chain = tuple(TransferFactor(lvl, orth_rows(shape))
                    for lvl, _, shape in shapes)
    h_chain = tuple(TransferFactor(lvl, orth_rows(shape))
                    for lvl, _, shape in shapes)
    weights = rng.uniform(0.5, 1.5, size=(p.mid_nodes, p.mid_nodes, r))
    return ButterflyFactors(p, r, u_outer, g_chain, MiddleFactor(weights),
                            h_chain, v_outer)


@pytest.fixture
def rng():
    return np.random.default_rng(20240801)
