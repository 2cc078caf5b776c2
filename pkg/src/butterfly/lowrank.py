"""Fixed-rank approximation engines and the factor forms derived from them.

Three routes to a rank-r approximate SVD ``Z ~ u0 @ diag(sigma0) @ v0*``:

* :func:`truncated_svd` -- dense, optimal, used as the oracle and inside the
  recursive stage;
* :func:`randomized_svd` -- probes a black-box operator with Gaussian blocks;
* :func:`randomized_sampling_svd` -- visits O(r) rows and columns through an
  entry oracle, alternating pivoted QR/LQ skeleton selection.

All randomized draws come from a caller-supplied generator, and every
reduction is deterministic, so identical seeds give bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Relative singular-value floor applied in every pseudo-inversion.
PINV_FLOOR = 1e-13

#: Relative window inside which pivot column norms count as tied.
PIVOT_TIE = 1e-14

#: Residual level (relative to the largest column) below which further basis
#: directions are numerical noise; such directions can be arbitrarily spiky
#: and poison sampled least-squares problems.
BASIS_TRIM = 1e-11


@dataclass(frozen=True)
class OversamplingParams:
    """Knobs for the randomized engines.

    p   extra Gaussian probe columns (additive oversampling),
    q   row/column sample multiplier for the sampling engine,
    iters  skeleton refinement sweeps in the sampling engine.
    """

    p: int = 5
    q: int = 3
    iters: int = 3

    def __post_init__(self):
        if self.p < 0 or self.q < 1 or self.iters < 1:
            raise ValueError(f"invalid oversampling parameters {self}")


DEFAULT_PARAMS = OversamplingParams()


@dataclass(frozen=True)
class LowRankApprox:
    """Rank-r triple (u0, sigma0, v0); u0/v0 have orthonormal columns."""

    u0: np.ndarray
    sigma0: np.ndarray
    v0: np.ndarray

    @property
    def rank(self) -> int:
        return self.sigma0.shape[0]

    def matrix(self) -> np.ndarray:
        return (self.u0 * self.sigma0) @ self.v0.conj().T


@dataclass(frozen=True)
class FactorFormA:
    """CUR-style split u @ s @ vstar with the singular values on both sides."""

    u: np.ndarray
    s: np.ndarray
    vstar: np.ndarray


def floored_inverse(sigma: np.ndarray) -> np.ndarray:
    """Invert singular values, zeroing everything below PINV_FLOOR * max."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.size == 0:
        return sigma.copy()
    keep = sigma > PINV_FLOOR * sigma.max(initial=0.0)
    out = np.zeros_like(sigma)
    np.divide(1.0, sigma, out=out, where=keep)
    return out


def pinv_floored(a: np.ndarray) -> np.ndarray:
    """Moore-Penrose pseudo-inverse with the shared relative floor."""
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    sinv = floored_inverse(s)
    return (vh.conj().T * sinv) @ u.conj().T


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Gaussian with independent unit-variance real and imaginary parts."""
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def select_pivot_columns(a: np.ndarray, k: int, rel_tol: float = 0.0) -> list[int]:
    """Greedy column-pivot order: largest residual norm first, k picks.

    Ties within PIVOT_TIE relative are broken toward the lower index so the
    selection is reproducible across BLAS builds.  Stops early when the
    residual falls to rel_tol times the largest initial column norm (exact
    zero by default).
    """
    work = np.array(a, dtype=np.complex128, copy=True)
    m, n = work.shape
    k = min(k, m, n)
    norms2 = (work.real * work.real + work.imag * work.imag).sum(axis=0)
    floor = rel_tol * rel_tol * float(norms2.max(initial=0.0))
    pivots: list[int] = []
    for _ in range(k):
        best = float(norms2.max(initial=0.0))
        if best <= floor or best <= 0.0:
            break
        # boolean argmax finds the first (lowest-index) column in the window
        j = int(np.argmax(norms2 >= best * (1.0 - 2.0 * PIVOT_TIE)))
        pivots.append(j)
        q = work[:, j] / np.sqrt(norms2[j])
        proj = q.conj() @ work
        work -= q[:, None] * proj
        norms2 -= proj.real * proj.real + proj.imag * proj.imag
        np.maximum(norms2, 0.0, out=norms2)
        norms2[j] = 0.0
    return pivots


def orthonormal_columns(a: np.ndarray, k: int, pad: bool = True,
                        rel_tol: float = 0.0) -> np.ndarray:
    """Orthonormal basis for the first k pivot columns of ``a``.

    With ``pad`` the basis is completed to exactly k columns with canonical
    directions; without it, rank-deficient input yields fewer columns (the
    honest numerical rank up to ``rel_tol``).
    """
    m = a.shape[0]
    if k > m:
        raise ValueError(f"cannot build {k} orthonormal columns in dimension {m}")
    pivots = select_pivot_columns(a, k, rel_tol)
    sel = a[:, pivots]
    if len(pivots) < k:
        if not pad:
            if not pivots:
                return np.zeros((m, 0), dtype=np.complex128)
            q, _ = np.linalg.qr(sel)
            return q
        extra = np.eye(m, dtype=np.complex128)[:, : k - len(pivots)]
        sel = np.concatenate([sel, extra], axis=1)
    q, _ = np.linalg.qr(sel)
    return q[:, :k]


def _pad_orthonormal(partial: np.ndarray, k: int) -> np.ndarray:
    """Complete (m x t) orthonormal columns to (m x k) with t <= k."""
    m, t = partial.shape
    if t == k:
        return partial
    filler = np.eye(m, dtype=np.complex128)[:, : k - t]
    q, _ = np.linalg.qr(np.concatenate([partial, filler], axis=1))
    out = np.concatenate([partial, q[:, t:k]], axis=1)
    return out


def truncated_svd(z: np.ndarray, r: int) -> LowRankApprox:
    """Optimal rank-r approximation by dense SVD truncation."""
    z = np.asarray(z)
    m, n = z.shape
    if not 1 <= r <= min(m, n):
        raise ValueError(f"rank {r} outside [1, {min(m, n)}] for a {m}x{n} matrix")
    u, s, vh = np.linalg.svd(z, full_matrices=False)
    return LowRankApprox(
        u0=np.ascontiguousarray(u[:, :r], dtype=np.complex128),
        sigma0=np.ascontiguousarray(s[:r]),
        v0=np.ascontiguousarray(vh[:r].conj().T),
    )


def randomized_svd(apply_op, m, n, r, params=DEFAULT_PARAMS, rng=None) -> LowRankApprox:
    """Probe-based rank-r SVD of a black-box operator.

    ``apply_op(x, adjoint)`` must return ``Z @ x`` (or ``Z* @ x`` when
    ``adjoint`` is true) for blocks of r + p vectors.  Draw order: column
    probes, then row probes.
    """
    rng = np.random.default_rng(rng)
    width = r + params.p
    if width > min(m, n):
        raise ValueError(f"r + p = {width} exceeds min(m, n) = {min(m, n)}")
    r_col = complex_normal(rng, (n, width))
    r_row = complex_normal(rng, (m, width))
    y_col = apply_op(r_col, False)
    y_row = apply_op(r_row, True)
    # keep the whole oversampled range; truncate to r only after the small SVD
    q_col = orthonormal_columns(y_col, width)
    q_row = orthonormal_columns(y_row, width)
    mid = q_col.conj().T @ apply_op(q_row, False)
    return _assemble(mid, q_col, q_row, r)


def svd_from_probes(y_col, y_row, r_row, r) -> LowRankApprox:
    """Finish the probe SVD from stored products only (no re-application).

    Given ``y_col = Z @ C``, ``y_row = Z* @ R`` and the row probe ``R``, the
    middle matrix solves ``R* Q_col M ~ y_row* Q_row`` in the least-squares
    sense; this is the per-block path of the fast-matvec construction, where
    blocks of the operator cannot be applied to fresh vectors.
    """
    width = min(y_col.shape[1], y_col.shape[0], y_row.shape[0])
    q_col = orthonormal_columns(y_col, width)
    q_row = orthonormal_columns(y_row, width)
    mid = pinv_floored(r_row.conj().T @ q_col) @ (y_row.conj().T @ q_row)
    return _assemble(mid, q_col, q_row, r)


def randomized_sampling_svd(entry, m, n, r, params=DEFAULT_PARAMS, rng=None) -> LowRankApprox:
    """Rank-r SVD from sampled rows and columns of an entry oracle.

    ``entry(rows, cols)`` returns the dense submatrix on the given index
    arrays.  Alternates pivoted QR on sampled rows with pivoted LQ on sampled
    columns to grow the skeleton sets, then solves a small least-squares
    problem for the middle matrix.  Rows and columns are assumed incoherent
    with respect to delta functions; that property is not checked here.
    """
    rng = np.random.default_rng(rng)
    if not 1 <= r <= min(m, n):
        raise ValueError(f"rank {r} outside [1, {min(m, n)}]")
    rq = r * params.q
    if rq >= max(m, n):
        # every sweep would visit the whole block; take the exact limit
        return truncated_svd(entry(np.arange(m), np.arange(n)), r)
    pi_col: np.ndarray = np.empty(0, dtype=np.intp)
    pi_row: np.ndarray = np.empty(0, dtype=np.intp)
    for _ in range(params.iters):
        rows = _union(rng.choice(m, size=min(rq, m), replace=False), pi_row)
        picked = select_pivot_columns(entry(rows, np.arange(n)), r)
        pi_col = np.asarray(sorted(picked), dtype=np.intp)
        cols = _union(rng.choice(n, size=min(rq, n), replace=False), pi_col)
        picked = select_pivot_columns(entry(np.arange(m), cols).conj().T, r)
        pi_row = np.asarray(sorted(picked), dtype=np.intp)

    # Least-squares sets: skeletons plus fresh random rows/columns.  The
    # bases span the best sampled columns/rows (not just the r skeletons);
    # the final truncation then recovers near-optimal singular values.  A
    # rank-r margin keeps the middle least-squares problem overdetermined,
    # otherwise ill-conditioned basis/sample sections amplify the tail.
    rows = _union(rng.choice(m, size=min(rq, m), replace=False), pi_row)
    cols = _union(rng.choice(n, size=min(rq, n), replace=False), pi_col)
    width = max(r, min(rows.size, cols.size) - r)
    q_col = orthonormal_columns(entry(np.arange(m), cols), min(width, m),
                                pad=False, rel_tol=BASIS_TRIM)
    q_row = orthonormal_columns(entry(rows, np.arange(n)).conj().T,
                                min(width, n), pad=False, rel_tol=BASIS_TRIM)
    mid = pinv_floored(q_col[rows, :]) @ entry(rows, cols) @ pinv_floored(q_row[cols, :].conj().T)
    return _assemble(mid, q_col, q_row, r)


def to_form_a(a: LowRankApprox) -> FactorFormA:
    """Split off the singular values on both sides; middle holds 1/sigma."""
    return FactorFormA(
        u=a.u0 * a.sigma0,
        s=np.diag(floored_inverse(a.sigma0)),
        vstar=a.sigma0[:, None] * a.v0.conj().T,
    )


def to_form_scaled_u(a: LowRankApprox):
    """(u0 * sigma0, v0*): singular values carried by the left factor."""
    return a.u0 * a.sigma0, a.v0.conj().T


def to_form_scaled_v(a: LowRankApprox):
    """(u0, sigma0 * v0*): singular values carried by the right factor."""
    return a.u0.copy(), a.sigma0[:, None] * a.v0.conj().T


def _union(sampled: np.ndarray, kept: np.ndarray) -> np.ndarray:
    return np.union1d(np.asarray(sampled, dtype=np.intp), kept)


def _assemble(mid, q_col, q_row, r) -> LowRankApprox:
    u_m, s_m, vh_m = np.linalg.svd(mid, full_matrices=False)
    t = min(r, s_m.shape[0])
    sigma = np.zeros(r)
    sigma[:t] = s_m[:t]
    return LowRankApprox(
        u0=_pad_orthonormal(q_col @ u_m[:, :t], r),
        sigma0=sigma,
        v0=_pad_orthonormal(q_row @ vh_m[:t].conj().T, r),
    )
