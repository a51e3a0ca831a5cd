"""Cross (CUR) approximation built from actual rows and columns.

A cross approximation reads ``l`` full columns ``C``, ``k`` full rows
``R``, and inverts their intersection ``G = M[rows, cols]`` in the rank-
``rho`` truncated pseudoinverse sense:

    M  ~  C @ pinv_trunc(G, rho) @ R.

Reading ``C`` and ``R`` costs at most ``m*l + k*n`` distinct entries —
sublinear for small ``k, l`` — and the approximation is exact precisely
when the generator captures the full rank of the input, which
``verify_cur_exactness`` checks against the audit channel.  Row and
column selection for a given factored approximation uses greedy
maximal-volume pivoting on the singular factors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    RANK_TOL,
    RankDeficientError,
    fro_norm,
    norms,
    pinv_trunc,
    qrp,
    svd,
)

__all__ = [
    "CURDecomp",
    "canonical_cur",
    "verify_cur_exactness",
    "maxvol_indices",
    "topsvd_to_cur",
]


@dataclass
class CURDecomp:
    """Cross approximation ``C @ nucleus @ R`` with its index sets.

    ``C`` is m x l (columns of the input), ``R`` is k x n (rows),
    ``nucleus`` is l x k, and ``rho`` is the inversion rank used.
    """

    row_idx: np.ndarray
    col_idx: np.ndarray
    C: np.ndarray
    nucleus: np.ndarray
    R: np.ndarray
    rho: int

    def matrix(self):
        """Densify (audit/diagnostic use only)."""
        return self.C @ (self.nucleus @ self.R)


def _check_indices(idx, extent, what):
    idx = np.asarray(idx, dtype=np.int64)
    if idx.ndim != 1 or idx.size == 0:
        raise ValueError(f"{what} index set must be a nonempty vector")
    if idx.min() < 0 or idx.max() >= extent:
        raise ValueError(f"{what} index out of range [0, {extent})")
    if np.unique(idx).size != idx.size:
        raise ValueError(f"{what} indices must be distinct")
    return idx


def _strict_nucleus(g, rho, flops=None):
    """Truncated pseudoinverse that refuses rank-deficient generators.

    Unlike the permissive sketch-space inversion, a cross generator whose
    ``rho``-th singular value sits below the cutoff means the chosen rows
    and columns cannot support a rank-``rho`` cross, so this raises.
    """
    s = svd(g, flops=flops)
    if s.sigma[0] <= 0.0 or (s.rank >= rho and s.sigma[rho - 1] <= RANK_TOL * s.sigma[0]) \
            or s.rank < rho:
        raise RankDeficientError(
            f"rank-deficient generator: sigma_{rho} below cutoff"
        )
    return (s.V[:, :rho] / s.sigma[:rho]) @ s.U[:, :rho].conj().T


def canonical_cur(oracle, rows, cols, rho, flops=None):
    """Cross approximation through the canonical rank-``rho`` nucleus.

    Reads the ``cols`` columns and ``rows`` rows of the input (at most
    ``m*l + k*n`` distinct entries), forms the generator
    ``G = M[rows, cols]``, and inverts it with the rank-``rho`` truncated
    pseudoinverse.

    Raises
    ------
    RankDeficientError
        If ``sigma_rho(G)`` falls at or below ``1e-12 * sigma_1(G)`` —
        the selected cross cannot support the requested rank.
    """
    m, n = oracle.shape
    rows = _check_indices(rows, m, "row")
    cols = _check_indices(cols, n, "column")
    if not 1 <= rho <= min(rows.size, cols.size):
        raise ValueError(
            f"inversion rank rho={rho} outside [1, min(k={rows.size}, l={cols.size})]"
        )
    c = oracle.read_block(None, cols)
    r = oracle.read_block(rows, None)
    g = c[rows, :]
    nucleus = _strict_nucleus(g, rho, flops=flops)
    if flops is not None:
        flops.add(2 * cols.size * rows.size * min(rows.size, cols.size))
    return CURDecomp(row_idx=rows, col_idx=cols, C=c, nucleus=nucleus, R=r,
                     rho=rho)


def verify_cur_exactness(oracle, cur, tol=1e-8):
    """Audit whether the cross reproduces the input matrix exactly.

    Compares the densified cross against the audit channel in Frobenius
    norm, relative to the input's norm (absolute when that is zero).
    Exactness holds precisely when the generator has the same rank as
    the input, which is what tests pair this against.
    """
    dense = oracle.audit()
    diff = fro_norm(cur.matrix() - dense)
    scale = fro_norm(dense)
    return bool(diff <= tol * max(scale, 1.0))


def maxvol_indices(basis, rho, growth=1.01, max_sweeps=50):
    """Greedy maximal-volume row selection from a tall basis matrix.

    Starts from the pivoted-QR choice of ``rho`` rows of ``basis`` and
    swaps one row per move whenever the dominance matrix
    ``basis @ inv(basis[rows])`` has an entry exceeding ``growth``; each
    swap multiplies the submatrix volume by that entry.  Stops when no
    entry exceeds ``growth`` or after ``max_sweeps`` full re-evaluations,
    returning sorted row indices.
    """
    basis = np.asarray(basis)
    m, r = basis.shape
    if not 1 <= rho <= min(m, r):
        raise ValueError(f"maxvol rank rho={rho} outside [1, {min(m, r)}]")
    if growth <= 1.0:
        raise ValueError("growth threshold must exceed 1")
    # pivoted QR of the transpose picks well-spread starting rows
    fac = qrp(basis[:, :rho].conj().T)
    rows = list(fac.perm[:rho])
    for _ in range(max_sweeps):
        g = basis[rows, :rho]
        # nonsingular by construction for a full-column-rank basis: the
        # pivoted start guarantees it, and swaps only increase volume
        inv = _strict_nucleus(g, rho)
        dom = basis[:, :rho] @ inv
        i, j = np.unravel_index(np.argmax(np.abs(dom)), dom.shape)
        if abs(dom[i, j]) < growth:
            break
        rows[j] = int(i)
    return np.sort(np.asarray(rows, dtype=np.int64))


def topsvd_to_cur(oracle, s, rho, growth=1.01, max_sweeps=50, flops=None):
    """Select a cross for a factored approximation and build it.

    Rows come from maximal-volume pivoting on the left singular factor,
    columns from the right one; the cross itself is then read from the
    input and inverted canonically.  Returns ``(cur, quality)`` where
    ``quality = ||pinv(G)||_2 * sigma_rho`` measures how well-conditioned
    the selected generator is relative to the spectrum it must capture
    (closer to 1 is better).
    """
    if rho < 1 or rho > s.rank:
        raise ValueError(f"cross rank rho={rho} outside [1, {s.rank}]")
    rows = maxvol_indices(s.U, rho, growth=growth, max_sweeps=max_sweeps)
    cols = maxvol_indices(s.V, rho, growth=growth, max_sweeps=max_sweeps)
    cur = canonical_cur(oracle, rows, cols, rho, flops=flops)
    quality = norms(cur.nucleus).spectral * float(s.sigma[rho - 1])
    return cur, quality
