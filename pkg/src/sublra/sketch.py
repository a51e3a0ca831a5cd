"""Two-sided sketching, rank-constrained reconstruction, and recompression.

The pipeline reads an input matrix ``M`` (through an access-counted
oracle) only via three small products:

* ``W = F @ M`` — a ``k x n`` row sketch,
* ``Y = M @ H`` — an ``m x l`` column sketch,
* ``Z = F @ Y`` — the ``k x l`` core, formed from ``Y`` without touching
  ``M`` again.

With sparse structured multipliers these reads cover only the rows and
columns in the multipliers' support, which is how the whole construction
stays sublinear.  Reconstruction returns the three-factor approximation
``Y @ pinv_trunc(Z, rho) @ W``; recompression converts any factored
approximation to an exact truncated top SVD of itself without revisiting
the input.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    FlopCounter,
    TopSVD,
    fro_norm,
    pinv_trunc,
    qrp,
    svd,
    truncate_svd,
)
from .multipliers import SparseMultiplier, apply_left, apply_right

__all__ = [
    "LRA2",
    "LRA3",
    "SketchSet",
    "SketchLostError",
    "sketch",
    "nystrom_reconstruct",
    "lra_to_topsvd",
    "recompress",
]

log = logging.getLogger(__name__)


class SketchLostError(RuntimeError):
    """The core sketch came out numerically zero — it lost the input."""


@dataclass
class LRA2:
    """Two-factor low-rank approximation ``X @ Y`` (m x r times r x n)."""

    X: np.ndarray
    Y: np.ndarray

    def matrix(self):
        """Densify (audit/diagnostic use only)."""
        return self.X @ self.Y


@dataclass
class LRA3:
    """Three-factor approximation ``U @ T @ V`` (m x l, l x k, k x n)."""

    U: np.ndarray
    T: np.ndarray
    V: np.ndarray

    def matrix(self):
        """Densify (audit/diagnostic use only)."""
        return self.U @ (self.T @ self.V)


@dataclass
class SketchSet:
    """The three sketch blocks plus provenance and read accounting."""

    W: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    provenance: dict = field(default_factory=dict)
    reads: int = 0

    @property
    def k(self):
        return self.W.shape[0]

    @property
    def l(self):
        return self.Y.shape[1]


def _describe(mult, side, rows, cols):
    if isinstance(mult, SparseMultiplier):
        if mult.side != side:
            raise ValueError(f"multiplier tagged {mult.side!r} used on the {side}")
        return dict(mult.descriptor)
    a = np.asarray(mult)
    if a.ndim != 2 or a.shape != (rows, cols):
        raise ValueError(
            f"dense {side} multiplier must have shape {(rows, cols)}, got {a.shape}"
        )
    return {"family": "dense", "shape": list(a.shape)}


def sketch(oracle, f, h, flops=None):
    """Form ``W = F M``, ``Y = M H``, ``Z = F Y`` through the oracle.

    ``f`` is a left multiplier (``k x m`` dense array or a
    ``side="left"`` :class:`SparseMultiplier`), ``h`` a right one
    (``n x l`` dense or ``side="right"``).  ``Z`` is computed from ``Y``,
    never from a second pass over the input.  Returns a
    :class:`SketchSet` whose ``reads`` field is the number of distinct
    entries this call consumed.
    """
    m, n = oracle.shape
    before = oracle.reads
    f_desc = _describe(f, "left", -1, m) if isinstance(f, SparseMultiplier) else None
    h_desc = _describe(h, "right", n, -1) if isinstance(h, SparseMultiplier) else None

    if isinstance(f, SparseMultiplier):
        w = apply_left(f, oracle, flops=flops)
    else:
        f = np.asarray(f)
        if f.ndim != 2 or f.shape[1] != m:
            raise ValueError(f"dense left multiplier must be k x {m}, got {f.shape}")
        f_desc = {"family": "dense", "shape": list(f.shape)}
        full = oracle.read_block(None, None)
        w = f @ full
        if flops is not None:
            flops.add(2 * f.shape[0] * m * n)

    if isinstance(h, SparseMultiplier):
        y = apply_right(h, oracle, flops=flops)
    else:
        h = np.asarray(h)
        if h.ndim != 2 or h.shape[0] != n:
            raise ValueError(f"dense right multiplier must be {n} x l, got {h.shape}")
        h_desc = {"family": "dense", "shape": list(h.shape)}
        full = oracle.read_block(None, None)
        y = full @ h
        if flops is not None:
            flops.add(2 * m * n * h.shape[1])

    # core from Y alone — the input is never read a second time
    if isinstance(f, SparseMultiplier):
        base = f.base_matrix()
        z = base @ y
        if flops is not None:
            flops.add(2 * base.nnz * y.shape[1])
    else:
        z = f @ y
        if flops is not None:
            flops.add(2 * f.shape[0] * m * y.shape[1])

    return SketchSet(
        W=np.asarray(w),
        Y=np.asarray(y),
        Z=np.asarray(z),
        provenance={"f": f_desc, "h": h_desc, "m": m, "n": n},
        reads=oracle.reads - before,
    )


def nystrom_reconstruct(s, rho, flops=None):
    """Rank-constrained three-factor reconstruction from a sketch set.

    Returns ``LRA3(U=Y, T=pinv_trunc(Z, rho), V=W)``, the generalized
    sketch-space reconstruction whose product has rank at most ``rho``.
    Singular values of ``Z`` below ``1e-12 * sigma_1(Z)`` are treated as
    noise: the effective inversion rank is reduced rather than dividing
    by them.

    Raises
    ------
    SketchLostError
        If ``Z`` is numerically zero, i.e. the sketch lost the input.
    ValueError
        If ``rho`` exceeds the sketch sizes ``min(k, l)``.
    """
    if rho < 1:
        raise ValueError(f"reconstruction rank must be >= 1, got {rho}")
    k, l = s.Z.shape
    if rho > min(k, l):
        raise ValueError(
            f"reconstruction rank rho={rho} exceeds sketch sizes k={k}, l={l}"
        )
    if fro_norm(s.Z) == 0.0:
        raise SketchLostError("sketch lost the input: core sketch is zero")
    t = pinv_trunc(s.Z, rho, flops=flops)
    return LRA3(U=s.Y, T=t, V=s.W)


def _unpermute_rows(r_block, perm):
    out = np.empty_like(r_block)
    out[:, perm] = r_block
    return out


def lra_to_topsvd(a, w, b, r, flops=None, warn=True):
    """Convert a three-factor approximation ``A @ W @ B`` to its top SVD.

    Orthogonalizes ``A`` (m x l) and ``B^H`` (n x k) by pivoted QR, forms
    the small core ``X = (R_A P_A^T) W (P_B R_B^H)`` at the detected
    numerical ranks of the two factors, takes its SVD, and keeps the top
    ``r`` triplets rotated back into the big spaces.  Trimming only the
    roundoff-level QRP tails (rather than cutting both factors to ``r``
    up front) keeps the conversion exact for any core ``W``, however
    ill-scaled — the top-``r`` error is ``tau_{r+1}(AWB)`` up to
    roundoff.  The cost is dominated by the two QR passes and the small
    core — ``O(m l^2 + n k^2 + l k min(l, k))`` — and never touches the
    original matrix.

    If ``r`` exceeds the detected numerical rank of ``A`` or ``B``, the
    result is truncated to that rank (with a warning unless ``warn`` is
    false); the Frobenius norms of the discarded trailing blocks are
    logged at debug level.
    """
    a = np.asarray(a)
    w = np.asarray(w)
    b = np.asarray(b)
    if a.ndim != 2 or w.ndim != 2 or b.ndim != 2:
        raise ValueError("factors must be 2-d arrays")
    m, l = a.shape
    k, n = b.shape
    if w.shape != (l, k):
        raise ValueError(
            f"core factor must be {l} x {k} to chain {a.shape} @ W @ {b.shape}"
        )
    if not 1 <= r <= min(k, l):
        raise ValueError(f"target rank r={r} outside [1, min(k={k}, l={l})]")

    fa = qrp(a, flops=flops)
    fb = qrp(b.conj().T, flops=flops)
    r_eff = min(r, fa.numrank, fb.numrank)
    if r_eff < r:
        if warn:
            warnings.warn(
                f"requested rank {r} exceeds the numerical rank "
                f"{min(fa.numrank, fb.numrank)} of the factors; truncating",
                stacklevel=2,
            )
        r_eff = max(r_eff, 1)
    if fa.numrank == 0 or fb.numrank == 0:
        # a numerically zero factor: the approximation is the zero matrix
        z_u = np.zeros((m, 1), dtype=a.dtype)
        z_v = np.zeros((n, 1), dtype=b.dtype)
        z_u[0, 0] = 1.0
        z_v[0, 0] = 1.0
        return TopSVD(U=z_u, sigma=np.zeros(1), V=z_v)

    na, nb = fa.numrank, fb.numrank
    discard_a = fro_norm(fa.R[na:, :]) if fa.R.shape[0] > na else 0.0
    discard_b = fro_norm(fb.R[nb:, :]) if fb.R.shape[0] > nb else 0.0
    if discard_a or discard_b:
        log.debug(
            "conversion discarded trailing blocks: |A tail|=%.3e |B tail|=%.3e",
            discard_a,
            discard_b,
        )

    ra = _unpermute_rows(fa.R[:na, :], fa.perm)  # na x l, A ~ Q_A @ ra
    rb = _unpermute_rows(fb.R[:nb, :], fb.perm)  # nb x k, B^H ~ Q_B @ rb
    core = ra @ w  # na x k
    if flops is not None:
        flops.add(2 * na * l * k)
    core = core @ rb.conj().T  # na x nb
    if flops is not None:
        flops.add(2 * na * k * nb)
    cs = svd(core, flops=flops)
    u = fa.Q[:, :na] @ cs.U[:, :r_eff]
    v = fb.Q[:, :nb] @ cs.V[:, :r_eff]
    if flops is not None:
        flops.add(2 * m * na * r_eff + 2 * n * nb * r_eff)
    return TopSVD(U=u, sigma=cs.sigma[:r_eff].copy(), V=v)


def recompress(lra, rho, flops=None):
    """Exact rank-``rho`` truncation of a factored approximation.

    Accepts an :class:`LRA3` (or :class:`LRA2`, treated as ``X @ I @ Y``)
    and returns ``(LRA2, TopSVD)`` holding the best rank-``rho``
    approximation *of the factored product itself* — computed exactly
    (up to roundoff) via full-core conversion followed by truncation,
    with no reads of the original input.
    """
    if isinstance(lra, LRA2):
        x, y = lra.X, lra.Y
        inner = x.shape[1]
        if inner != y.shape[0]:
            raise ValueError(f"factor chain mismatch: {x.shape} @ {y.shape}")
        core = np.eye(inner, dtype=np.result_type(x.dtype, y.dtype))
        u_fac, t_fac, v_fac = x, core, y
    else:
        u_fac, t_fac, v_fac = lra.U, lra.T, lra.V
    r_full = min(u_fac.shape[1], v_fac.shape[0])
    if not 1 <= rho <= r_full:
        raise ValueError(f"truncation rank rho={rho} outside [1, {r_full}]")
    tops = lra_to_topsvd(u_fac, t_fac, v_fac, r_full, flops=flops, warn=False)
    tops = truncate_svd(tops, rho) if tops.rank > rho else tops
    lra2 = LRA2(X=tops.U * tops.sigma, Y=tops.V.conj().T.copy())
    return lra2, tops
