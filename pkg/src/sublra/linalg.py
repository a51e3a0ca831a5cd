"""Dense linear-algebra kernels used throughout the package.

Everything here is built from scratch on top of plain numpy array
arithmetic: a one-sided Jacobi SVD, Householder QR with classical column
pivoting, truncated pseudoinversion, norm estimation by power iteration,
Frobenius tail norms, and an orthogonal-Procrustes subspace distance.
The routines target desk-scale matrices (dimensions up to a few thousand)
and favour transparent, testable behaviour over LAPACK-grade performance.

Matrices are plain ``numpy.ndarray`` objects, real ``float64`` or complex
``complex128``, in the usual row-major layout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._jacobi import onesided_jacobi

__all__ = [
    "ConvergenceError",
    "RankDeficientError",
    "FlopCounter",
    "TopSVD",
    "QrpFactorization",
    "NormEstimate",
    "svd",
    "qrp",
    "truncate_svd",
    "pinv_trunc",
    "norms",
    "tail_norm",
    "subspace_distance",
    "kahan_matmul",
]

# Iteration caps and tolerances for the iterative kernels.
JACOBI_MAX_SWEEPS = 60
JACOBI_OFF_TOL = 1e-14
POWER_MAX_ITER = 300
POWER_TOL = 1e-10
RANK_TOL = 1e-12
QRP_NORM_REFRESH = 16


class ConvergenceError(RuntimeError):
    """An iterative kernel hit its iteration cap before converging."""


class RankDeficientError(RuntimeError):
    """A factorization target was numerically rank deficient."""


class FlopCounter:
    """Accumulates floating-point operation estimates across kernels.

    The counts are analytic models of the work each routine performs
    (e.g. ``2abc`` for an ``a x b`` times ``b x c`` product), which makes
    cost assertions reproducible across platforms.
    """

    def __init__(self):
        self.total = 0

    def add(self, n):
        self.total += int(n)

    def __repr__(self):
        return f"FlopCounter(total={self.total})"


def _as_matrix(a, who):
    a = np.asarray(a)
    if a.ndim != 2:
        raise ValueError(f"{who}: expected a 2-d array, got ndim={a.ndim}")
    if a.size == 0:
        raise ValueError(f"{who}: empty matrix")
    if not np.issubdtype(a.dtype, np.number):
        raise ValueError(f"{who}: non-numeric dtype {a.dtype}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{who}: matrix contains non-finite entries")
    if np.iscomplexobj(a):
        return a.astype(np.complex128, copy=False)
    return a.astype(np.float64, copy=False)


def fro_norm(a):
    """Frobenius norm by direct summation of squared magnitudes."""
    a = np.asarray(a)
    return float(np.sqrt((np.abs(a) ** 2).sum()))


@dataclass
class TopSVD:
    """Compact top singular value decomposition ``A ~ U @ diag(sigma) @ V^H``.

    ``U`` is m x r and ``V`` is n x r, both with orthonormal columns;
    ``sigma`` is nonnegative and nonincreasing.
    """

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    @property
    def rank(self):
        return int(self.sigma.shape[0])

    def matrix(self):
        """Densify the factored approximation (audit/diagnostic use)."""
        return (self.U * self.sigma) @ self.V.conj().T


@dataclass
class QrpFactorization:
    """Column-pivoted QR: ``A[:, perm] ~ Q @ R``.

    ``Q`` has orthonormal columns (m x r, r = min(m, n)), ``R`` is upper
    triangular r x n, ``perm`` is the column permutation as an index
    vector, and ``numrank`` is the largest i with
    ``|R[i, i]| > tol * |R[0, 0]|`` (1-based count).
    """

    Q: np.ndarray
    R: np.ndarray
    perm: np.ndarray
    numrank: int


class NormEstimate(NamedTuple):
    frobenius: float
    spectral: float
    converged: bool


def _fill_orthonormal(u, invalid):
    """Replace the flagged columns of ``u`` with an orthonormal completion.

    Valid columns are assumed orthonormal already.  Candidates are drawn
    from the standard basis, picking at each step the coordinate vector
    with the smallest projection onto the current column set (largest
    residual), then orthogonalizing twice for stability.
    """
    m = u.shape[0]
    valid = [j for j in range(u.shape[1]) if j not in invalid]
    for j in invalid:
        basis = u[:, valid] if valid else np.zeros((m, 0), dtype=u.dtype)
        # residual^2 of e_i against span(basis) is 1 - ||basis[i, :]||^2
        proj = (np.abs(basis) ** 2).sum(axis=1)
        i = int(np.argmin(proj))
        v = np.zeros(m, dtype=u.dtype)
        v[i] = 1.0
        for _ in range(2):
            if valid:
                v = v - basis @ (basis.conj().T @ v)
        nv = fro_norm(v)
        if nv == 0.0:
            raise ConvergenceError("orthonormal completion failed")
        u[:, j] = v / nv
        valid.append(j)


def svd(a, flops=None):
    """Compact SVD by one-sided Jacobi with cyclic sweeps.

    Parameters
    ----------
    a : (m, n) array
        Real or complex matrix.
    flops : FlopCounter, optional
        Accumulates an analytic operation count for the sweeps performed.

    Returns
    -------
    TopSVD
        Full compact factorization with r = min(m, n) columns; zero
        singular values get orthonormal filler directions so U and V
        always have orthonormal columns.

    Raises
    ------
    ConvergenceError
        If the sweep cap is hit before all column pairs are orthogonal.
    """
    a = _as_matrix(a, "svd")
    m, n = a.shape
    if m < n:
        s = svd(a.conj().T, flops=flops)
        return TopSVD(U=s.V, sigma=s.sigma, V=s.U)
    fro = fro_norm(a)
    # always copy: a.T of a Fortran-ordered or transposed-view input can be
    # C-contiguous already, and the Jacobi kernel works in place
    bt = np.array(a.T, order="C", copy=True)
    vt = np.eye(n, dtype=a.dtype)
    abs_tol = JACOBI_OFF_TOL * fro * fro
    sweeps, rotations, visits, converged = onesided_jacobi(
        bt, vt, JACOBI_MAX_SWEEPS, JACOBI_OFF_TOL, abs_tol
    )
    if not converged:
        raise ConvergenceError(
            f"one-sided Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps "
            f"({m}x{n} input)"
        )
    if flops is not None:
        flops.add(visits * 6 * m + rotations * 6 * (m + n))
    sig = np.sqrt((np.abs(bt) ** 2).sum(axis=1))
    order = np.argsort(-sig, kind="stable")
    sig = sig[order]
    bt = bt[order]
    vt = vt[order]
    u = np.empty((m, n), dtype=a.dtype)
    invalid = []
    # Columns whose norm is at the level of the accumulated rotation
    # roundoff (a few hundred ulps of ||A||_F) carry no direction
    # information: normalizing them would yield junk vectors that are not
    # orthogonal to the dominant columns.  Such values are reported as
    # exact zeros and their U columns filled with an orthonormal
    # completion.
    floor = fro * RANK_TOL
    for j in range(n):
        if sig[j] > floor:
            u[:, j] = bt[j] / sig[j]
        else:
            invalid.append(j)
            u[:, j] = 0.0
            sig[j] = 0.0
    if invalid:
        _fill_orthonormal(u, invalid)
    return TopSVD(U=u, sigma=sig, V=vt.T.copy())


def qrp(a, tol=RANK_TOL, flops=None):
    """Householder QR with classical column pivoting.

    Pivots on the largest remaining column norm; norms are downdated in
    place and recomputed from scratch every ``QRP_NORM_REFRESH`` steps to
    keep cancellation drift in check.

    Parameters
    ----------
    a : (m, n) array
    tol : float
        Relative diagonal threshold used for the numerical rank report.
    flops : FlopCounter, optional

    Returns
    -------
    QrpFactorization
    """
    a = _as_matrix(a, "qrp")
    m, n = a.shape
    r = min(m, n)
    R = a.copy()
    perm = np.arange(n)
    norms2 = (np.abs(R) ** 2).sum(axis=0)
    reflectors = []
    work = 0
    for k in range(r):
        if k > 0 and k % QRP_NORM_REFRESH == 0:
            norms2[k:] = (np.abs(R[k:, k:]) ** 2).sum(axis=0)
        j = k + int(np.argmax(norms2[k:]))
        if j != k:
            R[:, [k, j]] = R[:, [j, k]]
            perm[[k, j]] = perm[[j, k]]
            norms2[[k, j]] = norms2[[j, k]]
        x = R[k:, k]
        xn = fro_norm(x)
        if xn == 0.0:
            norms2[k] = 0.0
            continue
        # Reflection with the cancellation-free sign choice: v = x + phase(x0)*||x||*e1.
        x0 = x[0]
        phase = x0 / abs(x0) if abs(x0) > 0 else 1.0
        alpha = -phase * xn
        v = x.copy()
        v[0] -= alpha
        vn2 = float((np.abs(v) ** 2).sum())
        beta = 2.0 / vn2
        w = v.conj() @ R[k:, k:]
        R[k:, k:] -= beta * np.outer(v, w)
        R[k, k] = alpha
        R[k + 1 :, k] = 0.0
        reflectors.append((k, v, beta))
        work += 4 * (m - k) * (n - k)
        if k + 1 < n:
            norms2[k + 1 :] -= np.abs(R[k, k + 1 :]) ** 2
            np.clip(norms2[k + 1 :], 0.0, None, out=norms2[k + 1 :])
        norms2[k] = 0.0
    q = np.eye(m, r, dtype=a.dtype)
    for k, v, beta in reversed(reflectors):
        q[k:, :] -= beta * np.outer(v, v.conj() @ q[k:, :])
        work += 4 * (m - k) * r
    if flops is not None:
        flops.add(work)
    Rtri = np.triu(R[:r, :])
    d = np.abs(np.diag(Rtri))
    if r == 0 or d[0] == 0.0:
        numrank = 0
    else:
        above = np.nonzero(d > tol * d[0])[0]
        numrank = int(above[-1]) + 1 if above.size else 0
    return QrpFactorization(Q=q, R=Rtri, perm=perm, numrank=numrank)


def truncate_svd(s, rho):
    """Keep the leading ``rho`` singular triplets of a TopSVD.

    ``rho`` must be a positive integer; asking for at least the existing
    rank returns the input unchanged (truncation at full rank is the
    identity operation).
    """
    if rho < 1:
        raise ValueError(f"truncate_svd: rho must be a positive integer, got {rho}")
    if rho >= s.rank:
        return s
    return TopSVD(U=s.U[:, :rho].copy(), sigma=s.sigma[:rho].copy(), V=s.V[:, :rho].copy())


def pinv_trunc(g, rho, cutoff=RANK_TOL, flops=None):
    """Rank-``rho`` truncated Moore-Penrose pseudoinverse.

    Singular values at or below ``cutoff * sigma_1`` are dropped along
    with anything past the first ``rho``.

    Raises
    ------
    RankDeficientError
        If every singular value falls below the cutoff
        (numerically zero generator).
    """
    g = _as_matrix(g, "pinv_trunc")
    if rho < 1:
        raise ValueError(f"pinv_trunc: rho must be >= 1, got {rho}")
    s = svd(g, flops=flops)
    keep = int(min(rho, s.rank))
    sig = s.sigma[:keep]
    good = sig > cutoff * s.sigma[0]
    k = int(np.count_nonzero(good))
    if k == 0:
        raise RankDeficientError("numerically zero generator")
    return (s.V[:, :k] / s.sigma[:k]) @ s.U[:, :k].conj().T


def norms(a, flops=None):
    """Frobenius norm plus spectral-norm estimate by power iteration.

    The spectral estimate uses the alternating ``A``/``A^H`` power method
    with a seed-fixed start vector; on hitting the iteration cap the last
    Rayleigh estimate is returned with ``converged=False``.
    """
    a = _as_matrix(a, "norms")
    m, n = a.shape
    fro = fro_norm(a)
    if fro == 0.0:
        return NormEstimate(0.0, 0.0, True)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=0xA3C59, spawn_key=(m, n)))
    x = rng.standard_normal(n).astype(a.dtype)
    x /= fro_norm(x)
    sest = 0.0
    redraws = 0
    for it in range(POWER_MAX_ITER):
        y = a @ x
        ny = fro_norm(y)
        if ny == 0.0:
            if redraws >= 1:
                return NormEstimate(fro, 0.0, False)
            x = rng.standard_normal(n).astype(a.dtype)
            x /= fro_norm(x)
            redraws += 1
            continue
        z = a.conj().T @ y
        nz = fro_norm(z)
        if flops is not None:
            flops.add(4 * m * n)
        snew = ny  # Rayleigh quotient sqrt(x^H A^H A x) with unit x
        if nz == 0.0:
            return NormEstimate(fro, snew, True)
        x = z / nz
        if abs(snew - sest) <= POWER_TOL * snew:
            return NormEstimate(fro, snew, True)
        sest = snew
    return NormEstimate(fro, sest, False)


def tail_norm(sigma, rho):
    """Frobenius tail ``sqrt(sum_{j >= rho} sigma_j^2)`` (0-based index).

    ``rho = 0`` gives the norm of the whole spectrum; ``rho >= len`` gives 0.
    This is the optimal rank-``rho`` Frobenius approximation error of a
    matrix with singular values ``sigma``.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.ndim != 1:
        raise ValueError("tail_norm: sigma must be a vector")
    if rho < 0:
        raise ValueError(f"tail_norm: rho must be nonnegative, got {rho}")
    if rho >= sigma.shape[0]:
        return 0.0
    return float(np.sqrt((sigma[rho:] ** 2).sum()))


def subspace_distance(b1, b2):
    """Orthogonal-Procrustes distance ``min_Q ||B1 @ Q - B2||_F``.

    Both arguments must have orthonormal columns of the same shape; the
    minimum over unitary Q has the closed form
    ``sqrt(2r - 2 * sum of singular values of B1^H B2)``.
    """
    b1 = _as_matrix(b1, "subspace_distance")
    b2 = _as_matrix(b2, "subspace_distance")
    if b1.shape != b2.shape:
        raise ValueError(
            f"subspace_distance: shape mismatch {b1.shape} vs {b2.shape}"
        )
    r = b1.shape[1]
    for b in (b1, b2):
        g = b.conj().T @ b
        if fro_norm(g - np.eye(r)) > 1e-8 * max(1.0, math.sqrt(r)):
            raise ValueError("subspace_distance: columns are not orthonormal")
    sig = svd(b1.conj().T @ b2).sigma
    d2 = 2.0 * r - 2.0 * float(sig.sum())
    return float(np.sqrt(max(d2, 0.0)))


def kahan_matmul(a, b):
    """Matrix product with compensated summation over the inner axis.

    Uses the Neumaier variant of Kahan's running compensation, which also
    recovers the low-order bits when an incoming term is larger than the
    running sum — the pattern produced by catastrophic cancellation of
    large intermediate summands.  Slower than ``a @ b`` by the inner
    dimension's worth of vector passes, but keeps the inner accumulation
    near one ulp, which matters when small residual corrections are
    subtracted from nearly equal quantities.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"kahan_matmul: incompatible shapes {a.shape} x {b.shape}")
    dtype = np.result_type(a.dtype, b.dtype)
    out = np.zeros((a.shape[0], b.shape[1]), dtype=dtype)
    comp = np.zeros_like(out)
    for t in range(a.shape[1]):
        x = np.outer(a[:, t], b[t, :])
        tmp = out + x
        sum_bigger = np.abs(out) >= np.abs(x)
        comp += np.where(sum_bigger, (out - tmp) + x, (x - tmp) + out)
        out = tmp
    return out + comp
