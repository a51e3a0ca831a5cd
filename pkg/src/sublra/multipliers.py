"""Structured sparse test multipliers for sublinear sketching.

A sketching multiplier here is a short pipeline of sparse square stages
(sign/phase diagonal, butterfly levels, permutations, bidiagonal factors,
Givens rotations, short Householder reflectors) followed by row sampling.
Shallow pipelines keep every realized row sparse — a depth-``d``
butterfly cascade gives rows with at most ``2**d`` nonzeros — so applying
the multiplier to a matrix only needs the rows (or columns) in its
support.  That locality is what makes the sketch sublinear, and it is
enforced by reading the input exclusively through a
:class:`~sublra.oracle.MatrixOracle`.

Conventions
-----------
Every :class:`SparseMultiplier` stores a *base* pipeline acting on
``C^n``: stages applied in list order, then sampling of ``k`` indices
with an optional scalar.  A ``side="left"`` multiplier is the base
operator itself (``k x n``, applied as ``F @ M`` against rows of ``M``);
a ``side="right"`` multiplier is its transpose (``n x k``, applied as
``M @ H`` against columns).  One stage vocabulary serves both sides.

Flop accounting is a cost model, not instruction counting: each stage
declares a per-vector cost (butterfly level: exactly ``n``; diagonal:
``n``; permutation: free; bidiagonal: ``3n - 2``; Givens: 6; Householder
on support ``s``: ``4s``), and oracle application charges
``2 * nnz(realized) * (free dimension)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .linalg import FlopCounter

__all__ = [
    "Diagonal",
    "Butterfly",
    "Permutation",
    "Bidiagonal",
    "GivensRotation",
    "HouseholderReflector",
    "SparseMultiplier",
    "gen_abridged_hadamard",
    "gen_abridged_fourier",
    "gen_bidiag_perm",
    "gen_orthogonal_partial",
    "gen_sample",
    "gen_gaussian",
    "apply_left",
    "apply_right",
    "densify",
]

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


# ---------------------------------------------------------------------------
# stages
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Diagonal:
    """Entrywise scaling by a length-n vector (sign flips, unit phases)."""

    values: np.ndarray

    def as_sparse(self, n):
        if self.values.shape != (n,):
            raise ValueError("diagonal stage has wrong length")
        return sp.diags(self.values, format="csr")

    def cost(self, n):
        return n

    def apply_dense(self, x):
        return self.values[:, None] * x


@dataclass(frozen=True)
class Butterfly:
    """One level of 2x2 mixing at a fixed stride.

    Pairs indices ``(i, i + stride)`` for every ``i`` whose stride bit is
    clear and maps ``(u, v) -> scale * (u + w v, u - w v)`` where ``w`` is
    the per-pair twiddle (``None`` means all-ones, the Walsh–Hadamard
    case).  Cost model: exactly ``n`` flops per vector per level.
    """

    stride: int
    twiddle: Optional[np.ndarray] = None
    scale: float = _INV_SQRT2

    def _pairs(self, n):
        idx = np.arange(n)
        top = idx[(idx & self.stride) == 0]
        return top, top + self.stride

    def as_sparse(self, n):
        if not (1 <= self.stride < n) or n % (2 * self.stride) != 0:
            raise ValueError("butterfly stride incompatible with dimension")
        i1, i2 = self._pairs(n)
        w = np.ones(i1.size) if self.twiddle is None else self.twiddle
        s = self.scale
        rows = np.concatenate([i1, i1, i2, i2])
        cols = np.concatenate([i1, i2, i1, i2])
        vals = np.concatenate([s * np.ones(i1.size), s * w,
                               s * np.ones(i1.size), -s * w])
        return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))

    def cost(self, n):
        return n

    def apply_dense(self, x):
        n = x.shape[0]
        i1, i2 = self._pairs(n)
        u = x[i1]
        v = x[i2] if self.twiddle is None else self.twiddle[:, None] * x[i2]
        out = np.empty((n, x.shape[1]), dtype=np.promote_types(x.dtype, v.dtype))
        out[i1] = self.scale * (u + v)
        out[i2] = self.scale * (u - v)
        return out


@dataclass(frozen=True)
class Permutation:
    """Row permutation: ``(P x)[i] = x[perm[i]]``.  Free in the cost model."""

    perm: np.ndarray

    def as_sparse(self, n):
        if sorted(self.perm.tolist()) != list(range(n)):
            raise ValueError("permutation stage is not a permutation of range(n)")
        return sp.csr_matrix(
            (np.ones(n), (np.arange(n), self.perm)), shape=(n, n)
        )

    def cost(self, n):
        return 0

    def apply_dense(self, x):
        return x[self.perm]


@dataclass(frozen=True)
class Bidiagonal:
    """Upper bidiagonal factor: main diagonal plus first superdiagonal."""

    diag: np.ndarray
    sup: np.ndarray

    def as_sparse(self, n):
        if self.diag.shape != (n,) or self.sup.shape != (n - 1,):
            raise ValueError("bidiagonal stage bands have wrong length")
        return sp.diags([self.diag, self.sup], [0, 1], format="csr")

    def cost(self, n):
        return 3 * n - 2

    def apply_dense(self, x):
        out = self.diag[:, None] * x
        out[:-1] += self.sup[:, None] * x[1:]
        return out


@dataclass(frozen=True)
class GivensRotation:
    """Plane rotation acting on coordinates ``(i, j)``.

    Maps ``(x_i, x_j) -> (x_i cos t - x_j sin t, x_i sin t + x_j cos t)``.
    """

    i: int
    j: int
    theta: float

    def as_sparse(self, n):
        if not (0 <= self.i < n and 0 <= self.j < n and self.i != self.j):
            raise ValueError("rotation plane indices out of range")
        c, s = math.cos(self.theta), math.sin(self.theta)
        g = sp.eye(n, format="lil")
        g[self.i, self.i] = c
        g[self.i, self.j] = -s
        g[self.j, self.i] = s
        g[self.j, self.j] = c
        return g.tocsr()

    def cost(self, n):
        return 6

    def apply_dense(self, x):
        c, s = math.cos(self.theta), math.sin(self.theta)
        out = x.copy()
        out[self.i] = c * x[self.i] - s * x[self.j]
        out[self.j] = s * x[self.i] + c * x[self.j]
        return out


@dataclass(frozen=True)
class HouseholderReflector:
    """Reflection ``I - 2 v v^T`` with ``v`` supported on a few coordinates."""

    idx: np.ndarray
    v: np.ndarray

    def as_sparse(self, n):
        s = self.idx.size
        if self.v.shape != (s,):
            raise ValueError("reflector direction has wrong length")
        h = sp.eye(n, format="lil")
        block = np.eye(s) - 2.0 * np.outer(self.v, self.v)
        h[np.ix_(self.idx, self.idx)] = block
        return h.tocsr()

    def cost(self, n):
        return 4 * self.idx.size

    def apply_dense(self, x):
        out = x.copy()
        sub = x[self.idx]
        out[self.idx] = sub - 2.0 * np.outer(self.v, self.v @ sub)
        return out


# ---------------------------------------------------------------------------
# the multiplier itself
# ---------------------------------------------------------------------------


@dataclass
class SparseMultiplier:
    """Sampled product of sparse stages, tagged with side and provenance.

    Attributes
    ----------
    n : ambient dimension the stages act on.
    stages : applied to a vector in list order (``stages[0]`` first).
    sampler : indices of the ``k`` sampled pipeline outputs.
    sample_scale : scalar applied after sampling (e.g. ``sqrt(n/k)``).
    side : ``"left"`` (shape ``k x n``) or ``"right"`` (shape ``n x k``).
    descriptor : JSON-ready provenance (family, sizes, seed, flags).
    flops : structured-application cost accumulated by ``apply_*``.
    """

    n: int
    stages: list
    sampler: np.ndarray
    sample_scale: float
    side: str
    descriptor: dict
    flops: int = 0
    _realized: Optional[sp.csr_matrix] = field(default=None, repr=False)

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        self.sampler = np.asarray(self.sampler, dtype=np.int64)
        k = self.sampler.size
        if k < 1 or self.sampler.min() < 0 or self.sampler.max() >= self.n:
            raise ValueError("sampler indices out of range")
        if np.unique(self.sampler).size != k:
            raise ValueError("sampler indices must be distinct")

    @property
    def k(self):
        return int(self.sampler.size)

    @property
    def shape(self):
        return (self.k, self.n) if self.side == "left" else (self.n, self.k)

    def base_matrix(self):
        """Realized ``k x n`` sampled pipeline as CSR (cached)."""
        if self._realized is None:
            k = self.k
            samp = sp.csr_matrix(
                (np.full(k, self.sample_scale), (np.arange(k), self.sampler)),
                shape=(k, self.n),
            )
            # operator = sampler . stage_last . ... . stage_first
            for stage in reversed(self.stages):
                samp = samp @ stage.as_sparse(self.n)
            samp.eliminate_zeros()
            samp.sort_indices()
            self._realized = samp
        return self._realized

    def support(self):
        """Sorted ambient indices the realized operator depends on."""
        return np.unique(self.base_matrix().indices)

    def max_row_nnz(self):
        base = self.base_matrix()
        return int(np.diff(base.indptr).max(initial=0))

    def vector_cost(self):
        """Cost-model flops for one pipeline application to one vector."""
        total = sum(st.cost(self.n) for st in self.stages)
        if self.sample_scale != 1.0:
            total += self.k
        return total

    def apply_dense(self, x, flops=None):
        """Base pipeline applied to dense columns ``x`` (``n x c``)."""
        x = np.asarray(x)
        squeeze = x.ndim == 1
        if squeeze:
            x = x[:, None]
        if x.shape[0] != self.n:
            raise ValueError("dimension mismatch in pipeline application")
        for stage in self.stages:
            x = stage.apply_dense(x)
        out = x[self.sampler]
        if self.sample_scale != 1.0:
            out = self.sample_scale * out
        cost = self.vector_cost() * x.shape[1]
        self.flops += cost
        if flops is not None:
            flops.add(cost)
        return out[:, 0] if squeeze else out


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def _check_pow2(n):
    d = int(n).bit_length() - 1
    if n <= 0 or (1 << d) != n:
        raise ValueError(f"dimension {n} is not a power of two")
    return d


def _sample_indices(rng, n, k):
    if not 1 <= k <= n:
        raise ValueError(f"sample size k={k} outside [1, {n}]")
    return np.sort(rng.choice(n, size=k, replace=False))


def _finish(n, stages, sampler, scale, side, descriptor):
    return SparseMultiplier(
        n=n,
        stages=stages,
        sampler=sampler,
        sample_scale=scale,
        side=side,
        descriptor=descriptor,
    )


def gen_abridged_hadamard(n, d, k, seed=None, *, side="left", diagonal=None,
                          permute=False, scaled=True):
    """Depth-``d`` abridged randomized Walsh–Hadamard multiplier.

    Random sign diagonal, then the ``d`` coarsest Walsh–Hadamard butterfly
    levels (strides ``n/2, ..., n/2**d``, each scaled ``2**-0.5``), an
    optional random permutation, and uniform sampling of ``k`` outputs
    scaled by ``sqrt(n/k)``.  Rows of the realized ``k x n`` operator have
    exactly ``2**d`` nonzeros; full depth reproduces the orthonormal
    Walsh–Hadamard transform.

    Test hooks: ``diagonal`` overrides the random signs (e.g. all-ones),
    ``permute`` inserts the permutation stage, ``scaled=False`` drops the
    ``sqrt(n/k)`` factor, and ``k = n`` degenerates sampling to identity.
    """
    depth = _check_pow2(n)
    if not 0 <= d <= depth:
        raise ValueError(f"butterfly depth d={d} outside [0, {depth}]")
    rng = _rng(seed)
    if diagonal is None:
        values = rng.integers(0, 2, size=n).astype(np.float64) * 2.0 - 1.0
    else:
        values = np.asarray(diagonal, dtype=np.float64)
        if values.shape != (n,):
            raise ValueError("diagonal override has wrong length")
    stages = [Diagonal(values)]
    # recursion peels off the coarsest split first, so application order
    # runs from stride n/2**d up to n/2
    for level in range(d, 0, -1):
        stages.append(Butterfly(stride=n >> level))
    if permute:
        stages.append(Permutation(rng.permutation(n)))
    sampler = _sample_indices(rng, n, k)
    scale = math.sqrt(n / k) if scaled else 1.0
    return _finish(
        n, stages, sampler, scale, side,
        {"family": "abridged_hadamard", "n": n, "d": d, "k": k,
         "permute": bool(permute), "scaled": bool(scaled)},
    )


def _bit_reverse_permutation(n):
    bits = _check_pow2(n)
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def gen_abridged_fourier(n, d, k, seed=None, *, side="left", diagonal=None,
                         permute=False, bit_reversal=None, scaled=True):
    """Depth-``d`` abridged randomized Fourier multiplier (complex).

    Random unit-phase diagonal, then the ``d`` decimation-in-time
    butterfly stages nearest the input (strides ``1, 2, ..., 2**(d-1)``
    with the matching twiddle factors, each scaled ``2**-0.5``), and
    uniform sampling scaled ``sqrt(n/k)``.  The bit-reversal permutation
    belongs to the full transform; by default it is applied exactly when
    ``d = log2 n``, in which case the unsampled pipeline with identity
    diagonal is the unitary DFT.
    """
    depth = _check_pow2(n)
    if not 0 <= d <= depth:
        raise ValueError(f"butterfly depth d={d} outside [0, {depth}]")
    rng = _rng(seed)
    if diagonal is None:
        values = np.exp(2j * np.pi * rng.random(n))
    else:
        values = np.asarray(diagonal, dtype=np.complex128)
        if values.shape != (n,):
            raise ValueError("diagonal override has wrong length")
    if bit_reversal is None:
        bit_reversal = d == depth
    stages = [Diagonal(values)]
    if bit_reversal:
        stages.append(Permutation(_bit_reverse_permutation(n)))
    for s in range(1, d + 1):
        stride = 1 << (s - 1)
        i1 = np.arange(n)
        i1 = i1[(i1 & stride) == 0]
        j = i1 % (2 * stride)
        tw = np.exp(-2j * np.pi * j / (2 * stride))
        stages.append(Butterfly(stride=stride, twiddle=tw))
    if permute:
        stages.append(Permutation(rng.permutation(n)))
    sampler = _sample_indices(rng, n, k)
    scale = math.sqrt(n / k) if scaled else 1.0
    return _finish(
        n, stages, sampler, scale, side,
        {"family": "abridged_fourier", "n": n, "d": d, "k": k,
         "bit_reversal": bool(bit_reversal), "permute": bool(permute),
         "scaled": bool(scaled)},
    )


def gen_bidiag_perm(n, factors, k, seed=None, *, side="left",
                    identity_permutations=False):
    """Product of random upper-bidiagonal factors and permutations.

    ``factors`` pairs, each a standard-normal bidiagonal stage followed by
    a random permutation, then uniform sampling of ``k`` outputs (no
    rescaling — the family is not orthogonal).  Applying one pair to a
    vector costs ``3n - 2`` model flops, so a ``factors``-deep pipeline
    stays within ``factors * 3n``.
    """
    if n < 2:
        raise ValueError("bidiagonal family needs n >= 2")
    if factors < 1:
        raise ValueError("factors must be >= 1")
    rng = _rng(seed)
    stages = []
    for _ in range(factors):
        stages.append(
            Bidiagonal(rng.standard_normal(n), rng.standard_normal(n - 1))
        )
        perm = np.arange(n) if identity_permutations else rng.permutation(n)
        stages.append(Permutation(perm))
    sampler = _sample_indices(rng, n, k)
    return _finish(
        n, stages, sampler, 1.0, side,
        {"family": "bidiag_perm", "n": n, "factors": factors, "k": k,
         "identity_permutations": bool(identity_permutations)},
    )


def gen_orthogonal_partial(n, kind, i, k, seed=None, *, side="left",
                           scale=False, permute=False):
    """First ``k`` rows of a partial product of sparse orthogonal factors.

    ``kind="givens"`` draws ``i`` random plane rotations, ``kind="householder"``
    draws ``i`` reflectors supported on at most four coordinates; the
    multiplier is the leading ``k`` rows of their product.  Optional
    preprocessing inserts a random sign diagonal (``scale``) and a random
    permutation (``permute``) before the rotations.  With ``i = 0`` and
    ``k = n`` the result is the identity, which is reported by a warning.
    """
    if not 1 <= k <= n:
        raise ValueError(f"sample size k={k} outside [1, {n}]")
    if i < 0:
        raise ValueError("number of factors must be >= 0")
    rng = _rng(seed)
    stages = []
    if scale:
        stages.append(
            Diagonal(rng.integers(0, 2, size=n).astype(np.float64) * 2.0 - 1.0)
        )
    if permute:
        stages.append(Permutation(rng.permutation(n)))
    factors = []
    if kind == "givens":
        if n < 2 and i > 0:
            raise ValueError("rotations need n >= 2")
        for _ in range(i):
            a, b = rng.choice(n, size=2, replace=False)
            factors.append(GivensRotation(int(min(a, b)), int(max(a, b)),
                                          float(rng.uniform(0.0, 2.0 * np.pi))))
    elif kind == "householder":
        supp = min(4, n)
        for _ in range(i):
            idx = np.sort(rng.choice(n, size=supp, replace=False))
            v = rng.standard_normal(supp)
            v /= np.linalg.norm(v)
            factors.append(HouseholderReflector(idx, v))
    else:
        raise ValueError(f"unknown factor kind {kind!r}")
    # partial product Q_1 ... Q_i applied right-to-left: Q_i acts first
    stages.extend(reversed(factors))
    if i == 0 and k == n and not stages:
        warnings.warn("identity multiplier: no factors and full sampling")
    sampler = np.arange(k)
    return _finish(
        n, stages, sampler, 1.0, side,
        {"family": "orthogonal_partial", "n": n, "kind": kind, "i": i, "k": k,
         "scale": bool(scale), "permute": bool(permute)},
    )


def gen_sample(n, k, seed=None, *, side="left", scaled=False):
    """Plain uniform row sampler (depth-0, unit diagonal).

    ``k = n`` gives the identity; with ``scaled=True`` outputs carry the
    unbiasedness factor ``sqrt(n/k)``.
    """
    rng = _rng(seed)
    sampler = _sample_indices(rng, n, k)
    scale = math.sqrt(n / k) if scaled else 1.0
    return _finish(
        n, [], sampler, scale, side,
        {"family": "sample", "n": n, "k": k, "scaled": bool(scaled)},
    )


def gen_gaussian(rows, cols, seed=None):
    """Dense i.i.d. standard normal baseline multiplier (no sparsity)."""
    if rows < 1 or cols < 1:
        raise ValueError("gaussian multiplier needs positive dimensions")
    return _rng(seed).standard_normal((rows, cols))


# ---------------------------------------------------------------------------
# oracle application
# ---------------------------------------------------------------------------


def _charge(mult, base, free_dim, flops):
    cost = 2 * base.nnz * free_dim
    mult.flops += cost
    if flops is not None:
        flops.add(cost)


def apply_left(f, oracle, flops=None):
    """Compute ``F @ M`` reading only the rows of ``M`` in ``F``'s support."""
    if f.side != "left":
        raise ValueError("apply_left requires a left-side multiplier")
    m, n = oracle.shape
    if f.n != m:
        raise ValueError(
            f"dimension mismatch: multiplier acts on C^{f.n}, matrix has {m} rows"
        )
    base = f.base_matrix()
    support = np.unique(base.indices)
    block = oracle.read_block(support, None)
    out = base[:, support] @ block
    _charge(f, base, n, flops)
    return np.ascontiguousarray(out)


def apply_right(h, oracle, flops=None):
    """Compute ``M @ H`` reading only the columns of ``M`` in ``H``'s support."""
    if h.side != "right":
        raise ValueError("apply_right requires a right-side multiplier")
    m, n = oracle.shape
    if h.n != n:
        raise ValueError(
            f"dimension mismatch: multiplier acts on C^{h.n}, matrix has {n} columns"
        )
    base = h.base_matrix()
    support = np.unique(base.indices)
    block = oracle.read_block(None, support)
    # M @ H = M @ base.T restricted to the support columns of M
    out = (base[:, support] @ block.T).T
    _charge(h, base, m, flops)
    return np.ascontiguousarray(out)


def densify(mult):
    """Dense realized operator: ``k x n`` for left side, ``n x k`` for right."""
    dense = mult.base_matrix().toarray()
    return dense if mult.side == "left" else dense.T.copy()
