"""Iterative refinement of low-rank approximations, and homotopy continuation.

Three refinement recipes with different read/robustness trade-offs:

* **Spectral re-sketch** (:func:`refine_deterministic`): sketch again
  with the current singular factors as test matrices.  Deterministic and
  very accurate, but the dense factors read the whole input; the
  ``superfast`` variant substitutes oversampled structured multipliers
  to stay sublinear.

* **Leverage-score cross** (:func:`refine_leverage`): sample rows and
  columns with probabilities from the current factors' leverage scores
  and build a rescaled cross whose importance weights are folded into
  the nucleus, so the stored ``C`` and ``R`` remain raw input entries.

* **Residual correction** (:func:`refine_residual`): reuse the *initial*
  sketch — zero new reads — by subtracting the sketch of the current
  approximation in factored form (compensated products), reconstructing
  a rank-``2 rho`` correction from the residual sketch, and recombining.

Homotopy continuation (:func:`homotopy_refine`) drives any recipe along
the path ``(1 - t) * start + t * input``, choosing each step from a
free spectral-gap proxy and shrinking the tracked error by ``(1 - s)``
per step.  The path target is blended *in sketch space*, so the
intermediate matrices are never densified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .linalg import (
    RankDeficientError,
    TopSVD,
    fro_norm,
    kahan_matmul,
    truncate_svd,
)
from .multipliers import SparseMultiplier, gen_abridged_hadamard, gen_gaussian
from .sketch import (
    SketchLostError,
    SketchSet,
    lra_to_topsvd,
    nystrom_reconstruct,
    sketch,
)
from .cur import CURDecomp, _strict_nucleus

__all__ = [
    "StepRecord",
    "RefineState",
    "refine_deterministic",
    "leverage_scores",
    "refine_leverage",
    "refine_residual",
    "estimate_residual_fro",
    "init_refine_state",
    "homotopy_refine",
]

MIN_STEP = 0.05
STEP_GAIN = 0.2
STALL_WINDOW = 3
STALL_IMPROVEMENT = 0.01


def _seed_seq(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


@dataclass
class StepRecord:
    """One refinement iteration: its estimates, step length, and reads."""

    iteration: int
    error_estimate: float
    gap_estimate: float
    step: float
    reads: int


@dataclass
class RefineState:
    """Mutable state threaded through refinement iterations.

    ``target`` is the sketch of the input taken once at initialization;
    residual iterations never add reads beyond it.  For continuation,
    ``base_sketch`` caches the same sketch of the *starting* approximation
    and ``path_t`` sets the blend ``(1 - t) * start + t * input`` the
    iteration refines toward (``t = 1`` is plain refinement).
    """

    current: TopSVD
    rho: int
    f: object = None
    h: object = None
    target: Optional[SketchSet] = None
    base_sketch: Optional[tuple] = None
    start: Optional[TopSVD] = None
    gain_f: float = 1.0
    gain_h: float = 1.0
    path_t: float = 1.0
    sigma_next: float = 0.0
    history: list = field(default_factory=list)
    stalled: bool = False
    no_gap: bool = False
    rng: object = None


# ---------------------------------------------------------------------------
# factored-form sketching helpers (no oracle access)
# ---------------------------------------------------------------------------


def _left_apply(f, x):
    """``F @ x`` for a dense tall block ``x`` without densifying ``F``."""
    if isinstance(f, SparseMultiplier):
        return f.base_matrix() @ x
    return f @ x


def _right_apply(y, h):
    """``y @ H`` for a dense wide block ``y`` without densifying ``H``."""
    if isinstance(h, SparseMultiplier):
        return (h.base_matrix() @ y.T).T
    return y @ h


def _sketch_factored(f, h, tops):
    """Sketch ``U diag(s) V^H`` in factored form with compensated products."""
    vh = tops.V.conj().T
    fu = _left_apply(f, tops.U) * tops.sigma
    vh_h = _right_apply(vh, h)
    w = kahan_matmul(fu, vh)
    y = kahan_matmul(tops.U * tops.sigma, vh_h)
    z = kahan_matmul(fu, vh_h)
    return w, y, z


def _multiplier_gain(mult, dim):
    """Mean squared growth ``||F||_F^2 / dim`` of a test multiplier."""
    if isinstance(mult, SparseMultiplier):
        base = mult.base_matrix()
        total = float((np.abs(base.data) ** 2).sum())
    else:
        total = fro_norm(mult) ** 2
    return max(total / dim, np.finfo(float).tiny)


# ---------------------------------------------------------------------------
# recipe 1: spectral re-sketch
# ---------------------------------------------------------------------------


def refine_deterministic(oracle, s, rho, superfast=False, seed=None, depth=3,
                         flops=None):
    """Re-sketch with the current singular factors and reconstruct.

    Uses ``F = U^H`` and ``H = V`` from the rank-``r`` input
    approximation ``s`` as the test matrices — the fixed point of this
    map is any exact factorization, since then ``Z = diag(sigma)`` and
    reconstruction reproduces the input.  Dense factors read the whole
    matrix; with ``superfast=True`` they are replaced by oversampled
    depth-``depth`` structured butterfly sketches (power-of-two
    dimensions required), keeping the refresh sublinear.
    """
    if rho < 1 or rho > s.rank:
        raise ValueError(f"refinement rank rho={rho} outside [1, {s.rank}]")
    m, n = oracle.shape
    if s.U.shape[0] != m or s.V.shape[0] != n:
        raise ValueError("approximation factors do not match the oracle shape")
    if superfast:
        k2, l2 = 4 * rho + 2, 2 * rho + 1
        ss = _seed_seq(seed)
        sf, sh = ss.spawn(2)
        f = gen_abridged_hadamard(m, min(depth, _log2(m)), min(k2, m), sf,
                                  side="left")
        h = gen_abridged_hadamard(n, min(depth, _log2(n)), min(l2, n), sh,
                                  side="right")
    else:
        f = s.U.conj().T
        h = s.V
    sk = sketch(oracle, f, h, flops=flops)
    rec = nystrom_reconstruct(sk, rho, flops=flops)
    return lra_to_topsvd(rec.U, rec.T, rec.V, rho, flops=flops, warn=False)


def _log2(n):
    d = int(n).bit_length() - 1
    if (1 << d) != n:
        raise ValueError(f"superfast refinement needs power-of-two sizes, got {n}")
    return d


# ---------------------------------------------------------------------------
# recipe 2: leverage-score cross
# ---------------------------------------------------------------------------


def leverage_scores(basis):
    """Row sampling probabilities ``||basis[i, :]||^2 / r`` of an orthonormal basis."""
    basis = np.asarray(basis)
    if basis.ndim != 2:
        raise ValueError("leverage scores need a 2-d basis")
    r = basis.shape[1]
    gram = basis.conj().T @ basis
    if fro_norm(gram - np.eye(r)) > 1e-8 * max(1.0, math.sqrt(r)):
        raise ValueError("leverage scores need orthonormal columns")
    p = (np.abs(basis) ** 2).sum(axis=1) / r
    return p / p.sum()


def _mix_if_degenerate(p):
    # a zero score would make its row unsamplable and its weight undefined;
    # blend with the uniform distribution only in that degenerate case
    if np.min(p) <= 0.0:
        p = 0.9 * p + 0.1 / p.size
        p = p / p.sum()
    return p


def refine_leverage(oracle, s, rho, k, l, seed=None, flops=None):
    """Importance-sampled cross refinement of a factored approximation.

    Samples ``k`` rows and ``l`` columns *with replacement* from the
    leverage scores of the current factors, rescales each draw by
    ``1 / sqrt(count * probability)``, and inverts the rescaled generator
    at rank ``rho``.  The scaling matrices are folded into the nucleus —
    ``nucleus = D_c @ pinv_trunc(D_r G D_c, rho) @ D_r`` — so the stored
    ``C`` and ``R`` factors remain raw input entries; for a square
    nonsingular generator this reduces to the canonical inverse.
    """
    if rho < 1 or rho > s.rank:
        raise ValueError(f"refinement rank rho={rho} outside [1, {s.rank}]")
    if k < rho or l < rho:
        raise ValueError(f"sample sizes k={k}, l={l} must be >= rho={rho}")
    m, n = oracle.shape
    rng = np.random.default_rng(seed)
    p_row = _mix_if_degenerate(leverage_scores(s.U))
    p_col = _mix_if_degenerate(leverage_scores(s.V))
    rows = rng.choice(m, size=k, replace=True, p=p_row)
    cols = rng.choice(n, size=l, replace=True, p=p_col)
    w_row = 1.0 / np.sqrt(k * p_row[rows])
    w_col = 1.0 / np.sqrt(l * p_col[cols])
    c = oracle.read_block(None, cols)
    r = oracle.read_block(rows, None)
    g = c[rows, :]
    gw = w_row[:, None] * g * w_col[None, :]
    nucleus = (w_col[:, None] * _strict_nucleus(gw, rho, flops=flops)) * w_row[None, :]
    if flops is not None:
        flops.add(2 * l * k * min(k, l))
    return CURDecomp(row_idx=rows, col_idx=cols, C=c, nucleus=nucleus, R=r,
                     rho=rho)


# ---------------------------------------------------------------------------
# recipe 3: residual correction from the initial sketch
# ---------------------------------------------------------------------------


def init_refine_state(oracle, start, rho, f=None, h=None, seed=None,
                      continuation=False, flops=None):
    """Sketch the input once and set up iterative refinement state.

    Default test matrices are dense Gaussian with the standard
    oversampling ``k = 4 rho + 2``, ``l = 2 rho + 1``; pass structured
    multipliers to keep the initial sketch sublinear.  With
    ``continuation=True`` the sketch of the starting approximation is
    cached in factored form so path targets can be blended later.
    """
    m, n = oracle.shape
    start = truncate_svd(start, rho) if start.rank > rho else start
    ss = _seed_seq(seed)
    sf, sh, s_state = ss.spawn(3)
    if f is None:
        f = gen_gaussian(4 * rho + 2, m, sf)
    if h is None:
        h = gen_gaussian(n, 2 * rho + 1, sh)
    target = sketch(oracle, f, h, flops=flops)
    state = RefineState(
        current=start,
        rho=rho,
        f=f,
        h=h,
        target=target,
        start=start if continuation else None,
        gain_f=_multiplier_gain(f, m),
        gain_h=_multiplier_gain(h, n),
        path_t=0.0 if continuation else 1.0,
        rng=np.random.default_rng(s_state),
    )
    if continuation:
        state.base_sketch = _sketch_factored(f, h, start)
    return state


def _blended_target(state):
    t = state.path_t
    if state.base_sketch is None or t >= 1.0:
        return state.target.W, state.target.Y, state.target.Z
    w0, y0, z0 = state.base_sketch
    return (
        (1.0 - t) * w0 + t * state.target.W,
        (1.0 - t) * y0 + t * state.target.Y,
        (1.0 - t) * z0 + t * state.target.Z,
    )


def refine_residual(oracle, state, step=1.0, flops=None):
    """One residual-correction iteration; reads nothing new.

    Sketches the current approximation in factored form, subtracts it
    from the (possibly path-blended) target sketch, reconstructs a
    rank-``2 rho`` correction from the residual sketch, and recompresses
    the sum back to rank ``rho``.  The iteration also refreshes two free
    diagnostics: a scale-normalized residual proxy
    ``||Z_res|| / sqrt(gain_F * gain_H)`` and the ``rho+1``-th singular
    value of the recombined approximation as a spectral-gap proxy.
    Stagnation (< 1 % proxy improvement across 3 iterations) sets
    ``state.stalled``.
    """
    if state.target is None:
        raise ValueError("state has no target sketch; use init_refine_state")
    before = oracle.reads
    rho = state.rho
    cur = state.current
    wt, yt, zt = _blended_target(state)
    wc, yc, zc = _sketch_factored(state.f, state.h, cur)
    wr, yr, zr = wt - wc, yt - yc, zt - zc

    k, l = zt.shape
    denom = math.sqrt(state.gain_f * state.gain_h)
    scale = fro_norm(zt)
    new = cur
    if fro_norm(zr) > 1e-14 * max(scale, 1.0):
        try:
            corr = nystrom_reconstruct(
                SketchSet(W=wr, Y=yr, Z=zr), min(2 * rho, min(k, l)),
                flops=flops,
            )
            stacked_u = np.hstack([cur.U * cur.sigma, corr.U])
            stacked_v = np.vstack([cur.V.conj().T, corr.V])
            r_cur = cur.rank
            core = np.zeros(
                (r_cur + corr.U.shape[1], r_cur + corr.V.shape[0]),
                dtype=np.result_type(stacked_u.dtype, stacked_v.dtype),
            )
            core[:r_cur, :r_cur] = np.eye(r_cur)
            core[r_cur:, r_cur:] = corr.T
            r_out = min(rho + 1, min(core.shape), stacked_u.shape[1])
            new = lra_to_topsvd(stacked_u, core, stacked_v, r_out,
                                flops=flops, warn=False)
        except (SketchLostError, RankDeficientError):
            new = cur  # residual sketch degenerate: keep the current iterate

    state.sigma_next = float(new.sigma[rho]) if new.rank > rho else 0.0
    state.current = truncate_svd(new, min(rho, new.rank))

    # free error proxy for the *new* iterate, from the core sketch only
    fu = _left_apply(state.f, state.current.U) * state.current.sigma
    vh_h = _right_apply(state.current.V.conj().T, state.h)
    z_after = kahan_matmul(fu, vh_h)
    proxy = fro_norm(zt - z_after) / denom
    sig = state.current.sigma
    gap = float(sig[rho - 1] - state.sigma_next) if sig.size >= rho else 0.0
    state.history.append(
        StepRecord(
            iteration=len(state.history),
            error_estimate=proxy,
            gap_estimate=max(gap, 0.0),
            step=step,
            reads=oracle.reads - before,
        )
    )
    if len(state.history) > STALL_WINDOW:
        now = state.history[-1].error_estimate
        then = state.history[-1 - STALL_WINDOW].error_estimate
        if then > 0.0 and (then - now) < STALL_IMPROVEMENT * then:
            state.stalled = True
    return state


# ---------------------------------------------------------------------------
# scattered-sample residual estimation
# ---------------------------------------------------------------------------


def estimate_residual_fro(oracle, s, samples, seed=None):
    """Unbiased Frobenius-norm estimate of ``M - U diag(sigma) V^H``.

    Samples ``samples`` distinct positions uniformly without
    replacement, reads them through the oracle (counted), and scales the
    summed squared deviations by ``m n / samples``.  ``samples = m * n``
    degenerates to the exact residual norm; reads equal ``samples``.
    """
    m, n = oracle.shape
    if samples < 1:
        raise ValueError("residual estimation needs at least one sample")
    samples = min(int(samples), m * n)
    rng = np.random.default_rng(seed)
    flat = rng.choice(m * n, size=samples, replace=False)
    ii, jj = np.divmod(flat, n)
    vals = oracle.read_entries(ii, jj)
    approx = np.einsum("sr,r,sr->s", s.U[ii], s.sigma, s.V[jj].conj())
    total = float((np.abs(vals - approx) ** 2).sum())
    return math.sqrt(total * (m * n) / samples)


# ---------------------------------------------------------------------------
# homotopy continuation
# ---------------------------------------------------------------------------


def _clamp_step(gap, err):
    if err <= 0.0:
        return 1.0
    return float(min(1.0, max(MIN_STEP, STEP_GAIN * gap / err)))


def _leverage_path_step(oracle, state, flops=None):
    """Leverage-score cross against the blended path target."""
    rho = state.rho
    cur = state.current
    m, n = oracle.shape
    k2, l2 = 4 * rho + 2, 2 * rho + 1
    rng = state.rng if state.rng is not None else np.random.default_rng(0)
    p_row = _mix_if_degenerate(leverage_scores(cur.U))
    p_col = _mix_if_degenerate(leverage_scores(cur.V))
    rows = rng.choice(m, size=min(k2, m), replace=True, p=p_row)
    cols = rng.choice(n, size=min(l2, n), replace=True, p=p_col)
    w_row = 1.0 / np.sqrt(rows.size * p_row[rows])
    w_col = 1.0 / np.sqrt(cols.size * p_col[cols])
    t = state.path_t
    c = oracle.read_block(None, cols)
    r = oracle.read_block(rows, None)
    if state.start is not None and t < 1.0:
        s0 = state.start
        c = t * c + (1 - t) * ((s0.U * s0.sigma) @ s0.V.conj().T[:, cols])
        r = t * r + (1 - t) * ((s0.U[rows] * s0.sigma) @ s0.V.conj().T)
    g = c[rows, :]
    gw = w_row[:, None] * g * w_col[None, :]
    nucleus = (w_col[:, None] * _strict_nucleus(gw, rho, flops=flops)) * w_row[None, :]
    state.current = lra_to_topsvd(c, nucleus, r, rho, flops=flops, warn=False)


def _deterministic_path_step(oracle, state, flops=None):
    """Spectral re-sketch against the blended path target (dense reads)."""
    cur = state.current
    f = cur.U.conj().T
    h = cur.V
    sk = sketch(oracle, f, h, flops=flops)
    t = state.path_t
    if state.start is not None and t < 1.0:
        w0, y0, z0 = _sketch_factored(f, h, state.start)
        sk = SketchSet(
            W=t * sk.W + (1 - t) * w0,
            Y=t * sk.Y + (1 - t) * y0,
            Z=t * sk.Z + (1 - t) * z0,
        )
    rec = nystrom_reconstruct(sk, state.rho, flops=flops)
    state.current = lra_to_topsvd(rec.U, rec.T, rec.V, state.rho,
                                  flops=flops, warn=False)


def homotopy_refine(oracle, start, rho, recipe="residual", f=None, h=None,
                    max_steps=25, samples=None, seed=None, flops=None):
    """Refine along the path from a starting approximation to the input.

    The path target is ``M_t = (1 - t) * start + t * M``.  Each step
    chooses ``s = clamp(0.2 * gap / err, 0.05, 1)`` from the current
    spectral-gap proxy and the tracked path error, advances
    ``t <- 1 - (1 - t)(1 - s)``, applies one iteration of the chosen
    recipe (``"residual"``, ``"spectral"``, or ``"leverage"``) against
    the blended target, and contracts the tracked error by ``(1 - s)``.
    Terminates on reaching ``t = 1`` (the final step refines against the
    input itself) or after ``max_steps``.  A nonpositive gap sets
    ``state.no_gap`` and falls back to the minimum step.

    Returns the final :class:`RefineState`; its history records one
    entry per step with the path error, gap proxy, step length, and
    reads consumed.
    """
    if recipe not in ("residual", "spectral", "leverage"):
        raise ValueError(f"unknown refinement recipe {recipe!r}")
    if max_steps < 1:
        raise ValueError("continuation needs at least one step")
    m, n = oracle.shape
    ss = _seed_seq(seed)
    s_init, s_est = ss.spawn(2)
    state = init_refine_state(oracle, start, rho, f=f, h=h, seed=s_init,
                              continuation=True, flops=flops)
    if samples is None:
        samples = min(m * n, max(256, 4 * (m + n)))
    before = oracle.reads
    err = estimate_residual_fro(oracle, state.current, samples, seed=s_est)
    state.sigma_next = err  # a rank-rho start forces sigma_{rho+1} <= path error
    state.history.append(
        StepRecord(iteration=0, error_estimate=err,
                   gap_estimate=max(float(state.current.sigma[rho - 1]) - err, 0.0),
                   step=0.0, reads=oracle.reads - before)
    )
    for _ in range(max_steps):
        sig = state.current.sigma
        sigma_rho = float(sig[rho - 1]) if sig.size >= rho else 0.0
        gap = sigma_rho - state.sigma_next
        if gap <= 0.0:
            state.no_gap = True
            step = MIN_STEP if err > 0.0 else 1.0
        else:
            step = _clamp_step(gap, err)
        state.path_t = 1.0 - (1.0 - state.path_t) * (1.0 - step)
        if step >= 1.0 - 1e-12:
            state.path_t = 1.0
        reads_before = oracle.reads
        if recipe == "residual":
            refine_residual(oracle, state, step=step, flops=flops)
            state.history[-1].error_estimate = err * (1.0 - step)
        else:
            if recipe == "spectral":
                _deterministic_path_step(oracle, state, flops=flops)
            else:
                _leverage_path_step(oracle, state, flops=flops)
            state.sigma_next = err * (1.0 - step)
            state.history.append(
                StepRecord(
                    iteration=len(state.history),
                    error_estimate=err * (1.0 - step),
                    gap_estimate=max(
                        float(state.current.sigma[rho - 1]) - state.sigma_next, 0.0
                    ),
                    step=step,
                    reads=oracle.reads - reads_before,
                )
            )
        err *= 1.0 - step
        if state.path_t >= 1.0 - 1e-12:
            break
    return state
