"""Compiled inner loop for the one-sided Jacobi SVD.

The kernel operates on the transposed working matrix so that the column
rotations of the classical algorithm become contiguous row updates.  It is
compiled lazily by numba for float64 and complex128 inputs; everything else
in the package stays plain numpy.
"""

import numpy as np
from numba import njit


@njit(cache=True, fastmath=True)
def onesided_jacobi(bt, vt, max_sweeps, rel_tol, abs_tol):
    """Run cyclic one-sided Jacobi sweeps in place.

    Parameters
    ----------
    bt : (n, m) array
        Transpose of the working matrix B; row p holds column p of B.
        Overwritten with the transpose of U * diag(sigma).
    vt : (n, n) array
        Accumulates the transpose of the right rotation product, starting
        from the identity.
    max_sweeps : int
        Hard cap on the number of cyclic sweeps.
    rel_tol : float
        A pair (p, q) is considered orthogonal when
        |b_p^H b_q| <= rel_tol * ||b_p|| * ||b_q||.
    abs_tol : float
        Additional absolute floor on |b_p^H b_q| below which a pair is
        skipped regardless of the column norms.

    Returns
    -------
    sweeps, rotations, visits, converged
        Sweep count, number of rotations applied, number of pair visits,
        and whether a full sweep completed with no rotations.
    """
    n = bt.shape[0]
    m = bt.shape[1]
    norms2 = np.empty(n, dtype=np.float64)
    sweeps = 0
    rotations = 0
    visits = 0
    converged = False
    while sweeps < max_sweeps:
        for p in range(n):
            acc = 0.0
            for t in range(m):
                acc += abs(bt[p, t]) ** 2
            norms2[p] = acc
        rots_this_sweep = 0
        for p in range(n - 1):
            for q in range(p + 1, n):
                visits += 1
                apq = bt[p, 0] * 0.0
                for t in range(m):
                    apq += np.conj(bt[p, t]) * bt[q, t]
                aapq = abs(apq)
                app = norms2[p]
                aqq = norms2[q]
                if aapq <= abs_tol:
                    continue
                if aapq * aapq <= rel_tol * rel_tol * app * aqq:
                    continue
                # Absorb the phase of the Gram off-diagonal entry, then
                # apply the classical symmetric Jacobi rotation.
                tau = (aqq - app) / (2.0 * aapq)
                if tau >= 0.0:
                    t_ = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t_ = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                cs = 1.0 / np.sqrt(1.0 + t_ * t_)
                sn = t_ * cs
                w = apq / aapq
                cw = np.conj(w)
                scw = sn * cw
                ccw = cs * cw
                for t in range(m):
                    bp = bt[p, t]
                    bq = bt[q, t]
                    bt[p, t] = cs * bp - scw * bq
                    bt[q, t] = sn * bp + ccw * bq
                for t in range(n):
                    vp = vt[p, t]
                    vq = vt[q, t]
                    vt[p, t] = cs * vp - scw * vq
                    vt[q, t] = sn * vp + ccw * vq
                npp = app - t_ * aapq
                nqq = aqq + t_ * aapq
                norms2[p] = npp if npp > 0.0 else 0.0
                norms2[q] = nqq if nqq > 0.0 else 0.0
                rotations += 1
                rots_this_sweep += 1
        sweeps += 1
        if rots_this_sweep == 0:
            converged = True
            break
    return sweeps, rotations, visits, converged
