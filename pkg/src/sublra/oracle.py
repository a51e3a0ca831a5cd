"""Access-counted gateway to an input matrix.

Every algorithm in this package reads its input through a
:class:`MatrixOracle`, which records the set of distinct entry positions
seen so far.  Sublinear cost is therefore a measured fact, not a claim:
after a run, ``access_report()`` states exactly which fraction of the
matrix was ever touched.  Repeated reads of the same entry count once —
the interesting quantity is which entries an algorithm's output can
depend on, not how often they were loaded.

Error metrics against dense ground truth go through :meth:`MatrixOracle.audit`,
a separate channel that bypasses the counter and is excluded from any
sublinearity assertion.
"""

from __future__ import annotations

import threading
from typing import NamedTuple

import numpy as np

__all__ = ["AccessReport", "MatrixOracle"]


class AccessReport(NamedTuple):
    reads: int
    fraction: float


def _index_vector(idx, extent, axis):
    if idx is None:
        return np.arange(extent)
    idx = np.asarray(idx, dtype=np.int64)
    if idx.ndim != 1:
        raise ValueError(f"oracle: {axis} index list must be 1-d")
    if idx.size and (idx.min() < 0 or idx.max() >= extent):
        raise IndexError(
            f"oracle: {axis} index out of range [0, {extent}) "
            f"(got min={idx.min()}, max={idx.max()})"
        )
    return idx


class MatrixOracle:
    """Counts distinct entry reads of a dense backing matrix.

    Parameters
    ----------
    matrix : (m, n) array
        Dense backing matrix; copied defensively and validated finite.

    Notes
    -----
    The touched set is a boolean bitmap of shape (m, n) — fine at desk
    scale.  Counter updates are serialized by a lock so concurrent
    readers see a consistent count.
    """

    def __init__(self, matrix):
        a = np.asarray(matrix)
        if a.ndim != 2 or a.size == 0:
            raise ValueError("oracle: backing matrix must be 2-d and nonempty")
        if not np.all(np.isfinite(a)):
            raise ValueError("oracle: backing matrix has non-finite entries")
        if np.iscomplexobj(a):
            a = a.astype(np.complex128)
        else:
            a = a.astype(np.float64)
        self._m = a.copy()
        self._touched = np.zeros(a.shape, dtype=bool)
        self._reads = 0
        self._lock = threading.Lock()

    @property
    def shape(self):
        return self._m.shape

    @property
    def reads(self):
        return self._reads

    def read_block(self, rows, cols):
        """Return the ``|rows| x |cols|`` submatrix, counting new positions.

        ``None`` selects a full axis.  Duplicate indices are honoured in
        the returned block but naturally count once in the bitmap.
        """
        m, n = self._m.shape
        rows = _index_vector(rows, m, "row")
        cols = _index_vector(cols, n, "column")
        with self._lock:
            urows = np.unique(rows)
            ucols = np.unique(cols)
            patch = self._touched[np.ix_(urows, ucols)]
            self._reads += int(patch.size - np.count_nonzero(patch))
            self._touched[np.ix_(urows, ucols)] = True
        return self._m[np.ix_(rows, cols)]

    def read_entries(self, rows, cols):
        """Read scattered positions ``(rows[t], cols[t])``; returns a vector."""
        m, n = self._m.shape
        rows = _index_vector(rows, m, "row")
        cols = _index_vector(cols, n, "column")
        if rows.shape != cols.shape:
            raise ValueError("oracle: row/column index vectors differ in length")
        with self._lock:
            flat = rows * n + cols
            fresh = np.unique(flat)
            patch = self._touched.reshape(-1)[fresh]
            self._reads += int(patch.size - np.count_nonzero(patch))
            self._touched.reshape(-1)[fresh] = True
        return self._m[rows, cols]

    def access_report(self):
        """Current ``(reads, fraction)`` with fraction = reads / (m*n)."""
        m, n = self._m.shape
        return AccessReport(self._reads, self._reads / (m * n))

    def touched_mask(self):
        """Copy of the distinct-read bitmap (diagnostics; not counted)."""
        return self._touched.copy()

    def audit(self):
        """Dense backing matrix via the audit channel — never counted.

        Reserved for error metrics against ground truth; using it inside
        an approximation algorithm would defeat the read accounting.
        """
        view = self._m.view()
        view.setflags(write=False)
        return view
