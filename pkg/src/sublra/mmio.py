"""Minimal Matrix Market I/O for dense experiment inputs.

Supports the ``array`` and ``coordinate`` formats with real or integer
entries and ``general`` or ``symmetric`` symmetry, which covers the
matrices the experiment harness exchanges.  Parsing is strict: any
malformed line fails with the file name and 1-based line number, never a
silent zero.  Matrices round-trip bit-exactly through the writer for
values representable in the emitted ``%.17g`` form (all doubles are).
"""

from __future__ import annotations

import numpy as np

__all__ = ["load_matrix_market", "save_matrix_market"]

_BANNER = "%%MatrixMarket"


def _fail(path, lineno, msg):
    raise ValueError(f"{path}:{lineno}: {msg}")


def _parse_floats(parts, count, path, lineno):
    if len(parts) != count:
        _fail(path, lineno, f"expected {count} fields, got {len(parts)}")
    try:
        return [float(p) for p in parts]
    except ValueError:
        _fail(path, lineno, f"malformed number in {parts!r}")


def load_matrix_market(path):
    """Read a Matrix Market file into a dense float64 array."""
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path}:1: empty file")
    header = lines[0].split()
    if len(header) != 5 or header[0] != _BANNER or header[1].lower() != "matrix":
        _fail(path, 1, f"malformed header {lines[0]!r}")
    fmt, field, symmetry = (h.lower() for h in header[2:5])
    if fmt not in ("array", "coordinate"):
        _fail(path, 1, f"unsupported format {fmt!r}")
    if field not in ("real", "integer"):
        _fail(path, 1, f"unsupported field {field!r} (real or integer only)")
    if symmetry not in ("general", "symmetric"):
        _fail(path, 1, f"unsupported symmetry {symmetry!r}")

    lineno = 1
    size_line = None
    for lineno, raw in enumerate(lines[1:], start=2):
        s = raw.strip()
        if not s or s.startswith("%"):
            continue
        size_line = s
        break
    if size_line is None:
        _fail(path, lineno, "missing size line")

    parts = size_line.split()
    body = []
    for body_lineno, raw in enumerate(lines[lineno:], start=lineno + 1):
        s = raw.strip()
        if not s or s.startswith("%"):
            continue
        body.append((body_lineno, s))

    if fmt == "array":
        if len(parts) != 2:
            _fail(path, lineno, f"array size line needs 2 fields, got {len(parts)}")
        try:
            m, n = int(parts[0]), int(parts[1])
        except ValueError:
            _fail(path, lineno, f"malformed size line {size_line!r}")
        if m < 1 or n < 1:
            _fail(path, lineno, f"invalid dimensions {m} x {n}")
        want = m * n if symmetry == "general" else (n * (n + 1)) // 2
        if symmetry == "symmetric" and m != n:
            _fail(path, lineno, "symmetric array must be square")
        if len(body) != want:
            last = body[-1][0] if body else lineno
            _fail(path, last, f"expected {want} entries, found {len(body)}")
        a = np.zeros((m, n))
        if symmetry == "general":
            it = iter(body)
            # array format lists entries in column-major order
            for j in range(n):
                for i in range(m):
                    ln, s = next(it)
                    a[i, j] = _parse_floats(s.split(), 1, path, ln)[0]
        else:
            it = iter(body)
            for j in range(n):
                for i in range(j, m):
                    ln, s = next(it)
                    v = _parse_floats(s.split(), 1, path, ln)[0]
                    a[i, j] = v
                    a[j, i] = v
        return a

    # coordinate format
    if len(parts) != 3:
        _fail(path, lineno, f"coordinate size line needs 3 fields, got {len(parts)}")
    try:
        m, n, nnz = int(parts[0]), int(parts[1]), int(parts[2])
    except ValueError:
        _fail(path, lineno, f"malformed size line {size_line!r}")
    if m < 1 or n < 1 or nnz < 0:
        _fail(path, lineno, f"invalid sizes {m} x {n} with {nnz} entries")
    if len(body) != nnz:
        last = body[-1][0] if body else lineno
        _fail(path, last, f"expected {nnz} entries, found {len(body)}")
    a = np.zeros((m, n))
    for ln, s in body:
        fields = s.split()
        if len(fields) != 3:
            _fail(path, ln, f"expected 'i j value', got {s!r}")
        try:
            i, j = int(fields[0]), int(fields[1])
        except ValueError:
            _fail(path, ln, f"malformed indices in {s!r}")
        v = _parse_floats(fields[2:], 1, path, ln)[0]
        if not (1 <= i <= m and 1 <= j <= n):
            _fail(path, ln, f"index ({i}, {j}) outside 1..{m} x 1..{n}")
        a[i - 1, j - 1] = v
        if symmetry == "symmetric":
            a[j - 1, i - 1] = v
    return a


def save_matrix_market(path, a, fmt="array", comment=None):
    """Write a dense real matrix in Matrix Market form (general symmetry)."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise ValueError("save_matrix_market needs a nonempty 2-d real array")
    if fmt not in ("array", "coordinate"):
        raise ValueError(f"unsupported format {fmt!r}")
    m, n = a.shape
    out = [f"{_BANNER} matrix {fmt} real general"]
    if comment:
        out.extend(f"% {line}" for line in str(comment).splitlines())
    if fmt == "array":
        out.append(f"{m} {n}")
        out.extend(f"{a[i, j]:.17g}" for j in range(n) for i in range(m))
    else:
        ii, jj = np.nonzero(a)
        out.append(f"{m} {n} {ii.size}")
        out.extend(
            f"{i + 1} {j + 1} {a[i, j]:.17g}" for i, j in zip(ii, jj)
        )
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(out) + "\n")
