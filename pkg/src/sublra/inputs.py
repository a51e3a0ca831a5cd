"""Synthetic input families with controlled rank, spectrum, and noise.

Four constructions cover the regimes the experiments need:

* single-entry indicators (``delta_matrix``) — the classic adversarial
  family: any algorithm that never reads position ``(i, j)`` cannot tell
  the indicator at ``(i, j)`` from the zero matrix;
* shifted indicators (``shifted_delta``) — the same adversarial content
  hidden inside a rank-two matrix with no zero entries;
* ``dual_random`` — random tall/wide factors with a prescribed spectrum
  plus scaled white noise, the standard average-case model;
* ``decay_matrix`` — orthogonal sandwiches with exponentially or
  polynomially decaying singular values.

Where the construction knows its own factorization the exact top SVD is
returned alongside the matrix, so experiments can score against ground
truth without a dense decomposition of the input.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .linalg import TopSVD, fro_norm, qrp
from .sketch import lra_to_topsvd

__all__ = [
    "InputSpec",
    "delta_matrix",
    "shifted_delta",
    "dual_random",
    "decay_matrix",
    "geometric_spectrum",
    "generate",
]


def _check_dims(m, n):
    if m < 1 or n < 1:
        raise ValueError(f"matrix dimensions must be positive, got {m} x {n}")


def _check_pos(m, n, i, j):
    _check_dims(m, n)
    if not (0 <= i < m and 0 <= j < n):
        raise ValueError(f"entry position ({i}, {j}) outside {m} x {n}")


def delta_matrix(m, n, i, j):
    """Indicator matrix: 1 at ``(i, j)``, 0 elsewhere (rank one)."""
    _check_pos(m, n, i, j)
    a = np.zeros((m, n))
    a[i, j] = 1.0
    return a


def shifted_delta(m, n, i, j):
    """Indicator minus a half: ``1/2`` at ``(i, j)``, ``-1/2`` elsewhere.

    Equals ``delta - J/2`` for the all-ones matrix ``J``, hence rank at
    most two, with no zero entries to give the position away.
    """
    _check_pos(m, n, i, j)
    a = np.full((m, n), -0.5)
    a[i, j] = 0.5
    return a


def geometric_spectrum(rho, ratio=0.5, first=1.0):
    """Geometric singular-value profile ``first * ratio**j``, j = 0..rho-1."""
    if rho < 1:
        raise ValueError("spectrum length must be >= 1")
    if not 0.0 < ratio <= 1.0 or first <= 0.0:
        raise ValueError("geometric spectrum needs 0 < ratio <= 1 and first > 0")
    return first * ratio ** np.arange(rho, dtype=np.float64)


def dual_random(m, n, rho, spectrum, noise=0.0, seed=None):
    """Random dual-factor matrix with prescribed spectrum plus white noise.

    ``L = U diag(spectrum) V`` with ``U`` (m x rho) and ``V`` (rho x n)
    i.i.d. standard normal scaled by ``1/sqrt(m)`` and ``1/sqrt(n)``; the
    perturbation ``E`` is i.i.d. normal rescaled so that
    ``||E||_F = noise * ||L||_F``.  Returns ``(L + E, truth)`` where
    ``truth`` is the exact top SVD of the noiseless ``L`` computed from
    its factors (no dense decomposition of the full matrix).
    """
    _check_dims(m, n)
    spectrum = np.asarray(spectrum, dtype=np.float64)
    if spectrum.ndim != 1 or spectrum.size != rho:
        raise ValueError(f"spectrum must be a length-{rho} vector")
    if rho < 1 or rho > min(m, n):
        raise ValueError(f"rank rho={rho} outside [1, {min(m, n)}]")
    if np.any(spectrum <= 0):
        raise ValueError("prescribed spectrum must be positive")
    if noise < 0:
        raise ValueError("noise level must be nonnegative")
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((m, rho)) / np.sqrt(m)
    v = rng.standard_normal((rho, n)) / np.sqrt(n)
    low = (u * spectrum) @ v
    mat = low
    if noise > 0.0:
        e = rng.standard_normal((m, n))
        ne = fro_norm(e)
        if ne > 0.0:
            mat = low + e * (noise * fro_norm(low) / ne)
    truth = lra_to_topsvd(u, np.diag(spectrum), v, rho, warn=False)
    return mat, truth


def decay_matrix(m, n, kind="exp", rate=1.0, seed=None):
    """Orthogonal sandwich with a decaying spectrum.

    ``M = Q1 @ diag(sigma) @ Q2^T`` with random orthonormal factors and
    ``sigma_j = exp(-rate * j)`` (``kind="exp"``) or ``j**-rate``
    (``kind="poly"``), ``j = 1..min(m, n)``.  Returns ``(M, truth)`` with
    the exact SVD as the truth object.
    """
    _check_dims(m, n)
    if rate <= 0:
        raise ValueError("decay rate must be positive")
    r = min(m, n)
    j = np.arange(1, r + 1, dtype=np.float64)
    if kind == "exp":
        sigma = np.exp(-rate * j)
    elif kind == "poly":
        sigma = j ** (-rate)
    else:
        raise ValueError(f"unknown decay kind {kind!r}")
    rng = np.random.default_rng(seed)
    q1 = qrp(rng.standard_normal((m, r))).Q
    q2 = qrp(rng.standard_normal((n, r))).Q
    mat = (q1 * sigma) @ q2.T
    return mat, TopSVD(U=q1, sigma=sigma, V=q2)


@dataclass
class InputSpec:
    """Serializable description of an experiment input.

    ``family`` selects the construction; unused fields stay at their
    defaults and are dropped from the dict form.  ``seed=None`` means
    "derive from the experiment's per-trial seed stream".
    """

    family: str
    m: int = 0
    n: int = 0
    rho: int = 0
    spectrum: Optional[tuple] = None
    noise: float = 0.0
    kind: str = "exp"
    rate: float = 1.0
    i: int = 0
    j: int = 0
    path: Optional[str] = None
    seed: Optional[int] = None

    _FAMILIES = ("delta", "shifted_delta", "dual_random", "decay", "file")

    def __post_init__(self):
        if self.family not in self._FAMILIES:
            raise ValueError(
                f"unknown input family {self.family!r}; expected one of {self._FAMILIES}"
            )
        if self.spectrum is not None:
            self.spectrum = tuple(float(s) for s in self.spectrum)

    def to_dict(self):
        d = asdict(self)
        defaults = InputSpec.__dataclass_fields__
        return {
            k: (list(v) if isinstance(v, tuple) else v)
            for k, v in d.items()
            if v != defaults[k].default or k == "family"
        }

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown input fields: {sorted(extra)}")
        return cls(**d)


def generate(spec, seed=None):
    """Materialize an :class:`InputSpec` as ``(matrix, truth-or-None)``.

    ``seed`` overrides ``spec.seed`` when the spec leaves it unset, which
    is how the experiment harness injects per-trial randomness.
    """
    eff_seed = spec.seed if spec.seed is not None else seed
    if spec.family == "delta":
        return delta_matrix(spec.m, spec.n, spec.i, spec.j), None
    if spec.family == "shifted_delta":
        return shifted_delta(spec.m, spec.n, spec.i, spec.j), None
    if spec.family == "dual_random":
        if spec.spectrum is None:
            raise ValueError("dual_random input needs an explicit spectrum")
        return dual_random(
            spec.m, spec.n, spec.rho, np.asarray(spec.spectrum),
            noise=spec.noise, seed=eff_seed,
        )
    if spec.family == "decay":
        return decay_matrix(spec.m, spec.n, kind=spec.kind, rate=spec.rate,
                            seed=eff_seed)
    if spec.family == "file":
        if not spec.path:
            raise ValueError("file input needs a path")
        from .mmio import load_matrix_market

        return load_matrix_market(spec.path), None
    raise AssertionError("unreachable")
