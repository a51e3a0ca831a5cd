"""Experiment harness: configs, seeded trials, metrics, and serialization.

A JSON config describes an input family, a pipeline (multiplier
families, sketch sizes, reconstruction rank, optional refinement or
continuation), a trial count, and a read budget.  ``run`` executes the
trials — concurrently up to a job bound — and returns a record with
per-trial metrics and aggregates.  Trial randomness comes from a
counter-based split of the master seed, so records are reproducible
byte-for-byte (modulo wall-clock fields) regardless of job count.

``adversarial_sweep`` runs one fixed pipeline against every member of an
indicator family and reports how often the output misses by at least
1/2 in the max-entry norm — the unavoidable failure rate of any
algorithm that leaves part of the input unread, made measurable.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .cur import canonical_cur
from .inputs import InputSpec, delta_matrix, generate, shifted_delta
from .linalg import (
    FlopCounter,
    RankDeficientError,
    fro_norm,
    norms,
    svd,
    tail_norm,
)
from .multipliers import (
    gen_abridged_fourier,
    gen_abridged_hadamard,
    gen_bidiag_perm,
    gen_gaussian,
    gen_orthogonal_partial,
    gen_sample,
)
from .refine import (
    homotopy_refine,
    init_refine_state,
    refine_deterministic,
    refine_leverage,
    refine_residual,
)
from .sketch import SketchLostError, lra_to_topsvd, nystrom_reconstruct, recompress, sketch

__all__ = [
    "ConfigError",
    "PipelineConfig",
    "ExperimentConfig",
    "TrialResult",
    "ExperimentRecord",
    "load_config",
    "build_multiplier",
    "run",
    "adversarial_sweep",
    "emit",
    "report_rows",
]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """A config file or pipeline description failed validation."""


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass
class PipelineConfig:
    """What to run on each trial's input."""

    rho: int
    f: Optional[dict] = None
    h: Optional[dict] = None
    k: Optional[int] = None
    l: Optional[int] = None
    recompress: bool = True
    refine: Optional[dict] = None
    homotopy: bool = False
    max_steps: int = 25

    def __post_init__(self):
        if self.rho < 1:
            raise ConfigError(f"pipeline rank rho must be >= 1, got {self.rho}")
        if self.refine is not None:
            recipe = self.refine.get("recipe")
            if recipe not in ("residual", "spectral", "leverage"):
                raise ConfigError(f"unknown refine recipe {recipe!r}")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be >= 1")

    def to_dict(self):
        d = asdict(self)
        return {k: v for k, v in d.items() if v is not None}

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown pipeline fields: {sorted(extra)}")
        return cls(**d)


@dataclass
class ExperimentConfig:
    input: InputSpec
    pipeline: PipelineConfig
    trials: int = 1
    budget: Optional[float] = None
    master_seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.budget is not None and not 0.0 < self.budget <= 1.0:
            raise ConfigError(f"budget must lie in (0, 1], got {self.budget}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "input": self.input.to_dict(),
            "pipeline": self.pipeline.to_dict(),
            "trials": self.trials,
            "budget": self.budget,
            "master_seed": self.master_seed,
            "jobs": self.jobs,
        }


def load_config(source):
    """Parse and validate a config from a path, JSON text, or dict."""
    if isinstance(source, dict):
        raw = source
    else:
        text = source
        if str(source).lstrip()[:1] not in ("{", "["):
            try:
                with open(source, "r", encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from exc
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported schema_version {version!r}; this build expects {SCHEMA_VERSION}"
        )
    known = {"schema_version", "input", "pipeline", "trials", "budget",
             "master_seed", "jobs"}
    extra = set(raw) - known
    if extra:
        raise ConfigError(f"unknown config fields: {sorted(extra)}")
    for req in ("input", "pipeline"):
        if req not in raw:
            raise ConfigError(f"config is missing the {req!r} section")
    try:
        spec = InputSpec.from_dict(raw["input"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad input section: {exc}") from exc
    try:
        pipe = PipelineConfig.from_dict(raw["pipeline"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad pipeline section: {exc}") from exc
    return ExperimentConfig(
        input=spec,
        pipeline=pipe,
        trials=int(raw.get("trials", 1)),
        budget=raw.get("budget"),
        master_seed=int(raw.get("master_seed", 0)),
        jobs=int(raw.get("jobs", 1)),
    )


# ---------------------------------------------------------------------------
# multiplier construction from config dictionaries
# ---------------------------------------------------------------------------


def build_multiplier(spec, side, dim, count, seed):
    """Instantiate a multiplier description for one side of the sketch.

    ``spec`` is a dict with a ``family`` key (default: dense Gaussian).
    ``dim`` is the input dimension the multiplier acts on and ``count``
    the number of sketch vectors.
    """
    spec = dict(spec or {"family": "gaussian"})
    family = spec.pop("family", "gaussian")
    count = min(count, dim)
    try:
        if family == "gaussian":
            shape = (count, dim) if side == "left" else (dim, count)
            return gen_gaussian(*shape, seed)
        if family == "abridged_hadamard":
            return gen_abridged_hadamard(dim, spec.pop("d", 3), count, seed,
                                         side=side, **spec)
        if family == "abridged_fourier":
            return gen_abridged_fourier(dim, spec.pop("d", 3), count, seed,
                                        side=side, **spec)
        if family == "bidiag_perm":
            return gen_bidiag_perm(dim, spec.pop("factors", 2), count, seed,
                                   side=side, **spec)
        if family == "orthogonal_partial":
            kind = spec.pop("kind", "givens")
            i = spec.pop("i", 4 * dim)
            return gen_orthogonal_partial(dim, kind, i, count, seed,
                                          side=side, **spec)
        if family == "sample":
            return gen_sample(dim, count, seed, side=side, **spec)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad multiplier spec for family {family!r}: {exc}") from exc
    raise ConfigError(f"unknown multiplier family {family!r}")


# ---------------------------------------------------------------------------
# trial execution
# ---------------------------------------------------------------------------


@dataclass
class TrialResult:
    index: int
    fro_error: float
    spectral_error: float
    tau: float
    error_ratio: Optional[float]
    reads: int
    fraction: float
    flops: int
    wall_time_s: float
    budget_ok: bool

    def to_dict(self):
        return asdict(self)


@dataclass
class ExperimentRecord:
    config: dict
    trials: list
    aggregates: dict
    failed: bool
    schema_version: int = SCHEMA_VERSION

    def to_dict(self):
        return {
            "schema_version": self.schema_version,
            "config": self.config,
            "aggregates": self.aggregates,
            "failed": self.failed,
            "trials": [t.to_dict() for t in self.trials],
        }


def _trial_seeds(master_seed, index):
    root = np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))
    return root.spawn(4)  # input, f, h, refine


def _execute_pipeline(oracle, pcfg, seed_f, seed_h, seed_refine, flops):
    m, n = oracle.shape
    rho = pcfg.rho
    k = pcfg.k if pcfg.k is not None else 4 * rho + 2
    l = pcfg.l if pcfg.l is not None else 2 * rho + 1
    f = build_multiplier(pcfg.f, "left", m, k, seed_f)
    h = build_multiplier(pcfg.h, "right", n, l, seed_h)

    s = sketch(oracle, f, h, flops=flops)
    rec = nystrom_reconstruct(s, rho, flops=flops)
    if not (pcfg.recompress or pcfg.refine or pcfg.homotopy):
        return rec
    _, tops = recompress(rec, rho, flops=flops)

    if pcfg.homotopy:
        recipe = (pcfg.refine or {}).get("recipe", "residual")
        state = homotopy_refine(oracle, tops, rho, recipe=recipe,
                                max_steps=pcfg.max_steps, seed=seed_refine,
                                flops=flops)
        return state.current

    if pcfg.refine:
        recipe = pcfg.refine["recipe"]
        steps = int(pcfg.refine.get("steps", 1))
        if recipe == "residual":
            state = init_refine_state(oracle, tops, rho, f=f, h=h,
                                      seed=seed_refine, flops=flops)
            for _ in range(steps):
                refine_residual(oracle, state, flops=flops)
            return state.current
        if recipe == "spectral":
            for _ in range(steps):
                tops = refine_deterministic(
                    oracle, tops, rho,
                    superfast=bool(pcfg.refine.get("superfast", False)),
                    seed=seed_refine, flops=flops,
                )
            return tops
        rng = np.random.default_rng(seed_refine)
        for _ in range(steps):
            cur = refine_leverage(oracle, tops, rho, k, l,
                                  seed=rng.integers(2**63), flops=flops)
            tops = lra_to_topsvd(cur.C, cur.nucleus, cur.R, rho,
                                 flops=flops, warn=False)
        return tops
    return tops


def _tau_for(matrix, truth, noise, rho):
    r = min(matrix.shape)
    if truth is not None and (truth.rank >= r or noise == 0.0):
        return tail_norm(truth.sigma, rho)
    return tail_norm(svd(matrix).sigma, rho)


def _run_trial(config, index):
    from .oracle import MatrixOracle

    seeds = _trial_seeds(config.master_seed, index)
    matrix, truth = generate(config.input, seed=seeds[0])
    oracle = MatrixOracle(matrix)
    flops = FlopCounter()
    t0 = time.perf_counter()
    approx = _execute_pipeline(
        oracle, config.pipeline, seeds[1], seeds[2], seeds[3], flops
    )
    wall = time.perf_counter() - t0
    reads, fraction = oracle.access_report()

    dense = approx.matrix()
    diff = dense - oracle.audit()
    fro_error = fro_norm(diff)
    spectral_error = norms(diff).spectral
    tau = _tau_for(matrix, truth, config.input.noise, config.pipeline.rho)
    ratio = float(fro_error / tau) if tau > 0.0 else None
    budget = config.budget
    budget_ok = True if budget is None else fraction <= budget
    return TrialResult(
        index=index,
        fro_error=float(fro_error),
        spectral_error=float(spectral_error),
        tau=float(tau),
        error_ratio=ratio,
        reads=int(reads),
        fraction=float(fraction),
        flops=int(flops.total),
        wall_time_s=float(wall),
        budget_ok=bool(budget_ok),
    )


def _percentiles(values):
    if not values:
        return {"median": None, "mean": None, "p05": None, "p95": None, "max": None}
    arr = np.asarray(values, dtype=np.float64)
    return {
        "median": float(np.median(arr)),
        "mean": float(arr.mean()),
        "p05": float(np.percentile(arr, 5)),
        "p95": float(np.percentile(arr, 95)),
        "max": float(arr.max()),
    }


def _aggregate(trials):
    ratios = [t.error_ratio for t in trials if t.error_ratio is not None]
    return {
        "trials": len(trials),
        "budget_violations": sum(not t.budget_ok for t in trials),
        "error_ratio": _percentiles(ratios),
        "fro_error": _percentiles([t.fro_error for t in trials]),
        "fraction": _percentiles([t.fraction for t in trials]),
        "reads": _percentiles([t.reads for t in trials]),
        "flops": _percentiles([t.flops for t in trials]),
        "wall_time_s": _percentiles([t.wall_time_s for t in trials]),
    }


def run(config):
    """Execute all trials of a config and assemble the record."""
    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            trials = list(pool.map(lambda i: _run_trial(config, i),
                                   range(config.trials)))
    else:
        trials = [_run_trial(config, i) for i in range(config.trials)]
    trials.sort(key=lambda t: t.index)
    aggregates = _aggregate(trials)
    failed = aggregates["budget_violations"] > 0
    return ExperimentRecord(
        config=config.to_dict(),
        trials=trials,
        aggregates=aggregates,
        failed=failed,
    )


# ---------------------------------------------------------------------------
# adversarial sweep
# ---------------------------------------------------------------------------


def _sweep_approx(oracle, pipeline, seeds):
    """Run the fixed sweep pipeline; a degenerate sketch approximates by zero."""
    m, n = oracle.shape
    kind = pipeline.get("kind", "nystrom")
    if kind == "mask":
        frac = float(pipeline.get("fraction", 0.25))
        total = int(frac * m * n)
        rng = np.random.default_rng(seeds[0])
        flat = rng.choice(m * n, size=total, replace=False)
        ii, jj = np.divmod(flat, n)
        out = np.zeros((m, n))
        out[ii, jj] = oracle.read_entries(ii, jj)
        return out
    if kind == "cur":
        rho = int(pipeline.get("rho", 1))
        rng = np.random.default_rng(seeds[0])
        rows = np.sort(rng.choice(m, size=int(pipeline.get("rows", rho)),
                                  replace=False))
        cols = np.sort(rng.choice(n, size=int(pipeline.get("cols", rho)),
                                  replace=False))
        try:
            return canonical_cur(oracle, rows, cols, rho).matrix()
        except RankDeficientError:
            return np.zeros((m, n))
    if kind == "nystrom":
        rho = int(pipeline.get("rho", 1))
        k = int(pipeline.get("k", 4 * rho + 2))
        l = int(pipeline.get("l", 2 * rho + 1))
        f = build_multiplier(pipeline.get("f"), "left", m, k, seeds[0])
        h = build_multiplier(pipeline.get("h"), "right", n, l, seeds[1])
        try:
            s = sketch(oracle, f, h)
            rec = nystrom_reconstruct(s, rho)
            _, tops = recompress(rec, rho)
            return tops.matrix()
        except (SketchLostError, RankDeficientError):
            return np.zeros((m, n))
    raise ConfigError(f"unknown sweep pipeline kind {kind!r}")


def adversarial_sweep(m, n, pipeline, budget, family="delta", master_seed=0):
    """Run one fixed pipeline against every indicator matrix.

    For each position ``(i, j)`` the pipeline (same multipliers, same
    sample positions — seeded once from ``master_seed``) processes the
    indicator family member at ``(i, j)`` and is scored by the max-entry
    error, failing when it reaches 1/2.  Returns
    ``(fail_fraction, per_matrix)`` where each per-matrix row records the
    position, error, failure flag, and whether the pipeline ever read
    that position.  Raises :class:`ConfigError` if the pipeline's read
    fraction exceeds ``budget``.
    """
    from .oracle import MatrixOracle

    if family not in ("delta", "shifted_delta"):
        raise ConfigError(f"unknown sweep family {family!r}")
    make = delta_matrix if family == "delta" else shifted_delta
    seeds = np.random.SeedSequence(master_seed).spawn(2)
    per_matrix = []
    fails = 0
    fraction = None
    for i in range(m):
        for j in range(n):
            mat = make(m, n, i, j)
            oracle = MatrixOracle(mat)
            approx = _sweep_approx(oracle, pipeline, seeds)
            if fraction is None:
                # access pattern is data independent: measure it once
                fraction = oracle.access_report().fraction
                if fraction > budget:
                    raise ConfigError(
                        f"sweep pipeline reads {fraction:.4f} of the input, "
                        f"over the budget {budget}"
                    )
                mask = oracle.touched_mask()
            err = float(np.max(np.abs(approx - mat)))
            failed = bool(err >= 0.5 * (1.0 - 1e-9))
            fails += failed
            per_matrix.append(
                {"i": i, "j": j, "max_error": err, "failed": failed,
                 "seen": bool(mask[i, j])}
            )
    return fails / (m * n), per_matrix


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

_CSV_FIELDS = [
    "index", "fro_error", "spectral_error", "tau", "error_ratio",
    "reads", "fraction", "flops", "wall_time_s", "budget_ok",
]


def emit(record, fmt="json", path=None):
    """Serialize a record as JSON (full) or CSV (per-trial table).

    Returns the text; writes it to ``path`` when given.
    """
    if fmt == "json":
        text = json.dumps(record.to_dict(), indent=2, sort_keys=False) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=_CSV_FIELDS)
        writer.writeheader()
        for t in record.trials:
            row = t.to_dict()
            writer.writerow({k: row[k] for k in _CSV_FIELDS})
        text = buf.getvalue()
    else:
        raise ConfigError(f"unknown output format {fmt!r}")
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def report_rows(paths):
    """Summarize several record files into one aggregate table."""
    rows = []
    for p in paths:
        try:
            with open(p, "r", encoding="utf-8") as fh:
                rec = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read record {p}: {exc}") from exc
        agg = rec.get("aggregates", {})
        cfg = rec.get("config", {})
        rows.append({
            "record": str(p),
            "family": cfg.get("input", {}).get("family"),
            "trials": agg.get("trials"),
            "median_error_ratio": (agg.get("error_ratio") or {}).get("median"),
            "p95_error_ratio": (agg.get("error_ratio") or {}).get("p95"),
            "median_fraction": (agg.get("fraction") or {}).get("median"),
            "median_flops": (agg.get("flops") or {}).get("median"),
            "budget_violations": agg.get("budget_violations"),
            "failed": rec.get("failed"),
        })
    return rows
