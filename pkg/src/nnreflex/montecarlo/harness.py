"""Empirical size and power of the NN tests.

Asymptotic tests reject when the statistic passes its critical value
(``chi2_df(1 - alpha)`` or ``z_(1 - alpha)``); exact tests reject on their
own p-values. A statistic that is undefined on a replicate counts as a
non-rejection and is tallied separately.

CSR and alternative families draw a fresh pattern per replicate. Random
labeling families draw ``backgrounds`` location sets and relabel each one
``n_mc`` times. Each replicate (or background) owns a random stream keyed by
``(seed, spec index, unit index)``, so the counts do not depend on how the
work is split across processes.
"""

from __future__ import annotations

import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import distfit
from ..errors import DegenerateConfigurationWarning
from .patterns import PatternSpec, generate
from .randomization import RelabelEngine, label_matrix
from .rng import check_seed, stream

__all__ = [
    "SIZE_TESTS",
    "EXACT_VARIANT_TESTS",
    "SEGREGATION_TESTS",
    "ASSOCIATION_TESTS",
    "default_tests",
    "binomial_band",
    "SimRow",
    "SimulationReport",
    "simulate",
    "empirical_size",
    "empirical_power",
]

SIZE_TESTS = (
    "pielou_chi2",
    "z_dir_right",
    "z_dir_left",
    "chi2_reflexivity",
    "z_sr_right",
    "z_mnr_left",
    "species_overall",
    "z_cell_1_right",
    "z_cell_2_right",
)
EXACT_VARIANT_TESTS = tuple(
    f"fisher_{side}{suffix}" for side in ("right", "left") for suffix in ("", "_exc", "_mid", "_toc")
)
SEGREGATION_TESTS = (
    "fisher_right",
    "fisher_left",
    "chi2_reflexivity",
    "z_sr_right",
    "z_mnr_left",
    "species_overall",
    "z_cell_1_right",
    "z_cell_2_right",
)
ASSOCIATION_TESTS = (
    "fisher_right",
    "fisher_left",
    "chi2_reflexivity",
    "z_sr_left",
    "z_mnr_right",
    "species_overall",
    "z_cell_1_left",
    "z_cell_2_left",
)
_DF = {"pielou_chi2": 1, "chi2_reflexivity": 2, "species_overall": 2}


def default_tests(spec: PatternSpec) -> tuple[str, ...]:
    """Test columns as laid out in the size and power tables."""
    if spec.family == "csr":
        return SIZE_TESTS
    if spec.is_null:
        return SIZE_TESTS + ("fisher_right", "fisher_left")
    if spec.family in ("alt-II", "alt-V"):
        return ASSOCIATION_TESTS
    return SEGREGATION_TESTS


def binomial_band(alpha: float, n: int) -> tuple[float, float]:
    """``alpha -/+ z_0.95 sqrt(alpha (1 - alpha) / n)``."""
    half = distfit.normal_quantile(0.95) * math.sqrt(alpha * (1 - alpha) / n)
    return alpha - half, alpha + half


def _split_test(name: str) -> tuple[str, str]:
    # "fisher_right_toc" -> ("fisher_p_right", "toc"); "z_sr_left" -> ("z_sr", "left")
    if name.startswith("fisher_"):
        parts = name.split("_")
        side = parts[1]
        variant = parts[2] if len(parts) > 2 else "inc"
        if side not in ("right", "left") or variant not in ("inc", "exc", "mid", "toc"):
            raise ValueError(f"unknown exact test {name!r}")
        return f"fisher_p_{side}", variant
    if name in _DF:
        return name, "right"
    stem, _, side = name.rpartition("_")
    if side not in ("right", "left") or not stem.startswith(("z_dir", "z_sr", "z_mnr", "z_cell_")):
        raise ValueError(f"unknown test {name!r}")
    return stem, side


def _rejections(eng: RelabelEngine, labels, u, tests, alpha, crit) -> tuple[np.ndarray, np.ndarray]:
    keys = sorted({k for k, _ in map(_split_test, tests) if not k.startswith("fisher_p_")})
    stats = eng.statistics(labels, keys)
    fisher = {}
    rej = np.zeros(len(tests), dtype=np.int64)
    undef = np.zeros(len(tests), dtype=np.int64)
    for i, name in enumerate(tests):
        key, how = _split_test(name)
        if key.startswith("fisher_p_"):
            side = key.rsplit("_", 1)[1]
            if side not in fisher:
                fisher[side] = eng.fisher(labels, side)
            p_inc, p_t = fisher[side]
            p_exc = p_inc - p_t
            if how == "inc":
                hit = p_inc <= alpha
            elif how == "exc":
                hit = p_exc <= alpha
            elif how == "mid":
                hit = p_inc - 0.5 * p_t <= alpha
            else:
                hit = u * p_t < alpha - p_exc
            rej[i] = int(hit.sum())
            continue
        v = stats[key]
        undef[i] = int(np.isnan(v).sum())
        if key in _DF:
            hit = v >= crit[("chi2", _DF[key])]
        elif how == "right":
            hit = v >= crit["z"]
        else:
            hit = v <= -crit["z"]
        rej[i] = int(hit.sum())
    return rej, undef


def _critical_values(alpha: float) -> dict:
    crit = {"z": distfit.normal_quantile(1 - alpha)}
    for df in set(_DF.values()):
        crit[("chi2", df)] = distfit.chi2_quantile(1 - alpha, df)
    return crit


def _run_units(job) -> tuple[np.ndarray, np.ndarray]:
    spec_idx, spec, units, tests, n_mc, seed, alpha, weights, yates = job
    crit = _critical_values(alpha)
    rej = np.zeros(len(tests), dtype=np.int64)
    undef = np.zeros(len(tests), dtype=np.int64)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateConfigurationWarning)
        for unit in units:
            rng = stream(seed, spec_idx, unit)
            ps = generate(spec, rng)
            eng = RelabelEngine(ps, weights=weights, yates=yates)
            if spec.is_random_labeling:
                labels = label_matrix(ps.labels, n_mc, rng)
                u = rng.random(n_mc)
            else:
                labels = ps.labels[None, :]
                u = rng.random(1)
            r, d = _rejections(eng, labels, u, tests, alpha, crit)
            rej += r
            undef += d
    return rej, undef


@dataclass
class SimRow:
    """Rejection tally of one test under one scenario."""

    spec_index: int
    scenario: str
    params: dict
    test: str
    replicates: int
    rejections: int
    undefined: int
    rate: float
    se: float
    band_low: float | None = None
    band_high: float | None = None
    flag: str | None = None


@dataclass
class SimulationReport:
    """Rows ordered by scenario, then by test, plus run metadata."""

    kind: str
    rows: list[SimRow]
    metadata: dict = field(default_factory=dict)

    def rate(self, spec_index: int, test: str) -> float:
        for row in self.rows:
            if row.spec_index == spec_index and row.test == test:
                return row.rate
        raise KeyError((spec_index, test))

    def tests(self) -> list[str]:
        seen: list[str] = []
        for row in self.rows:
            if row.test not in seen:
                seen.append(row.test)
        return seen


def _chunks(n_units: int, workers: int) -> list[range]:
    pieces = max(1, min(n_units, 4 * workers))
    bounds = np.linspace(0, n_units, pieces + 1).astype(int)
    return [range(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def simulate(
    specs,
    tests=None,
    *,
    n_mc: int = 10_000,
    backgrounds: int = 100,
    alpha: float = 0.05,
    seed: int = 0,
    workers: int = 1,
    weights: str = "ordered-edge",
    yates: bool = True,
    kind: str = "simulation",
) -> SimulationReport:
    """Rejection rates of ``tests`` under every scenario in ``specs``.

    ``tests`` defaults per scenario to :func:`default_tests`. For random
    labeling families ``n_mc`` is the number of relabelings per background.
    """
    specs = list(specs)
    if not specs:
        raise ValueError("empty scenario grid")
    if n_mc < 1 or backgrounds < 1:
        raise ValueError("n_mc and backgrounds must be positive")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if workers < 1:
        raise ValueError("workers must be positive")
    seed = check_seed(seed)
    start = time.perf_counter()
    jobs, owners = [], []
    plan = []
    for idx, spec in enumerate(specs):
        chosen = tuple(tests) if tests is not None else default_tests(spec)
        for name in chosen:
            _split_test(name)
        n_units = backgrounds if spec.is_random_labeling else n_mc
        per_unit = n_mc if spec.is_random_labeling else 1
        plan.append((spec, chosen, n_units * per_unit))
        for chunk in _chunks(n_units, workers):
            jobs.append((idx, spec, chunk, chosen, per_unit, seed, alpha, weights, yates))
            owners.append(idx)
    if workers == 1:
        results = [_run_units(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_units, jobs))

    totals = [
        (np.zeros(len(chosen), dtype=np.int64), np.zeros(len(chosen), dtype=np.int64))
        for _, chosen, _ in plan
    ]
    for idx, (rej, undef) in zip(owners, results):
        totals[idx][0][:] += rej
        totals[idx][1][:] += undef

    rows = []
    for idx, ((spec, chosen, n), (rej, undef)) in enumerate(zip(plan, totals)):
        lo, hi = binomial_band(alpha, n) if spec.is_null else (None, None)
        for name, r, d in zip(chosen, rej.tolist(), undef.tolist()):
            rate = r / n
            flag = None
            if spec.is_null:
                flag = "liberal" if rate > hi else "conservative" if rate < lo else "nominal"
            rows.append(
                SimRow(
                    spec_index=idx,
                    scenario=spec.label,
                    params=spec.params(),
                    test=name,
                    replicates=n,
                    rejections=r,
                    undefined=d,
                    rate=rate,
                    se=math.sqrt(rate * (1 - rate) / n),
                    band_low=lo,
                    band_high=hi,
                    flag=flag,
                )
            )
    from .. import __version__

    meta = {
        "kind": kind,
        "seed": seed,
        "n_mc": n_mc,
        "backgrounds": backgrounds,
        "alpha": alpha,
        "weights": weights,
        "yates": yates,
        "workers": workers,
        "version": __version__,
        "rng": "Philox (numpy), stream key (seed, scenario, replicate)",
        "runtime_seconds": time.perf_counter() - start,
    }
    return SimulationReport(kind=kind, rows=rows, metadata=meta)


def empirical_size(specs, tests=None, **kwargs) -> SimulationReport:
    """Empirical significance levels under CSR or random labeling."""
    specs = list(specs)
    bad = [s.family for s in specs if not s.is_null]
    if bad:
        raise ValueError(f"size simulations need null families, got {bad}")
    return simulate(specs, tests, kind="size", **kwargs)


def empirical_power(specs, tests=None, **kwargs) -> SimulationReport:
    """Empirical power under the alternative families."""
    specs = list(specs)
    bad = [s.family for s in specs if s.is_null]
    if bad:
        raise ValueError(f"power simulations need alternative families, got {bad}")
    return simulate(specs, tests, kind="power", **kwargs)
