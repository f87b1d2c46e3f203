"""One-sided Fisher exact tests on the 2x2 NN-RCT.

With the margins fixed, the count ``N_sr`` in the top-left cell is central
hypergeometric under independence. The right-sided alternative (odds ratio
above 1) says reflexive pairs are more often self pairs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .distfit import log_factorial
from .tables import NnRct

__all__ = ["HypergeomSpec", "ExactResult", "FisherTails", "hypergeom_pmf", "odds_ratio", "fisher_one_sided"]


@dataclass(frozen=True)
class HypergeomSpec:
    """Margins of a 2x2 table: row sums ``n1``, ``n2`` and first column sum ``c1``."""

    n1: int
    n2: int
    c1: int

    def __post_init__(self):
        for name in ("n1", "n2", "c1"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")
        if self.c1 > self.n1 + self.n2:
            raise ValueError("column sum exceeds the grand total")

    @property
    def support(self) -> tuple[int, int]:
        return max(0, self.c1 - self.n2), min(self.n1, self.c1)

    def log_pmf(self, t: int) -> float:
        lo, hi = self.support
        if not lo <= t <= hi:
            return -math.inf
        n = self.n1 + self.n2
        return (
            log_factorial(self.n1) - log_factorial(t) - log_factorial(self.n1 - t)
            + log_factorial(self.n2) - log_factorial(self.c1 - t) - log_factorial(self.n2 - self.c1 + t)
            - log_factorial(n) + log_factorial(self.c1) + log_factorial(n - self.c1)
        )

    def pmf_vector(self) -> np.ndarray:
        """Probabilities over the support, normalized to remove rounding drift."""
        lo, hi = self.support
        logs = np.array([self.log_pmf(t) for t in range(lo, hi + 1)])
        p = np.exp(logs - logs.max())
        return p / p.sum()


def hypergeom_pmf(spec: HypergeomSpec, t: int) -> float:
    """P(T = t) under independence; 0 outside the support."""
    return math.exp(spec.log_pmf(t))


def odds_ratio(t: NnRct) -> float:
    """Sample odds ratio ``n11 n22 / (n12 n21)``; ``inf`` or NaN on zero cells."""
    num = t.n_sr * t.n_mnr
    den = t.n_mr * t.n_snr
    if den == 0:
        return math.inf if num > 0 else math.nan
    return num / den


@dataclass(frozen=True)
class ExactResult:
    """All p-value variants of one one-sided Fisher exact test.

    ``p_tocher`` is the p-value of the randomized decision: ``p_inc`` when
    the table is not rejected and ``p_exc`` when it is. ``uniform`` records
    the variate drawn, if any.
    """

    alternative: str
    odds_ratio: float
    p_table: float
    p_inclusive: float
    p_exclusive: float
    p_mid: float
    p_tocher: float
    alpha: float
    uniform: float | None = None

    @property
    def tocher_rejects(self) -> bool:
        return self.p_tocher < self.alpha

    def as_test_result(self):
        from .stat_tests import TestResult

        return TestResult(
            name=f"fisher_{self.alternative}",
            statistic=self.odds_ratio,
            alternative=self.alternative,
            p_asymptotic=self.p_inclusive,
            reference="hypergeometric",
            diagnostics={
                "p_table": self.p_table,
                "p_inclusive": self.p_inclusive,
                "p_exclusive": self.p_exclusive,
                "p_mid": self.p_mid,
                "p_tocher": self.p_tocher,
            },
        )


def _integral_cells(t: NnRct) -> tuple[int, int, int, int]:
    cells = np.array([t.n_sr, t.n_mr, t.n_snr, t.n_mnr], dtype=float)
    if not np.all(np.isfinite(cells)):
        raise ValueError("NN-RCT cells must be finite")
    if np.any(cells < 0):
        raise ValueError("NN-RCT cells must be non-negative")
    rounded = np.round(cells)  # numpy rounds half to even
    if np.any(np.abs(cells - rounded) > 1e-9):
        warnings.warn("non-integral NN-RCT rounded for the exact test", stacklevel=3)
    return tuple(int(v) for v in rounded)


def fisher_one_sided(
    t: NnRct,
    alternative: str = "right",
    alpha: float = 0.05,
    rng: np.random.Generator | None = None,
) -> ExactResult:
    """Inclusive, exclusive, mid-p and Tocher-corrected one-sided p-values.

    ``rng`` is used only when Tocher's rule needs its uniform draw, i.e.
    when ``p_exc < alpha <= p_inc``; it is then required.
    """
    if alternative not in ("right", "left"):
        raise ValueError(f"alternative must be 'right' or 'left', got {alternative!r}")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    n11, n12, n21, n22 = _integral_cells(t)
    spec = HypergeomSpec(n11 + n12, n21 + n22, n11 + n21)
    lo, hi = spec.support
    probs = spec.pmf_vector()
    pos = n11 - lo
    p_t = float(probs[pos])
    if alternative == "right":
        p_inc = float(probs[pos:].sum())
    else:
        p_inc = float(probs[: pos + 1].sum())
    p_inc = min(1.0, p_inc)
    p_exc = max(0.0, p_inc - p_t)
    p_mid = p_inc - 0.5 * p_t

    u = None
    if p_inc < alpha:
        p_toc = p_exc
    elif p_exc >= alpha:
        p_toc = p_inc
    else:
        if rng is None:
            raise ValueError("Tocher's correction needs a random generator here")
        u = float(rng.random())
        p_toc = p_inc if u >= (alpha - p_exc) / p_t else p_exc
    return ExactResult(
        alternative=alternative,
        odds_ratio=odds_ratio(t),
        p_table=p_t,
        p_inclusive=p_inc,
        p_exclusive=p_exc,
        p_mid=p_mid,
        p_tocher=p_toc,
        alpha=alpha,
        uniform=u,
    )


class FisherTails:
    """Vectorized one-sided p-values for many 2x2 tables.

    Hypergeometric tails are cached per margin triple, so repeated margins
    (the usual case under random relabeling) cost one lookup.
    """

    def __init__(self):
        self._cache: dict[tuple[int, int, int], tuple[int, np.ndarray, np.ndarray, np.ndarray]] = {}

    def _tails(self, n1: int, n2: int, c1: int):
        key = (n1, n2, c1)
        hit = self._cache.get(key)
        if hit is None:
            spec = HypergeomSpec(n1, n2, c1)
            probs = spec.pmf_vector()
            upper = np.cumsum(probs[::-1])[::-1]
            lower = np.cumsum(probs)
            hit = (spec.support[0], probs, np.minimum(upper, 1.0), np.minimum(lower, 1.0))
            self._cache[key] = hit
        return hit

    def __call__(self, n11, n12, n21, n22, alternative: str = "right"):
        """Return ``(p_inclusive, p_table)`` arrays; cells are rounded half to even."""
        if alternative not in ("right", "left"):
            raise ValueError(f"alternative must be 'right' or 'left', got {alternative!r}")
        cells = [np.round(np.asarray(c, dtype=float)).astype(np.int64) for c in (n11, n12, n21, n22)]
        a, b, c, d = np.broadcast_arrays(*cells)
        p_inc = np.empty(a.shape)
        p_t = np.empty(a.shape)
        keys = np.stack([a + b, c + d, a + c], axis=-1).reshape(-1, 3)
        flat_a = a.reshape(-1)
        inv_keys, inverse = np.unique(keys, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        pi, pt = p_inc.reshape(-1), p_t.reshape(-1)
        for u, (n1, n2, c1) in enumerate(inv_keys.tolist()):
            lo, probs, upper, lower = self._tails(n1, n2, c1)
            sel = inverse == u
            pos = flat_a[sel] - lo
            pt[sel] = probs[pos]
            pi[sel] = upper[pos] if alternative == "right" else lower[pos]
        return p_inc, p_t
