"""Random-labeling inference on fixed locations.

Under random labeling the NN graph, ``Q``, ``R``, the reflexivity row totals
and every null moment stay fixed; only the labels move. :class:`RelabelEngine`
builds all of that once and evaluates the statistics for a whole matrix of
labelings (one labeling per row) with array operations.
"""

from __future__ import annotations

import math
import warnings
from typing import Callable

import numpy as np

from ..errors import UndefinedStatisticError
from ..exact import FisherTails
from ..geom import NnGraph, PointSet, build_nn_graph
from ..stat_tests import (
    COND_LIMIT,
    _expand_tests,
    reflexivity_moments,
    species_moments,
)
from ..tables import build_nnrct, nnct_edge_weights, rct_edge_weights
from .rng import as_generator

__all__ = [
    "RelabelEngine",
    "resolve_test",
    "label_matrix",
    "randomization_pvalues",
    "randomization_pvalue",
    "MAX_UNDEFINED_FRACTION",
]

MAX_UNDEFINED_FRACTION = 0.05
_BATCH = 1000


def resolve_test(name: str) -> tuple[str, str]:
    """Map a test name to ``(engine statistic, direction of extremeness)``.

    Chi-square type statistics are extreme to the right. Fisher tests use
    their own inclusive p-value, so small values are extreme.
    """
    if name in ("pielou_chi2", "chi2_reflexivity", "species_overall"):
        return name, "right"
    if name in ("fisher_right", "fisher_left"):
        return f"fisher_p_{name.split('_')[1]}", "left"
    stem, _, side = name.rpartition("_")
    if side in ("right", "left", "two-sided") and stem.startswith(("z_dir", "z_sr", "z_mnr", "z_cell_")):
        return stem, side
    raise ValueError(f"unknown test {name!r}")


class RelabelEngine:
    """Vectorized statistics for many labelings of one set of locations.

    Parameters
    ----------
    ps : PointSet
        Locations and the observed labels (which fix the class sizes).
    g : NnGraph, optional
        Precomputed NN graph of ``ps``.
    weights : str
        Table weighting mode.
    yates : bool
        Continuity correction for Pielou's chi-square.
    """

    def __init__(
        self,
        ps: PointSet,
        g: NnGraph | None = None,
        weights: str = "ordered-edge",
        yates: bool = True,
        tie_epsilon: float = 0.0,
    ):
        if g is None:
            g = build_nn_graph(ps, tie_epsilon)
        self.ps = ps
        self.g = g
        self.k = ps.k
        self.yates = yates
        self.src = g.edge_src
        self.dst = g.edge_dst
        mut = g.edge_mutual
        w_rct = rct_edge_weights(g, weights)
        self.w_nnct = nnct_edge_weights(g, weights)
        self.w_r = np.where(mut, w_rct, 0.0)
        self.w_nr = np.where(mut, 0.0, w_rct)
        self.n_r = float(self.w_r.sum())
        self.n_nr = float(self.w_nr.sum())
        self.n = self.n_r + self.n_nr
        self._fisher = FisherTails()

        rct = build_nnrct(ps, g, weights)
        try:
            self.refl = reflexivity_moments(ps.class_sizes, rct)
        except UndefinedStatisticError as exc:
            self.refl, self.refl_error = None, exc
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            self.spm = species_moments(ps.class_sizes, g)
        sigma = self.spm.cov
        cond = np.linalg.cond(sigma)
        self.sigma_inv = np.linalg.inv(sigma) if np.isfinite(cond) and cond <= COND_LIMIT else None

    def tables(self, labels: np.ndarray) -> dict[str, np.ndarray]:
        """NN-RCT cells and SCCT self column for each row of ``labels``."""
        L = np.atleast_2d(labels)
        ls = L[:, self.src]
        same = ls == L[:, self.dst]
        n_sr = same @ self.w_r
        n_snr = same @ self.w_nr
        wself = np.where(same, self.w_nnct, 0.0)
        self_counts = np.empty((L.shape[0], self.k))
        for c in range(1, self.k + 1):
            self_counts[:, c - 1] = np.where(ls == c, wself, 0.0).sum(axis=1)
        return {
            "n_sr": n_sr,
            "n_mr": self.n_r - n_sr,
            "n_snr": n_snr,
            "n_mnr": self.n_nr - n_snr,
            "self": self_counts,
        }

    def statistics(self, labels: np.ndarray, stats) -> dict[str, np.ndarray]:
        """Engine statistics (see :func:`resolve_test`); NaN where undefined."""
        t = self.tables(labels)
        out: dict[str, np.ndarray] = {}
        n_sr, n_mr, n_snr, n_mnr = t["n_sr"], t["n_mr"], t["n_snr"], t["n_mnr"]
        c_s = n_sr + n_snr
        c_m = n_mr + n_mnr
        nan = np.full(n_sr.shape, np.nan)
        with np.errstate(divide="ignore", invalid="ignore"):
            for name in stats:
                if name in out:
                    continue
                if name == "pielou_chi2":
                    dev = np.abs(n_sr - self.n_r * c_s / self.n)
                    if self.yates:
                        dev = dev - np.minimum(0.5, dev)
                    denom = self.n_r * self.n_nr * c_s * c_m
                    out[name] = np.where(denom > 0, dev**2 * self.n**3 / denom, np.nan)
                elif name == "z_dir":
                    if self.n_r <= 0 or self.n_nr <= 0:
                        out[name] = nan
                        continue
                    denom = c_s * c_m
                    z = (n_sr / self.n_r - n_snr / self.n_nr) * np.sqrt(self.n_r * self.n_nr * self.n / denom)
                    out[name] = np.where(denom > 0, z, np.nan)
                elif name in ("z_sr", "z_mnr", "chi2_reflexivity"):
                    m = self.refl
                    if m is None or not (m.var_sr > 0 and m.var_mnr > 0):
                        out[name] = nan
                        continue
                    zs = (n_sr - m.e_sr) / math.sqrt(m.var_sr)
                    zm = (n_mnr - m.e_mnr) / math.sqrt(m.var_mnr)
                    out[name] = {"z_sr": zs, "z_mnr": zm, "chi2_reflexivity": zs**2 + zm**2}[name]
                elif name == "species_overall":
                    if self.sigma_inv is None:
                        out[name] = nan
                        continue
                    d = t["self"] - self.spm.expected
                    out[name] = np.einsum("bi,ij,bj->b", d, self.sigma_inv, d)
                elif name.startswith("z_cell_"):
                    c = int(name.rsplit("_", 1)[1])
                    if not 1 <= c <= self.k:
                        raise ValueError(f"class {c} out of range 1..{self.k}")
                    var = self.spm.cov[c - 1, c - 1]
                    if not var > 0:
                        out[name] = nan
                        continue
                    out[name] = (t["self"][:, c - 1] - self.spm.expected[c - 1]) / math.sqrt(var)
                elif name.startswith("fisher_p_"):
                    side = name.rsplit("_", 1)[1]
                    out[name] = self._fisher(n_sr, n_mr, n_snr, n_mnr, side)[0]
                else:
                    raise ValueError(f"unknown engine statistic {name!r}")
        return out

    def fisher(self, labels: np.ndarray, alternative: str) -> tuple[np.ndarray, np.ndarray]:
        """Inclusive p-values and table probabilities for each labeling."""
        t = self.tables(labels)
        return self._fisher(t["n_sr"], t["n_mr"], t["n_snr"], t["n_mnr"], alternative)


def label_matrix(labels: np.ndarray, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` independent uniform permutations of ``labels``, one per row."""
    return rng.permuted(np.tile(np.asarray(labels), (size, 1)), axis=1)


def _extreme(rep: np.ndarray, obs: float, direction: str) -> np.ndarray:
    tol = 1e-9 * max(1.0, abs(obs))
    if direction == "right":
        return rep >= obs - tol
    if direction == "left":
        return rep <= obs + tol
    return np.abs(rep) >= abs(obs) - tol


def _pvalue(obs: float, reps: np.ndarray, direction: str, what: str) -> float:
    if np.isnan(obs):
        raise UndefinedStatisticError(f"{what}: observed statistic is undefined")
    valid = ~np.isnan(reps)
    n_bad = int((~valid).sum())
    if n_bad > MAX_UNDEFINED_FRACTION * reps.size:
        raise UndefinedStatisticError(
            f"{what}: undefined on {n_bad} of {reps.size} relabelings (degenerate configuration)"
        )
    hits = int(_extreme(reps[valid], obs, direction).sum())
    return (1 + hits) / (int(valid.sum()) + 1)


def randomization_pvalues(
    ps: PointSet,
    tests=None,
    n_mc: int = 10_000,
    rng=None,
    *,
    g: NnGraph | None = None,
    weights: str = "ordered-edge",
    yates: bool = True,
    lenient: bool = False,
    engine: RelabelEngine | None = None,
) -> dict[str, float | None]:
    """Randomization p-values for several tests from one set of relabelings.

    ``p = (1 + #{replicates at least as extreme}) / (n_valid + 1)``, where
    replicates on which a statistic is undefined are left out. More than 5%
    undefined replicates is an error (``None`` with ``lenient``).
    """
    if n_mc < 1:
        raise ValueError("n_mc must be positive")
    rng = as_generator(rng)
    eng = engine or RelabelEngine(ps, g, weights, yates)
    names = []
    for name in _expand_tests(tests):
        if name == "z_cells":
            names.extend(f"z_cell_{c}_right" for c in range(1, ps.k + 1))
        else:
            names.append(name)
    resolved = {name: resolve_test(name) for name in names}
    stat_keys = sorted({key for key, _ in resolved.values()})
    observed = eng.statistics(ps.labels, stat_keys)
    chunks: dict[str, list[np.ndarray]] = {key: [] for key in stat_keys}
    done = 0
    while done < n_mc:
        size = min(_BATCH, n_mc - done)
        vals = eng.statistics(label_matrix(ps.labels, size, rng), stat_keys)
        for key in stat_keys:
            chunks[key].append(vals[key])
        done += size
    out: dict[str, float | None] = {}
    for name, (key, direction) in resolved.items():
        reps = np.concatenate(chunks[key])
        try:
            out[name] = _pvalue(float(observed[key][0]), reps, direction, name)
        except UndefinedStatisticError:
            if not lenient:
                raise
            out[name] = None
    return out


def randomization_pvalue(
    ps: PointSet,
    statistic: str | Callable[[PointSet], float],
    alternative: str = "right",
    n_mc: int = 10_000,
    rng=None,
    **kwargs,
) -> float:
    """Randomization p-value of one statistic.

    ``statistic`` is a test name (``"chi2_reflexivity"``, ``"z_cell_1_right"``
    ...), in which case ``alternative`` is ignored, or any function of a
    point set, evaluated on every relabeled copy.
    """
    if isinstance(statistic, str):
        return randomization_pvalues(ps, [statistic], n_mc, rng, **kwargs)[statistic]
    if alternative not in ("right", "left", "two-sided"):
        raise ValueError(f"bad alternative {alternative!r}")
    rng = as_generator(rng)
    obs = float(statistic(ps))
    reps = np.empty(n_mc)
    done = 0
    while done < n_mc:
        size = min(_BATCH, n_mc - done)
        for row in label_matrix(ps.labels, size, rng):
            try:
                reps[done] = float(statistic(ps.with_labels(row)))
            except UndefinedStatisticError:
                reps[done] = np.nan
            done += 1
    return _pvalue(obs, reps, alternative, getattr(statistic, "__name__", "statistic"))
