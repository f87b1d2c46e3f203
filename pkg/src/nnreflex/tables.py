"""NN reflexivity (NN-RCT), NN (NNCT) and species-correspondence (SCCT) tables.

Each directed base-NN edge ``i -> j`` carries a weight. Two weighting modes
are supported:

``"ordered-edge"`` (default)
    Point ``i`` spreads a total weight of 1 evenly over its nearest
    neighbors, so every table sums to ``n`` and cells are integers whenever
    there are no ties.
``"pielou"``
    The literal pair weight ``W_ij = 1 / (N_i^nn + N_j^nn)`` summed over
    ordered pairs. A reflexive pair then contributes 1 in total while each
    non-reflexive edge contributes 1, so the NN-RCT total is
    ``n - R/2`` rather than ``n``, and NNCT rows sum to about ``n_i / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .geom import NnGraph, PointSet

__all__ = [
    "WEIGHTINGS",
    "NnRct",
    "Nnct",
    "Scct",
    "rct_edge_weights",
    "nnct_edge_weights",
    "build_nnrct",
    "build_nnct",
    "build_scct",
    "collapse_classes",
]

WEIGHTINGS = ("ordered-edge", "pielou")
_INTEGRAL_TOL = 1e-9


def _check_mode(weights: str) -> None:
    if weights not in WEIGHTINGS:
        raise ValueError(f"unknown weighting {weights!r}; choose from {WEIGHTINGS}")


def _pair_weight(g: NnGraph) -> np.ndarray:
    return 1.0 / (g.nn_count[g.edge_src] + g.nn_count[g.edge_dst])


def nnct_edge_weights(g: NnGraph, weights: str = "ordered-edge") -> np.ndarray:
    """Per-edge weight used when accumulating the NNCT / SCCT."""
    _check_mode(weights)
    if weights == "ordered-edge":
        return 1.0 / g.nn_count[g.edge_src]
    return _pair_weight(g)


def rct_edge_weights(g: NnGraph, weights: str = "ordered-edge") -> np.ndarray:
    """Per-edge weight used when accumulating the NN-RCT.

    In ``"pielou"`` mode a non-reflexive edge appears twice in the ordered
    double sum (once from each end) so it gets ``2 W_ij``.
    """
    _check_mode(weights)
    if weights == "ordered-edge":
        return 1.0 / g.nn_count[g.edge_src]
    w = _pair_weight(g)
    return np.where(g.edge_mutual, w, 2.0 * w)


@dataclass(frozen=True)
class NnRct:
    """2x2 table of base-NN pairs: reflexivity (rows) by pair type (columns)."""

    n_sr: float
    n_mr: float
    n_snr: float
    n_mnr: float

    @property
    def n_r(self) -> float:
        return self.n_sr + self.n_mr

    @property
    def n_nr(self) -> float:
        return self.n_snr + self.n_mnr

    @property
    def c_s(self) -> float:
        return self.n_sr + self.n_snr

    @property
    def c_m(self) -> float:
        return self.n_mr + self.n_mnr

    @property
    def n(self) -> float:
        return self.n_r + self.n_nr

    def as_array(self) -> np.ndarray:
        return np.array([[self.n_sr, self.n_mr], [self.n_snr, self.n_mnr]])

    @property
    def is_integral(self) -> bool:
        a = self.as_array()
        return bool(np.all(np.abs(a - np.round(a)) <= _INTEGRAL_TOL))


@dataclass(frozen=True, eq=False)
class Nnct:
    """k x k table, rows = base class, columns = NN class."""

    counts: np.ndarray

    @property
    def k(self) -> int:
        return self.counts.shape[0]

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.counts).copy()


@dataclass(frozen=True, eq=False)
class Scct:
    """k x 2 table of self and mixed base-NN pairs per base class."""

    self_counts: np.ndarray
    mixed_counts: np.ndarray

    @property
    def k(self) -> int:
        return self.self_counts.shape[0]

    @property
    def S(self) -> float:
        return float(self.self_counts.sum())

    @property
    def M(self) -> float:
        return float(self.mixed_counts.sum())

    @property
    def row_sums(self) -> np.ndarray:
        return self.self_counts + self.mixed_counts

    def as_array(self) -> np.ndarray:
        return np.column_stack([self.self_counts, self.mixed_counts])


def _check_graph(ps: PointSet, g: NnGraph) -> None:
    if g.n != ps.n:
        raise ValueError(f"graph has {g.n} points but the point set has {ps.n}")


def build_nnrct(ps: PointSet, g: NnGraph, weights: str = "ordered-edge") -> NnRct:
    """Cross-classify every base-NN edge by reflexivity and pair type."""
    _check_graph(ps, g)
    w = rct_edge_weights(g, weights)
    same = ps.labels[g.edge_src] == ps.labels[g.edge_dst]
    mut = g.edge_mutual
    return NnRct(
        n_sr=float(w[same & mut].sum()),
        n_mr=float(w[~same & mut].sum()),
        n_snr=float(w[same & ~mut].sum()),
        n_mnr=float(w[~same & ~mut].sum()),
    )


def build_nnct(ps: PointSet, g: NnGraph, weights: str = "ordered-edge") -> Nnct:
    """Accumulate base-class by NN-class edge weights."""
    _check_graph(ps, g)
    w = nnct_edge_weights(g, weights)
    k = ps.k
    flat = (ps.labels[g.edge_src] - 1) * k + (ps.labels[g.edge_dst] - 1)
    counts = np.bincount(flat, weights=w, minlength=k * k).reshape(k, k)
    counts.setflags(write=False)
    return Nnct(counts)


def build_scct(nnct: Nnct) -> Scct:
    """Self column is the NNCT diagonal; mixed column the rest of each row."""
    s = nnct.diagonal
    m = nnct.row_sums - s
    return Scct(s, m)


def collapse_classes(
    ps: PointSet,
    groups: Sequence[Iterable[int]],
    keep_rest: bool = False,
) -> PointSet:
    """Relabel by groups of class ids; group ``g`` becomes class ``g + 1``.

    Points whose class is in no group are dropped, unless ``keep_rest`` is
    set, in which case they are pooled into one extra trailing class.
    """
    groups = [sorted({int(c) for c in grp}) for grp in groups]
    if not groups:
        raise ValueError("at least one group is required")
    seen: set[int] = set()
    for grp in groups:
        if not grp:
            raise ValueError("empty class group")
        bad = [c for c in grp if not 1 <= c <= ps.k]
        if bad:
            raise ValueError(f"unknown class ids {bad} (k = {ps.k})")
        if seen.intersection(grp):
            raise ValueError("class groups must be disjoint")
        seen.update(grp)
    mapping = np.zeros(ps.k + 1, dtype=np.int64)
    names = []
    for g_idx, grp in enumerate(groups, start=1):
        mapping[grp] = g_idx
        names.append("+".join(ps.label_names[c - 1] for c in grp))
    rest = [c for c in range(1, ps.k + 1) if c not in seen]
    if keep_rest and rest:
        mapping[rest] = len(groups) + 1
        names.append("+".join(ps.label_names[c - 1] for c in rest))
    new = mapping[ps.labels]
    keep = new > 0
    if keep.sum() < 2:
        raise ValueError("fewer than 2 points remain after collapsing")
    return PointSet(ps.coords[keep], new[keep], tuple(names), ps.window)
