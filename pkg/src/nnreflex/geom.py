"""Labeled planar point sets and their nearest-neighbor graphs."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np

from .errors import DegenerateConfigurationWarning

__all__ = [
    "PointSet",
    "NnGraph",
    "build_nn_graph",
    "min_interpoint_distance",
    "densify_labels",
]

_BLOCK = 1024


def densify_labels(raw: Sequence) -> tuple[np.ndarray, tuple[str, ...]]:
    """Map arbitrary class identifiers onto ``1..k``.

    Identifiers are ordered numerically when every one of them parses as an
    integer and lexicographically otherwise. Returns the dense labels and the
    original names, where ``names[c - 1]`` is the name of dense class ``c``.
    """
    names = [str(v).strip() for v in raw]
    uniq = set(names)
    try:
        order = sorted(uniq, key=lambda s: (int(s), s))
    except ValueError:
        order = sorted(uniq)
    index = {name: i + 1 for i, name in enumerate(order)}
    return np.array([index[s] for s in names], dtype=np.int64), tuple(order)


@dataclass(frozen=True, eq=False)
class PointSet:
    """A labeled planar point pattern.

    Parameters
    ----------
    coords : array_like, shape (n, 2)
        Point coordinates.
    labels : array_like of int, shape (n,)
        Dense class labels in ``1..k``; every class must be present.
    label_names : tuple of str, optional
        Original class names, ``label_names[c - 1]`` naming class ``c``.
    window : tuple (xmin, xmax, ymin, ymax), optional
        Study region, carried along for reporting and simulation.
    provenance : dict, optional
        Where the data came from (set by the CSV reader).
    """

    coords: np.ndarray
    labels: np.ndarray
    label_names: tuple[str, ...] = ()
    window: tuple[float, float, float, float] | None = None
    provenance: dict | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float)
        labels = np.array(self.labels)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise ValueError(f"coords must have shape (n, 2), got {coords.shape}")
        n = coords.shape[0]
        if labels.shape != (n,):
            raise ValueError("labels and coords must have the same length")
        if n < 2:
            raise ValueError(f"a point set needs at least 2 points, got {n}")
        if not np.all(np.isfinite(coords)):
            raise ValueError("coordinates must be finite")
        if not np.issubdtype(labels.dtype, np.integer):
            numeric = np.issubdtype(labels.dtype, np.floating)
            if not numeric or not np.all(labels == np.round(labels)):
                raise ValueError("labels must be integer class ids; use PointSet.from_raw")
        labels = labels.astype(np.int64)
        k = int(labels.max())
        if labels.min() < 1:
            raise ValueError("class labels must be >= 1")
        sizes = np.bincount(labels, minlength=k + 1)[1:]
        if np.any(sizes == 0):
            missing = [c + 1 for c in np.flatnonzero(sizes == 0)]
            raise ValueError(f"class labels must be dense 1..k; missing {missing}")
        names = tuple(self.label_names) or tuple(str(c) for c in range(1, k + 1))
        if len(names) != k:
            raise ValueError(f"expected {k} label names, got {len(names)}")
        coords.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "label_names", names)

    @classmethod
    def from_raw(cls, coords, raw_labels, window=None, provenance=None) -> "PointSet":
        """Build from arbitrary (string or integer) labels, densifying them."""
        labels, names = densify_labels(raw_labels)
        return cls(coords, labels, names, window, provenance)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def k(self) -> int:
        return len(self.label_names)

    @property
    def class_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k + 1)[1:]

    def with_labels(self, labels) -> "PointSet":
        """Same locations, new dense labels (names kept when k is unchanged)."""
        labels = np.asarray(labels)
        k = int(labels.max())
        names = self.label_names if k == self.k else ()
        return PointSet(self.coords, labels, names, self.window)

    def subset(self, mask) -> "PointSet":
        mask = np.asarray(mask, dtype=bool)
        return PointSet(self.coords[mask], self.labels[mask], (), self.window)


@dataclass(frozen=True, eq=False)
class NnGraph:
    """Nearest-neighbor structure of a point set.

    Edges are stored as parallel arrays ``edge_src -> edge_dst`` sorted by
    base point; ``nn_sets[i]`` is the slice of ``edge_dst`` belonging to ``i``.
    ``R`` counts ordered mutual pairs (twice the number of reflexive pairs);
    ``Q = 2 * sum_l C(l, 2) Q_l`` where ``Q_l`` is the number of points that
    are the nearest neighbor of exactly ``l`` others.
    """

    n: int
    edge_src: np.ndarray
    edge_dst: np.ndarray
    edge_mutual: np.ndarray
    nn_count: np.ndarray
    nn_dist: np.ndarray
    in_degree: np.ndarray
    Q: int
    R: int
    Q_counts: dict[int, int]
    warnings: tuple[str, ...] = field(default=())

    @property
    def nn_sets(self) -> list[np.ndarray]:
        bounds = np.concatenate([[0], np.cumsum(self.nn_count)])
        return [self.edge_dst[bounds[i]:bounds[i + 1]] for i in range(self.n)]

    @property
    def n_edges(self) -> int:
        return self.edge_src.shape[0]

    @property
    def has_ties(self) -> bool:
        return bool(np.any(self.nn_count > 1))

    @property
    def mutual(self) -> set[tuple[int, int]]:
        """Ordered pairs ``(i, j)`` that are nearest neighbors of each other."""
        m = self.edge_mutual
        return set(zip(self.edge_src[m].tolist(), self.edge_dst[m].tolist()))

    @property
    def n_reflexive_pairs(self) -> int:
        return self.R // 2


def _pair_distances(coords: np.ndarray, rows: slice) -> np.ndarray:
    diff = coords[rows, None, :] - coords[None, :, :]
    # hypot of the raw differences is exactly symmetric in (i, j)
    return np.hypot(diff[..., 0], diff[..., 1])


def build_nn_graph(ps: PointSet, tie_epsilon: float = 0.0) -> NnGraph:
    """Exact nearest-neighbor graph with absolute tie slack.

    ``j`` is a nearest neighbor of ``i`` when ``d(i, j) <= min_j' d(i, j') +
    tie_epsilon``. With the default ``tie_epsilon = 0`` only exactly equal
    distances tie. Coincident points are each other's neighbors at distance
    zero and raise :class:`DegenerateConfigurationWarning`.
    """
    if tie_epsilon < 0 or not np.isfinite(tie_epsilon):
        raise ValueError("tie_epsilon must be a finite non-negative number")
    coords = ps.coords
    n = ps.n
    src_parts, dst_parts, dmin = [], [], np.empty(n)
    for start in range(0, n, _BLOCK):
        rows = slice(start, min(start + _BLOCK, n))
        d = _pair_distances(coords, rows)
        idx = np.arange(rows.start, rows.stop)
        d[idx - start, idx] = np.inf
        m = d.min(axis=1)
        dmin[rows] = m
        r, c = np.nonzero(d <= (m + tie_epsilon)[:, None])
        src_parts.append(r + start)
        dst_parts.append(c)
    src = np.concatenate(src_parts)
    dst = np.concatenate(dst_parts)
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]

    nn_count = np.bincount(src, minlength=n)
    # mutual: the reversed edge exists; encode edges as src*n+dst and look up
    keys = src.astype(np.int64) * n + dst
    rev = dst.astype(np.int64) * n + src
    mutual = np.isin(rev, keys, assume_unique=False)

    in_degree = np.bincount(dst, minlength=n)
    levels, counts = np.unique(in_degree[in_degree > 0], return_counts=True)
    q_counts = {int(lv): int(c) for lv, c in zip(levels, counts)}
    Q = 2 * sum(comb(lv, 2) * c for lv, c in q_counts.items())
    R = int(mutual.sum())

    notes = []
    if np.any(dmin == 0):
        notes.append("coincident points present; they are nearest neighbors at distance 0")
    if in_degree.max() > 6:
        notes.append(
            f"a point is the nearest neighbor of {int(in_degree.max())} others (> 6); "
            "the configuration is degenerate for planar NN moment formulas"
        )
    for msg in notes:
        warnings.warn(msg, DegenerateConfigurationWarning, stacklevel=2)

    for arr in (src, dst, mutual, nn_count, dmin, in_degree):
        arr.setflags(write=False)
    return NnGraph(
        n=n,
        edge_src=src,
        edge_dst=dst,
        edge_mutual=mutual,
        nn_count=nn_count,
        nn_dist=dmin,
        in_degree=in_degree,
        Q=int(Q),
        R=R,
        Q_counts=q_counts,
        warnings=tuple(notes),
    )


def min_interpoint_distance(ps: PointSet | np.ndarray, cls: int | None = None) -> float:
    """Smallest pairwise Euclidean distance, optionally within one class."""
    if isinstance(ps, PointSet):
        coords = ps.coords if cls is None else ps.coords[ps.labels == cls]
    else:
        if cls is not None:
            raise ValueError("a class id needs a PointSet")
        coords = np.asarray(ps, dtype=float)
    m = coords.shape[0]
    if m < 2:
        raise ValueError(f"need at least 2 points to form a distance, got {m}")
    best = np.inf
    for start in range(0, m, _BLOCK):
        rows = slice(start, min(start + _BLOCK, m))
        d = _pair_distances(coords, rows)
        idx = np.arange(rows.start, rows.stop)
        d[idx - start, idx] = np.inf
        best = min(best, float(d.min()))
    return best
