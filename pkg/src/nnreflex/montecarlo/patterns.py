"""Null and alternative two-class pattern generators.

Class 1 points are called ``X`` and class 2 points ``Y``. Offsets used by
the alternatives may push points out of the window; they are kept as they
are.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..geom import PointSet, min_interpoint_distance

__all__ = [
    "FAMILIES",
    "NULL_FAMILIES",
    "ALT_IV_SUPPORTS",
    "PatternSpec",
    "generate",
    "random_label",
]

FAMILIES = ("csr", "rl-uniform", "rl-matern", "alt-I", "alt-II", "alt-III", "alt-IV", "alt-V")
NULL_FAMILIES = ("csr", "rl-uniform", "rl-matern")
RL_FAMILIES = ("rl-uniform", "rl-matern")

# (S_1, S_2) per support pair as (xmin, xmax, ymin, ymax)
ALT_IV_SUPPORTS = {
    1: ((0.0, 1.0, 0.0, 1.0), (0.0, 1.0, 0.0, 1.0)),
    2: ((0.0, 5 / 6, 0.0, 5 / 6), (1 / 6, 1.0, 1 / 6, 1.0)),
    3: ((0.0, 3 / 4, 0.0, 3 / 4), (1 / 4, 1.0, 1 / 4, 1.0)),
}
UNIT = (0.0, 1.0, 0.0, 1.0)
_MATERN_RETRIES = 100


@dataclass(frozen=True)
class PatternSpec:
    """One simulation scenario.

    Parameters
    ----------
    family : str
        One of :data:`FAMILIES`.
    n1, n2 : int
        Class sizes (ignored by ``rl-matern``, whose size is random).
    sigma : float
        ``alt-I`` spread: the standard deviation of each coordinate, or with
        ``sigma_is_variance`` the diagonal of the covariance matrix.
    p : float
        ``alt-II`` probability that a ``Y`` is attached to an ``X``.
    s : float
        ``alt-III`` shift of the two supports.
    support : int
        ``alt-IV`` support pair, 1 to 3.
    r : float
        Offset radius for ``alt-IV`` and ``alt-V``; cluster radius for
        ``rl-matern``.
    radius_law : str
        ``"uniform"`` (default) draws each ``alt-IV``/``alt-V`` offset length
        from ``U(0, r)``; ``"fixed"`` puts every offset at exactly ``r``.
    kappa, mu : float
        ``rl-matern`` parent intensity and mean cluster size.
    """

    family: str
    n1: int = 0
    n2: int = 0
    sigma: float | None = None
    sigma_is_variance: bool = False
    p: float | None = None
    s: float | None = None
    support: int | None = None
    r: float | None = None
    radius_law: str = "uniform"
    kappa: float | None = None
    mu: float | None = None
    window: tuple[float, float, float, float] = UNIT

    def __post_init__(self):
        f = self.family
        if f not in FAMILIES:
            raise ValueError(f"unknown family {f!r}; choose from {FAMILIES}")
        xmin, xmax, ymin, ymax = self.window
        if not (xmin < xmax and ymin < ymax):
            raise ValueError(f"degenerate window {self.window}")
        if f != "rl-matern":
            if int(self.n1) != self.n1 or int(self.n2) != self.n2:
                raise ValueError("class sizes must be integers")
            if self.n1 < 1 or self.n2 < 1 or self.n1 + self.n2 < 2:
                raise ValueError(f"class sizes must be positive, got ({self.n1}, {self.n2})")
        need = {
            "alt-I": ("sigma",),
            "alt-II": ("p",),
            "alt-III": ("s",),
            "alt-IV": ("support", "r"),
            "alt-V": ("r",),
            "rl-matern": ("kappa", "mu", "r"),
        }.get(f, ())
        for name in need:
            if getattr(self, name) is None:
                raise ValueError(f"{f} needs parameter {name}")
        if f == "alt-I" and not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if f == "alt-II" and not 0 <= self.p <= 1:
            raise ValueError("p must lie in [0, 1]")
        if f == "alt-II" and self.n1 < 2:
            raise ValueError("alt-II needs n1 >= 2 to define the minimum X distance")
        if f == "alt-III" and not 0 <= self.s < 1:
            raise ValueError("s must lie in [0, 1)")
        if f == "alt-IV":
            if self.support not in ALT_IV_SUPPORTS:
                raise ValueError(f"support must be one of {sorted(ALT_IV_SUPPORTS)}")
            if self.n1 < 2 or self.n2 < 2:
                raise ValueError("alt-IV needs at least 2 points per class")
        if self.radius_law not in ("uniform", "fixed"):
            raise ValueError("radius_law must be 'uniform' or 'fixed'")
        if f in ("alt-IV", "alt-V", "rl-matern") and not 0 < self.r < 1:
            raise ValueError("r must lie in (0, 1)")
        if f == "rl-matern":
            if not self.kappa >= 1:
                raise ValueError("kappa must be >= 1")
            if not self.mu > 0:
                raise ValueError("mu must be positive")

    @property
    def is_null(self) -> bool:
        return self.family in NULL_FAMILIES

    @property
    def is_random_labeling(self) -> bool:
        return self.family in RL_FAMILIES

    @property
    def label(self) -> str:
        """Short human-readable scenario name used in reports."""
        parts = []
        if self.family != "rl-matern":
            parts.append(f"n1={self.n1}")
            parts.append(f"n2={self.n2}")
        for name in ("sigma", "p", "s", "support", "r", "kappa", "mu"):
            v = getattr(self, name)
            if v is not None:
                parts.append(f"{name}={v:.6g}")
        return f"{self.family}({','.join(parts)})"

    def params(self) -> dict:
        out = {"family": self.family}
        if self.family != "rl-matern":
            out.update(n1=int(self.n1), n2=int(self.n2))
        for name in ("sigma", "p", "s", "support", "r", "kappa", "mu"):
            v = getattr(self, name)
            if v is not None:
                out[name] = v
        if self.family == "alt-I":
            out["sigma_is_variance"] = self.sigma_is_variance
        if self.family in ("alt-IV", "alt-V"):
            out["radius_law"] = self.radius_law
        return out


def _uniform(rng, m: int, box) -> np.ndarray:
    xmin, xmax, ymin, ymax = box
    u = rng.random((m, 2))
    return np.column_stack([xmin + (xmax - xmin) * u[:, 0], ymin + (ymax - ymin) * u[:, 1]])


def _polar(rng, m: int, radius) -> np.ndarray:
    t = rng.uniform(0.0, 2.0 * math.pi, m)
    return np.column_stack([radius * np.cos(t), radius * np.sin(t)])


def _two_class(x: np.ndarray, y: np.ndarray, window) -> PointSet:
    coords = np.vstack([x, y])
    labels = np.repeat([1, 2], [len(x), len(y)])
    return PointSet(coords, labels, ("1", "2"), window)


def _matern(spec: PatternSpec, rng) -> np.ndarray:
    xmin, xmax, ymin, ymax = spec.window
    area = (xmax - xmin) * (ymax - ymin)
    for _ in range(_MATERN_RETRIES):
        parents = _uniform(rng, rng.poisson(spec.kappa * area), spec.window)
        sizes = rng.poisson(spec.mu, len(parents))
        m = int(sizes.sum())
        if m >= 4:
            centers = np.repeat(parents, sizes, axis=0)
            radius = spec.r * np.sqrt(rng.random(m))
            return centers + _polar(rng, m, radius)
        warnings.warn(f"Matern realization with {m} points; regenerating", stacklevel=3)
    raise RuntimeError(f"no Matern realization with >= 4 points in {_MATERN_RETRIES} tries")


def _offset_lengths(rng, m: int, spec: PatternSpec) -> np.ndarray:
    if spec.radius_law == "fixed":
        return np.full(m, spec.r)
    return rng.uniform(0.0, spec.r, m)


def _partners(rng, seeds: np.ndarray, total: int, spec: PatternSpec) -> np.ndarray:
    # partner j of the remaining points is offset from seed j mod n_seed
    m = total - len(seeds)
    base = seeds[np.arange(m) % len(seeds)]
    return base + _polar(rng, m, _offset_lengths(rng, m, spec))


def generate(spec: PatternSpec, rng: np.random.Generator) -> PointSet:
    """Draw one labeled pattern from ``spec``."""
    f = spec.family
    w = spec.window
    n1, n2 = int(spec.n1), int(spec.n2)
    if f == "csr":
        return _two_class(_uniform(rng, n1, w), _uniform(rng, n2, w), w)
    if f == "rl-uniform":
        return random_label(_two_class(_uniform(rng, n1, w), _uniform(rng, n2, w), w), rng)
    if f == "rl-matern":
        z = _matern(spec, rng)
        m1 = len(z) // 2
        labels = rng.permutation(np.repeat([1, 2], [m1, len(z) - m1]))
        return PointSet(z, labels, ("1", "2"), w)
    if f == "alt-I":
        x = _uniform(rng, n1, w)
        sd = math.sqrt(spec.sigma) if spec.sigma_is_variance else spec.sigma
        y = rng.normal(0.5, sd, (n2, 2))
        return _two_class(x, y, w)
    if f == "alt-II":
        x = _uniform(rng, n1, w)
        dmin = min_interpoint_distance(x)
        attached = rng.random(n2) < spec.p
        anchors = x[rng.integers(0, n1, n2)]
        offsets = _polar(rng, n2, rng.uniform(0.0, dmin, n2))
        y = np.where(attached[:, None], anchors + offsets, _uniform(rng, n2, w))
        return _two_class(x, y, w)
    if f == "alt-III":
        s = spec.s
        x = _uniform(rng, n1, (0.0, 1.0 - s, 0.0, 1.0 - s))
        y = _uniform(rng, n2, (s, 1.0, s, 1.0))
        return _two_class(x, y, w)
    if f == "alt-IV":
        s1, s2 = ALT_IV_SUPPORTS[spec.support]
        xs = _uniform(rng, n1 // 2, s1)
        ys = _uniform(rng, n2 // 2, s2)
        x = np.vstack([xs, _partners(rng, xs, n1, spec)])
        y = np.vstack([ys, _partners(rng, ys, n2, spec)])
        return _two_class(x, y, w)
    # alt-V
    x = _uniform(rng, n1, w)
    y = x[rng.integers(0, n1, n2)] + _polar(rng, n2, _offset_lengths(rng, n2, spec))
    return _two_class(x, y, w)


def random_label(ps: PointSet, rng: np.random.Generator) -> PointSet:
    """Same locations with the label multiset randomly permuted."""
    return PointSet(ps.coords, rng.permutation(ps.labels), ps.label_names, ps.window)
