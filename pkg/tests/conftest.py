"""Shared fixtures and brute-force oracles."""

from __future__ import annotations

import itertools
import math
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def brute_nn_sets(coords) -> list[set[int]]:
    """Nearest-neighbor sets by plain double loops (exact ties only)."""
    pts = [tuple(map(float, p)) for p in coords]
    out = []
    for i, (xi, yi) in enumerate(pts):
        best, nn = math.inf, set()
        for j, (xj, yj) in enumerate(pts):
            if i == j:
                continue
            d = math.hypot(xi - xj, yi - yj)
            if d < best:
                best, nn = d, {j}
            elif d == best:
                nn.add(j)
        out.append(nn)
    return out


def distinct_labelings(sizes) -> list[np.ndarray]:
    """Every labeling of ``sum(sizes)`` points with the given class sizes."""
    base = np.repeat(np.arange(1, len(sizes) + 1), sizes)
    return [np.array(p) for p in sorted(set(itertools.permutations(base.tolist())))]


@pytest.fixture
def collinear():
    """Points at 0, 1, 3 on a line labeled A, A, B."""
    from nnreflex import PointSet

    return PointSet.from_raw([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]], ["A", "A", "B"])


@pytest.fixture
def two_class_pattern():
    from nnreflex import PointSet

    rng = np.random.default_rng(7)
    coords = rng.random((60, 2))
    labels = np.repeat([1, 2], [35, 25])
    return PointSet(coords, rng.permutation(labels))


@pytest.fixture
def three_class_pattern():
    from nnreflex import PointSet

    rng = np.random.default_rng(11)
    coords = rng.random((45, 2))
    return PointSet.from_raw(coords, rng.permutation(np.repeat(["oak", "pine", "ash"], [20, 15, 10])))


def oracle_moments(coords, sizes) -> dict:
    """Exact random-labeling moments by enumerating every labeling.

    Returns the mean and covariance of the NNCT diagonal and the means and
    variances of ``N_sr`` and ``N_mnr`` (ordered-edge weights).
    """
    nn = brute_nn_sets(coords)
    edges = [(i, j, 1 / len(s), i in nn[j]) for i, s in enumerate(nn) for j in s]
    selfs, srs, mnrs = [], [], []
    for lab in distinct_labelings(sizes):
        diag = np.zeros(len(sizes))
        sr = mnr = 0.0
        for i, j, w, mutual in edges:
            same = lab[i] == lab[j]
            if same:
                diag[lab[i] - 1] += w
            if same and mutual:
                sr += w
            if not same and not mutual:
                mnr += w
        selfs.append(diag)
        srs.append(sr)
        mnrs.append(mnr)
    selfs = np.array(selfs)
    return {
        "self_mean": selfs.mean(axis=0),
        "self_cov": np.cov(selfs, rowvar=False, bias=True),
        "sr_mean": float(np.mean(srs)),
        "sr_var": float(np.var(srs)),
        "mnr_mean": float(np.mean(mnrs)),
        "mnr_var": float(np.var(mnrs)),
    }


# ---- acceptance bookkeeping ---------------------------------------------

_ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


@pytest.fixture
def record():
    """Log one acceptance check; the summary prints one line per criterion."""

    def _record(criterion: int, part: str, passed: bool, detail: str) -> None:
        _ACCEPTANCE.setdefault(criterion, []).append((part, bool(passed), detail))
        print(f"criterion {criterion} [{part}] {'PASS' if passed else 'FAIL'}: {detail}")

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(_ACCEPTANCE):
        parts = _ACCEPTANCE[crit]
        ok = all(p for _, p, _ in parts)
        tr.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'}")
        for part, passed, detail in parts:
            tr.write_line(f"    [{part}] {'pass' if passed else 'FAIL'}: {detail}")
