"""Acceptance criteria, each checked at its stated tolerance.

Criteria 1 to 3 need the Urkiola Woods tree coordinates (886 birch, 359
oak). Point ``URKIOLA_CSV`` at a file with columns ``x``, ``y`` and a label
column (``label``, ``marks`` or ``species``), or place it at
``tests/data/urkiola.csv``. Without it those checks fail.
"""

from __future__ import annotations

import csv
import os
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

from nnreflex import (
    PointSet,
    build_nn_graph,
    build_nnct,
    build_nnrct,
    build_scct,
    species_moments,
)
from nnreflex.cli import main as cli_main
from nnreflex.exact import fisher_one_sided
from nnreflex.io import Schema, ingest
from nnreflex.montecarlo.harness import simulate
from nnreflex.montecarlo.patterns import PatternSpec
from nnreflex.montecarlo.randomization import randomization_pvalues
from nnreflex.montecarlo.rng import stream
from nnreflex.stat_tests import (
    chi2_reflexivity,
    pielou_chi2,
    reflexivity_moments,
    species_correspondence_overall,
    z_cell_specific,
    z_directional,
    z_mixed_nonreflexivity,
    z_self_reflexivity,
)
from nnreflex.tables import NnRct, Scct

from .conftest import oracle_moments

SEED = 1
WORKERS = max(1, min(4, os.cpu_count() or 1))

PUBLISHED_RCT = (475, 259, 323, 188)
PUBLISHED_SELF = (668, 130)
PUBLISHED_MIXED = (218, 229)
# statistic: (value, p_asy of each reported side)
PUBLISHED = {
    "X2_P": (0.2346, {"": 0.6282}),
    "Z_dir": (0.5444, {">": 0.2931, "<": 0.7069}),
    "OR": (1.0674, {">": 0.3138, "<": 0.7274}),
    "X2_R": (8.9538, {"": 0.0114}),
    "Z_sr": (2.2539, {">": 0.0121}),
    "Z_mnr": (-1.9682, {"<": 0.0245}),
    "N_I": (11.4079, {"": 0.0033}),
    "Z_11": (2.9011, {">": 0.0019}),
    "Z_22": (2.7047, {">": 0.0034}),
}
PUBLISHED_P_RAND = {"chi2_reflexivity": 0.0044, "species_overall": 0.0032, "z_cell_1_right": 0.0011}
STAT_TOL, P_TOL, P_RAND_TOL = 0.001, 0.0005, 0.005


def urkiola_path() -> Path | None:
    env = os.environ.get("URKIOLA_CSV")
    for cand in ([Path(env)] if env else []) + [Path(__file__).parent / "data" / "urkiola.csv"]:
        if cand.is_file():
            return cand
    return None


def load_urkiola(path: Path) -> PointSet:
    with path.open() as fh:
        header = [h.strip().strip('"') for h in next(csv.reader(fh))]
    label = next(c for c in ("label", "marks", "species") if c in header)
    ps = ingest(path, Schema("x", "y", label))
    names = [n.lower() for n in ps.label_names]
    # class 1 = birch, class 2 = oak, as in the published tables
    dense = np.array([("birch", "oak").index(names[c - 1]) + 1 for c in ps.labels])
    return PointSet(ps.coords, dense, ("birch", "oak"), ps.window, ps.provenance)


MISSING = (
    "Urkiola coordinates not available (set URKIOLA_CSV or add tests/data/urkiola.csv); "
    "the check cannot run"
)


# ---- criterion 1 --------------------------------------------------------


def test_criterion_01_urkiola_tables(record):
    path = urkiola_path()
    if path is None:
        record(1, "tables", False, MISSING)
        pytest.fail(MISSING)
    start = time.perf_counter()
    ps = load_urkiola(path)
    g = build_nn_graph(ps)
    rct = build_nnrct(ps, g)
    scct = build_scct(build_nnct(ps, g))
    elapsed = time.perf_counter() - start
    cells = tuple(float(v) for v in (rct.n_sr, rct.n_mr, rct.n_snr, rct.n_mnr))
    self_col = tuple(float(v) for v in scct.self_counts)
    ok = cells == PUBLISHED_RCT and self_col == PUBLISHED_SELF and elapsed < 1.0
    record(1, "tables", ok, f"NN-RCT {cells} (published {PUBLISHED_RCT}), "
           f"SCCT self {self_col} (published {PUBLISHED_SELF}), {elapsed:.3f} s")
    assert ok


# ---- criterion 2 --------------------------------------------------------


def _table_statistics(rct: NnRct, sizes) -> dict[str, tuple[float, dict[str, float]]]:
    m = reflexivity_moments(np.asarray(sizes), rct)
    rng = np.random.default_rng(0)
    f_right = fisher_one_sided(rct, "right", rng=rng)
    f_left = fisher_one_sided(rct, "left", rng=rng)
    zr, zl = z_directional(rct, "right"), z_directional(rct, "left")
    x2p = pielou_chi2(rct)
    x2r = chi2_reflexivity(rct, m)
    zsr = z_self_reflexivity(rct, m, "right")
    zmnr = z_mixed_nonreflexivity(rct, m, "left")
    return {
        "X2_P": (x2p.statistic, {"": x2p.p_asymptotic}),
        "Z_dir": (zr.statistic, {">": zr.p_asymptotic, "<": zl.p_asymptotic}),
        "OR": (f_right.odds_ratio, {">": f_right.p_inclusive, "<": f_left.p_inclusive}),
        "X2_R": (x2r.statistic, {"": x2r.p_asymptotic}),
        "Z_sr": (zsr.statistic, {">": zsr.p_asymptotic}),
        "Z_mnr": (zmnr.statistic, {"<": zmnr.p_asymptotic}),
    }


def _species_statistics(scct: Scct, m) -> dict[str, tuple[float, dict[str, float]]]:
    n_i = species_correspondence_overall(scct, m)
    z11 = z_cell_specific(scct, m, 1)
    z22 = z_cell_specific(scct, m, 2)
    return {
        "N_I": (n_i.statistic, {"": n_i.p_asymptotic}),
        "Z_11": (z11.statistic, {">": z11.p_asymptotic}),
        "Z_22": (z22.statistic, {">": z22.p_asymptotic}),
    }


def _compare(got: dict) -> list[str]:
    bad = []
    for key, (stat, pvals) in got.items():
        ref_stat, ref_p = PUBLISHED[key]
        if abs(stat - ref_stat) > STAT_TOL:
            bad.append(f"{key} = {stat:.4f} (published {ref_stat})")
        for side, p in pvals.items():
            if abs(p - ref_p[side]) > P_TOL:
                bad.append(f"p{side}({key}) = {p:.4f} (published {ref_p[side]})")
    return bad


def test_criterion_02_urkiola_statistics(record):
    path = urkiola_path()
    if path is not None:
        ps = load_urkiola(path)
        g = build_nn_graph(ps)
        rct = build_nnrct(ps, g)
        got = _table_statistics(rct, ps.class_sizes)
        got.update(_species_statistics(build_scct(build_nnct(ps, g)), species_moments(ps, g)))
        bad = _compare(got)
        record(2, "all statistics from coordinates", not bad,
               "all nine statistics and p-values within tolerance" if not bad else "; ".join(bad))
        assert not bad
        return

    # Without coordinates the six statistics that depend only on the
    # published NN-RCT and class sizes can still be checked.
    got = _table_statistics(NnRct(*map(float, PUBLISHED_RCT)), (886, 359))
    bad = _compare(got)
    record(2, "NN-RCT statistics from published tables", not bad,
           "X2_P, Z_dir, odds ratio, X2_R, Z_sr, Z_mnr and their p-values within tolerance"
           if not bad else "; ".join(bad))
    assert not bad, bad

    # N_I, Z_11 and Z_22 need Q, which only the coordinates give. Scan Q to
    # show no single value reproduces all three published statistics.
    scct = Scct(np.array(PUBLISHED_SELF, float), np.array(PUBLISHED_MIXED, float))
    fits = []
    for q in range(600, 1200, 2):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            m = species_moments(np.array([886, 359]), (q, 734))
        if not _compare(_species_statistics(scct, m)):
            fits.append(q)
    detail = (f"{MISSING}; N_I, Z_11, Z_22 need Q from the coordinates; "
              f"even Q (R = 734) matching all three published values: {fits or 'none'}")
    record(2, "N_I, Z_11, Z_22", False, detail)
    pytest.fail(detail)


# ---- criterion 3 --------------------------------------------------------


def test_criterion_03_urkiola_randomization(record):
    path = urkiola_path()
    if path is None:
        record(3, "randomization p-values", False, MISSING)
        pytest.fail(MISSING)
    ps = load_urkiola(path)
    start = time.perf_counter()
    pvals = randomization_pvalues(ps, list(PUBLISHED_P_RAND), 10_000, stream(SEED, 1, 0))
    elapsed = time.perf_counter() - start
    bad = [f"{k} = {pvals[k]:.4f} (published {v})" for k, v in PUBLISHED_P_RAND.items()
           if abs(pvals[k] - v) > P_RAND_TOL]
    ok = not bad and elapsed < 60
    record(3, "randomization p-values", ok,
           f"{ {k: round(v, 4) for k, v in pvals.items()} }, {elapsed:.1f} s" + (f"; {bad}" if bad else ""))
    assert ok


# ---- criteria 4 to 7 ----------------------------------------------------


def test_criterion_04_csr_size(record):
    start = time.perf_counter()
    rep = simulate([PatternSpec("csr", 50, 50)], ["z_dir_right", "species_overall"],
                   n_mc=2000, seed=SEED, workers=WORKERS, kind="size")
    elapsed = time.perf_counter() - start
    z, ni = rep.rate(0, "z_dir_right"), rep.rate(0, "species_overall")
    ok = 0.070 <= z <= 0.105 and 0.035 <= ni <= 0.060 and elapsed < 300
    record(4, "CSR size n = 50", ok, f"Z_dir> {z:.4f} in [0.070, 0.105], N_I {ni:.4f} in [0.035, 0.060], "
           f"{elapsed:.1f} s")
    assert ok


def test_criterion_05_exact_variant_size(record):
    rep = simulate([PatternSpec("csr", 30, 30)], ["fisher_right", "fisher_right_exc"],
                   n_mc=2000, seed=SEED, workers=WORKERS, kind="size")
    inc, exc = rep.rate(0, "fisher_right"), rep.rate(0, "fisher_right_exc")
    ok = 0.040 <= inc <= 0.070 and 0.10 <= exc <= 0.16
    record(5, "exact variants n = 30", ok, f"inclusive {inc:.4f} in [0.040, 0.070], "
           f"exclusive {exc:.4f} in [0.10, 0.16]")
    assert ok


def test_criterion_06_case_iii_power(record):
    specs = [PatternSpec("alt-III", 40, 40, s=1 / 3), PatternSpec("alt-III", 40, 40, s=1 / 6)]
    rep = simulate(specs, ["chi2_reflexivity", "species_overall"], n_mc=2000, seed=SEED,
                   workers=WORKERS, kind="power")
    x_a, n_a, x_b = rep.rate(0, "chi2_reflexivity"), rep.rate(0, "species_overall"), rep.rate(1, "chi2_reflexivity")
    ok = x_a >= 0.99 and n_a >= 0.99 and 0.40 <= x_b <= 0.52
    record(6, "case III power", ok, f"s = 1/3: X2_R {x_a:.4f}, N_I {n_a:.4f} (>= 0.99); "
           f"s = 1/6: X2_R {x_b:.4f} in [0.40, 0.52]")
    assert ok


def test_criterion_07_case_v_power(record):
    rep = simulate([PatternSpec("alt-V", 40, 40, r=0.1)], ["fisher_right", "z_sr_left"],
                   n_mc=2000, seed=SEED, workers=WORKERS, kind="power")
    f, z = rep.rate(0, "fisher_right"), rep.rate(0, "z_sr_left")
    ok = f <= 0.01 and 0.79 <= z <= 0.89
    record(7, "case V power r = 1/10", ok, f"F> {f:.4f} (<= 0.01), Z_sr< {z:.4f} in [0.79, 0.89]")
    assert ok


# ---- criterion 8 --------------------------------------------------------


def _configurations(count: int, balanced: bool):
    for i in range(count):
        rng = stream(SEED, 8, i, int(balanced))
        n = 5 + i % 4
        if balanced:
            sizes = np.array([n // 2, n - n // 2])
        else:
            k = 2 + (i // 4) % 2
            cuts = np.sort(rng.choice(np.arange(1, n), k - 1, replace=False))
            sizes = np.diff(np.concatenate([[0], cuts, [n]]))
        coords = rng.random((n, 2))
        yield coords, sizes, PointSet(coords, np.repeat(np.arange(1, len(sizes) + 1), sizes))


def test_criterion_08_exact_moments(record):
    start = time.perf_counter()
    worst = 0.0
    for coords, sizes, ps in _configurations(50, balanced=False):
        g = build_nn_graph(ps)
        oracle = oracle_moments(coords, sizes)
        m = species_moments(ps, g)
        worst = max(worst, np.abs(m.expected - oracle["self_mean"]).max(),
                    np.abs(m.cov - oracle["self_cov"]).max())
        rct = build_nnrct(ps, g)
        if rct.n_r > 0 and rct.n_nr > 0:
            r = reflexivity_moments(ps, rct)
            worst = max(worst, abs(r.e_sr - oracle["sr_mean"]), abs(r.e_mnr - oracle["mnr_mean"]))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 30
    record(8, "exact moments", ok, f"50 configurations, n in 5..8, k in 2..3: max |error| {worst:.2e} "
           f"(<= 1e-10), {elapsed:.2f} s")
    assert ok


def test_criterion_08_approximate_variances(record):
    rel_sr, rel_mnr, sums = [], [], np.zeros(4)
    for coords, sizes, ps in _configurations(50, balanced=True):
        rct = build_nnrct(ps, build_nn_graph(ps))
        if not (rct.n_r > 0 and rct.n_nr > 0):
            continue
        r = reflexivity_moments(ps, rct)
        oracle = oracle_moments(coords, sizes)
        rel_sr.append(abs(r.var_sr - oracle["sr_var"]) / oracle["sr_var"])
        rel_mnr.append(abs(r.var_mnr - oracle["mnr_var"]) / oracle["mnr_var"])
        sums += (r.var_sr, oracle["sr_var"], r.var_mnr, oracle["mnr_var"])
    n_sr = sum(e <= 0.25 for e in rel_sr)
    n_mnr = sum(e <= 0.25 for e in rel_mnr)
    ok = n_sr == len(rel_sr) and n_mnr == len(rel_mnr)
    record(8, "approximate variances", ok,
           f"balanced two-class configurations with both pair types: Var[N_sr] within 25% on "
           f"{n_sr}/{len(rel_sr)}, Var[N_mnr] on {n_mnr}/{len(rel_mnr)} (worst {max(rel_mnr):.2f}); "
           f"summed analytic/oracle ratios {sums[0] / sums[1]:.3f} and {sums[2] / sums[3]:.3f}")
    assert ok


# ---- criterion 9 --------------------------------------------------------


def test_criterion_09_identities(record):
    rng = stream(SEED, 9)
    worst_dir = worst_r = worst_f = 0.0
    order_ok = True
    for cells in rng.integers(1, 300, (1000, 4)):
        t = NnRct(*map(float, cells))
        z = z_directional(t).statistic
        worst_dir = max(worst_dir, abs(z * z - pielou_chi2(t, correction=False).statistic))
        m = reflexivity_moments(np.array(rng.integers(2, 500, 2)), t)
        zs, zm = z_self_reflexivity(t, m).statistic, z_mixed_nonreflexivity(t, m).statistic
        worst_r = max(worst_r, abs(chi2_reflexivity(t, m).statistic - (zs * zs + zm * zm)))
        right = fisher_one_sided(t, "right", rng=rng)
        left = fisher_one_sided(t, "left", rng=rng)
        worst_f = max(worst_f, abs(right.p_inclusive + left.p_inclusive - 1 - right.p_table))
        for res in (right, left):
            order_ok &= res.p_exclusive <= res.p_mid <= res.p_inclusive
            order_ok &= res.p_tocher in (res.p_exclusive, res.p_inclusive)
            order_ok &= abs(res.p_inclusive - res.p_exclusive - res.p_table) <= 1e-12
    ok = worst_dir <= 1e-10 and worst_r <= 1e-10 and worst_f <= 1e-12 and order_ok
    record(9, "algebraic identities", ok,
           f"1000 tables: |Z_dir^2 - X2_P| {worst_dir:.1e}, |X2_R - Z_sr^2 - Z_mnr^2| {worst_r:.1e}, "
           f"|p>+p< - 1 - p_t| {worst_f:.1e}, variant ordering {'holds' if order_ok else 'violated'}")
    assert ok


# ---- criterion 10 -------------------------------------------------------


@pytest.mark.parametrize(
    "args",
    [
        ["simulate-size", "--family", "csr", "--sizes", "10..30", "--exact-variants"],
        ["simulate-size", "--family", "rl-matern", "--kappa", "4", "--backgrounds", "5"],
        ["simulate-power", "--family", "alt-IV", "--sizes", "20", "--support", "1,3"],
    ],
    ids=["csr", "rl-matern", "alt-IV"],
)
def test_criterion_10_determinism(args, tmp_path, capsys, record):
    outputs = []
    for workers in (1, 2, 3):
        stem = tmp_path / f"w{workers}"
        code = cli_main(args + ["--n-mc", "200", "--seed", "17", "--workers", str(workers),
                                "--format", "csv", "--output", str(stem)])
        assert code == 0
        outputs.append((tmp_path / f"w{workers}.report.csv").read_bytes())
    capsys.readouterr()
    ok = outputs[0] == outputs[1] == outputs[2]
    record(10, f"{args[0]} {args[2]}", ok, f"CSV byte-identical for 1, 2 and 3 workers: {ok}")
    assert ok
