"""Report documents and their JSON, CSV and text renderings.

JSON keeps full double precision and writes non-finite numbers as ``null``,
so a report survives ``loads`` followed by ``dumps`` byte for byte. CSV
numbers carry 6 significant digits.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict
from typing import Any

import numpy as np

from .geom import NnGraph, PointSet
from .montecarlo.harness import SimulationReport
from .stat_tests import PosthocComparison, TestResult
from .tables import Nnct, NnRct, Scct

__all__ = [
    "clean",
    "to_json",
    "battery_document",
    "simulation_document",
    "battery_csv",
    "simulation_csv",
    "battery_text",
    "simulation_text",
    "tables_text",
    "BATTERY_CSV_COLUMNS",
    "SIMULATION_CSV_COLUMNS",
]

BATTERY_CSV_COLUMNS = (
    "comparison",
    "test",
    "alternative",
    "statistic",
    "df",
    "p_asymptotic",
    "p_randomization",
    "error",
)
SIMULATION_CSV_COLUMNS = (
    "spec_index",
    "scenario",
    "test",
    "replicates",
    "rejections",
    "undefined",
    "rate",
    "se",
    "band_low",
    "band_high",
    "flag",
)


def clean(obj: Any) -> Any:
    """Convert to plain JSON types; NaN and infinities become ``None``."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def to_json(doc: dict) -> str:
    return json.dumps(clean(doc), indent=2, allow_nan=False) + "\n"


def _result_dict(comparison: str, r: TestResult) -> dict:
    return {
        "comparison": comparison,
        "test": r.name,
        "alternative": r.alternative,
        "statistic": r.statistic,
        "reference": r.reference,
        "df": r.df,
        "p_asymptotic": r.p_asymptotic,
        "p_randomization": r.p_randomization,
        "error": r.error,
        "diagnostics": r.diagnostics,
    }


def _tables_dict(rct: NnRct, nnct: Nnct, scct: Scct, names) -> dict:
    return {
        "nnrct": {
            "n_sr": rct.n_sr,
            "n_mr": rct.n_mr,
            "n_snr": rct.n_snr,
            "n_mnr": rct.n_mnr,
            "n_r": rct.n_r,
            "n_nr": rct.n_nr,
            "c_s": rct.c_s,
            "c_m": rct.c_m,
            "n": rct.n,
        },
        "nnct": {"classes": list(names), "counts": nnct.counts},
        "scct": {"classes": list(names), "self": scct.self_counts, "mixed": scct.mixed_counts},
    }


def _data_dict(ps: PointSet, g: NnGraph) -> dict:
    return {
        "n": ps.n,
        "k": ps.k,
        "classes": list(ps.label_names),
        "class_sizes": ps.class_sizes,
        "window": ps.window,
        "Q": g.Q,
        "R": g.R,
        "Q_counts": {str(k): v for k, v in sorted(g.Q_counts.items())},
        "ties": g.has_ties,
        "warnings": list(g.warnings),
        "provenance": ps.provenance,
    }


def battery_document(
    ps: PointSet,
    g: NnGraph,
    tables: tuple[NnRct, Nnct, Scct],
    results: dict[str, TestResult],
    config: dict,
    posthoc: list[PosthocComparison] | None = None,
    version: str = "",
) -> dict:
    rows = [_result_dict("overall", r) for r in results.values()]
    ph = []
    for comp in posthoc or []:
        ph.append({"comparison": comp.label, "mode": comp.mode, "classes": comp.classes, "skipped": comp.skipped})
        rows.extend(_result_dict(comp.label, r) for r in comp.results.values())
    return clean(
        {
            "kind": "battery",
            "version": version,
            "config": config,
            "data": _data_dict(ps, g),
            "tables": _tables_dict(*tables, ps.label_names),
            "posthoc": ph,
            "results": rows,
        }
    )


def simulation_document(report: SimulationReport) -> dict:
    return clean({"kind": report.kind, "metadata": report.metadata, "rows": [asdict(r) for r in report.rows]})


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.6g}"
    return str(v)


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def battery_csv(doc: dict) -> str:
    return _csv(BATTERY_CSV_COLUMNS, doc["results"])


def simulation_csv(report: SimulationReport) -> str:
    return _csv(SIMULATION_CSV_COLUMNS, [asdict(r) for r in report.rows])


def _num(v, width=10) -> str:
    if v is None:
        return "-".rjust(width)
    if isinstance(v, float) and not v.is_integer():
        return f"{v:.4f}".rjust(width)
    return f"{int(v)}".rjust(width) if isinstance(v, (int, float)) else str(v).rjust(width)


def tables_text(doc: dict) -> str:
    """NN-RCT and SCCT laid out as pair type by reflexivity and class by pair type."""
    t = doc["tables"]
    r = t["nnrct"]
    lines = ["NN reflexivity contingency table", f"{'':22}{'self':>10}{'mixed':>10}{'total':>10}"]
    lines.append(f"{'reflexive pairs':22}{_num(r['n_sr'])}{_num(r['n_mr'])}{_num(r['n_r'])}")
    lines.append(f"{'non-reflexive pairs':22}{_num(r['n_snr'])}{_num(r['n_mnr'])}{_num(r['n_nr'])}")
    lines.append(f"{'total':22}{_num(r['c_s'])}{_num(r['c_m'])}{_num(r['n'])}")
    s = t["scct"]
    lines += ["", "Species correspondence contingency table", f"{'class':22}{'self':>10}{'mixed':>10}{'total':>10}"]
    for name, a, b in zip(s["classes"], s["self"], s["mixed"]):
        lines.append(f"{name[:22]:22}{_num(a)}{_num(b)}{_num(a + b)}")
    lines.append(f"{'total':22}{_num(sum(s['self']))}{_num(sum(s['mixed']))}{_num(sum(s['self']) + sum(s['mixed']))}")
    d = doc["data"]
    lines += ["", f"n = {d['n']}, Q = {d['Q']}, R = {d['R']}"]
    return "\n".join(lines) + "\n"


def _short(name: str) -> str:
    return (
        name.replace("pielou_chi2", "X2_P")
        .replace("chi2_reflexivity", "X2_R")
        .replace("species_overall", "N_I")
        .replace("_right", ">")
        .replace("_left", "<")
    )


def battery_text(doc: dict) -> str:
    """Tables, then one block per comparison with TS, p_asy and p_rand rows."""
    out = [tables_text(doc)]
    groups: dict[str, list[dict]] = {}
    for row in doc["results"]:
        groups.setdefault(row["comparison"], []).append(row)
    for comp, rows in groups.items():
        out.append(f"Tests ({comp})")
        out.append(f"{'':8}" + "".join(f"{_short(r['test']):>14}" for r in rows))
        for label, key in (("TS", "statistic"), ("p_asy", "p_asymptotic"), ("p_rand", "p_randomization")):
            cells = []
            for r in rows:
                v = r[key]
                cells.append(f"{'-' if v is None else f'{v:.4f}':>14}")
            out.append(f"{label:8}" + "".join(cells))
        errors = [f"  {r['test']}: {r['error']}" for r in rows if r.get("error")]
        if errors:
            out.append("undefined:")
            out.extend(errors)
        out.append("")
    return "\n".join(out)


def simulation_text(report: SimulationReport) -> str:
    """One row per scenario, one column per test."""
    tests = report.tests()
    by_spec: dict[int, dict[str, Any]] = {}
    labels: dict[int, str] = {}
    for row in report.rows:
        by_spec.setdefault(row.spec_index, {})[row.test] = row
        labels[row.spec_index] = row.scenario
    width = max(len(s) for s in labels.values()) + 2
    lines = [f"{'scenario':{width}}" + "".join(f"{_short(t):>16}" for t in tests)]
    for idx in sorted(by_spec):
        cells = []
        for t in tests:
            row = by_spec[idx].get(t)
            if row is None:
                cells.append(f"{'-':>16}")
                continue
            mark = {"liberal": "L", "conservative": "C"}.get(row.flag or "", "")
            cells.append(f"{f'{row.rate:.4f}{mark}':>16}")
        lines.append(f"{labels[idx]:{width}}" + "".join(cells))
    meta = report.metadata
    lines.append("")
    lines.append(
        f"{report.kind}: alpha = {meta.get('alpha')}, n_mc = {meta.get('n_mc')}, seed = {meta.get('seed')}"
        + ("  (L = liberal, C = conservative)" if report.kind == "size" else "")
    )
    return "\n".join(lines) + "\n"
