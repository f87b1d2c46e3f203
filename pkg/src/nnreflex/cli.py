"""Command line interface.

Subcommands::

    nnreflex test DATA.csv        run the test battery on a labeled pattern
    nnreflex tables DATA.csv      print the contingency tables only
    nnreflex simulate-size ...    empirical size under CSR or random labeling
    nnreflex simulate-power ...   empirical power under the alternatives

Settings come from built-in defaults, then ``NNREFLEX_SEED`` for the seed,
then a ``key = value`` file given by ``--config``, then the flags.
``test`` and ``simulate-*`` write ``<stem>.report.json`` and
``<stem>.report.csv`` and print a report to standard output.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

from . import __version__
from .errors import UndefinedStatisticError
from .geom import PointSet, build_nn_graph
from .io import Schema, ingest, parse_window
from .montecarlo.harness import EXACT_VARIANT_TESTS, SimulationReport, simulate
from .montecarlo.patterns import PatternSpec
from .montecarlo.randomization import randomization_pvalues
from .montecarlo.rng import check_seed, default_seed, stream
from .reports import (
    battery_csv,
    battery_document,
    battery_text,
    simulation_csv,
    simulation_document,
    simulation_text,
    tables_text,
    to_json,
)
from .stat_tests import POSTHOC_MODES, TEST_GROUPS, battery, posthoc_battery
from .tables import WEIGHTINGS, build_nnct, build_nnrct, build_scct

__all__ = ["RunConfig", "main", "build_parser", "parse_int_range", "parse_values", "read_config_file"]

DEFAULT_SIZE_STEP = 10
_SPECIES_TESTS = ("species_overall", "z_cell_")


class UsageError(ValueError):
    """Bad command line grid or settings; exit status 2."""


@dataclass(frozen=True)
class RunConfig:
    """Validated settings shared by every subcommand."""

    alpha: float = 0.05
    n_mc: int = 10_000
    seed: int = 0
    weights: str = "ordered-edge"
    tie_epsilon: float = 0.0
    yates: bool = True
    tests: tuple[str, ...] | None = None
    posthoc: str | None = None
    output_format: str = "text"
    lenient: bool = False

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.n_mc < 99:
            raise ValueError(f"n_mc must be at least 99, got {self.n_mc}")
        check_seed(self.seed)
        if self.weights not in WEIGHTINGS:
            raise ValueError(f"weights must be one of {WEIGHTINGS}")
        if not (self.tie_epsilon >= 0 and math.isfinite(self.tie_epsilon)):
            raise ValueError("tie_epsilon must be a finite non-negative number")
        if self.posthoc is not None and self.posthoc not in POSTHOC_MODES:
            raise ValueError(f"posthoc must be one of {POSTHOC_MODES}")
        if self.output_format not in ("text", "json", "csv"):
            raise ValueError("format must be text, json or csv")


def parse_int_range(text: str, default_step: int = DEFAULT_SIZE_STEP) -> list[int]:
    """``"10..50"``, ``"10..50:5"``, ``"10,20,40"`` or a single integer.

    A range without an explicit step advances by ``default_step``.
    """
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            span, _, step = part.partition(":")
            lo, hi = (int(v) for v in span.split(".."))
            step = int(step) if step else default_step
            if step <= 0 or hi < lo:
                raise UsageError(f"bad range {part!r}")
            out.extend(range(lo, hi + 1, step))
        else:
            out.append(int(part))
    if not out:
        raise UsageError(f"empty grid {text!r}")
    return out


def parse_values(text: str) -> list[float]:
    """Comma-separated numbers; fractions such as ``1/6`` are allowed."""
    vals = [float(Fraction(v.strip())) for v in text.split(",") if v.strip()]
    if not vals:
        raise UsageError(f"empty value list {text!r}")
    return vals


def read_config_file(path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment; dashes in keys map to underscores."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value settings file")
    p.add_argument("--alpha", type=float, default=0.05, help="nominal level (default 0.05)")
    p.add_argument("--n-mc", dest="n_mc", type=int, default=10_000, help="Monte Carlo replications (default 10000)")
    p.add_argument("--seed", type=lambda s: int(s, 0), default=None, help="64-bit seed (default $NNREFLEX_SEED or 0)")
    p.add_argument("--weights", choices=WEIGHTINGS, default="ordered-edge", help="table weighting mode")
    p.add_argument("--no-yates", dest="yates", action="store_false",
                   help="Pielou chi-square without continuity correction")
    p.add_argument("--format", dest="output_format", choices=("text", "json", "csv"), default="text",
                   help="what to print on standard output")
    p.add_argument("--output", help="output file stem (default: derived from the input)")
    p.add_argument("--tests", help=f"comma-separated test groups ({', '.join(TEST_GROUPS)}) or test names")


def _add_data(p: argparse.ArgumentParser) -> None:
    p.add_argument("data", help="delimited text file with x, y and label columns")
    p.add_argument("--x-col", default="x")
    p.add_argument("--y-col", default="y")
    p.add_argument("--label-col", default="label")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--window", help="study window xmin,xmax,ymin,ymax")
    p.add_argument("--tie-epsilon", type=float, default=0.0, help="absolute slack for NN distance ties")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nnreflex", description="Nearest-neighbor reflexivity and species-correspondence tests."
    )
    parser.add_argument("--version", action="version", version=f"nnreflex {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="run the test battery on a data file")
    _add_data(p)
    _add_common(p)
    p.add_argument("--posthoc", choices=POSTHOC_MODES, help="multi-class follow-up comparisons")
    p.add_argument("--lenient", action="store_true", help="report undefined statistics instead of failing")

    p = sub.add_parser("tables", help="print the NN-RCT, NNCT and SCCT")
    _add_data(p)
    p.add_argument("--weights", choices=WEIGHTINGS, default="ordered-edge")
    p.add_argument("--format", dest="output_format", choices=("text", "json"), default="text")

    for name, families in (("simulate-size", ("csr", "rl-uniform", "rl-matern")),
                           ("simulate-power", ("alt-I", "alt-II", "alt-III", "alt-IV", "alt-V"))):
        p = sub.add_parser(name, help=f"empirical {name.split('-')[1]} study")
        _add_common(p)
        p.add_argument("--family", choices=families, required=True)
        p.add_argument("--sizes", help="class size grid, e.g. 10..50 (step 10), 10..50:5 or 20,40")
        p.add_argument("--n1", type=int, help="hold class 1 at this size while --sizes varies class 2")
        p.add_argument("--backgrounds", type=int, default=100, help="background patterns for random labeling")
        p.add_argument("--workers", type=int, default=1, help="worker processes")
        p.add_argument("--exact-variants", action="store_true",
                       help="report the inclusive, exclusive, mid-p and Tocher exact tests")
        p.add_argument("--kappa", help="Matern parent intensities, e.g. 2..10:2")
        p.add_argument("--mu", help="Matern mean cluster sizes (default floor(100 / kappa))")
        p.add_argument("--r", help="radius values (Matern cluster radius or offset radius)")
        p.add_argument("--sigma", help="alt-I standard deviations")
        p.add_argument("--sigma-is-variance", action="store_true", help="read --sigma as a variance")
        p.add_argument("--p", help="alt-II attachment probabilities")
        p.add_argument("--s", help="alt-III shifts")
        p.add_argument("--support", help="alt-IV support pairs (1, 2, 3)")
        p.add_argument("--radius-law", choices=("uniform", "fixed"), default="uniform",
                       help="alt-IV/alt-V offset length law")
    return parser


_BOOL_KEYS = {"yates", "lenient", "exact_variants", "sigma_is_variance"}
_INT_KEYS = {"n_mc", "backgrounds", "workers", "n1"}
_FLOAT_KEYS = {"alpha", "tie_epsilon"}


def _parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        values = read_config_file(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
        known = {a.dest for a in sub._actions}  # noqa: SLF001
        defaults = {}
        for key, raw in values.items():
            if key not in known:
                parser.error(f"{args.config}: unknown setting {key!r}")
            if key in _BOOL_KEYS:
                defaults[key] = _bool(raw)
            elif key in _INT_KEYS:
                defaults[key] = int(raw)
            elif key in _FLOAT_KEYS:
                defaults[key] = float(raw)
            elif key == "seed":
                defaults[key] = int(raw, 0)
            else:
                defaults[key] = raw
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    if getattr(args, "seed", "absent") is None:
        args.seed = default_seed()
    return args


def _tests(arg: str | None):
    if not arg:
        return None
    names = [t.strip() for t in arg.split(",") if t.strip()]
    return names or None


def _config(args) -> RunConfig:
    return RunConfig(
        alpha=args.alpha,
        n_mc=args.n_mc,
        seed=args.seed,
        weights=args.weights,
        tie_epsilon=getattr(args, "tie_epsilon", 0.0),
        yates=args.yates,
        tests=tuple(_tests(args.tests)) if _tests(args.tests) else None,
        posthoc=getattr(args, "posthoc", None),
        output_format=args.output_format,
        lenient=getattr(args, "lenient", False),
    )


def _load(args) -> PointSet:
    schema = Schema(args.x_col, args.y_col, args.label_col, args.delimiter)
    window = parse_window(args.window) if args.window else None
    return ingest(args.data, schema, window)


def _write(stem: str, json_text: str, csv_text: str) -> None:
    Path(f"{stem}.report.json").write_text(json_text)
    Path(f"{stem}.report.csv").write_text(csv_text)


def run_battery(ps: PointSet, cfg: RunConfig) -> dict:
    """Statistics, asymptotic and randomization p-values, as a report document."""
    if ps.k < 2:
        raise ValueError("the tests need at least two classes")
    g = build_nn_graph(ps, cfg.tie_epsilon)
    tables = (build_nnrct(ps, g, cfg.weights), build_nnct(ps, g, cfg.weights), None)
    tables = (tables[0], tables[1], build_scct(tables[1]))
    tests = list(cfg.tests) if cfg.tests else None
    common = dict(weights=cfg.weights, alpha=cfg.alpha, lenient=cfg.lenient, yates=cfg.yates)
    results = battery(ps, g, tests=tests, rng=stream(cfg.seed, 0, 0), **common)
    _attach_pvalues(ps, g, results, cfg, stream(cfg.seed, 1, 0))
    posthoc = None
    if cfg.posthoc and ps.k > 2:
        posthoc = posthoc_battery(ps, cfg.posthoc, tests=tests, rng=stream(cfg.seed, 0, 1),
                                  tie_epsilon=cfg.tie_epsilon, **common)
        for i, comp in enumerate(posthoc, start=1):
            if comp.skipped:
                continue
            sub_ps, sub_g = _posthoc_pattern(ps, comp, cfg)
            # unrestricted species tests use full-pattern moments; no relabeling on the subset
            skip = _SPECIES_TESTS if comp.mode == "pairwise-unrestricted" else ()
            _attach_pvalues(sub_ps, sub_g, comp.results, cfg, stream(cfg.seed, 1, i), skip)
    config = asdict(cfg)
    return battery_document(ps, g, tables, results, config, posthoc, __version__)


def _posthoc_pattern(ps: PointSet, comp, cfg: RunConfig):
    from .tables import collapse_classes

    if comp.mode == "one-vs-rest":
        sub = collapse_classes(ps, [list(comp.classes)], keep_rest=True)
    else:
        sub = collapse_classes(ps, [[c] for c in comp.classes])
    return sub, build_nn_graph(sub, cfg.tie_epsilon)


def _attach_pvalues(ps, g, results, cfg: RunConfig, rng, skip=()) -> None:
    names = [n for n, r in results.items() if r.error is None and not n.startswith(tuple(skip) or ("\0",))]
    if not names:
        return
    pvals = randomization_pvalues(ps, names, cfg.n_mc, rng, g=g, weights=cfg.weights,
                                  yates=cfg.yates, lenient=cfg.lenient)
    for name, p in pvals.items():
        results[name].p_randomization = p


def _cmd_test(args) -> int:
    cfg = _config(args)
    ps = _load(args)
    doc = run_battery(ps, cfg)
    json_text = to_json(doc)
    csv_text = battery_csv(doc)
    _write(args.output or str(Path(args.data).with_suffix("")), json_text, csv_text)
    sys.stdout.write({"text": battery_text(doc), "json": json_text, "csv": csv_text}[cfg.output_format])
    return 0


def _cmd_tables(args) -> int:
    ps = _load(args)
    g = build_nn_graph(ps, args.tie_epsilon)
    nnct = build_nnct(ps, g, args.weights)
    doc = battery_document(ps, g, (build_nnrct(ps, g, args.weights), nnct, build_scct(nnct)), {},
                           {"weights": args.weights}, None, __version__)
    doc["kind"] = "tables"
    if args.output_format == "json":
        sys.stdout.write(to_json(doc))
        return 0
    text = tables_text(doc)
    names = doc["tables"]["nnct"]["classes"]
    width = max(12, max(len(n) for n in names) + 2)
    text += "\nNN contingency table (rows: base class, columns: NN class)\n"
    text += " " * width + "".join(f"{n[:10]:>12}" for n in names) + "\n"
    for name, row in zip(names, doc["tables"]["nnct"]["counts"]):
        text += f"{name:{width}}" + "".join(f"{v:>12.6g}" for v in row) + "\n"
    sys.stdout.write(text)
    return 0


def _grid_values(text, default=None):
    if text is None:
        return [default]
    return parse_values(text)


def build_specs(args) -> list[PatternSpec]:
    """Expand the command line grid into scenario specs."""
    fam = args.family
    if fam == "rl-matern":
        if not args.kappa:
            raise UsageError("rl-matern needs --kappa")
        kappas = parse_int_range(args.kappa, default_step=2)
        mus = parse_values(args.mu) if args.mu else None
        radii = _grid_values(args.r, 0.1)
        specs = []
        for i, kappa in enumerate(kappas):
            mu = mus[i if len(mus) > 1 else 0] if mus else math.floor(100 / kappa)
            specs.extend(PatternSpec("rl-matern", kappa=kappa, mu=mu, r=r) for r in radii)
        return specs
    if not args.sizes:
        raise UsageError("--sizes is required")
    sizes = parse_int_range(args.sizes)
    pairs = [(args.n1, n) if args.n1 else (n, n) for n in sizes]
    grids = {
        "csr": [{}],
        "rl-uniform": [{}],
        "alt-I": [{"sigma": v, "sigma_is_variance": args.sigma_is_variance} for v in _grid_values(args.sigma, 0.1)],
        "alt-II": [{"p": v} for v in _grid_values(args.p, 0.25)],
        "alt-III": [{"s": v} for v in _grid_values(args.s, 1 / 6)],
        "alt-IV": [
            {"support": int(sup), "r": r, "radius_law": args.radius_law}
            for sup in _grid_values(args.support, 1)
            for r in _grid_values(args.r, 1 / 7)
        ],
        "alt-V": [{"r": r, "radius_law": args.radius_law} for r in _grid_values(args.r, 1 / 4)],
    }[fam]
    return [PatternSpec(fam, n1, n2, **extra) for n1, n2 in pairs for extra in grids]


def _cmd_simulate(args) -> int:
    cfg = _config(args)
    specs = build_specs(args)
    tests = list(cfg.tests) if cfg.tests else None
    if args.exact_variants:
        tests = (tests or []) + [t for t in EXACT_VARIANT_TESTS if t not in (tests or [])]
    kind = args.command.split("-")[1]
    report: SimulationReport = simulate(
        specs,
        tests,
        n_mc=cfg.n_mc,
        backgrounds=args.backgrounds,
        alpha=cfg.alpha,
        seed=cfg.seed,
        workers=args.workers,
        weights=cfg.weights,
        yates=cfg.yates,
        kind=kind,
    )
    json_text = to_json(simulation_document(report))
    csv_text = simulation_csv(report)
    _write(args.output or args.command, json_text, csv_text)
    out = {"text": simulation_text(report), "json": json_text, "csv": csv_text}[cfg.output_format]
    sys.stdout.write(out)
    return 0


def main(argv=None) -> int:
    try:
        args = _parse(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {"test": _cmd_test, "tables": _cmd_tables, "simulate-size": _cmd_simulate,
                "simulate-power": _cmd_simulate}
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return handlers[args.command](args)
    except UndefinedStatisticError as exc:
        print(f"nnreflex: undefined statistic: {exc} (use --lenient to continue)", file=sys.stderr)
        return 3
    except UsageError as exc:
        print(f"nnreflex: usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"nnreflex: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
