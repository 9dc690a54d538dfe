"""``redsim`` command line: designs, indicators, urn experiments, queue simulation.

Every option can also come from ``--config FILE`` (flat ``key=value`` lines,
keys spelled like the long flags) or, for the seed only, from ``REDSIM_SEED``.
Precedence: flag > config file > REDSIM_SEED > built-in default.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

from redsim.designs import bibd_order, build_design
from redsim.errors import (
    DegenerateOverlap,
    InvalidParameter,
    NoDesignAvailable,
    RedsimError,
    SimulationUnderrun,
    UnsupportedParameters,
)
from redsim.indicators import policy_indicators, table1_row
from redsim.policies import PolicyKind
from redsim.simqueue import (
    PRESETS,
    SIM_COLUMNS,
    SimConfig,
    SimMetrics,
    preset_config,
    preset_lambdas,
    run_sim,
    sweep,
)
from redsim.urnball import (
    CURVE_COLUMNS,
    analytic_indicators,
    empirical_indicators,
    occupancy_curves,
    run_experiment1,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_DESIGN = 2
EXIT_UNDERRUN = 3
EXIT_INVALID = 4

INDICATOR_COLUMNS = ("policy", "n", "r", "T", "lbf", "rof", "rdf", "ex", "ex2")
URN_COLUMNS = (
    "policy", "n", "r", "T", "reps", "seed",
    "mean_min", "mean_max", "lbf_emp", "rof_emp", "rdf_emp",
    "lbf_analytic", "rof_analytic", "rdf_analytic",
)
FIG4_COLUMNS = (
    "r", "n", "T",
    "lbf_random", "lbf_random_emp", "lbf_rr", "lbf_bibd",
    "rof_random", "rof_rr", "rof_bibd",
    "rdf_random", "rdf_rr", "rdf_bibd",
)
FIGURE_PRESETS = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8")
FIG23_N = (7, 13, 21)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ------------------------------------------------------------------ output


def _fmt(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, Fraction):
        value = float(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".10g")
    return str(value)


def _config_items(args: argparse.Namespace) -> list[tuple[str, object]]:
    skip = {"func", "config", "csv", "json"}
    return sorted((k, v) for k, v in vars(args).items() if k not in skip)


def _config_line(args: argparse.Namespace) -> str:
    return "# redsim " + " ".join(f"{k}={_fmt(v)}" for k, v in _config_items(args))


def render_csv(rows: list[dict], columns, header: str | None = None) -> str:
    buf = io.StringIO()
    if header:
        buf.write(header + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c, "")) for c in columns])
    return buf.getvalue()


def render_table(rows: list[dict], columns) -> str:
    cells = [[str(c) for c in columns]]
    for row in rows:
        cells.append(
            [format(float(v), ".4f") if isinstance(v, (float, Fraction)) else _fmt(v)
             for v in (row.get(c, "") for c in columns)]
        )
    widths = [max(len(r[i]) for r in cells) for i in range(len(columns))]
    return "\n".join("  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in cells) + "\n"


def render_jsonl(rows: list[dict], columns, args: argparse.Namespace) -> str:
    def plain(v):
        return float(v) if isinstance(v, Fraction) else v

    lines = [json.dumps({"config": {k: plain(v) for k, v in _config_items(args)}})]
    lines += [json.dumps({c: plain(row.get(c)) for c in columns}) for row in rows]
    return "\n".join(lines) + "\n"


def emit(rows: list[dict], columns, args: argparse.Namespace, out) -> None:
    if args.csv is not None:
        text = render_csv(rows, columns, _config_line(args))
        if args.csv == "-":
            out.write(text)
        else:
            Path(args.csv).write_text(text, encoding="utf-8", newline="\n")
    elif getattr(args, "json", False):
        out.write(render_jsonl(rows, columns, args))
    else:
        print(_config_line(args), file=sys.stderr)
        out.write(render_table(rows, columns))


def write_csv_file(path: Path, rows: list[dict], columns, header: str) -> None:
    path.write_text(render_csv(rows, columns, header), encoding="utf-8", newline="\n")


# -------------------------------------------------------------- subcommands


def cmd_design(args, out) -> int:
    design = build_design(args.r)
    if args.csv is not None or args.json:
        cols = ("block",) + tuple(f"p{j + 1}" for j in range(design.r))
        rows = [{"block": i, **{f"p{j + 1}": p for j, p in enumerate(b)}} for i, b in enumerate(design.blocks)]
        emit(rows, cols, args, out)
    else:
        for block in design.blocks:
            out.write(" ".join(str(p) for p in block) + "\n")
    return EXIT_OK


def _policies(value: str) -> list[PolicyKind]:
    if value == "all":
        return [PolicyKind.RANDOM, PolicyKind.ROUND_ROBIN, PolicyKind.BIBD]
    return [PolicyKind.parse(value)]


def cmd_indicators(args, out) -> int:
    n = args.n if args.n is not None else bibd_order(args.r)
    rows = []
    for kind in _policies(args.policy):
        if args.n is None and not (kind is PolicyKind.RANDOM and args.T is None):
            ind = table1_row(kind, args.r, args.T)
        else:
            ind = policy_indicators(kind, n, args.r, args.T)
        rows.append({"policy": kind.value, "n": n, "r": args.r, "T": args.T, **vars(ind)})
    emit(rows, INDICATOR_COLUMNS, args, out)
    return EXIT_OK


def cmd_urns(args, out) -> int:
    rows = []
    for kind in _policies(args.policy):
        occ, ov = run_experiment1(kind, args.n, args.r, args.T, args.reps, args.seed)
        emp = empirical_indicators(occ, ov)
        ana = analytic_indicators(kind, args.n, args.r, args.T)
        row = {
            "policy": kind.value, "n": args.n, "r": args.r, "T": args.T,
            "reps": args.reps, "seed": args.seed,
            "mean_min": occ.mean_min, "mean_max": occ.mean_max,
            "lbf_emp": emp.lbf, "rof_emp": emp.rof, "rdf_emp": emp.rdf,
        }
        if ana is not None:
            row.update(lbf_analytic=ana.lbf, rof_analytic=ana.rof, rdf_analytic=ana.rdf)
        rows.append(row)
    emit(rows, URN_COLUMNS, args, out)
    return EXIT_OK


def _sim_config(args, policy=None, lam=None) -> SimConfig:
    return SimConfig(
        n=args.n, r=args.r, policy=policy or args.policy, mu1=args.mu1, q=args.q,
        p=args.p_long, lam=lam if lam is not None else args.lam, seed=args.seed,
        warmup_jobs=args.warmup, measured_jobs=args.jobs, replications=args.reps,
        horizon=args.horizon,
    )


def cmd_simulate(args, out) -> int:
    rows = [run_sim(_sim_config(args, policy=k), args.engine).row() for k in _policies(args.policy)]
    emit(rows, SIM_COLUMNS, args, out)
    return EXIT_OK


def _fill_from_preset(args) -> None:
    if not args.preset:
        return
    n, r, mu1, q, p = PRESETS[args.preset]
    if args.preset == "fig8" and args.fig8_q15:
        q = 15.0
    for key, value in dict(n=n, r=r, mu1=mu1, q=q, p_long=p).items():
        if getattr(args, key) is None:
            setattr(args, key, value)


def _sweep_rows(metrics: list) -> list[dict]:
    rows = []
    for m in metrics:
        if isinstance(m, SimMetrics):
            rows.append(m.row())
        else:
            print(f"cell failed: {m}", file=sys.stderr)
            rows.append({"policy": m["policy"], "lambda": m["lambda"]})
    return rows


def cmd_sweep(args, out) -> int:
    _fill_from_preset(args)
    missing = [k for k in ("n", "r", "mu1", "q", "p_long") if getattr(args, k) is None]
    if missing:
        raise UsageError(f"sweep needs --preset or explicit {', '.join(missing)}")
    base = _sim_config(args, policy=PolicyKind.BIBD, lam=1.0)
    if args.lambdas:
        lams = [float(x) for x in args.lambdas.split(",") if x.strip()]
    else:
        grids = preset_lambdas(base)
        lams = grids["low"] + grids["high"]
    rows = _sweep_rows(sweep(base, lams, engine=args.engine))
    emit(rows, SIM_COLUMNS, args, out)
    return EXIT_OK


def emit_figure_data(args, out_dir: Path) -> list[Path]:
    """Write the CSV(s) behind one figure preset into ``out_dir``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    header = _config_line(args)
    preset = args.preset
    written = []
    if preset in ("fig2", "fig3"):
        rows = occupancy_curves(PolicyKind.RANDOM, list(FIG23_N), None, args.T, args.reps, args.seed)
        if preset == "fig2":
            cols = CURVE_COLUMNS
        else:
            cols = ("policy", "n", "r", "T", "reps", "seed", "lbf_emp", "lbf_analytic")
        path = out_dir / f"{preset}.csv"
        write_csv_file(path, rows, cols, header)
        written.append(path)
    elif preset == "fig4":
        rows = []
        for r in range(2, args.r_max + 1):
            n = bibd_order(r)
            rand, rr, bibd = (table1_row(k, r, args.T) for k in _policies("all"))
            occ, _ = run_experiment1(PolicyKind.RANDOM, n, r, args.T, args.reps, args.seed)
            rows.append({
                "r": r, "n": n, "T": args.T,
                "lbf_random": rand.lbf, "lbf_random_emp": occ.lbf_emp,
                "lbf_rr": rr.lbf, "lbf_bibd": bibd.lbf,
                "rof_random": rand.rof, "rof_rr": rr.rof, "rof_bibd": bibd.rof,
                "rdf_random": rand.rdf, "rdf_rr": rr.rdf, "rdf_bibd": bibd.rdf,
            })
        path = out_dir / "fig4.csv"
        write_csv_file(path, rows, FIG4_COLUMNS, header)
        written.append(path)
    else:
        base = preset_config(
            preset, fig8_text_q=args.fig8_q15, seed=args.seed,
            warmup_jobs=args.warmup, measured_jobs=args.jobs, replications=args.reps,
        )
        for part, lams in preset_lambdas(base).items():
            rows = _sweep_rows(sweep(base, lams))
            path = out_dir / f"{preset}_{part}.csv"
            write_csv_file(path, rows, SIM_COLUMNS, header)
            written.append(path)
    return written


def cmd_figures(args, out) -> int:
    presets = FIGURE_PRESETS if args.preset == "all" else (args.preset,)
    for preset in presets:
        for path in emit_figure_data(replace_ns(args, preset=preset), Path(args.out_dir)):
            out.write(f"{path}\n")
    return EXIT_OK


def replace_ns(ns: argparse.Namespace, **changes) -> argparse.Namespace:
    return argparse.Namespace(**{**vars(ns), **changes})


# ------------------------------------------------------------------ parsing


def _add_output(p, csv_help="write CSV to PATH (or stdout with no PATH)"):
    p.add_argument("--csv", nargs="?", const="-", default=None, metavar="PATH", help=csv_help)
    p.add_argument("--json", action="store_true", help="emit JSON lines")


def _add_sim_params(p, required: bool) -> None:
    p.add_argument("--n", type=int, required=required)
    p.add_argument("--r", type=int, required=required)
    p.add_argument("--mu1", type=float, required=required, help="short-job service rate")
    p.add_argument("--q", type=float, required=required, help="long/short mean service ratio")
    p.add_argument("--p-long", type=float, required=required, help="probability a job is long")
    p.add_argument("--warmup", type=int, default=10_000)
    p.add_argument("--jobs", type=int, default=100_000, help="measured jobs per replication")
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--horizon", type=float, default=None, help="stop the clock at this time")
    p.add_argument("--engine", choices=("fast", "events"), default="fast")


def build_parser(seed_default: int = 0) -> _Parser:
    parser = _Parser(prog="redsim", description=__doc__.splitlines()[0])
    parser.add_argument("--config", default=None, help="key=value file with option defaults")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    policy_choices = ("random", "round-robin", "bibd", "all")

    p = sub.add_parser("design", help="print the cyclic (r(r-1)+1, r, 1) design")
    p.add_argument("--r", type=int, required=True)
    _add_output(p)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("indicators", help="closed-form LBF/ROF/RDF")
    p.add_argument("--policy", choices=policy_choices, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--n", type=int, default=None, help="defaults to r(r-1)+1")
    p.add_argument("--T", type=int, default=None, help="rounds; needed for random LBF")
    _add_output(p)
    p.set_defaults(func=cmd_indicators)

    p = sub.add_parser("urns", help="only-arrival Monte Carlo experiment")
    p.add_argument("--policy", choices=policy_choices, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--seed", type=int, default=seed_default)
    _add_output(p)
    p.set_defaults(func=cmd_urns)

    p = sub.add_parser("simulate", help="queueing simulation at one arrival rate")
    p.add_argument("--policy", choices=policy_choices, required=True)
    _add_sim_params(p, required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--seed", type=int, default=seed_default)
    _add_output(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="all three policies over an arrival-rate grid")
    p.add_argument("--preset", choices=sorted(PRESETS), default=None)
    p.add_argument("--lambdas", default=None, help="comma-separated arrival rates")
    p.add_argument("--fig8-q15", action="store_true", help="use q=15 for fig8")
    _add_sim_params(p, required=False)
    p.add_argument("--seed", type=int, default=seed_default)
    _add_output(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("figures", help="write the CSV data behind a figure")
    p.add_argument("--preset", choices=FIGURE_PRESETS + ("all",), required=True)
    p.add_argument("--out-dir", default="figures")
    p.add_argument("--seed", type=int, default=seed_default)
    p.add_argument("--T", type=int, default=50, help="rounds for fig2-fig4")
    p.add_argument("--r-max", type=int, default=10, help="largest r in fig4")
    p.add_argument("--reps", type=int, default=None, help="replications (fig2-4: 200, fig5-8: 20)")
    p.add_argument("--warmup", type=int, default=10_000)
    p.add_argument("--jobs", type=int, default=100_000)
    p.add_argument("--fig8-q15", action="store_true")
    p.set_defaults(func=cmd_figures)
    return parser


def read_config_file(path: str) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.lstrip("-")] = value
    return values


def _subcommands(parser: _Parser) -> dict:
    return next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction)).choices


def _apply_config(parser: _Parser, command: str, values: dict[str, str]) -> None:
    sub = _subcommands(parser)[command]
    by_flag = {}
    for action in sub._actions:
        for opt in action.option_strings:
            if opt.startswith("--"):
                by_flag[opt[2:]] = action
    defaults = {}
    for key, raw in values.items():
        action = by_flag.get(key)
        if action is None:
            raise UsageError(f"config key {key!r} is not an option of '{command}'")
        if isinstance(action, argparse._StoreTrueAction):
            value = raw.lower() in ("1", "true", "yes", "on")
        else:
            value = action.type(raw) if action.type else raw
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"config key {key!r}: {value!r} not in {list(action.choices)}")
        defaults[action.dest] = value
        action.required = False
    sub.set_defaults(**defaults)


def parse_args(argv: list[str], env: dict[str, str]) -> argparse.Namespace:
    seed_default = 0
    if env.get("REDSIM_SEED"):
        try:
            seed_default = int(env["REDSIM_SEED"])
        except ValueError:
            raise UsageError(f"REDSIM_SEED must be an integer, got {env['REDSIM_SEED']!r}") from None
    parser = build_parser(seed_default)
    pre_parser = argparse.ArgumentParser(add_help=False)
    pre_parser.add_argument("--config")
    pre_parser.add_argument("command", nargs="?")
    pre, _ = pre_parser.parse_known_args(argv)
    if pre.config and pre.command in _subcommands(parser):
        try:
            values = read_config_file(pre.config)
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}") from None
        _apply_config(parser, pre.command, values)
    args = parser.parse_args(argv)
    if args.command == "figures" and args.reps is None:
        args.reps = 200 if args.preset in ("fig2", "fig3", "fig4") else 20
    return args


def parse_and_dispatch(argv: list[str] | None = None, env: dict[str, str] | None = None, out=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    env = dict(os.environ) if env is None else env
    out = sys.stdout if out is None else out
    try:
        args = parse_args(argv, env)
        return args.func(args, out)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except NoDesignAvailable as exc:
        print(f"redsim: no design available: {exc}", file=sys.stderr)
        return EXIT_NO_DESIGN
    except SimulationUnderrun as exc:
        print(f"redsim: simulation underrun: {exc}", file=sys.stderr)
        return EXIT_UNDERRUN
    except (InvalidParameter, UnsupportedParameters, DegenerateOverlap) as exc:
        print(f"redsim: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except RedsimError as exc:
        print(f"redsim: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(parse_and_dispatch())


if __name__ == "__main__":
    main()
