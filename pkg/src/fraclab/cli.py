"""Command line front end.

Exit codes: 0 success; 1 usage/config error; 2 data or compute error;
3 a verification verdict failed (so CI can tell "a limit-law check failed"
from "program crashed").
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import FORMAT_VERSION, fbm, fracops, harness, innovations, memtests

__all__ = ["main", "entry"]

_FUNCTIONAL_FLAGS = {
    "range-of-bridge": "range_of_bridge",
    "sup-of-bridge": "sup_of_bridge",
    "int-sq-bridge": "int_sq_bridge",
    "terminal": "terminal",
}

_MODEL_FLAGS = ("iid-gauss", "iid-t", "ma", "garch", "bilinear", "tar", "const1")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(1, "%s\n(run with --help for usage)" % message)


def _emit(obj) -> None:
    obj = dict(obj)
    obj.setdefault("format_version", FORMAT_VERSION)
    sys.stdout.write(json.dumps(obj, sort_keys=True, indent=2, default=harness.json_default) + "\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="fraclab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate a fractionally integrated series", description="Simulate a Type I or Type II fractionally integrated series and write it to a file.")
    sim.add_argument("--model", choices=_MODEL_FLAGS, default="iid-gauss", help="innovation model (ignored when --model-file is given)")
    sim.add_argument("--model-file", help="JSON file holding a full innovation spec")
    sim.add_argument("--sigma", type=float, default=1.0, help="iid-gauss standard deviation")
    sim.add_argument("--nu", type=float, default=5.0, help="iid-t degrees of freedom")
    sim.add_argument("--scale", type=float, default=1.0, help="iid-t scale")
    sim.add_argument("--b", default="1.0,0.5", help="ma weights b0,b1,... (comma separated)")
    sim.add_argument("--omega", type=float, default=0.1, help="garch omega")
    sim.add_argument("--alpha", type=float, default=0.1, help="garch alpha")
    sim.add_argument("--beta", type=float, default=0.8, help="garch beta")
    sim.add_argument("--a", type=float, default=0.3, help="bilinear a")
    sim.add_argument("--bb", type=float, default=0.3, help="bilinear b")
    sim.add_argument("--a-pos", type=float, default=0.4, help="tar coefficient on the positive side")
    sim.add_argument("--a-neg", type=float, default=-0.3, help="tar coefficient on the negative side")
    sim.add_argument("--d", type=float, required=True, help="fractional order, in (-1/2, 1/2)")
    sim.add_argument("--p", type=int, default=0, help="extra integer integration order")
    sim.add_argument("--kind", choices=("type1", "type2"), default="type2", help="process type")
    sim.add_argument("--n", type=int, required=True, help="series length")
    sim.add_argument("--seed", type=int, default=0, help="random seed")
    sim.add_argument("--eps-tail", type=float, help="type1 truncation tolerance (chooses the burn-in)")
    sim.add_argument("--burn-in", type=int, help="explicit type1 burn-in M (default 32*n)")
    sim.add_argument("--out", required=True, help="output series file")
    sim.add_argument("--format", choices=("csv", "bin"), default="csv", help="output format")

    tst = sub.add_parser("test", help="run a long-memory test on a series file", description="Compute the R/S or KPSS statistic with a Monte Carlo p-value and print the report as JSON.")
    tst.add_argument("--input", required=True, help="series file (.csv with a 'value' header, or .bin)")
    tst.add_argument("--stat", choices=("rs", "kpss"), default="rs", help="test statistic")
    tst.add_argument("--l", type=int, help="bandwidth (default floor(n^rate))")
    tst.add_argument("--bandwidth-rate", type=float, default=1.0 / 3.0, help="bandwidth exponent when --l is not given")
    tst.add_argument("--d-null", type=float, default=0.0, help="null fractional order")
    tst.add_argument("--tables-dir", help="quantile table directory (default $FRACLAB_TABLES_DIR or ./tables)")
    tst.add_argument("--build-missing", action="store_true", help="build the quantile table if absent")
    tst.add_argument("--table-m", type=int, default=fbm.TABLE_M_DEFAULT, help="table grid size")
    tst.add_argument("--table-reps", type=int, default=fbm.TABLE_REPS_DEFAULT, help="table sample size")
    tst.add_argument("--table-seed", type=int, default=fbm.TABLE_SEED_DEFAULT, help="table seed")

    tab = sub.add_parser("tables", help="build and persist a quantile table", description="Build the Monte Carlo quantile table of one bridge functional and write it under the tables directory.")
    tab.add_argument("--functional", choices=sorted(_FUNCTIONAL_FLAGS), required=True, help="path functional")
    tab.add_argument("--kind", choices=("type1", "type2"), default="type1", help="limit process type")
    tab.add_argument("--d", type=float, required=True, help="fractional order")
    tab.add_argument("--m", type=int, default=fbm.TABLE_M_DEFAULT, help="grid size")
    tab.add_argument("--reps", type=int, default=fbm.TABLE_REPS_DEFAULT, help="Monte Carlo sample size")
    tab.add_argument("--seed", type=int, default=fbm.TABLE_SEED_DEFAULT, help="random seed")
    tab.add_argument("--out-dir", help="tables directory (default $FRACLAB_TABLES_DIR or ./tables)")

    ver = sub.add_parser("verify", help="run a Monte Carlo verification experiment", description="Run the experiment described by a config file, write the report, and exit 3 if any verdict fails.")
    ver.add_argument("--config", required=True, help="TOML experiment config")
    ver.add_argument("--out-dir", help="report directory (overrides the config)")
    ver.add_argument("--tables-dir", help="tables directory (overrides the config)")
    ver.add_argument("--threads", type=int, help="worker thread cap (results do not depend on it)")

    shw = sub.add_parser("show", help="summarize a table or report file", description="Print a human-readable summary of a quantile table or report; optionally dump plot-ready CSV data.")
    shw.add_argument("path", help="a .qtab table or a report.json file")
    shw.add_argument("--plot-data", help="write plot-ready CSV here")

    return parser


def _series_io(path: str):
    return (fracops.read_series_bin, fracops.write_series_bin) if str(path).endswith(".bin") else (
        fracops.read_series_csv,
        fracops.write_series_csv,
    )


def _model_from_flags(args) -> innovations.InnovationSpec:
    if args.model_file:
        try:
            with open(args.model_file) as fh:
                return innovations.spec_from_dict(json.load(fh))
        except OSError as exc:
            raise CliError(2, "cannot read model file: %s" % exc)
        except (ValueError, TypeError) as exc:
            raise CliError(1, "bad model file: %s" % exc)
    if args.model == "iid-gauss":
        return innovations.IidGaussian(sigma=args.sigma)
    if args.model == "iid-t":
        return innovations.IidStudentT(nu=args.nu, scale=args.scale)
    if args.model == "ma":
        return innovations.LinearMA(tuple(float(v) for v in args.b.split(",")))
    if args.model == "garch":
        return innovations.Garch11(omega=args.omega, alpha=args.alpha, beta=args.beta)
    if args.model == "bilinear":
        return innovations.Bilinear(a=args.a, b=args.bb)
    if args.model == "tar":
        return innovations.ThresholdAr(a_pos=args.a_pos, a_neg=args.a_neg)
    if args.model == "const1":
        return innovations.Const(1.0)
    raise CliError(1, "unknown model %r" % args.model)


def _cmd_simulate(args) -> int:
    try:
        model = _model_from_flags(args)
        spec = fracops.FracSpec(d=args.d, p=args.p, kind=args.kind)
        if args.n < 1:
            raise ValueError("need n >= 1, got %d" % args.n)
    except ValueError as exc:
        raise CliError(1, str(exc))
    burn = 0
    try:
        if spec.kind == "type1":
            burn = args.burn_in
            if burn is None and args.eps_tail is None:
                burn = 32 * args.n
            x = fracops.integrate_type1(
                model, spec.d, args.n, eps_tail=args.eps_tail, seed=args.seed, burn_in=burn
            )
            burn = x.burn_in
            x = x.values
        else:
            u = innovations.gen(model, args.n, args.seed)
            x = fracops.integrate_type2(u, spec.d)
        for _ in range(spec.p):
            x = np.cumsum(x)
        writer = fracops.write_series_bin if args.format == "bin" else fracops.write_series_csv
        writer(args.out, x)
    except (fracops.TruncationInfeasibleError, OSError) as exc:
        raise CliError(2, "generation failed: %s" % exc)
    try:
        zeta, zeta_source = innovations.zeta_norm(model)
    except ValueError:
        zeta, zeta_source = None, "unavailable"
    _emit(
        {
            "command": "simulate",
            "model": innovations.spec_to_dict(model),
            "frac": {"d": spec.d, "p": spec.p, "kind": spec.kind},
            "n": args.n,
            "seed": args.seed,
            "out": str(args.out),
            "burn_in": int(burn),
            "innovation_burn_in": model.burn_in,
            "mean_source": innovations.mean_source(model),
            "zeta_norm": zeta,
            "zeta_source": zeta_source,
        }
    )
    return 0


def _cmd_test(args) -> int:
    reader, _ = _series_io(args.input)
    try:
        x = reader(args.input)
    except (OSError, ValueError) as exc:
        raise CliError(2, "cannot read series: %s" % exc)
    if args.l is None and x.size >= 2:
        args.l = memtests.default_bandwidth(x.size, args.bandwidth_rate)
    try:
        report = memtests.long_memory_test(
            x,
            l=args.l,
            d_null=args.d_null,
            tables_dir=args.tables_dir,
            statistic=args.stat,
            build_missing=args.build_missing,
            table_m=args.table_m,
            table_reps=args.table_reps,
            table_seed=args.table_seed,
        )
    except memtests.DegenerateVarianceError as exc:
        raise CliError(2, "degenerate variance: %s" % exc)
    except FileNotFoundError as exc:
        raise CliError(2, str(exc))
    except fbm.TableFormatError as exc:
        raise CliError(2, "corrupt table: %s" % exc)
    except ValueError as exc:
        raise CliError(1, str(exc))
    out = report.to_dict()
    out["command"] = "test"
    _emit(out)
    return 0


def _cmd_tables(args) -> int:
    out_dir = args.out_dir or os.environ.get("FRACLAB_TABLES_DIR", "tables")
    try:
        table = fbm.build_quantile_table(
            _FUNCTIONAL_FLAGS[args.functional], args.kind, args.d, args.m, args.reps, args.seed
        )
    except ValueError as exc:
        raise CliError(1, str(exc))
    try:
        path = fbm.save_table(table, out_dir)
    except OSError as exc:
        raise CliError(2, "cannot write table: %s" % exc)
    _emit(
        {
            "command": "tables",
            "file": str(path),
            "meta": table.meta(),
            "sample_mean": float(table.values.mean()),
            "sample_min": float(table.values[0]),
            "sample_median": float(np.median(table.values)),
            "sample_max": float(table.values[-1]),
        }
    )
    return 0


def _cmd_verify(args) -> int:
    overrides = {}
    if args.out_dir is not None:
        overrides["out_dir"] = args.out_dir
    if args.tables_dir is not None:
        overrides["tables_dir"] = args.tables_dir
    if args.threads is not None:
        overrides["threads"] = args.threads
    try:
        config = harness.load_config(args.config, **overrides)
    except OSError as exc:
        raise CliError(1, "cannot read config: %s" % exc)
    except (ValueError, TypeError, KeyError) as exc:
        raise CliError(1, "bad config: %s" % exc)
    try:
        report = harness.run_experiment(config)
        out_dir = config.out_dir or "out"
        json_path, csv_path = harness.write_report(report, out_dir)
    except (fracops.TruncationInfeasibleError, memtests.DegenerateVarianceError, OSError, ValueError) as exc:
        raise CliError(2, "experiment failed: %s" % exc)
    compat = report.targets.get("moment_compat")
    if compat is not None and compat.get("ok") is False:
        sys.stdout.write(
            "warning: declared moment order %s is below the %s requirement q > %.4g at d=%g\n"
            % (compat["q_declared"], compat["context"], compat["q_required"], compat["d"])
        )
    for v in report.verdicts:
        sys.stdout.write(v.line() + "\n")
    sys.stdout.write("report: %s\nmetrics: %s\n" % (json_path, csv_path))
    return 0 if report.all_passed else 3


def _show_table(path: Path, plot_data) -> None:
    table = fbm.load_table(path)
    vals = table.values
    sys.stdout.write(
        "quantile table %s\n"
        "  functional: %s   kind: %s   d: %g\n"
        "  grid m: %d   reps: %d   seed: %d\n"
        "  min %.6g   median %.6g   max %.6g   mean %.6g\n"
        % (
            path,
            table.functional,
            table.kind,
            table.d,
            table.m,
            table.reps,
            table.seed,
            vals[0],
            float(np.median(vals)),
            vals[-1],
            float(vals.mean()),
        )
    )
    if plot_data:
        with open(plot_data, "w") as fh:
            fh.write("u,value\n")
            for i, v in enumerate(vals):
                fh.write("%.10g,%.17g\n" % ((i + 0.5) / vals.size, v))


def _show_report(path: Path, plot_data) -> None:
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(2, "unreadable report: %s" % exc)
    for key in ("experiment", "verdicts", "per_n"):
        if key not in data:
            raise CliError(2, "not a report file: missing %r" % key)
    sys.stdout.write("experiment: %s\n" % data["experiment"])
    for v in data["verdicts"]:
        status = "PASS" if v["passed"] else "FAIL"
        sys.stdout.write(
            "[%s] %s: observed %.6g (%s = %.4g)\n"
            % (status, v["name"], v["observed"], v["tolerance_name"], v["tolerance"])
        )
    if plot_data:
        with open(plot_data, "w") as fh:
            fh.write("n,metric,value\n")
            for entry in data["per_n"]:
                n = entry.get("n")
                for key, val in entry.items():
                    if key != "n" and isinstance(val, (int, float)):
                        fh.write("%d,%s,%.17g\n" % (n, key, val))


def _cmd_show(args) -> int:
    path = Path(args.path)
    if not path.exists():
        raise CliError(2, "no such file: %s" % path)
    if path.suffix == ".qtab":
        try:
            _show_table(path, args.plot_data)
        except fbm.TableFormatError as exc:
            raise CliError(2, str(exc))
    else:
        _show_report(path, args.plot_data)
    return 0


_HANDLERS = {
    "simulate": _cmd_simulate,
    "test": _cmd_test,
    "tables": _cmd_tables,
    "verify": _cmd_verify,
    "show": _cmd_show,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _HANDLERS[args.command](args)
    except CliError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return exc.code
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)


def entry() -> None:
    sys.exit(main())
