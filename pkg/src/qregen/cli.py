"""Command-line front end: ``qregen {points,curve,ratio,verify,simulate,sdc}``.

stdout carries data (JSON or CSV), stderr diagnostics.  Exit codes: 0 all
checks pass, 1 verification or feasibility failure, 2 usage or schema error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import bounds, qudit
from .bounds import Mode, OperatingPoint, ParameterError, SystemParams, as_fraction
from .flowgraph import DEFAULT_VERTEX_CAP, EnumerationCapError, verify_bound, vertex_count
from .records import output_record, validate
from .repair import (
    CheckRetrieval,
    InfeasibleError,
    SimulationError,
    event_from_dict,
    new_cluster,
    run_script,
    worst_case_script,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SDC_TOL = 1e-9

POINT_FUNCS = {
    "msr": (bounds.msr_point, Mode.CLASSICAL),
    "mbr": (bounds.mbr_point, Mode.CLASSICAL),
    "qmsr": (bounds.qmsr_point, Mode.QUANTUM),
    "qmbr": (bounds.qmbr_point, Mode.QUANTUM),
}


class UsageError(Exception):
    pass


def _fraction_arg(text: str) -> Fraction:
    try:
        return as_fraction(text)
    except (ParameterError, TypeError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _fraction_list(text: str) -> list[Fraction]:
    return [_fraction_arg(t) for t in text.split(",") if t.strip()]


def _emit_json(record: dict, out) -> None:
    json.dump(record, out, indent=2)
    out.write("\n")


def _emit_csv(header: Sequence[str], rows: Sequence[Sequence], out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def _exact(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _params(args) -> SystemParams:
    return SystemParams(args.n, args.k, args.d, args.B)


class _Output:
    """stdout, or a file when ``--out`` is given."""

    def __init__(self, path: Optional[str]):
        self.path = path
        self.buffer = io.StringIO()

    def __enter__(self):
        return self.buffer

    def __exit__(self, *exc):
        if exc[0] is None:
            if self.path:
                Path(self.path).write_text(self.buffer.getvalue())
            else:
                sys.stdout.write(self.buffer.getvalue())
        return False


def _gnuplot(path: str, data_path: str, title: str, xlabel: str, ylabel: str, series: list[tuple[str, str]]) -> None:
    """Write a gnuplot script plotting columns of ``data_path``.

    ``series`` pairs a gnuplot ``using``/filter expression with a legend title.
    """
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set title '{title}'",
        f"set xlabel '{xlabel}'",
        f"set ylabel '{ylabel}'",
        "set grid",
    ]
    plots = [f"'{data_path}' {expr} title '{label}'" for expr, label in series]
    lines.append("plot " + ", \\\n     ".join(plots))
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# subcommands

def cmd_points(args) -> int:
    params = _params(args)
    points = {p.label: p for p in (f(params) for f, _ in POINT_FUNCS.values())}
    coincide = bounds.points_coincide(params)
    with _Output(args.out) as out:
        if args.format == "csv":
            header = ["label", "alpha", "total_bandwidth", "per_helper",
                      "alpha_exact", "total_bandwidth_exact", "per_helper_exact", "coincide"]
            rows = [[p.label, float(p.alpha), float(p.total_bandwidth), float(p.per_helper),
                     _exact(p.alpha), _exact(p.total_bandwidth), _exact(p.per_helper), coincide]
                    for p in points.values()]
            _emit_csv(header, rows, out)
        else:
            results = {
                "points": {label: {"alpha": p.alpha, "total_bandwidth": p.total_bandwidth,
                                   "per_helper": p.per_helper} for label, p in points.items()},
                "coincide": coincide,
            }
            _emit_json(output_record("points", _param_inputs(params), results), out)
    return EXIT_OK


def _param_inputs(params: SystemParams) -> dict:
    return {"n": params.n, "k": params.k, "d": params.d, "B": params.B}


def cmd_curve(args) -> int:
    params = _params(args)
    modes = [Mode.CLASSICAL, Mode.QUANTUM] if args.mode == "both" else [Mode.parse(args.mode)]
    curves = []
    for mode in modes:
        curve = bounds.tradeoff_curve(params, mode)
        breaks = set(curve.breakpoints)
        rows = [{"gamma": g, "alpha": a, "kind": "breakpoint" if (g, a) in breaks else "sample"}
                for g, a in curve.sample(args.samples)]
        curves.append({
            "mode": mode.value,
            "feasible_gamma_min": curve.feasible_gamma_min,
            "breakpoints": [{"gamma": g, "alpha": a, "kind": "breakpoint"} for g, a in curve.breakpoints],
            "rows": rows,
        })
    with _Output(args.out) as out:
        if args.format == "csv":
            header = ["mode", "gamma", "alpha", "gamma_exact", "alpha_exact", "kind"]
            rows = [[c["mode"], float(r["gamma"]), float(r["alpha"]), _exact(r["gamma"]), _exact(r["alpha"]), r["kind"]]
                    for c in curves for r in c["rows"]]
            _emit_csv(header, rows, out)
        else:
            inputs = dict(_param_inputs(params), mode=args.mode, samples=args.samples)
            _emit_json(output_record("curve", inputs, {"curves": curves}), out)
    if args.gnuplot:
        _gnuplot_curve(args.gnuplot, curves, args.out, params)
    return EXIT_OK


def _gnuplot_curve(path: str, curves: list[dict], data_path: str, params: SystemParams) -> None:
    lines = [
        "set datafile separator ','",
        f"set title 'storage vs repair bandwidth, (n,k,d)=({params.n},{params.k},{params.d}), B={params.B}'",
        "set xlabel 'repair bandwidth d*beta'",
        "set ylabel 'per-node storage alpha'",
        "set grid",
    ]
    plots = [f"\"< awk -F, '$1==\\\"{c['mode']}\\\"' {data_path}\" using 2:3 with linespoints title '{c['mode']}'"
             for c in curves]
    lines.append("plot " + ", \\\n     ".join(plots))
    Path(path).write_text("\n".join(lines) + "\n")


def cmd_ratio(args) -> int:
    if args.k < 1:
        raise UsageError("k must be >= 1")
    d_min = args.k if args.d_min is None else args.d_min
    if d_min < args.k:
        raise UsageError(f"d-min={d_min} is below k={args.k}")
    if args.d_max < d_min:
        raise UsageError(f"d-max={args.d_max} is below d-min={d_min}")
    func = bounds.msr_bandwidth_ratio if args.metric == "msr" else bounds.mbr_bandwidth_ratio
    rows = [(d, func(args.k, d)) for d in range(d_min, args.d_max + 1)]
    with _Output(args.out) as out:
        if args.format == "json":
            inputs = {"k": args.k, "d_min": d_min, "d_max": args.d_max, "metric": args.metric}
            results = {"metric": args.metric, "k": args.k, "rows": [{"d": d, "ratio": r} for d, r in rows]}
            _emit_json(output_record("ratio", inputs, results), out)
        else:
            _emit_csv(["d", "ratio", "ratio_exact"], [[d, float(r), _exact(r)] for d, r in rows], out)
    if args.gnuplot:
        _gnuplot(args.gnuplot, args.out, f"{args.metric.upper()} per-helper bandwidth ratio, k={args.k}",
                 "helpers d", "quantum / classical", [("using 1:2 with linespoints", args.metric)])
    return EXIT_OK


def _verify_one(job):
    params, point, trials, seed = job
    return verify_bound(params, point, trials, seed)


def verify_configurations(n_min: int, n_max: int, alphas, betas, modes) -> list[tuple[SystemParams, OperatingPoint]]:
    out = []
    for n in range(max(n_min, 2), n_max + 1):
        for k in range(1, n):
            for d in range(k, n):
                params = SystemParams(n, k, d)
                for mode in modes:
                    for a in alphas:
                        for b in betas:
                            out.append((params, OperatingPoint(a, b, mode)))
    return out


def cmd_verify(args) -> int:
    modes = [Mode.CLASSICAL, Mode.QUANTUM] if args.modes == "both" else [Mode.parse(args.modes)]
    configs = verify_configurations(args.n_min, args.n_max, args.alphas, args.betas, modes)
    jobs, skipped = [], []
    for params, point in configs:
        if vertex_count(params, params.k) > args.vertex_cap:
            skipped.append({"n": params.n, "k": params.k, "d": params.d,
                            "reason": f"more than {args.vertex_cap} vertices"})
            print(f"skipping (n,k,d)=({params.n},{params.k},{params.d}): vertex cap", file=sys.stderr)
            continue
        jobs.append((params, point, args.trials, args.seed))
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            reports = list(pool.map(_verify_one, jobs, chunksize=16))
    else:
        reports = [_verify_one(j) for j in jobs]
    all_passed = all(r.passed for r in reports)
    inputs = {"n_min": args.n_min, "n_max": args.n_max, "alphas": args.alphas, "betas": args.betas,
              "modes": args.modes, "trials": args.trials, "seed": args.seed}
    results = {"configurations": [r.to_dict() for r in reports], "skipped": skipped, "all_passed": all_passed,
               "count": len(reports)}
    with _Output(args.out) as out:
        _emit_json(output_record("verify", inputs, results), out)
    failed = sum(not r.passed for r in reports)
    print(f"verified {len(reports)} configurations, {failed} failed, {len(skipped)} skipped", file=sys.stderr)
    return EXIT_OK if all_passed else EXIT_FAIL


def load_simulation_config(data: dict):
    """Turn a validated config dict into (params, point, strict, script)."""
    p = data["params"]
    params = SystemParams(p["n"], p["k"], p["d"], p.get("B", 1))
    point_spec = data["point"]
    if isinstance(point_spec, str):
        func, mode = POINT_FUNCS[point_spec]
        rp = func(params)
        point = OperatingPoint(rp.alpha, rp.per_helper, mode)
    else:
        point = OperatingPoint(point_spec["alpha"], point_spec["beta"], point_spec["mode"])
    script_spec = data["script"]
    if isinstance(script_spec, dict):
        script = worst_case_script(params, script_spec["worst_case"])
        if script_spec.get("check", True):
            script.append(CheckRetrieval())
    else:
        script = [event_from_dict(e) for e in script_spec]
    return params, point, data.get("strict", True), script


def cmd_simulate(args) -> int:
    try:
        data = json.loads(Path(args.config).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {args.config}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.config}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    problems = validate(data, "simulate_config")
    if problems:
        raise UsageError(f"{args.config} does not match the config schema:\n  " + "\n  ".join(problems))
    params, point, strict, script = load_simulation_config(data)
    try:
        cluster = new_cluster(params, point, strict=strict)
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    try:
        log = run_script(cluster, script, args.seed)
    except SimulationError as exc:
        raise UsageError(f"script rejected: {exc}") from None
    with _Output(args.out) as out:
        if args.format == "csv":
            header = ["index", "event", "node", "dits_stored", "classical_dits_sent", "qudits_sent",
                      "entangled_qudits_consumed", "repairs_completed", "retrieval_pass"]
            rows = []
            for e in log.entries:
                led = e["ledger"]
                report = e.get("report")
                rows.append([e["index"], e["event"]["event"], e["event"].get("node", ""),
                             *(_exact(led[f]) for f in header[3:7]), led["repairs_completed"],
                             "" if report is None else report["pass"]])
            _emit_csv(header, rows, out)
        else:
            inputs = {"config": str(args.config), "seed": args.seed}
            _emit_json(output_record("simulate", inputs, log.to_dict()), out)
    return EXIT_OK if log.passed else EXIT_FAIL


def sdc_rows(q: int, mode: str) -> list[dict]:
    rows = []
    labels = qudit.all_labels(q)
    if mode == "receiver":
        for m in labels:
            o = qudit.superdense_receiver(q, m)
            rows.append({"a1": m.a, "b1": m.b, "a2": None, "b2": None, "s": o.s, "t": o.t,
                         "probability": o.probability})
    else:
        for m1 in labels:
            for m2 in labels:
                o = qudit.two_sender_sumbox(q, m1, m2)
                rows.append({"a1": m1.a, "b1": m1.b, "a2": m2.a, "b2": m2.b, "s": o.s, "t": o.t,
                             "probability": o.probability})
    return rows


def cmd_sdc(args) -> int:
    if args.q < 2:
        raise UsageError(f"q must be >= 2, got {args.q}")
    rows = sdc_rows(args.q, args.mode)
    ok = all(abs(r["probability"] - 1.0) <= SDC_TOL for r in rows)
    with _Output(args.out) as out:
        if args.format == "json":
            results = {"q": args.q, "mode": args.mode, "rows": rows, "all_deterministic": ok}
            _emit_json(output_record("sdc", {"q": args.q, "mode": args.mode}, results), out)
        else:
            cols = ["a1", "b1", "a2", "b2", "s", "t", "probability"]
            _emit_csv(cols, [["" if r[c] is None else r[c] for c in cols] for r in rows], out)
    if not ok:
        print("error: some message was not decoded deterministically", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qregen", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def system_args(p):
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--d", type=int, required=True)
        p.add_argument("--B", type=_fraction_arg, default=Fraction(1), help="file size in dits (default 1)")

    def out_arg(p, formats, default):
        p.add_argument("--format", choices=formats, default=default)
        p.add_argument("--out", help="write data here instead of stdout")

    p = sub.add_parser("points", help="MSR, MBR, QMSR and QMBR operating points")
    system_args(p)
    out_arg(p, ["json", "csv"], "json")
    p.set_defaults(func=cmd_points)

    p = sub.add_parser("curve", help="exact storage/bandwidth tradeoff curve")
    system_args(p)
    p.add_argument("--mode", choices=["classical", "quantum", "both"], default="both")
    p.add_argument("--samples", type=int, default=0, help="interior samples per segment")
    p.add_argument("--gnuplot", help="also write a gnuplot script (needs --out and --format csv)")
    out_arg(p, ["json", "csv"], "json")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("ratio", help="quantum/classical per-helper bandwidth ratio over d")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d-min", type=int)
    p.add_argument("--d-max", type=int, required=True)
    p.add_argument("--metric", choices=["msr", "mbr"], required=True)
    p.add_argument("--gnuplot", help="also write a gnuplot script (needs --out and --format csv)")
    out_arg(p, ["csv", "json"], "csv")
    p.set_defaults(func=cmd_ratio)

    p = sub.add_parser("verify", help="check closed-form bounds against enumerated min cuts")
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--n-min", type=int, default=3)
    p.add_argument("--alphas", type=_fraction_list, default=[Fraction(a) for a in (1, 2, 3, 4)])
    p.add_argument("--betas", type=_fraction_list,
                   default=[Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(2)])
    p.add_argument("--modes", choices=["classical", "quantum", "both"], default="both")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--vertex-cap", type=int, default=DEFAULT_VERTEX_CAP)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="replay a failure/repair script")
    p.add_argument("config")
    p.add_argument("--seed", type=int, required=True)
    out_arg(p, ["json", "csv"], "json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sdc", help="superdense coding outcome tables")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--mode", choices=["receiver", "two-sender"], default="receiver")
    out_arg(p, ["csv", "json"], "csv")
    p.set_defaults(func=cmd_sdc)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "gnuplot", None) and not (args.out and args.format == "csv"):
        parser.error("--gnuplot needs --out FILE and --format csv")
    try:
        return args.func(args)
    except (UsageError, ParameterError, EnumerationCapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
