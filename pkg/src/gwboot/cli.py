"""Command-line surface.

Subcommands: pc, bound, verify, recursion, simulate, sharpness, ratio.
Single-record results default to JSON, tables to CSV (--format overrides);
every document embeds its run manifest, floats carry 17 significant digits,
and re-running a manifest's command reproduces identical numeric fields.

Exit codes: 0 success, 1 verification failure, 2 validation/domain error,
3 capability/resource error.
"""

import argparse
import datetime
import json
import math
import sys

from . import __version__
from .bounds import (alpha_grid, asymptotic_ratio, moment_lower_bound,
                     sharpness_sweep)
from .critical import critical_probability, recursion_limit, recursion_step
from .distspec import load_dist_spec
from .errors import (CapabilityError, ConstructionError, DiagnosticError,
                     DomainError, SizeError, ValidationError)
from .offspring import SeedSpec, make_corpus
from .simulator import SimConfig, estimate_uninfected_root

_DEFAULT_TOL_OPTIMIZER = 1e-10
_DEFAULT_TOL_BISECTION = 1e-7
_DEFAULT_TOL_RECURSION = 1e-14
_DEFAULT_TOL_QUADRATURE = 1e-8


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, DomainError, ConstructionError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (CapabilityError, SizeError, DiagnosticError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="gwboot",
        description="Critical probabilities and moment lower bounds for "
                    "threshold infection on random trees")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(required=True, metavar="command")

    pc = sub.add_parser("pc", help="critical probability of a distribution")
    pc.add_argument("--dist", required=True)
    pc.add_argument("--r", required=True, type=int)
    pc.add_argument("--tol", type=float, default=_DEFAULT_TOL_OPTIMIZER)
    _out_opts(pc, default_format="json")
    pc.set_defaults(func=_cmd_pc)

    bound = sub.add_parser("bound", help="moment lower bound report")
    bound.add_argument("--dist", required=True)
    bound.add_argument("--r", required=True, type=int)
    bound.add_argument("--alpha", required=True, type=float)
    _out_opts(bound, default_format="json")
    bound.set_defaults(func=_cmd_bound)

    verify = sub.add_parser(
        "verify", help="check bound <= p_c on the corpus (exit 0 iff all ok)")
    verify.add_argument("--r", required=True, type=int)
    verify.add_argument("--corpus", default="default", choices=["default"])
    _out_opts(verify, default_format="csv")
    verify.set_defaults(func=_cmd_verify)

    rec = sub.add_parser("recursion", help="fixed-point recursion trace summary")
    rec.add_argument("--dist", required=True)
    rec.add_argument("--r", required=True, type=int)
    rec.add_argument("--p", required=True, type=float)
    rec.add_argument("--max-iter", type=int, default=10 ** 6)
    rec.add_argument("--tol", type=float, default=_DEFAULT_TOL_RECURSION)
    _out_opts(rec, default_format="json")
    rec.set_defaults(func=_cmd_recursion)

    sim = sub.add_parser("simulate", help="Monte Carlo uninfected-root estimate")
    sim.add_argument("--dist", required=True)
    sim.add_argument("--r", required=True, type=int)
    sim.add_argument("--p", required=True, type=float)
    sim.add_argument("--depth", required=True, type=int)
    sim.add_argument("--reps", required=True, type=int)
    sim.add_argument("--seed", required=True, type=int)
    sim.add_argument("--stream", type=int, default=0)
    sim.add_argument("--node-cap", type=int, default=10 ** 8)
    _out_opts(sim, default_format="json")
    sim.set_defaults(func=_cmd_simulate)

    sharp = sub.add_parser("sharpness", help="extremal-family sweep with slope fit")
    sharp.add_argument("--r", required=True, type=int)
    sharp.add_argument("--alpha", required=True, type=float)
    sharp.add_argument("--b-list", required=True,
                       help="comma-separated mean values, e.g. '12,15,18'")
    _out_opts(sharp, default_format="csv")
    sharp.set_defaults(func=_cmd_sharpness)

    ratio = sub.add_parser("ratio", help="p_c over the r-th moment bound, constant offspring")
    ratio.add_argument("--r", required=True, type=int)
    ratio.add_argument("--b-list", required=True)
    _out_opts(ratio, default_format="csv")
    ratio.set_defaults(func=_cmd_ratio)
    return parser


def _out_opts(p, default_format):
    p.add_argument("--format", choices=["json", "csv"], default=default_format)
    p.add_argument("--out", default=None, help="output file (default stdout)")


def _cmd_pc(args):
    dist = load_dist_spec(args.dist)
    profile = critical_probability(dist, args.r, tol=args.tol)
    manifest = _manifest("pc", {"dist": args.dist, "r": args.r, "tol": args.tol},
                         {"optimizer": args.tol})
    record = {
        "p_c": profile.p_c, "max_value": profile.max_value,
        "x_star": profile.x_star, "degenerate": profile.degenerate,
        "y_match": profile.y_match, "tol": profile.tol,
    }
    _emit_record(args, manifest, record)
    return 0


def _cmd_bound(args):
    dist = load_dist_spec(args.dist)
    report = moment_lower_bound(args.r, args.alpha, dist)
    manifest = _manifest("bound",
                         {"dist": args.dist, "r": args.r, "alpha": args.alpha}, {})
    record = {
        "r": report.r, "alpha": report.alpha, "alpha_eval": report.alpha_eval,
        "alpha_floor": report.alpha_floor, "alpha_frac": report.alpha_frac,
        "gamma_factor": report.gamma_factor,
        "harmonic_factor": report.harmonic_factor,
        "integral_const": report.integral_const,
        "direct_const": report.direct_const,
        "combined_const": report.combined_const,
        "moment_value": report.moment_value, "bound": report.bound,
        "t0": report.t0,
    }
    _emit_record(args, manifest, record)
    return 0


def _cmd_verify(args):
    corpus = make_corpus(args.r)
    grid = alpha_grid(args.r)
    rows = []
    all_ok = True
    for name, dist in corpus.items():
        p_c = critical_probability(dist, args.r, tol=_DEFAULT_TOL_OPTIMIZER).p_c
        for alpha in grid:
            report = moment_lower_bound(args.r, alpha, dist)
            ok = report.bound <= p_c + 1e-9
            all_ok = all_ok and ok
            rows.append({"distribution": name, "alpha": alpha,
                         "bound": report.bound, "p_c": p_c, "ok": ok})
    manifest = _manifest("verify", {"r": args.r, "corpus": args.corpus},
                         {"optimizer": _DEFAULT_TOL_OPTIMIZER, "margin": 1e-9})
    _emit_table(args, manifest, ["distribution", "alpha", "bound", "p_c", "ok"],
                rows)
    return 0 if all_ok else 1


def _cmd_recursion(args):
    dist = load_dist_spec(args.dist)
    trace = recursion_limit(dist, args.r, args.p, max_iter=args.max_iter,
                            tol=args.tol)
    manifest = _manifest("recursion",
                         {"dist": args.dist, "r": args.r, "p": args.p,
                          "max_iter": args.max_iter, "tol": args.tol},
                         {"recursion": args.tol})
    record = {
        "p": trace.p, "y0": float(trace.iterates[0]), "limit": trace.limit,
        "classified": trace.classified, "converged": trace.converged,
        "iterations": len(trace.iterates) - 1,
    }
    _emit_record(args, manifest, record)
    return 0


def _cmd_simulate(args):
    dist = load_dist_spec(args.dist)
    seed = SeedSpec(master_seed=args.seed, stream_index=args.stream)
    config = SimConfig(r=args.r, p=args.p, depth=args.depth,
                       replications=args.reps, seed=seed, node_cap=args.node_cap)
    estimate = estimate_uninfected_root(dist, config)
    exact = _exact_iterate(dist, args.r, args.p, args.depth)
    err = estimate.mean - exact
    manifest = _manifest("simulate",
                         {"dist": args.dist, "r": args.r, "p": args.p,
                          "depth": args.depth, "reps": args.reps,
                          "seed": args.seed, "stream": args.stream,
                          "node_cap": args.node_cap}, {})
    record = {
        "mean": estimate.mean, "stderr": estimate.stderr, "n": estimate.n,
        "master_seed": seed.master_seed, "stream_index": seed.stream_index,
        "exact_value": exact, "abs_error": abs(err),
        "z_score": (err / estimate.stderr) if estimate.stderr > 0 else 0.0,
    }
    _emit_record(args, manifest, record)
    return 0


def _exact_iterate(dist, r, p, depth):
    y = 1.0 - p
    for _ in range(depth):
        y = recursion_step(dist, r, p, y)
    return y


def _cmd_sharpness(args):
    b_values = _parse_list(args.b_list)
    sweep = sharpness_sweep(args.r, b_values, args.alpha)
    manifest = _manifest("sharpness",
                         {"r": args.r, "alpha": args.alpha, "b_list": args.b_list},
                         {"optimizer": _DEFAULT_TOL_OPTIMIZER})
    rows = [{"b": row.b, "p_c": row.p_c, "bound": row.bound,
             "moment_root": row.moment_root, "cutoff": row.cutoff}
            for row in sweep.rows]
    summary = {"slope_log_pc": sweep.slope_log_pc,
               "slope_log_moment_root": sweep.slope_log_moment_root}
    _emit_table(args, manifest, ["b", "p_c", "bound", "moment_root", "cutoff"],
                rows, summary=summary)
    return 0


def _cmd_ratio(args):
    b_values = _parse_list(args.b_list)
    rows = []
    for b in b_values:
        if int(b) != b:
            raise ValidationError(f"--b-list entries must be integers for ratio, got {b!r}")
        rows.append({"b": int(b), "ratio": asymptotic_ratio(args.r, int(b))})
    manifest = _manifest("ratio", {"r": args.r, "b_list": args.b_list},
                         {"optimizer": _DEFAULT_TOL_OPTIMIZER})
    _emit_table(args, manifest, ["b", "ratio"], rows)
    return 0


def _parse_list(text):
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ValidationError(f"cannot parse list {text!r}: {exc}") from exc
    if not values:
        raise ValidationError("empty value list")
    return values


def _manifest(command, inputs, tolerances):
    return {
        "command": command,
        "inputs": inputs,
        "tolerances": tolerances,
        "tool_version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }


# ---------------------------------------------------------------------------
# serialization: floats at 17 significant digits everywhere


def format_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def to_json_17(obj, indent=0) -> str:
    pad = " " * indent
    inner = " " * (indent + 2)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = [f"{inner}{json.dumps(str(k))}: {to_json_17(v, indent + 2)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        parts = [f"{inner}{to_json_17(v, indent + 2)}" for v in obj]
        return "[\n" + ",\n".join(parts) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, float):
        s = format_float(obj)
        return json.dumps(s) if s in ("nan", "inf", "-inf") else s
    if obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_cell(v):
    if isinstance(v, float):
        return format_float(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _emit_record(args, manifest, record):
    if args.format == "json":
        text = to_json_17({"manifest": manifest, "result": record}) + "\n"
    else:
        text = _csv_text(manifest, list(record.keys()), [record])
    _write(args.out, text)


def _emit_table(args, manifest, columns, rows, summary=None):
    if args.format == "json":
        doc = {"manifest": manifest, "rows": rows}
        if summary:
            doc["summary"] = summary
        text = to_json_17(doc) + "\n"
    else:
        text = _csv_text(manifest, columns, rows, summary=summary)
    _write(args.out, text)


def _csv_text(manifest, columns, rows, summary=None):
    lines = ["# manifest: " + json.dumps(manifest, separators=(",", ":"))]
    if summary:
        for k, v in summary.items():
            lines.append(f"# {k} = {_csv_cell(v)}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_csv_cell(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


def _write(out, text):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


if __name__ == "__main__":
    sys.exit(main())
