"""Command-line front end: ``tourprod {table,verify,estimate,mu23}``.

Exit status is 0 when every cross-engine agreement holds, 1 when one
fails and 2 on usage or engine errors.
"""

import argparse
import csv
import io
import json
import math
import sys

from .closed_forms import catalogue
from .errors import TourProdError
from .montecarlo import default_workers
from .quadrature import DEFAULT_RHO_GRID
from .report import RunConfig, estimate, mu23_sweep, verify, verify_targets
from .tours import TourSpec

_DEFAULTS = RunConfig()


def _rho_grid(text):
    try:
        grid = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad rho grid {text!r}")
    if not grid:
        raise argparse.ArgumentTypeError("rho grid is empty")
    for r in grid:
        if not -0.5 < r <= -0.3:
            raise argparse.ArgumentTypeError(f"rho {r} outside (-1/2, -0.3]")
    return grid


def _spec(text):
    try:
        return TourSpec.parse(text)
    except TourProdError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--samples", type=int, default=_DEFAULTS.samples,
                        help="Monte Carlo samples (default %(default)s)")
    common.add_argument("--seed", type=int, default=_DEFAULTS.seed,
                        help="Monte Carlo seed (default %(default)s)")
    common.add_argument("--tol", type=float, default=_DEFAULTS.tol,
                        help="quadrature / agreement tolerance (default %(default)s)")
    common.add_argument("--out", metavar="FILE", help="write output to FILE")
    common.add_argument("--workers", type=int, default=None,
                        help="worker threads (default: $TOURPROD_THREADS or 1)")

    parser = argparse.ArgumentParser(
        prog="tourprod",
        description="Expected products of step lengths of Gaussian tours.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("table", parents=[common], help="print the closed-form catalogue")

    p = sub.add_parser("verify", parents=[common], help="cross-check all engines")
    p.add_argument("target", help="'all' or a spec such as mu[1,3], nu_2_3, 2,4,open")

    p = sub.add_parser("estimate", parents=[common], help="best available value")
    p.add_argument("target", type=_spec)

    p = sub.add_parser("mu23", parents=[common], help="F(rho) sweep and its limit at -1/2")
    p.add_argument("--rho-grid", type=_rho_grid, default=DEFAULT_RHO_GRID,
                   help="comma-separated, decreasing toward -1/2 (default %(default)s)")
    p.add_argument("--k-max", type=int, default=_DEFAULTS.k_max)
    p.add_argument("--term-tol", type=float, default=_DEFAULTS.term_tol)
    return parser


def _config(args):
    return RunConfig(
        samples=args.samples,
        seed=args.seed,
        tol=args.tol,
        k_max=getattr(args, "k_max", _DEFAULTS.k_max),
        term_tol=getattr(args, "term_tol", _DEFAULTS.term_tol),
        rho_grid=getattr(args, "rho_grid", _DEFAULTS.rho_grid),
        workers=args.workers or default_workers(),
    )


def _csv(rows, header):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x):
    return "inf" if math.isinf(x) else f"{x:.9g}"


# -- renderers -------------------------------------------------------------


def render_table(fmt):
    entries = catalogue()
    if fmt == "json":
        return json.dumps([e.to_dict() for e in entries], indent=2) + "\n"
    if fmt == "csv":
        rows = [
            (e.spec.symbol, e.spec.d, e.spec.n, e.spec.topology.value, repr(e.value),
             e.expression, e.provenance)
            for e in entries
        ]
        return _csv(rows, ("quantity", "d", "n", "topology", "value", "expression", "provenance"))
    width = max(len(e.spec.symbol) for e in entries)
    lines = [f"{e.spec.symbol:<{width}}  {e.value:12.6f}  {e.expression}" for e in entries]
    return "\n".join(lines) + "\n"


def _render_reports(reports, fmt):
    if fmt == "json":
        data = [r.to_dict() for r in reports]
        return json.dumps(data[0] if len(data) == 1 else data, indent=2) + "\n"
    if fmt == "csv":
        rows = [
            (r.quantity, e.engine, repr(e.value), repr(e.error), r.ok)
            for r in reports
            for e in r.engines
        ]
        return _csv(rows, ("quantity", "engine", "value", "error", "ok"))
    out = []
    for r in reports:
        out.append(f"{r.quantity}: {'OK' if r.ok else 'DISAGREE'}")
        for e in r.engines:
            out.append(f"  {e.engine:<24} {_fmt(e.value):>14} +/- {_fmt(e.error)}")
        for a in r.agreements:
            flag = "agree" if a.agree else "DISAGREE"
            out.append(
                f"  {' vs '.join(a.engines)}: |diff|={a.difference:.3g} "
                f"3*err={3 * a.combined_error:.3g} {flag}"
            )
        out.extend(f"  note: {n}" for n in r.notes)
    if reports:
        out.append(f"config: {json.dumps(reports[0].config, sort_keys=True)}")
    return "\n".join(out) + "\n"


def _render_mu23(report, fmt):
    if fmt == "csv":
        rows = [
            (repr(s["rho"]), repr(s["series"]), repr(s["series_error"]),
             repr(s["mc"]), repr(s["mc_stderr"]))
            for s in report.sweep
        ]
        return _csv(rows, ("rho", "F_series", "F_series_error", "F_mc", "F_mc_stderr"))
    if fmt == "json":
        return _render_reports([report], fmt)
    lines = ["     rho        F series        F Monte Carlo"]
    for s in report.sweep:
        lines.append(
            f"  {s['rho']:+.4f}  {s['series']:.9f}  {s['mc']:.6f} +/- {s['mc_stderr']:.6f}"
        )
    return "\n".join(lines) + "\n" + _render_reports([report], "text")


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        cfg = _config(args)
        status = 0
        if args.command == "table":
            text = render_table(args.format)
        elif args.command == "verify":
            specs = verify_targets() if args.target == "all" else [_spec(args.target)]
            reports = [verify(s, cfg) for s in specs]
            text = _render_reports(reports, args.format)
            status = 0 if all(r.ok for r in reports) else 1
        elif args.command == "estimate":
            text = _render_reports([estimate(args.target, cfg)], args.format)
        else:
            report = mu23_sweep(cfg)
            text = _render_mu23(report, args.format)
            status = 0 if report.ok else 1
    except (TourProdError, argparse.ArgumentTypeError) as exc:
        print(f"tourprod: error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
