"""Command-line surface: certify, table, gamma, hcr, simulate, plot.

Exit codes: 0 success/certified, 1 not certified, 2 undecided or solver
failure, 64 usage and parse errors.  Every command writes a run manifest
(JSON) beside its outputs; all outputs are deterministic given the same
arguments.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from datetime import datetime, timezone

from . import __version__
from .pde import (ModelError, default_bump_u0, kiss_model, load_model)
from .poly import ParseError, format_polynomial
from .sos import (DegreeProfile, SosError, parameterize, assemble,
                  save_certificate, load_certificate, solve_identities)
from . import certificate as cb
from .sdp import export_sdpa
from .search import (BisectionConfig, SearchError, SearchRecord,
                     check_stability, default_gamma_config,
                     default_hcr_config, find_gamma, find_hcr)
from .fd import (FdError, SimConfig, estimate_decay_rate, simulate,
                 write_checkpoint, write_norms_csv)

EXIT_OK = 0
EXIT_NOT_CERTIFIED = 1
EXIT_UNDECIDED = 2
EXIT_USAGE = 64

TABLE_DEGREES = (4, 6, 8, 10, 12)


class CliError(Exception):
    def __init__(self, message, code=EXIT_USAGE):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------------

def _add_model_args(p):
    p.add_argument("model", nargs="?", default=None,
                   help="model file (key = expression lines); "
                        "alternative to --kiss")
    p.add_argument("--kiss", metavar="H,R",
                   help="KISS shorthand: u_t = h*laplace(u) + r*u")


def _add_profile_args(p):
    p.add_argument("--deg-s", type=int, default=4,
                   help="degree of the Lyapunov weight s (even, default 4)")
    p.add_argument("--deg-p", type=int, default=None,
                   help="degree of the spacing polynomials (default: rule)")
    p.add_argument("--deg-n", type=int, default=None,
                   help="degree of the scalar multipliers (default: rule)")
    p.add_argument("--deg-qm", type=int, default=None,
                   help="degree of the matrix multipliers (default: rule)")


def _add_common_args(p):
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--tol", type=float, default=None,
                   help="bisection tolerance override")
    p.add_argument("--max-iter", type=int, default=None,
                   help="solver iteration limit override")
    p.add_argument("--external-solver", action="store_true",
                   help="solve SDPs with the external adapter (cvxpy)")


def _resolve_model(args):
    if args.kiss and args.model:
        raise CliError("give either a model file or --kiss, not both")
    if args.kiss:
        try:
            h, r = (float(v) for v in args.kiss.split(","))
        except ValueError:
            raise CliError("--kiss expects two comma-separated numbers")
        return kiss_model(h, r), default_bump_u0(), "kiss(%s)" % args.kiss
    if args.model:
        model, u0 = load_model(args.model)
        return model, (u0 or default_bump_u0()), args.model
    raise CliError("a model file or --kiss h,r is required")


def _resolve_profile(model, args):
    prof = DegreeProfile.defaults(model, args.deg_s)
    overrides = {}
    for name in ("deg_p", "deg_n", "deg_qm"):
        v = getattr(args, name)
        if v is not None:
            overrides[name] = v
    if overrides:
        prof = DegreeProfile(deg_s=prof.deg_s,
                             deg_p=overrides.get("deg_p", prof.deg_p),
                             deg_n=overrides.get("deg_n", prof.deg_n),
                             deg_qm=overrides.get("deg_qm", prof.deg_qm))
    return prof


def _outdir(args):
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _write_manifest(args, outdir, command, extra=None):
    manifest = {
        "command": command,
        "arguments": {k: v for k, v in sorted(vars(args).items())
                      if k != "func"},
        "tool": "soslyap",
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    if extra:
        manifest.update(extra)
    path = os.path.join(outdir, "manifest-%s.json" % command)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, default=str)
        fh.write("\n")
    return path


def _solver(args):
    if not args.external_solver:
        return None
    from .external import solve_external
    return solve_external


# ---------------------------------------------------------------------------
# certify
# ---------------------------------------------------------------------------

def cmd_certify(args):
    model, _, model_name = _resolve_model(args)
    profile = _resolve_profile(model, args)
    outdir = _outdir(args)
    program = parameterize(profile, gamma=args.gamma)
    if args.export_sdpa:
        export_sdpa(assemble(model, program), args.export_sdpa)
        print("wrote SDP instance to %s" % args.export_sdpa)
    outcome = solve_identities(model, profile, gamma=args.gamma,
                               solver=_solver(args))
    extra = {"model": model_name, "profile": vars(profile) | {},
             "gamma": args.gamma, "status": outcome.status,
             "margin": outcome.margin}
    _write_manifest(args, outdir, "certify", extra)
    if args.dump_m:
        _dump_m(model, outcome)
    if outcome.status == "certified":
        cert_path = os.path.join(outdir, "certificate.json")
        save_certificate(outcome.certificate, cert_path)
        print("certified (margin %.3e); certificate written to %s"
              % (outcome.margin, cert_path))
        return EXIT_OK
    if outcome.status == "not-certified":
        print("not certified (margin %.3e)" % outcome.margin)
        return EXIT_NOT_CERTIFIED
    print("undecided: solver status %r" % outcome.solver_status)
    return EXIT_UNDECIDED


def _dump_m(model, outcome):
    """Print the entries of M (+ gamma*S) in the expression grammar, using
    the certified weight when available and s=1 otherwise."""
    if outcome.certificate is not None:
        inputs = outcome.certificate.inputs()
        m = cb.build_M(model, inputs)
        if outcome.certificate.gamma:
            m = m + outcome.certificate.gamma * cb.build_S(inputs.s)
    else:
        from .poly import Polynomial
        m = cb.build_Q(model, Polynomial.constant(1.0))
    for r in range(3):
        for c in range(r, 3):
            print("M[%d,%d] = %s" % (r + 1, c + 1,
                                     format_polynomial(m.get(r, c))))


# ---------------------------------------------------------------------------
# gamma / hcr searches
# ---------------------------------------------------------------------------

def cmd_gamma(args):
    model, _, model_name = _resolve_model(args)
    profile = _resolve_profile(model, args)
    outdir = _outdir(args)
    cfg = default_gamma_config(model)
    if args.tol or args.upper or args.lower is not None:
        cfg = BisectionConfig(lower=args.lower or cfg.lower,
                              upper=args.upper or cfg.upper,
                              tolerance=args.tol or cfg.tolerance)
    record = SearchRecord()
    gamma, cert = find_gamma(model, profile, cfg=cfg, record=record)
    record.write_csv(os.path.join(outdir, "gamma-search.csv"))
    cert_path = os.path.join(outdir, "certificate.json")
    save_certificate(cert, cert_path)
    _write_manifest(args, outdir, "gamma",
                    {"model": model_name, "profile": vars(profile) | {},
                     "gamma": gamma})
    print("maximum certified gamma = %.4f (decay rate %.4f); certificate "
          "written to %s" % (gamma, gamma / 2.0, cert_path))
    return EXIT_OK


def cmd_hcr(args):
    outdir = _outdir(args)
    probe_model = kiss_model(1.0, args.r)
    profile = _resolve_profile(probe_model, args)
    cfg = default_hcr_config()
    if args.tol or args.upper or args.lower:
        cfg = BisectionConfig(lower=args.lower or cfg.lower,
                              upper=args.upper or cfg.upper,
                              tolerance=args.tol or cfg.tolerance)
    record = SearchRecord()
    hcr = find_hcr(args.r, profile=profile, cfg=cfg, record=record)
    record.write_csv(os.path.join(outdir, "hcr-search.csv"))
    _write_manifest(args, outdir, "hcr",
                    {"r": args.r, "profile": vars(profile) | {}, "hcr": hcr})
    print("minimum certifiable diffusion h_cr = %.4f" % hcr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# table
# ---------------------------------------------------------------------------

def cmd_table(args):
    outdir = _outdir(args)
    degrees = args.degrees or TABLE_DEGREES
    rows = []
    for deg_s in degrees:
        t0 = time.time()
        record = SearchRecord()
        try:
            if args.which == "hcr":
                model = kiss_model(1.0, args.r)
                profile = DegreeProfile.defaults(model, deg_s)
                value = find_hcr(args.r, profile=profile, record=record)
            else:
                try:
                    h, r = (float(v) for v in (args.kiss or "2,4").split(","))
                except ValueError:
                    raise CliError("--kiss expects two comma-separated "
                                   "numbers")
                model = kiss_model(h, r)
                profile = DegreeProfile.defaults(model, deg_s)
                value, _ = find_gamma(model, profile, record=record)
            certified = [s for s in record.steps if s.verdict == "certified"]
            margin = certified[-1].margin if certified else float("nan")
            rows.append((deg_s, value, margin, time.time() - t0))
        except (SearchError, SosError) as err:
            print("deg_s=%d failed: %s" % (deg_s, err), file=sys.stderr)
            rows.append((deg_s, float("nan"), float("nan"),
                         time.time() - t0))
    path = os.path.join(outdir, "table-%s.csv" % args.which)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["deg_s", "value", "margin", "solve_seconds"])
        for deg_s, value, margin, secs in rows:
            w.writerow([deg_s, repr(value), repr(margin), "%.3f" % secs])
    _write_manifest(args, outdir, "table", {"which": args.which,
                                            "rows": len(rows)})
    for deg_s, value, margin, secs in rows:
        print("deg_s=%2d  %s=%.4f  (%.1fs)" % (deg_s, args.which, value,
                                               secs))
    print("table written to %s" % path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(args):
    model, u0, model_name = _resolve_model(args)
    outdir = _outdir(args)
    cfg = SimConfig(n=args.n, dt=args.dt, t_final=args.t_final,
                    scheme=args.scheme, sample_stride=args.stride)
    result = simulate(model, u0, cfg)
    path = os.path.join(outdir, "norms.csv")
    write_norms_csv(result, path)
    if args.checkpoint:
        write_checkpoint(args.checkpoint, result.final_state)
    rate = None
    if not result.blew_up:
        try:
            rate = estimate_decay_rate(result)
        except FdError:
            pass
    _write_manifest(args, outdir, "simulate",
                    {"model": model_name, "blew_up": result.blew_up,
                     "estimated_rate": rate})
    if result.blew_up:
        print("simulation blew up (non-finite values); partial series in %s"
              % path)
    elif rate is not None:
        print("norm series written to %s; estimated decay rate %.4f "
              "(negative = growth)" % (path, rate))
    else:
        print("norm series written to %s" % path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# plot
# ---------------------------------------------------------------------------

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf")


def _read_norms_csv(path):
    ts, vs = [], []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            ts.append(float(row["t"]))
            vs.append(float(row["norm"]))
    if not ts:
        raise CliError("no samples in %s" % path)
    return ts, vs


def cmd_plot(args):
    if not args.sim and not args.cert:
        raise CliError("plot needs at least one --sim series or --cert "
                       "certificate")
    outdir = _outdir(args)
    curves = []  # (label, ts, log10 norms)
    sims = []
    for path in args.sim or []:
        ts, vs = _read_norms_csv(path)
        sims.append((path, ts, vs))
    norm0 = sims[0][2][0] if sims else 1.0
    tmax = max((ts[-1] for _, ts, _ in sims), default=args.t_max or 1.0)
    for path, ts, vs in sims:
        pts = [(t, math.log10(v)) for t, v in zip(ts, vs) if v > 0]
        curves.append((os.path.basename(path), pts))
    for path in args.cert or []:
        cert = load_certificate(path)
        # straight bound line aligned at t=0: slope -gamma / (2 ln 10)
        y0 = math.log10(norm0)
        slope = -cert.gamma / (2.0 * math.log(10.0))
        label = "bound gamma=%.3g" % cert.gamma
        curves.append((label, [(0.0, y0), (tmax, y0 + slope * tmax)]))
    svg_path = os.path.join(outdir, "plot.svg")
    csv_path = os.path.join(outdir, "plot.csv")
    _render_svg(svg_path, curves)
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["series", "t", "log10_norm"])
        for label, pts in curves:
            for t, y in pts:
                w.writerow([label, repr(t), repr(y)])
    _write_manifest(args, outdir, "plot", {"series": [c[0] for c in curves]})
    print("wrote %s and %s" % (svg_path, csv_path))
    return EXIT_OK


def _render_svg(path, curves):
    width, height, margin = 800, 600, 60
    xs = [t for _, pts in curves for t, _ in pts]
    ys = [y for _, pts in curves for _, y in pts]
    if not xs:
        raise CliError("nothing to plot")
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y1 = y0 + 1.0

    def px(t):
        return margin + (t - x0) / (x1 - x0) * (width - 2 * margin)

    def py(y):
        return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin)

    lines = ['<svg xmlns="http://www.w3.org/2000/svg" width="%d" '
             'height="%d" viewBox="0 0 %d %d">' % (width, height, width,
                                                   height),
             '<rect width="%d" height="%d" fill="white"/>' % (width, height),
             '<line x1="%g" y1="%g" x2="%g" y2="%g" stroke="black"/>'
             % (margin, height - margin, width - margin, height - margin),
             '<line x1="%g" y1="%g" x2="%g" y2="%g" stroke="black"/>'
             % (margin, margin, margin, height - margin)]
    for k in range(5):
        t = x0 + (x1 - x0) * k / 4.0
        y = y0 + (y1 - y0) * k / 4.0
        lines.append('<text x="%g" y="%g" font-size="12" '
                     'text-anchor="middle">%.3g</text>'
                     % (px(t), height - margin + 18, t))
        lines.append('<text x="%g" y="%g" font-size="12" '
                     'text-anchor="end">%.3g</text>'
                     % (margin - 6, py(y) + 4, y))
    lines.append('<text x="%g" y="%g" font-size="13" text-anchor="middle">'
                 't</text>' % (width / 2, height - 14))
    lines.append('<text x="16" y="%g" font-size="13" text-anchor="middle" '
                 'transform="rotate(-90 16 %g)">log10 L2 norm</text>'
                 % (height / 2, height / 2))
    for idx, (label, pts) in enumerate(curves):
        color = PALETTE[idx % len(PALETTE)]
        coords = " ".join("%.3f,%.3f" % (px(t), py(y)) for t, y in pts)
        lines.append('<polyline fill="none" stroke="%s" stroke-width="1.5" '
                     'points="%s"/>' % (color, coords))
        lines.append('<text x="%g" y="%g" font-size="12" fill="%s">%s'
                     '</text>' % (width - margin - 180,
                                  margin + 16 * (idx + 1), color, label))
    lines.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="soslyap",
        description="Certified exponential stability of 2D parabolic PDEs "
                    "via sum-of-squares Lyapunov functionals.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="run the stability/decay SOS test")
    _add_model_args(p)
    _add_profile_args(p)
    _add_common_args(p)
    p.add_argument("--gamma", type=float, default=None,
                   help="decay rate to certify (omit for plain stability)")
    p.add_argument("--dump-M", dest="dump_m", action="store_true",
                   help="print the entries of the derivative matrix M")
    p.add_argument("--export-sdpa", metavar="PATH",
                   help="also export the SDP instance in SDPA sparse format")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("gamma", help="bisection for the maximum certified "
                                     "decay rate")
    _add_model_args(p)
    _add_profile_args(p)
    _add_common_args(p)
    p.add_argument("--lower", type=float, default=None)
    p.add_argument("--upper", type=float, default=None)
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("hcr", help="bisection for the KISS critical "
                                   "diffusion")
    _add_profile_args(p)
    _add_common_args(p)
    p.add_argument("--r", type=float, default=4.0,
                   help="KISS reaction rate (default 4)")
    p.add_argument("--lower", type=float, default=None)
    p.add_argument("--upper", type=float, default=None)
    p.set_defaults(func=cmd_hcr)

    p = sub.add_parser("table", help="reproduce a whole table (degrees "
                                     "4,6,8,10,12)")
    _add_common_args(p)
    p.add_argument("--which", choices=("hcr", "gamma"), required=True)
    p.add_argument("--r", type=float, default=4.0,
                   help="KISS reaction rate for --which hcr")
    p.add_argument("--kiss", metavar="H,R", default="2,4",
                   help="KISS parameters for --which gamma")
    p.add_argument("--degrees", type=int, nargs="+", default=None)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("simulate", help="finite-difference simulation")
    _add_model_args(p)
    _add_common_args(p)
    p.add_argument("--n", type=int, default=128)
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--t-final", type=float, default=1.0)
    p.add_argument("--scheme", choices=("implicit-euler", "crank-nicolson"),
                   default="implicit-euler")
    p.add_argument("--stride", type=int, default=10)
    p.add_argument("--checkpoint", metavar="PATH",
                   help="write the final state as a binary checkpoint")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("plot", help="semi-log norm plot with certified "
                                    "bound lines (SVG + CSV)")
    _add_common_args(p)
    p.add_argument("--sim", action="append", metavar="CSV",
                   help="norm series from `simulate` (repeatable)")
    p.add_argument("--cert", action="append", metavar="JSON",
                   help="certificate file from `certify`/`gamma` "
                        "(repeatable)")
    p.add_argument("--t-max", type=float, default=None,
                   help="time span of bound lines when no series is given")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        # argparse uses exit code 2 for usage errors; remap to 64
        if err.code not in (0, None):
            return EXIT_USAGE
        return 0
    try:
        return args.func(args)
    except CliError as err:
        print("error: %s" % err, file=sys.stderr)
        return err.code
    except (ParseError, ModelError, SosError, SearchError, FdError) as err:
        print("error: %s" % err, file=sys.stderr)
        return EXIT_USAGE
    except OSError as err:
        print("error: %s" % err, file=sys.stderr)
        return EXIT_UNDECIDED


if __name__ == "__main__":
    sys.exit(main())
