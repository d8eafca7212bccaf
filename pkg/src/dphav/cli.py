"""Tables of photon statistics, conditional states and simulated shots.

Every subcommand writes one table, as CSV (default) or JSON
``{"meta": {"spec", "eta", "rule", "seed"}, "data": [...]}``.  Intensities are
given as ``--alpha2`` / ``--beta2``.  Any long flag may also come from a
``key = value`` file passed with ``--config``; command-line flags win.

Exit status: 0 on success, 2 on usage errors, 3 on numerical failure.
"""

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from dphav import __version__
from dphav.detect import (
    bernoulli_map,
    correlation_formula,
    correlation_from_stats,
    joint_detected_dist,
)
from dphav.exceptions import DphavError, NumericalError
from dphav.nongauss import covariance_of_conditional, delta_full, epsilon_bound
from dphav.shotsim import RunConfig, fidelity, reconstruct_conditional, simulate_shots, write_records_csv
from dphav.splitcond import (
    AcceptanceRule,
    conditional_density_matrix,
    conditional_detected_dist,
    gaussian_approx,
    normal_density,
    peak_locations,
    phase_distribution,
    split,
)
from dphav.states import (
    DphavSpec,
    dphav_moments,
    dphav_photon_dist_closedform,
    dphav_photon_dist_quadrature,
)
from dphav.wigner import phase_space_grid, wigner_of_phase_mixture

log = logging.getLogger("dphav")

EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


# -- argument helpers -------------------------------------------------------


def int_range(text):
    """Parse ``"3"``, ``"0..12"`` or ``"1,4,9"`` into a list of ints."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise argparse.ArgumentTypeError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty value list")
    return out


def float_list(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not values:
        raise argparse.ArgumentTypeError("empty value list")
    return values


def float_range(text):
    """Parse ``"lo..hi"`` into a pair of floats."""
    try:
        lo, hi = (float(v) for v in text.split("..", 1))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'lo..hi', got {text!r}") from None
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


RULE_KINDS = ("eq", "neq", "gt", "leq")


def rule_kinds(text):
    kinds = [k.strip().lower() for k in text.split(",") if k.strip()]
    bad = [k for k in kinds if k not in RULE_KINDS]
    if bad or not kinds:
        raise argparse.ArgumentTypeError(f"rules must be drawn from {','.join(RULE_KINDS)}")
    return kinds


def _resolve_rule(text, k):
    """Turn ``eq:k`` + ``--k 10`` (or ``eq:10``, ``eq``) into an AcceptanceRule."""
    text = text.strip().lower()
    if text.endswith(":k") or text in RULE_KINDS:
        if k is None:
            raise UsageError(f"rule {text!r} needs --k")
        text = f"{text.split(':')[0]}:{k}"
    try:
        return AcceptanceRule.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def read_config(path):
    """Read ``key = value`` lines (``#`` comments) into a dict of strings."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


# -- output -----------------------------------------------------------------


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def _json_value(value):
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def emit(args, columns, rows, rule=None, seed=None):
    if args.format == "json":
        meta = {
            "spec": {"alpha2": args.alpha2, "beta2": args.beta2},
            "eta": args.eta,
            "rule": rule,
            "seed": seed,
        }
        data = [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows]
        text = json.dumps({"meta": meta, "data": data}, indent=1) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        text = buf.getvalue()
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _pmap(args, func, items):
    items = list(items)
    if args.jobs <= 1 or len(items) <= 1:
        return [func(it) for it in items]
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        return list(pool.map(func, items))


def _single(values, name):
    if isinstance(values, list):
        if len(values) != 1:
            raise UsageError(f"--{name} takes a single value for this subcommand")
        return values[0]
    return values


def _spec(args):
    return DphavSpec.from_intensities(_single(args.alpha2, "alpha2"), _single(args.beta2, "beta2"))


# -- subcommands ------------------------------------------------------------


def cmd_stats(args):
    spec = _spec(args)
    dist = dphav_photon_dist_quadrature(spec, args.n_max, args.points)
    probs = dist.probs
    if args.eta < 1:
        probs = bernoulli_map(dist, args.eta).probs
    columns = ["k", "prob"]
    rows = [[k, p] for k, p in enumerate(probs)]
    if args.closed_form:
        detected = spec.scaled(args.eta)
        columns.append("prob_closedform")
        for row in rows:
            row.append(dphav_photon_dist_closedform(detected, row[0]))
    moments = dphav_moments(spec.scaled(args.eta))
    k = np.arange(probs.size)
    log.info("moments: mean=%r variance=%r k_factor=%r", moments.mean, moments.variance, moments.k_factor)
    log.info("table mean=%r", float(k @ probs))
    emit(args, columns, rows)


def cmd_condition(args):
    amps = split(_spec(args))
    points = [(kind, m1) for kind in args.rules for m1 in args.m1]
    if args.all:
        points.insert(0, ("all", None))

    def one(point):
        kind, m1 = point
        rule = AcceptanceRule.all() if kind == "all" else getattr(AcceptanceRule, kind)(m1)
        pd = phase_distribution(amps, rule, args.eta, args.points)
        dist = conditional_detected_dist(amps, pd, args.eta)
        rho = conditional_density_matrix(amps, pd) if args.table == "density" else None
        return rule, pd, dist, rho

    results = _pmap(args, one, points)
    rows = []
    if args.table == "summary":
        columns = ["rule", "m1", "acceptance", "mean", "variance", "epsilon"]
        for (kind, m1), (rule, pd, dist, _) in zip(points, results):
            rows.append([kind, "" if m1 is None else m1, pd.norm_constant, dist.mean(),
                         dist.variance(), epsilon_bound(dist).value])
    elif args.table == "dist":
        columns = ["rule", "m1", "m", "prob"]
        for (kind, m1), (_, _, dist, _) in zip(points, results):
            for m, p in enumerate(dist.probs):
                rows.append([kind, "" if m1 is None else m1, m, p])
    else:
        columns = ["rule", "m1", "n", "m", "rho"]
        for (kind, m1), (_, _, _, rho) in zip(points, results):
            el = rho.elements.real
            for n in range(rho.dim):
                for m in range(rho.dim):
                    rows.append([kind, "" if m1 is None else m1, n, m, el[n, m]])
    emit(args, columns, rows, rule=[str(r[0]) for r in results])


def cmd_phase(args):
    amps = split(_spec(args))
    rule = _resolve_rule(args.rule, args.k)
    pd = phase_distribution(amps, rule, args.eta, args.points)
    peaks = (math.nan, math.nan)
    gauss = None
    if rule.kind == "eq" and amps.a_t * amps.b_t > 0:
        # peak positions refer to the intensity seen by the detector
        seen = split(_spec(args).scaled(args.eta))
        found = peak_locations(seen, rule.m1)
        peaks = (found[0], found[-1])
        if rule.m1 > seen.max_intensity:
            gauss = normal_density(pd.grid, gaussian_approx(seen, rule.m1))
    columns = ["phi_rad", "density_per_rad", "gaussian_approx_per_rad", "phi_max_minus_rad",
               "phi_max_plus_rad"]
    rows = []
    for j, (phi, p) in enumerate(zip(pd.grid, pd.density)):
        rows.append([phi, p, math.nan if gauss is None else gauss[j], peaks[0], peaks[1]])
    log.info("acceptance probability N=%r, grid argmax |phi|=%r", pd.norm_constant, pd.argmax())
    emit(args, columns, rows, rule=str(rule))


def cmd_wigner(args):
    amps = split(_spec(args))
    rule = _resolve_rule(args.rule, args.k)
    pd = phase_distribution(amps, rule, args.eta, args.points)
    cov = covariance_of_conditional(amps, pd)
    extent = args.extent
    if extent is None:
        extent = 5.0 * math.sqrt(max(cov.var_x, cov.var_y)) + abs(cov.mean_x)
    x, p = phase_space_grid(extent, args.grid)
    w = wigner_of_phase_mixture(amps, pd, (x, p))
    rows = [[x[i], p[j], w[i, j]] for i in range(x.size) for j in range(p.size)]
    log.info("Wigner integral on grid = %r", float(w.sum() * (x[1] - x[0]) * (p[1] - p[0])))
    emit(args, ["x", "p", "wigner"], rows, rule=str(rule))


def cmd_correlate(args):
    if args.alpha_eq_beta:
        ratio = 1.0
    elif args.ratio is not None:
        ratio = args.ratio
    else:
        raise UsageError("correlate needs --alpha-eq-beta or --ratio")
    lo, hi = args.mean_range
    totals = np.linspace(lo, hi, args.n)
    columns = ["total_mean_detected", "alpha2_detected", "beta2_detected", "C_formula", "C_moments"]
    if args.joint:
        columns.append("C_joint")

    def one(total):
        a2 = total * ratio / (1.0 + ratio)
        b2 = total - a2
        row = [total, a2, b2, correlation_formula(a2, b2)]
        spec = DphavSpec.from_intensities(a2, b2)
        mom = dphav_moments(spec)
        row.append(correlation_from_stats(mom.mean, mom.variance) if mom.mean > 0 else 0.0)
        if args.joint:
            row.append(joint_detected_dist(spec, 1.0).pearson() if total > 0 else math.nan)
        return row

    rows = _pmap(args, one, totals)
    emit(args, columns, rows)


def cmd_nongauss(args):
    specs = [(a2, b2) for a2 in args.alpha2 for b2 in args.beta2]
    columns = ["alpha2", "beta2", "m1", "eps_all"]
    columns += [f"eps_{k}" for k in args.rules] + [f"mean_{k}" for k in args.rules]
    if args.delta:
        columns += ["delta_all"] + [f"delta_{k}" for k in args.rules]

    def measures(amps, rule):
        try:
            pd = phase_distribution(amps, rule, args.eta, args.points)
        except DphavError:
            return math.nan, math.nan, math.nan
        dist = conditional_detected_dist(amps, pd, args.eta)
        d = math.nan
        if args.delta:
            d = delta_full(conditional_density_matrix(amps, pd), covariance_of_conditional(amps, pd)).value
        return epsilon_bound(dist).value, dist.mean(), d

    def one(point):
        (a2, b2), m1 = point
        amps = split(DphavSpec.from_intensities(a2, b2))
        base = measures(amps, AcceptanceRule.all())
        per_rule = [measures(amps, getattr(AcceptanceRule, k)(m1)) for k in args.rules]
        row = [a2, b2, m1, base[0]] + [r[0] for r in per_rule] + [r[1] for r in per_rule]
        if args.delta:
            row += [base[2]] + [r[2] for r in per_rule]
        return row

    rows = _pmap(args, one, [(s, m1) for s in specs for m1 in args.m1])
    emit(args, columns, rows, rule=list(args.rules))


def cmd_simulate(args):
    spec = _spec(args)
    config = RunConfig(spec, args.eta, args.shots, args.seed)
    records = simulate_shots(config, n_jobs=args.jobs)
    if args.records:
        with open(args.records, "w", encoding="utf-8", newline="") as fh:
            write_records_csv(records, fh)
    m1, m2 = records[:, 0].astype(float), records[:, 1].astype(float)
    pearson = float(np.corrcoef(m1, m2)[0, 1]) if m1.std() > 0 and m2.std() > 0 else math.nan
    log.info("Pearson(m1, m2) = %r, theory %r", pearson,
             correlation_formula(args.eta * spec.alpha2, args.eta * spec.beta2))
    amps = split(spec)
    columns = ["rule", "m1", "n_accepted", "acceptance", "acceptance_theory", "mean", "mean_theory",
               "fidelity"]
    rows = []
    points = [("all", None)] + [(k, m) for k in args.rules for m in args.m1]
    for kind, m in points:
        rule = AcceptanceRule.all() if kind == "all" else getattr(AcceptanceRule, kind)(m)
        pd = phase_distribution(amps, rule, args.eta, args.points)
        theory = conditional_detected_dist(amps, pd, args.eta)
        try:
            hist = reconstruct_conditional(records, rule)
        except DphavError:
            rows.append([kind, "" if m is None else m, 0, 0.0, pd.norm_constant, math.nan,
                         theory.mean(), math.nan])
            continue
        rows.append([kind, "" if m is None else m, hist.n_accepted, hist.acceptance, pd.norm_constant,
                     hist.mean, theory.mean(), fidelity(hist.distribution, theory)])
    emit(args, columns, rows, seed=args.seed)


# -- parser -----------------------------------------------------------------


def _common(p, multi=False):
    kind = float_list if multi else float
    p.add_argument("--alpha2", type=kind, required=False, default=None,
                   help="displacement intensity alpha^2" + (" (comma list)" if multi else ""))
    p.add_argument("--beta2", type=kind, required=False, default=None,
                   help="PHAV intensity |beta|^2" + (" (comma list)" if multi else ""))
    p.add_argument("--eta", type=float, default=1.0, help="detection efficiency (default 1)")
    p.add_argument("--points", type=int, default=1024, help="phase grid size (default 1024)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o", default=None, help="output file (default stdout)")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for sweeps")
    p.add_argument("--config", default=None, help="key = value file supplying flags")
    p.add_argument("-v", "--verbose", action="store_true", help="log summaries to stderr")


def build_parser():
    parser = argparse.ArgumentParser(prog="dphav", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"dphav {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("stats", help="DPHAV photon statistics and moments")
    _common(p)
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--closed-form", action="store_true", help="add the hypergeometric closed form")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("condition", help="conditional detected distributions")
    _common(p)
    p.add_argument("--rules", type=rule_kinds, default=["eq"])
    p.add_argument("--m1", type=int_range, default=list(range(13)))
    p.add_argument("--all", action="store_true", help="include the unconditioned state")
    p.add_argument("--table", choices=("summary", "dist", "density"), default="summary")
    p.set_defaults(func=cmd_condition)

    p = sub.add_parser("phase", help="conditional phase distribution p(phi)")
    _common(p)
    p.add_argument("--rule", default="eq:k", help="acceptance rule, e.g. eq:10 or eq:k with --k")
    p.add_argument("--k", type=int, default=None)
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("wigner", help="Wigner function on a phase-space grid")
    _common(p)
    p.add_argument("--rule", default="all")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--extent", type=float, default=None, help="grid half-width")
    p.add_argument("--grid", type=int, default=101, help="points per axis")
    p.set_defaults(func=cmd_wigner)

    p = sub.add_parser("correlate", help="correlation coefficient vs total detected mean")
    _common(p)
    p.add_argument("--alpha-eq-beta", action="store_true")
    p.add_argument("--ratio", type=float, default=None, help="alpha^2 / beta^2")
    p.add_argument("--mean-range", type=float_range, default=(0.0, 20.0))
    p.add_argument("--n", type=int, default=21, help="points along the range")
    p.add_argument("--joint", action="store_true", help="add Pearson of the joint distribution")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("nongauss", help="epsilon (and delta) sweeps over the conditioning value")
    _common(p, multi=True)
    p.add_argument("--rules", type=rule_kinds, default=list(RULE_KINDS))
    p.add_argument("--m1", type=int_range, default=list(range(13)))
    p.add_argument("--delta", action="store_true", help="add the phase-sensitive delta")
    p.set_defaults(func=cmd_nongauss)

    p = sub.add_parser("simulate", help="Monte-Carlo shots, reconstruction and fidelity")
    _common(p)
    p.add_argument("--shots", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rules", type=rule_kinds, default=["eq"])
    p.add_argument("--m1", type=int_range, default=list(range(13)))
    p.add_argument("--records", default=None, help="write shot records CSV here")
    p.set_defaults(func=cmd_simulate)
    return parser


def _apply_config(parser, argv):
    """Load ``--config`` values as defaults of the chosen subparser."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = read_config(known.config)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = next((a for a in argv if a in subparsers.choices), None)
    if command is None:
        return
    sp = subparsers.choices[command]
    actions = {a.dest: a for a in sp._actions}
    for key, value in values.items():
        action = actions.get(key)
        if action is None or key in ("help", "config"):
            raise UsageError(f"unknown config key {key!r} for {command}")
        if isinstance(action, argparse._StoreTrueAction):
            action.default = value.lower() in ("1", "true", "yes", "on")
        else:
            action.default = value  # strings are converted by argparse


def _check_required(args):
    if args.alpha2 is None or args.beta2 is None:
        if args.command != "correlate":
            raise UsageError("--alpha2 and --beta2 are required")
    for name in ("alpha2", "beta2"):
        values = getattr(args, name)
        if values is None:
            continue
        for v in values if isinstance(values, list) else [values]:
            if not v >= 0:
                raise UsageError(f"--{name} must be >= 0")
    if not 0 <= args.eta <= 1:
        raise UsageError("--eta must lie in [0, 1]")
    if args.points < 2 or args.points % 2:
        raise UsageError("--points must be an even integer >= 2")


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"dphav: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    except OSError as exc:
        print(f"dphav: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        _check_required(args)
        args.func(args)
        sys.stdout.flush()
    except BrokenPipeError:
        # downstream reader closed early (e.g. ``| head``); silence the final flush
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return 0
    except UsageError as exc:
        print(f"dphav: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, DphavError, FloatingPointError) as exc:
        print(f"dphav: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"dphav: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
