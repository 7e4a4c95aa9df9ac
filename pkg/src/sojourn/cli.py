"""Command-line entry point: ``sojourn <subcommand> ...`` (or ``python -m sojourn``)."""

import argparse
import json
import logging
import os
import sys

import numpy as np

from .covariance import parse_model
from .fieldsim import (EmbeddingNotPD, LatticeField, LatticeSpec, ShapeError, VectorFieldSpec,
                       fisher_snedecor_field, read_field, simulate_gaussian, simulate_vector,
                       write_field)
from .harness import (ConfigError, ExperimentConfig, case_config, run_experiment,
                      variance_scaling_report, write_experiment, write_scaling_report)
from .hermite import ConfigurationError, closed_form_cv_f_indicator, expansion_report, f_indicator
from .minkowski import (excursion_area, excursion_mask, summary_row, write_mask_csv,
                        write_mask_pgm)
from .reduction import HypothesisFailed, check_lemma2, check_lemma3
from .specialfuns import DomainError

EXIT_OK = 0
EXIT_EMBEDDING = 2
EXIT_CONFIG = 3


def _simulate(args):
    spec = LatticeSpec(args.grid, args.ny or args.grid, args.dx)
    models = [parse_model(m) for m in args.model]
    if len(models) == 1:
        fld = simulate_gaussian(spec, models[0], args.seed, method=args.method)
    else:
        comps = simulate_vector(spec, VectorFieldSpec(tuple(models), args.n), args.seed,
                                method=args.method)
        fld = fisher_snedecor_field(comps, args.n)
    write_field(args.out, fld)
    if args.pgm:
        write_mask_pgm(args.pgm, excursion_mask(fld, args.level))
    print("wrote %s (%d x %d)" % (args.out, *fld.values.shape))


def _excursion(args):
    values, meta = read_field(args.field)
    meta = meta or {}
    dx = args.dx if args.dx is not None else meta.get("dx", 1.0)
    fld = LatticeField(LatticeSpec(*values.shape, dx), values, seed=meta.get("seed", 0))
    summary = excursion_area(fld, args.level)
    mask = excursion_mask(fld, args.level)
    if args.pgm:
        write_mask_pgm(args.pgm, mask)
    if args.csv:
        write_mask_csv(args.csv, mask, dx)
    row = summary_row(fld.seed, values.shape[0] * dx, summary)
    line = ",".join(str(x) for x in row)
    if args.summary:
        new = not os.path.exists(args.summary)
        with open(args.summary, "a") as fh:
            if new:
                fh.write("seed,r,a,area,fraction,clipped_cells\n")
            fh.write(line + "\n")
    print(line)


def _hermite(args):
    G = f_indicator(args.a, args.n, args.m)
    report = expansion_report(
        G, args.m, args.kappa, n_samples=args.samples, seed=args.seed,
        closed_form=lambda v: (closed_form_cv_f_indicator(v, args.a, args.n, args.m)
                               if sum(v) == 2 else None))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(report.to_csv())
    sys.stdout.write(report.to_text())


def _variance(args):
    cfg = case_config(args.case, grid=args.grid, reps=args.reps, seed=args.seed)
    rows = variance_scaling_report(cfg, args.r, arm=args.arm)
    if args.out:
        write_scaling_report(args.out, rows)
    print("r,var_sojourn,var_krk2,ratio,ratio_se,analytic,correlation")
    for r in rows:
        print("%d,%.6g,%.6g,%.4f,%.3g,%.6g,%.4f" % (r.r, r.var_sojourn, r.var_krk2, r.ratio,
                                                    r.ratio_se, r.analytic, r.correlation))


def _lemmas(args):
    m = len(args.alphas)
    if args.k:
        support = [tuple(args.k)]
    else:
        # rank-level support of the F-field indicator: one component squared
        support = [tuple(args.l0 if i == j else 0 for i in range(m)) for j in range(m)]
    try:
        for k in support:
            rep = check_lemma2(args.alphas, args.l0, k, args.lmax)
            print("lemma2 k=%s delta=%.6g min_gap=%.6g argmin=%s checked=%d strict=%s bound=%s "
                  "spread=%s" % (k, rep.delta, rep.min_gap, rep.argmin, rep.n_checked,
                                  rep.strict_holds, rep.bound_holds, rep.spread_holds))
            rep3 = check_lemma3(args.alphas, None, args.l0, k, args.lmax)
            print("lemma3 k=%s sup=%.6g at_max=%.3g worst=%s bounded=%s vanishing=%s"
                  % (k, rep3.sup_ratio, rep3.ratio_at_max, rep3.worst_index, rep3.bounded,
                     rep3.vanishing))
    except HypothesisFailed as exc:
        print("hypothesis_failed: %s" % exc)


def _experiment(args):
    if args.config:
        with open(args.config) as fh:
            d = json.load(fh)
        if args.grid:
            d["grid"] = args.grid
        if args.reps:
            d["n_realizations"] = args.reps
        if args.seed is not None:
            d["master_seed"] = args.seed
        cfg = ExperimentConfig.from_dict(d, n_workers=args.workers)
    elif args.case is not None:
        cfg = case_config(args.case, grid=args.grid or 128, reps=args.reps or 200,
                          seed=args.seed if args.seed is not None else 20180330,
                          n_workers=args.workers)
    else:
        raise ConfigError("give --case or --config")
    results = run_experiment(cfg)
    failed = [r.label for r in results if r.failures]
    ks = write_experiment(cfg, results, args.out)
    for r in results:
        print("arm %-8s n=%d mean=%.6g var=%.6g" % (r.label, r.areas.size,
                                                   r.mean if r.areas.size else np.nan,
                                                   r.variance if r.areas.size > 1 else np.nan))
    for x, y, d, p, d_raw, p_raw, crit in ks:
        print("ks %s vs %s: standardized D=%.4f p=%.3g  raw D=%.4f p=%.3g  (5%% critical %.4f)"
              % (x, y, d, p, d_raw, p_raw, crit))
    if failed:
        print("embedding failed for arms: %s" % ", ".join(failed), file=sys.stderr)
        return EXIT_EMBEDDING
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors; exit code 2 is reserved for embedding failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, "%s: error: %s\n" % (self.prog, message))


def build_parser():
    p = _Parser(prog="sojourn",
                                description="Sojourn areas of vector long-range dependent fields")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="simulate one field and dump it")
    s.add_argument("--model", action="append", required=True,
                   help='e.g. "kind=cauchy alpha=0.65"; repeat for an F field')
    s.add_argument("--n", type=int, default=1, help="numerator components of the F field")
    s.add_argument("--grid", type=int, default=128)
    s.add_argument("--ny", type=int)
    s.add_argument("--dx", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--method", choices=["auto", "circulant", "spectral"], default="auto")
    s.add_argument("--level", type=float, default=1.0)
    s.add_argument("--out", required=True)
    s.add_argument("--pgm", help="also write the excursion mask above --level")
    s.set_defaults(func=_simulate)

    s = sub.add_parser("excursion", help="excursion mask and summary of a dumped field")
    s.add_argument("--field", required=True)
    s.add_argument("--level", type=float, default=1.0)
    s.add_argument("--dx", type=float)
    s.add_argument("--pgm")
    s.add_argument("--csv")
    s.add_argument("--summary", help="append a summary row to this CSV")
    s.set_defaults(func=_excursion)

    s = sub.add_parser("hermite", help="Hermite expansion of the F-field indicator")
    s.add_argument("--a", type=float, default=1.0)
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--m", type=int, default=3)
    s.add_argument("--kappa", type=int, default=4)
    s.add_argument("--samples", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=_hermite)

    s = sub.add_parser("variance", help="variance scaling of the rank-2 projection")
    s.add_argument("--case", type=int, choices=[1, 2, 3], default=1)
    s.add_argument("--arm", default="b")
    s.add_argument("--grid", type=int, default=128)
    s.add_argument("--reps", type=int, default=200)
    s.add_argument("--seed", type=int, default=20180330)
    s.add_argument("--r", type=int, nargs="+", default=[16, 32, 64, 128])
    s.add_argument("--out")
    s.set_defaults(func=_variance)

    s = sub.add_parser("lemmas", help="brute-force multi-index inequality checks")
    s.add_argument("--alphas", type=float, nargs="+", default=[0.65, 0.8, 0.9])
    s.add_argument("--l0", type=int, default=2)
    s.add_argument("--k", type=int, nargs="+",
                   help="rank-level multi-index (default: each component squared)")
    s.add_argument("--lmax", type=int, default=6)
    s.set_defaults(func=_lemmas)

    s = sub.add_parser("experiment", help="run a Monte Carlo case study")
    s.add_argument("--case", type=int, choices=[1, 2, 3])
    s.add_argument("--config", help="JSON experiment description (custom arms)")
    s.add_argument("--grid", type=int)
    s.add_argument("--reps", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", default="experiment_out")
    s.set_defaults(func=_experiment)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args) or EXIT_OK
    except EmbeddingNotPD as exc:
        print("embedding failure: %s" % exc, file=sys.stderr)
        return EXIT_EMBEDDING
    except (ConfigError, ConfigurationError, DomainError, ShapeError, ValueError,
            KeyError, OSError) as exc:
        print("configuration error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
