"""Command-line front end.

Subcommands:

* ``generate``      write one simulated dataset to CSV
* ``estimate``      fit a dataset CSV, write slope coefficients + grid values
* ``rate-study``    replicate (simulate -> fit -> loss) over an n-grid,
                    write rate_study.csv / slope.csv
* ``perturb-check`` randomized eigen-perturbation certification suite
* ``lower-bound``   calibrated hypercube affinity study
* ``diagnostics``   envelope, information-matrix, and maximal-inequality checks

Exit codes: 0 success, 1 bad arguments/config/input, 2 runtime or
certification failure.  ``--jobs`` defaults to the FGLM_JOBS environment
variable when set.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from .datagen import Dataset, make_ground_truth, sample_dataset
from .estimator import estimate_slope
from .expfam import family_names, get_family, verify_envelope
from .funcspace import evaluate_on_grid, uniform_grid
from .harness import (
    default_jobs,
    load_config,
    run_rate_study,
    with_overrides,
    write_csv,
    write_perreplication_csv,
    write_rate_study_csv,
    write_slope_csv,
)
from .lowerbound import affinity_study, standard_config
from .spectral_diag import check_chisq_maximal, fisher_study, random_perturbation_suite

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 instead of argparse's 2
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="fglm", description="Functional GLM simulation toolkit.")
    sub = parser.add_subparsers(dest="command", metavar="command")

    gen = sub.add_parser("generate", help="write one simulated dataset to CSV")
    gen.add_argument("--family", required=True, choices=family_names())
    gen.add_argument("--alpha", type=float, default=2.0)
    gen.add_argument("--beta", type=float, default=3.0)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--intercept", type=float, default=0.5)
    gen.add_argument("--mu-mode", choices=("zero", "bumps"), default="zero")
    gen.add_argument("--k-trunc", type=int, default=200)
    gen.add_argument("--out", required=True, help="output CSV path")
    gen.set_defaults(handler=_cmd_generate)

    est = sub.add_parser("estimate", help="fit one dataset CSV")
    est.add_argument("--data", required=True, help="CSV from `generate`")
    est.add_argument("--family", required=True, choices=family_names())
    est.add_argument("--alpha", type=float, default=2.0)
    est.add_argument("--beta", type=float, default=3.0)
    est.add_argument("--grid-points", type=int, default=201)
    est.add_argument("--out", default=".", help="output directory")
    est.set_defaults(handler=_cmd_estimate)

    rate = sub.add_parser("rate-study", help="MISE decay across sample sizes")
    rate.add_argument("--config", required=True)
    rate.add_argument("--seed", type=int, default=None, help="override config seed")
    rate.add_argument("--out", default=None, help="override config out_dir")
    rate.add_argument("--jobs", type=int, default=None)
    rate.add_argument(
        "--per-replication", action="store_true", help="also write perreplication.csv"
    )
    rate.set_defaults(handler=_cmd_rate_study)

    pert = sub.add_parser("perturb-check", help="randomized eigen-perturbation suite")
    pert.add_argument("--reps", type=int, default=500)
    pert.add_argument("--dim", type=int, default=12)
    pert.add_argument("--seed", type=int, default=0)
    pert.add_argument("--alpha", type=float, default=2.0)
    pert.add_argument("--out", default=".", help="output directory")
    pert.set_defaults(handler=_cmd_perturb_check)

    low = sub.add_parser("lower-bound", help="calibrated hypercube affinity study")
    low.add_argument("--config", required=True)
    low.add_argument("--seed", type=int, default=None, help="override config seed")
    low.add_argument("--out", default=None, help="override config out_dir")
    low.add_argument("--m", type=int, default=2, help="hypercube bits")
    low.add_argument("--n-grid", default="100,1000,10000")
    low.add_argument("--n-mc", type=int, default=200)
    low.add_argument("--radius", type=float, default=1.0)
    low.set_defaults(handler=_cmd_lower_bound)

    diag = sub.add_parser("diagnostics", help="envelope / information / maximal checks")
    diag.add_argument("--config", required=True)
    diag.add_argument("--seed", type=int, default=None, help="override config seed")
    diag.add_argument("--out", default=None, help="override config out_dir")
    diag.add_argument("--fisher-reps", type=int, default=200)
    diag.add_argument("--chisq-reps", type=int, default=100_000)
    diag.set_defaults(handler=_cmd_diagnostics)

    return parser


def _cmd_generate(args) -> int:
    family = get_family(args.family)
    gt = make_ground_truth(
        args.alpha,
        args.beta,
        family,
        k_trunc=args.k_trunc,
        intercept=args.intercept,
        mu_mode=args.mu_mode,
    )
    ds = sample_dataset(gt, args.n, args.seed)
    x = ds.x_coeffs()
    header = ["y", "lambda"] + [f"x{k}" for k in range(1, ds.k_trunc + 1)]
    rows = ((ds.y[i], ds.lambda_true[i], *x[i]) for i in range(ds.n))
    write_csv(args.out, header, rows)
    print(f"wrote {args.out}: {ds.n} rows, {ds.k_trunc} coefficient columns")
    return 0


def _read_dataset_csv(path: str) -> Dataset:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        body = [row for row in reader if row]
    cols = {name: i for i, name in enumerate(header)}
    if "y" not in cols:
        raise ValueError(f"{path}: missing 'y' column")
    x_names = sorted(
        (name for name in cols if name.startswith("x") and name[1:].isdigit()),
        key=lambda s: int(s[1:]),
    )
    if not x_names:
        raise ValueError(f"{path}: no coefficient columns x1..xK")
    if [int(s[1:]) for s in x_names] != list(range(1, len(x_names) + 1)):
        raise ValueError(f"{path}: coefficient columns must be consecutive x1..xK")
    try:
        y = np.array([float(row[cols["y"]]) for row in body])
        x = np.array([[float(row[cols[name]]) for name in x_names] for row in body])
        if "lambda" in cols:
            lam = np.array([float(row[cols["lambda"]]) for row in body])
        else:
            lam = np.zeros(len(body))
    except (ValueError, IndexError) as exc:
        raise ValueError(f"{path}: malformed numeric row: {exc}") from None
    return Dataset(mean_coeffs=np.zeros(x.shape[1]), scores=x, y=y, lambda_true=lam)


def _cmd_estimate(args) -> int:
    ds = _read_dataset_csv(args.data)
    family = get_family(args.family)
    fit = estimate_slope(ds, family, args.alpha, args.beta)
    coef_path = os.path.join(args.out, "estimate_coefs.csv")
    grid_path = os.path.join(args.out, "estimate_grid.csv")
    coeffs = fit.slope.coeffs
    write_csv(coef_path, ["k", "coef"], ((k + 1, coeffs[k]) for k in range(coeffs.shape[0])))
    t = uniform_grid(args.grid_points)
    vals = evaluate_on_grid(fit.slope, args.grid_points)
    write_csv(grid_path, ["t", "value"], zip(t, vals))
    status = "converged" if fit.converged else "NOT converged"
    print(
        f"n={ds.n} m={fit.m} N={fit.n_components} intercept={fit.coefs[0]:.6g} "
        f"{status} in {fit.iterations} iterations"
    )
    print(f"wrote {coef_path} and {grid_path}")
    return 0


def _cmd_rate_study(args) -> int:
    cfg = with_overrides(load_config(args.config), seed=args.seed, out_dir=args.out)
    jobs = default_jobs() if args.jobs is None else args.jobs
    result = run_rate_study(cfg, jobs=jobs)
    rate_path = os.path.join(cfg.out_dir, "rate_study.csv")
    slope_path = os.path.join(cfg.out_dir, "slope.csv")
    write_rate_study_csv(cfg, result, rate_path)
    write_slope_csv(result, slope_path)
    written = [rate_path, slope_path]
    if args.per_replication:
        rep_path = os.path.join(cfg.out_dir, "perreplication.csv")
        write_perreplication_csv(result, rep_path)
        written.append(rep_path)
    for p in result.points:
        print(
            f"n={p.n:6d} m={p.m} N={p.n_components} mise={p.mise_mean:.6g} "
            f"se={p.mise_se:.2g} nonconverged={p.nonconverged}"
        )
    print(
        f"slope {result.fitted_slope:+.4f} (se {result.slope_se:.4f}), "
        f"theoretical {result.theoretical:+.4f}"
    )
    print("wrote " + ", ".join(written))
    return 0


def _cmd_perturb_check(args) -> int:
    summary = random_perturbation_suite(
        reps=args.reps, max_dim=args.dim, seed=args.seed, alpha=args.alpha
    )
    path = os.path.join(args.out, "perturb_check.csv")
    header = list(summary.rows[0].keys()) if summary.rows else []
    write_csv(path, header, (tuple(row.values()) for row in summary.rows))
    violations = (
        summary.eigenvalue_violations
        + summary.eigenvector_violations
        + summary.remainder_violations
        + summary.projection_identity_failures
    )
    print(
        f"{summary.instances} instances: eigenvalue violations {summary.eigenvalue_violations}, "
        f"eigenvector {summary.eigenvector_violations}/{summary.eigenvector_checked} checked, "
        f"remainder {summary.remainder_violations}/{summary.remainder_checked} checked, "
        f"skipped pairs {summary.skipped_pairs}"
    )
    print(
        f"projection: {summary.projection_checked} checked, "
        f"{summary.projection_identity_failures} identity failures, "
        f"max ratio {summary.max_projection_ratio:.4g}"
    )
    print(f"wrote {path}")
    if violations:
        print(f"FAIL: {violations} bound violations", file=sys.stderr)
        return 2
    print("all bounds hold")
    return 0


def _cmd_lower_bound(args) -> int:
    cfg = with_overrides(load_config(args.config), seed=args.seed, out_dir=args.out)
    n_grid = [int(v) for v in str(args.n_grid).split(",") if v.strip()]
    base = standard_config(
        args.m,
        get_family(cfg.family),
        alpha=cfg.alpha,
        beta_s=cfg.beta_s,
        radius=args.radius,
    )
    rows = affinity_study(base, n_grid, n_mc=args.n_mc, seed=cfg.seed)
    path = os.path.join(cfg.out_dir, "affinity.csv")
    write_csv(
        path,
        ["n", "j", "eps", "affinity", "se", "bound_value"],
        ((r["n"], r["j"], r["eps"], r["affinity"], r["se"], r["bound_value"]) for r in rows),
    )
    for n in n_grid:
        sub = [r for r in rows if r["n"] == n]
        worst = min(sub, key=lambda r: r["affinity"])
        print(
            f"n={n:6d} eps={worst['eps']:.6g} min affinity {worst['affinity']:.4f} "
            f"(j={worst['j']}), bound value {worst['bound_value']:.6g}"
        )
    print(f"wrote {path}")
    return 0


def _cmd_diagnostics(args) -> int:
    cfg = with_overrides(load_config(args.config), seed=args.seed, out_dir=args.out)
    failures = 0

    lam_grid = np.arange(-3.0, 3.0 + 1e-9, 0.5)
    h_grid = np.arange(-1.0, 1.0 + 1e-9, 0.1)
    for name in family_names():
        ratio = verify_envelope(get_family(name), lam_grid, h_grid)
        ok = ratio <= 1.0 + 1e-9
        failures += 0 if ok else 1
        print(f"envelope {name}: max third-derivative ratio {ratio:.6f} "
              f"{'PASS' if ok else 'FAIL'}")

    reports = fisher_study(
        get_family(cfg.family),
        alpha=cfg.alpha,
        beta_s=cfg.beta_s,
        reps=args.fisher_reps,
        seed=cfg.seed,
    )
    for rep in reports:
        ok = rep.max_abs_z <= 4.0
        failures += 0 if ok else 1
        print(
            f"information n={rep.n} N={rep.n_components}: max |z| {rep.max_abs_z:.2f}, "
            f"mean sq deviation {rep.mean_sq_dev:.3e} {'PASS' if ok else 'FAIL'}"
        )
    shrinking = reports[-1].mean_sq_dev < reports[0].mean_sq_dev
    failures += 0 if shrinking else 1
    print(f"information deviation shrinks with n: {'PASS' if shrinking else 'FAIL'}")

    tau = np.arange(1, 51, dtype=float) ** -2.0
    for n in (10, 100):
        for point in check_chisq_maximal(n, tau, (1.0, 2.0, 4.0), reps=args.chisq_reps,
                                         seed=cfg.seed):
            failures += 0 if point.passed else 1
            print(
                f"maximal n={n} x={point.x:.0f}: estimate {point.estimate:.2e} "
                f"<= bound {point.bound:.2e} + 4se {'PASS' if point.passed else 'FAIL'}"
            )

    if failures:
        print(f"FAIL: {failures} diagnostic checks failed", file=sys.stderr)
        return 2
    print("all diagnostics pass")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if getattr(args, "handler", None) is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.handler(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
