#!/usr/bin/env python3
"""Run the three stock convergence studies and compare fitted decay rates.

Each config in scripts/configs/ is a full study: simulate datasets over an
n-grid, fit the truncated-likelihood slope estimator, average the squared
slope error over replications, and regress log(error) on log(n).  Writes
rate_study.csv / slope.csv per study and prints fitted vs theoretical
exponents.  Exits 1 if a beta_s = 3 study misses its exponent by more than
0.15 or the beta_s = 4 study fails to decay visibly faster.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import replace

from fglm.harness import (
    load_config,
    run_rate_study,
    with_overrides,
    write_rate_study_csv,
    write_slope_csv,
)

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "configs")
STUDIES = ("gaussian_beta3", "poisson_beta3", "gaussian_beta4")
SLOPE_BAND = 0.15
ORDERING_MARGIN = 0.03


def main():
    ap = argparse.ArgumentParser(description="Run the stock rate studies")
    ap.add_argument("--out", default="results", help="output root directory")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--reps", type=int, default=None, help="override config reps")
    ap.add_argument("--seed", type=int, default=None, help="override config seed")
    args = ap.parse_args()

    slopes = {}
    failures = 0
    for name in STUDIES:
        cfg = load_config(os.path.join(CONFIG_DIR, name + ".cfg"))
        cfg = with_overrides(cfg, seed=args.seed, out_dir=os.path.join(args.out, name))
        if args.reps is not None:
            cfg = replace(cfg, reps=args.reps)
        t0 = time.time()
        result = run_rate_study(cfg, jobs=args.jobs)
        write_rate_study_csv(cfg, result, os.path.join(cfg.out_dir, "rate_study.csv"))
        write_slope_csv(result, os.path.join(cfg.out_dir, "slope.csv"))
        slopes[name] = result.fitted_slope
        print(
            f"[{name}] slope {result.fitted_slope:+.4f} (se {result.slope_se:.4f}) "
            f"theoretical {result.theoretical:+.4f} in {time.time() - t0:.1f}s"
        )
        if name.endswith("beta3"):
            gap = abs(result.fitted_slope - result.theoretical)
            if gap > SLOPE_BAND:
                failures += 1
                print(f"[{name}] FAIL: |fitted - theoretical| = {gap:.4f} > {SLOPE_BAND}")

    sep = slopes["gaussian_beta3"] - slopes["gaussian_beta4"]
    if sep < ORDERING_MARGIN:
        failures += 1
        print(f"[ordering] FAIL: beta4 slope only {sep:.4f} below beta3")
    else:
        print(f"[ordering] beta4 decays faster by {sep:.4f}")

    if failures:
        print(f"{failures} study check(s) failed", file=sys.stderr)
        return 1
    print("all studies match the predicted rates")
    return 0


if __name__ == "__main__":
    sys.exit(main())
