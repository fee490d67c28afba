"""Measure the regression ceilings used by the acceptance suite.

Runs 50 seeded trials per quantity on seeds disjoint from the test seeds
(calibration seeds start at 10_000) and prints summary statistics as JSON.
The frozen ceilings in tests/test_acceptance.py were set from this output.
"""

import argparse
import json
import math

import numpy as np

from normreg import RegConfig, SamplerSpec, regularize, sample_matrix
from normreg.damping import regularize_small_columns
from normreg.matcore import IndexSet, norm_2_to_inf, restrict_columns
from normreg.samplers import counter_uniform

CAL_SEED0 = 10_000


def uniform_upper(n, seed):
    # unit-variance uniform on [-sqrt(3), sqrt(3)], strict upper triangle
    i = np.arange(n, dtype=np.uint64)[:, None]
    j = np.arange(n, dtype=np.uint64)[None, :]
    U = counter_uniform(seed, i, j)
    return np.triu((2.0 * U - 1.0) * math.sqrt(3.0), 1)


def summary(xs):
    xs = np.asarray(xs, dtype=float)
    return {"min": float(xs.min()), "median": float(np.median(xs)),
            "max": float(xs.max()), "trials": int(xs.size)}


def small_bucket(trials, n=512, eps=0.1):
    sizes, ratios = [], []
    for t in range(trials):
        T = uniform_upper(n, CAL_SEED0 + t)
        J0, diag = regularize_small_columns(T, eps)
        keep = J0.complement()
        sizes.append(len(J0) / (eps * n))
        ratios.append(norm_2_to_inf(restrict_columns(T, keep)) / math.sqrt(n))
    return {"J0_over_eps_n": summary(sizes), "kept_row_over_sqrt_n": summary(ratios)}


def pipeline_constant(kind, params, model, n, trials, eps=0.1):
    cs, oks, sides = [], 0, []
    cfg = RegConfig(epsilon=eps)
    for t in range(trials):
        A = sample_matrix(SamplerSpec(kind, params, CAL_SEED0 + t), n, model)
        r = regularize(A, model, cfg)
        cs.append(r.empirical_constant)
        oks += r.ok
        sides.append(max(len(r.final_mask.rows), len(r.final_mask.cols)) / (eps * n))
    # the acceptance suite takes medians over blocks of 10 trials
    blocks = [float(np.median(cs[i:i + 10])) for i in range(0, len(cs) - 9, 10)]
    return {"C_emp": summary(cs), "C_emp_median_of_10_max": max(blocks, default=None),
            "ok": oks, "side_over_eps_n": summary(sides)}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--only", choices=["small", "three_point", "pareto"])
    args = ap.parse_args()
    out = {}
    if args.only in (None, "small"):
        out["small_bucket_n512"] = small_bucket(args.trials)
    if args.only in (None, "three_point"):
        out["three_point_iid_n1024"] = pipeline_constant(
            "three_point", {"eps": 0.1}, "iid", 1024, args.trials)
    if args.only in (None, "pareto"):
        for n in (256, 512, 1024, 2048):
            out[f"pareto_sym_n{n}"] = pipeline_constant(
                "pareto_sym", {"alpha": 2.5}, "symmetric", n, args.trials)
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
