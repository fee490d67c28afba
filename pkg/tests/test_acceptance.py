"""Acceptance criteria, one test each, with tolerances pinned here.

Ceilings marked "frozen" were measured with scripts/calibrate.py on 50
trials whose seeds (10_000 and up) do not overlap the seeds used below,
then rounded up with a margin.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from normreg.buckets import BucketThresholds, decompose, handle_M2
from normreg.cli import main as cli_main
from normreg.damping import build_quantile_ladder, damp_row, regularize_small_columns
from normreg.gpselect import GPConfig, gp_column_select
from normreg.matcore import (IndexSet, SubmatrixMask, norm_2_to_inf,
                             norm_inf_to_2_bruteforce, restrict_columns, schur_bound,
                             zero_block, zero_columns, zero_rows)
from normreg.pipeline import RegConfig, regularize
from normreg.samplers import SamplerSpec, counter_uniform, sample_matrix
from normreg.sweep import SweepSpec, rows_to_csv, run_sweep
from oracles import spectral_norm

pytestmark = pytest.mark.acceptance

# frozen: max observed 1.061 over 50 calibration trials
SMALL_ROW_CEILING = 1.25
# frozen: max observed C_emp 1.144 over 50 calibration trials
C_FROZEN_THREE_POINT = 1.5
# frozen: largest 10-trial median of C_emp over all n was 1.48 (n = 2048)
C_FROZEN_PARETO = 2.0


def record(label, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'}  {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def uniform_upper(n, seed):
    # unit-variance uniform entries on [-sqrt(3), sqrt(3)]
    i = np.arange(n, dtype=np.uint64)[:, None]
    j = np.arange(n, dtype=np.uint64)[None, :]
    return np.triu((2.0 * counter_uniform(seed, i, j) - 1.0) * math.sqrt(3.0), 1)


def test_ac1_gp_contract_small_instances():
    t0 = time.perf_counter()
    r = np.random.default_rng(1)
    shapes = [(6, 8), (8, 8), (10, 12)]
    held, total = 0, 0
    for trial in range(200):
        k, m = shapes[trial % 3]
        delta = (0.25, 0.5)[(trial // 3) % 2]
        B = r.standard_normal((k, m))
        if trial % 4 == 0:
            B[:, r.integers(m)] *= 20.0
        J = gp_column_select(B, GPConfig(delta=delta)).J
        bound = 2.0 / math.sqrt(delta * m) * norm_inf_to_2_bruteforce(B)
        total += 1
        held += spectral_norm(zero_columns(B, J)) <= bound
    dt = time.perf_counter() - t0
    ok = held == total and dt < 30
    assert record("AC1 GP contract", ok, f"{held}/{total} instances, {dt:.1f}s (< 30s)")


def test_ac2_per_block_damping_bound():
    r = np.random.default_rng(2)
    laws = [
        lambda k: r.standard_normal(k) ** 2,
        lambda k: r.standard_cauchy(k) ** 2,
        lambda k: (r.random(k) < 0.03) * 50.0,
        lambda k: r.pareto(2.5, k) ** 2,
        lambda k: r.uniform(0, 3, k),
    ]
    held = 0
    for trial in range(1000):
        law = laws[trial % len(laws)]
        n_ref = int(r.integers(16, 512))
        plan = build_quantile_ladder(law(4 * n_ref), 0.1, n_ref,
                                     L_damp=float(r.choice([1.0, 8.0, 64.0])))
        X = np.minimum(law(n_ref // 2), plan.qhat[-1])
        a = damp_row(X, plan)
        caps = plan.block_caps(X.size)
        upper = plan.upper_edges()
        good = True
        for i in range(plan.n_blocks):
            sel = a.block_of == i
            good &= bool(a.W[sel] @ X[sel] <= caps[i] * upper[i])
        # rerun: determinism
        b = damp_row(X.copy(), plan)
        good &= np.array_equal(a.W, b.W)
        held += good
    assert record("AC2 per-block damping bound", held == 1000, f"{held}/1000 rows")


def test_ac3_small_bucket_statistical_bound():
    t0 = time.perf_counter()
    n, eps = 512, 0.1
    passes, worst_J, worst_row = 0, 0, 0.0
    for seed in range(100):
        T = uniform_upper(n, seed)
        J0, diag = regularize_small_columns(T, eps)
        row = norm_2_to_inf(restrict_columns(T, J0.complement())) / math.sqrt(n)
        worst_J, worst_row = max(worst_J, len(J0)), max(worst_row, row)
        passes += len(J0) <= 2 * eps * n and row <= SMALL_ROW_CEILING
    dt = time.perf_counter() - t0
    ok = passes >= 99 and dt < 120
    assert record("AC3 small-bucket bound", ok,
                  f"{passes}/100 trials, max |J0|={worst_J}, max row/sqrt(n)={worst_row:.3f}"
                  f" (ceiling {SMALL_ROW_CEILING}), {dt:.1f}s (< 120s)")


def test_ac4_adversarial_three_point():
    t0 = time.perf_counter()
    n, eps = 1024, 0.1
    cfg = RegConfig(epsilon=eps)
    budget = cfg.C_total * eps * n
    oks, bounded, worst_C, worst_side = 0, 0, 0.0, 0
    for seed in range(20):
        A = sample_matrix(SamplerSpec("three_point", {"eps": eps}, seed), n, "iid")
        rep = regularize(A, "iid", cfg)
        side = max(len(rep.final_mask.rows), len(rep.final_mask.cols))
        oks += rep.ok
        bounded += (rep.norm_after <= C_FROZEN_THREE_POINT * math.sqrt(n / eps)
                    and side <= budget)
        worst_C, worst_side = max(worst_C, rep.empirical_constant), max(worst_side, side)
    dt = time.perf_counter() - t0
    ok = oks >= 19 and bounded == 20 and dt < 300
    assert record("AC4 adversarial law", ok,
                  f"ok in {oks}/20, max C_emp={worst_C:.3f} (ceiling {C_FROZEN_THREE_POINT}),"
                  f" max side={worst_side} (budget {budget:.0f}), {dt:.1f}s (< 300s)")


def test_ac5_gaussian_sanity():
    ratios, monotone = [], True
    for n in (512, 1024, 2048):
        for seed in range(5):
            A = sample_matrix(SamplerSpec("gaussian", {}, 100 + seed), n, "iid")
            rep = regularize(A, "iid")
            ratios.append(rep.norm_before / math.sqrt(n))
            monotone &= rep.norm_after <= rep.norm_before + 1e-6 * rep.norm_before
    ok = all(1.8 <= x <= 2.2 for x in ratios) and monotone
    assert record("AC5 Gaussian sanity", ok,
                  f"norm/sqrt(n) in [{min(ratios):.3f}, {max(ratios):.3f}] (need [1.8, 2.2]),"
                  f" norm_after <= norm_before: {monotone}")


def test_ac6_infinite_fourth_moment_trend():
    t0 = time.perf_counter()
    eps = 0.1
    med_norm, med_C = [], []
    for n in (256, 512, 1024, 2048):
        norms, cs = [], []
        for seed in range(10):
            A = sample_matrix(SamplerSpec("pareto_sym", {"alpha": 2.5}, 200 + seed), n,
                              "symmetric")
            rep = regularize(A, "symmetric", RegConfig(epsilon=eps))
            norms.append(rep.norm_before / math.sqrt(n))
            cs.append(rep.empirical_constant)
        med_norm.append(float(np.median(norms)))
        med_C.append(float(np.median(cs)))
    dt = time.perf_counter() - t0
    increasing = all(a < b for a, b in zip(med_norm, med_norm[1:]))
    below = all(c < C_FROZEN_PARETO for c in med_C)
    ok = increasing and below and dt < 600
    assert record("AC6 heavy-tail trend", ok,
                  "median norm/sqrt(n) " + ", ".join(f"{x:.2f}" for x in med_norm)
                  + "; median C_emp " + ", ".join(f"{x:.2f}" for x in med_C)
                  + f" (ceiling {C_FROZEN_PARETO}), {dt:.1f}s (< 600s)")


def _mixed_instance(r, n, eps):
    # magnitudes spread over all four buckets
    thr = BucketThresholds.for_size(n, eps)
    mags = np.exp(r.uniform(np.log(0.1), np.log(2 * thr.l_thr), (n, n)))
    sparse = r.random((n, n)) < r.uniform(0.1, 0.9)
    return np.triu(np.where(sparse, mags * r.choice([-1, 1], (n, n)), 0.0), 1)


def test_ac7_structural_invariants():
    r = np.random.default_rng(7)
    n, eps = 12, 0.25
    tally = {"mask union": 0, "schur": 0, "zeroing": 0, "partition": 0, "M2": 0}
    trials = 120
    for _ in range(trials):
        T = _mixed_instance(r, n, eps)
        exact = spectral_norm(T)
        rep = regularize(T, "upper", RegConfig(epsilon=eps))
        for mask in (rep.final_mask,
                     SubmatrixMask(IndexSet.from_bool(r.random(n) < 0.4),
                                   IndexSet.from_bool(r.random(n) < 0.4))):
            lhs = spectral_norm(zero_block(T, mask))
            rhs = spectral_norm(zero_rows(T, mask.rows)) + spectral_norm(zero_columns(T, mask.cols))
            tally["mask union"] += lhs <= rhs * (1 + 1e-12) + 1e-12
            # whole rows/columns: exact norm; a block: entrywise-monotone norms only
            Z = zero_block(T, mask)
            tally["zeroing"] += (
                spectral_norm(zero_rows(T, mask.rows)) <= exact * (1 + 1e-12)
                and spectral_norm(zero_columns(T, mask.cols)) <= exact * (1 + 1e-12)
                and norm_2_to_inf(Z) <= norm_2_to_inf(T)
                and schur_bound(Z) <= schur_bound(T))
        tally["schur"] += schur_bound(T) >= exact * (1 - 1e-12)
        d = decompose(T, eps)
        tally["partition"] += bool(np.array_equal(d.S + d.M1 + d.M2 + d.L, T)
                                   and not np.any((d.S != 0) & (d.M1 != 0)))
        st = handle_M2(d.M2, eps)
        R = zero_rows(d.M2, st.mask.rows)
        C = zero_columns(d.M2, st.mask.cols)
        tally["M2"] += bool(np.all((R != 0).sum(0) <= 1) and np.all((R != 0).sum(1) <= 1)
                            and np.all((C != 0).sum(0) <= 1) and np.all((C != 0).sum(1) <= 1))
    expected = {"mask union": 2 * trials, "schur": trials, "zeroing": 2 * trials,
                "partition": trials, "M2": trials}
    ok = tally == expected
    assert record("AC7 structural invariants", ok,
                  ", ".join(f"{k} {tally[k]}/{expected[k]}" for k in expected)
                  + f" on {trials} instances of size {n}x{n}")


def test_ac8_determinism(tmp_path, monkeypatch):
    spec = {
        "models": ["upper", "iid", "symmetric"],
        "ns": [48, 64],
        "epsilons": [0.1],
        "distributions": [{"kind": "three_point"}, {"kind": "pareto_sym", "alpha": 2.5},
                          {"kind": "gaussian"}],
        "trials": 2,
        "base_seed": 300,
        "include_timings": False,
    }
    csvs = []
    for threads in ("1", "1", "4"):
        monkeypatch.setenv("NORMREG_THREADS", threads)
        csvs.append(rows_to_csv(run_sweep(SweepSpec.from_dict(spec))).encode())
    same_csv = csvs[0] == csvs[1] == csvs[2]

    mxf = tmp_path / "a.mxf"
    cli_main(["gen", "--dist", "three_point", "--n", "96", "--eps", "0.1", "--seed", "5",
              "--model", "iid", "-o", str(mxf)])
    reports = []
    for k in range(2):
        rep, mask = tmp_path / f"r{k}.json", tmp_path / f"m{k}.json"
        cli_main(["reg", "--eps", "0.1", "--model", "iid", "-i", str(mxf),
                  "--report", str(rep), "--mask", str(mask), "--no-timings"])
        reports.append(rep.read_bytes() + mask.read_bytes())
    same_report = reports[0] == reports[1]
    ok = same_csv and same_report
    assert record("AC8 determinism", ok,
                  f"CSV identical across 2 runs and NORMREG_THREADS 1/4: {same_csv};"
                  f" reports identical across 2 runs: {same_report}")
