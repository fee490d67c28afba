"""Command line: ``normreg gen | reg | verify | sweep``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .matcore import SubmatrixMask
from .matio import load_matrix, save_matrix
from .pipeline import MODELS, RegConfig, regularize, verify
from .samplers import KINDS, SamplerSpec, sample_matrix
from .sweep import SweepSpec, rows_to_csv, run_sweep


def _sampler_params(args) -> dict:
    if args.dist == "three_point":
        return {"eps": args.eps}
    if args.dist == "pareto_sym":
        return {"alpha": args.alpha}
    if args.dist == "table":
        if not args.table:
            raise SystemExit("--table is required for the table distribution")
        return json.loads(Path(args.table).read_text())
    return {}


def cmd_gen(args) -> int:
    spec = SamplerSpec(args.dist, _sampler_params(args), args.seed)
    A = sample_matrix(spec, args.n, args.model)
    save_matrix(A, args.output)
    return 0


def cmd_reg(args) -> int:
    A = load_matrix(args.input)
    cfg = RegConfig(epsilon=args.eps)
    report = regularize(A, args.model, cfg)
    text = report.to_json(include_timings=not args.no_timings)
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    if args.mask:
        Path(args.mask).write_text(json.dumps(report.final_mask.to_dict()) + "\n")
    return 0 if report.ok else 2


def cmd_verify(args) -> int:
    A = load_matrix(args.input)
    mask = SubmatrixMask.from_dict(json.loads(Path(args.mask).read_text()))
    record = verify(A, mask, RegConfig(epsilon=args.eps))
    sys.stdout.write(json.dumps(record.to_dict(), indent=2) + "\n")
    return 0 if record.passed else 1


def cmd_sweep(args) -> int:
    spec = SweepSpec.load(args.spec)
    if args.no_timings:
        spec = SweepSpec(**{**spec.__dict__, "include_timings": False})
    rows = run_sweep(spec)
    text = rows_to_csv(rows)
    out = args.output or spec.output
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="normreg", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="sample a random matrix")
    g.add_argument("--dist", choices=KINDS, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--eps", type=float, default=0.1,
                   help="three_point mass parameter")
    g.add_argument("--alpha", type=float, default=2.5, help="pareto_sym tail exponent")
    g.add_argument("--table", help="JSON file with values/probs for the table law")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--model", choices=MODELS, default="iid")
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("reg", help="find the sub-matrix to zero")
    r.add_argument("--eps", type=float, required=True)
    r.add_argument("--model", choices=MODELS, required=True)
    r.add_argument("-i", "--input", required=True)
    r.add_argument("--report")
    r.add_argument("--mask")
    r.add_argument("--no-timings", action="store_true",
                   help="omit timings so the report is byte-reproducible")
    r.set_defaults(func=cmd_reg)

    v = sub.add_parser("verify", help="check a mask against a matrix")
    v.add_argument("-i", "--input", required=True)
    v.add_argument("--mask", required=True)
    v.add_argument("--eps", type=float, required=True)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="run an experiment grid to CSV")
    s.add_argument("--spec", required=True)
    s.add_argument("-o", "--output")
    s.add_argument("--no-timings", action="store_true")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
