"""Command-line harness: preset experiment runs, single solves on matrix
files, and evaluation of the analytic complexity predictors."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .block import BlockJacobiConfig, block_jacobi
from .core import read_matrix, write_matrix_text
from .costs import (CostLedger, predict_block_sweep, predict_recursive,
                    predict_svd_sweep, predict_words)
from .experiments import PRESETS, load_experiment_spec, run_experiment, run_preset
from .orderings import parse_ordering
from .recursive import RecursiveJacobiConfig, recursive_jacobi
from .scalar import ScalarJacobiConfig, scalar_jacobi
from .svd import SvdConfig, jacobi_svd

USAGE_ERROR = 1
NONCONVERGED = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jacobi",
                                     description="Jacobi eigensolver/SVD experiment harness")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a named preset or a spec file")
    run.add_argument("--preset", choices=sorted(PRESETS))
    run.add_argument("--spec", help="experiment spec file (ini-style sections)")
    run.add_argument("--out", default="results")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--large", action="store_true",
                     help="include the n=1024,2048 rows of the sweep-count grid")

    solve = sub.add_parser("solve", help="solve a matrix from a file")
    solve.add_argument("--input", required=True)
    solve.add_argument("--solver", required=True, choices=["scalar", "block", "recursive", "svd"])
    solve.add_argument("--b", type=int, default=8)
    solve.add_argument("--f", type=float, default=0.5)
    solve.add_argument("--ordering", default="row-cyclic")
    solve.add_argument("--pivot", default="none", choices=["none", "lupp", "qrcp"])
    solve.add_argument("--tol", type=float, default=1e-7)
    solve.add_argument("--max-sweeps", type=int, default=50)
    solve.add_argument("--adversarial", action="store_true")
    solve.add_argument("--preprocess", default="none", choices=["none", "qr", "qrcp"])
    solve.add_argument("--out", help="directory for factor/eigenvalue files")

    predict = sub.add_parser("predict", help="evaluate the analytic cost models")
    predict.add_argument("--theorem", required=True,
                         choices=["2.2", "3.2", "4.3", "5.1", "5.2", "5.3", "5.4"])
    predict.add_argument("--n", type=int, required=True)
    predict.add_argument("--m", type=int)
    predict.add_argument("--b", type=int)
    predict.add_argument("--f", type=float)
    predict.add_argument("--omega", type=float, default=3.0)
    predict.add_argument("--mem", type=int)
    return parser


def _cmd_run(args) -> int:
    if bool(args.preset) == bool(args.spec):
        print("run: give exactly one of --preset or --spec", file=sys.stderr)
        return USAGE_ERROR
    if args.preset:
        records = run_preset(args.preset, args.out, seed=args.seed, large=args.large)
    else:
        spec = load_experiment_spec(args.spec)
        spec.output_dir = args.out
        records = run_experiment(spec)
    converged = sum(1 for r in records if r.converged)
    print(f"{len(records)} runs -> {args.out} ({converged} converged, "
          f"{len(records) - converged} flagged)")
    return 0


def _cmd_solve(args) -> int:
    try:
        a = read_matrix(args.input)
    except (OSError, ValueError) as exc:
        print(f"solve: {exc}", file=sys.stderr)
        return USAGE_ERROR
    ordering = parse_ordering(args.ordering)
    ledger = CostLedger()

    if args.solver == "svd":
        cfg = SvdConfig(b=args.b, ordering=ordering, pivot=args.pivot,
                        preprocess=args.preprocess,
                        relative_tolerance=min(args.tol, 0.5), max_sweeps=args.max_sweeps)
        result = jacobi_svd(a, cfg, ledger)
        state = result.state
        values = np.sort(result.sigma)[::-1]
        label = "singular values"
        factors = {"u.txt": result.U, "v.txt": result.V}
    else:
        if args.solver == "scalar":
            cfg = ScalarJacobiConfig(ordering=ordering, relative_tolerance=args.tol,
                                     max_sweeps=args.max_sweeps, adversarial=args.adversarial)
            q, d, state = scalar_jacobi(a, cfg, ledger)
        elif args.solver == "block":
            cfg = BlockJacobiConfig(b=args.b, ordering=ordering, pivot=args.pivot,
                                    adversarial=args.adversarial,
                                    relative_tolerance=args.tol, max_sweeps=args.max_sweeps)
            q, d, state = block_jacobi(a, cfg, ledger)
        else:
            cfg = RecursiveJacobiConfig(f=args.f, ordering=ordering, pivot=args.pivot,
                                        relative_tolerance=args.tol, max_sweeps=args.max_sweeps)
            q, d, state = recursive_jacobi(a, cfg, ledger)
        values = np.sort(d)[::-1]
        label = "eigenvalues"
        factors = {"q.txt": q}

    status = "converged" if state.converged else "NOT converged"
    print(f"{args.solver}: {status} after {state.sweeps} sweeps, "
          f"flops={ledger.flops}, rotations={ledger.rotations}")
    if state.history:
        last = state.history[-1]
        print(f"final max off-diagonal {last.max_offdiag:.6e}, "
              f"off-diagonal norm {last.offdiag_fro:.6e}")
    head = ", ".join(f"{v:.12g}" for v in values[:8])
    print(f"{label} (sorted, first {min(8, len(values))}): {head}")

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        np.savetxt(out / "values.txt", values, fmt="%.17g")
        for name, mat in factors.items():
            write_matrix_text(out / name, mat)
    return 0 if state.converged else NONCONVERGED


def _cmd_predict(args) -> int:
    t = args.theorem
    need = {"2.2": ("mem",), "3.2": ("b",), "4.3": ("f", "mem"), "5.1": ("m", "b"),
            "5.2": ("m", "mem"), "5.3": ("m", "b"), "5.4": ("m", "b", "mem")}
    missing = [k for k in need[t] if getattr(args, k) is None]
    if missing:
        print(f"predict: theorem {t} needs --{', --'.join(missing)}", file=sys.stderr)
        return USAGE_ERROR
    n, m, b, f, mem, omega = args.n, args.m, args.b, args.f, args.mem, args.omega
    if t == "2.2":
        print(f"words(scalar sweep) ~ n^4/M = {predict_words('scalar', n=n, mem=mem):.6e}")
    elif t == "3.2":
        flops = predict_block_sweep(n, b, omega)
        print(f"flops(block sweep) ~ n^2 b + n^3 b^(omega-3) = {flops:.6e}")
        if mem:
            print(f"words(block sweep) ~ n^3/b = {predict_words('block', n=n, b=b, mem=mem):.6e}")
        else:
            print(f"words(block sweep) ~ n^3/b = {n**3 / b:.6e}")
    elif t == "4.3":
        print(f"flops(recursive sweep) ~ n^(3(1-f)+omega f) = {predict_recursive(n, f, omega):.6e}")
        print(f"words(recursive sweep) = {predict_words('recursive', n=n, f=f, mem=mem, omega=omega):.6e}")
    elif t == "5.1":
        print(f"flops(one-sided sweep) = {predict_svd_sweep(m, n, b, omega):.6e}")
    elif t == "5.2":
        print(f"words(one-sided sweep, b=1) ~ m^2 n^2 / M = {predict_words('svd-scalar', n=n, m=m, mem=mem):.6e}")
    elif t == "5.3":
        print(f"words(one-sided sweep) ~ m n^2 / b = {predict_words('svd-block', n=n, m=m, b=b, mem=mem):.6e}")
    else:
        val = predict_words('svd-large', n=n, m=m, b=b, mem=mem, omega=omega)
        print(f"words(one-sided sweep, large b) = {val:.6e}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "solve":
            return _cmd_solve(args)
        return _cmd_predict(args)
    except (OSError, ValueError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
