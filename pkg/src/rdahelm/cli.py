"""Command-line entry point for the study subcommands."""

import argparse
import sys

from . import experiments as xp
from .assembly import (HelmholtzConfig, assemble_rda_system,
                       export_matrix_market, plane_wave)
from .linsolve import build_hierarchy, gmres, vcycle_apply
from .mesh import dump_mesh, uniform_square_mesh
from .reconstruction import build_reconstruction_operator


def _int_list(text):
    return tuple(int(v) for v in text.split(","))


def _add_shared(p):
    p.add_argument("--out", default=None, help="output file path")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--penalty-imag", choices=("on", "off"), default="on")
    p.add_argument("--dump-matrix", default=None,
                   help="write the assembled system in Matrix Market format")
    p.add_argument("--dump-mesh", default=None,
                   help="write the finest mesh as plain text")
    p.add_argument("--trace-residual", default=None,
                   help="write iter,relres history as CSV")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="rdahelm",
        description="Helmholtz studies on the reconstructed "
                    "discontinuous space")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cm-table", help="1D interpolation efficiency ratios")
    p.add_argument("--m", type=_int_list, default=(2, 3, 4, 5, 6))
    p.add_argument("--cells", type=int, default=320)
    _add_shared(p)

    p = sub.add_parser("convergence", help="plane-wave accuracy study")
    p.add_argument("--k", type=float, default=5.0)
    p.add_argument("--m", type=_int_list, default=(2, 3))
    p.add_argument("--n", type=_int_list, default=(10, 20, 40))
    p.add_argument("--eps", choices=("zero", "ksq"), default="zero")
    p.add_argument("--expensive", action="store_true",
                   help="radial Bessel-type solution at k=40, n=160 "
                        "(unless overridden); large, slow run")
    _add_shared(p)

    p = sub.add_parser("compare-dg", help="cost comparison against the "
                       "broken modal space")
    p.add_argument("--k", type=float, default=10.0)
    p.add_argument("--m", type=_int_list, default=(2, 3, 4))
    p.add_argument("--n", type=_int_list, default=(10, 20, 40))
    _add_shared(p)

    p = sub.add_parser("precond-study", help="PGMRES iteration counts")
    p.add_argument("--k", type=float, default=5.0)
    p.add_argument("--m", type=_int_list, default=(2,))
    p.add_argument("--n", type=_int_list, default=(10, 20, 40))
    _add_shared(p)

    p = sub.add_parser("spectrum", help="dense eigenvalue portraits")
    p.add_argument("--k", type=float, default=10.0)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--eps", choices=("zero", "ksq"), default="ksq")
    _add_shared(p)
    return ap


def _dump_artifacts(args, k, m, n, eps, eta, penalty_imag):
    """Optional matrix / mesh / residual dumps for the finest (m, n) cell."""
    mesh = uniform_square_mesh(n)
    if args.dump_mesh:
        dump_mesh(mesh, args.dump_mesh)
    if args.dump_matrix or args.trace_residual:
        cfg = HelmholtzConfig(k=k, eps=eps, m=m, eta=eta,
                              penalty_imag=penalty_imag)
        recon = build_reconstruction_operator(mesh, m)
        system = assemble_rda_system(mesh, recon, cfg,
                                     plane_wave(k, eps=eps))
        if args.dump_matrix:
            export_matrix_market(system, args.dump_matrix)
        if args.trace_residual:
            meshes = xp.nested_meshes(n)
            hier = build_hierarchy(meshes, cfg)
            _, rep = gmres(system.matrix, system.rhs,
                           precond=lambda v: vcycle_apply(hier, v),
                           tol=args.tol, max_iter=args.max_iter)
            with open(args.trace_residual, "w", newline="") as fh:
                fh.write("iter,relres\n")
                for i, r in enumerate(rep.residuals):
                    fh.write(f"{i},{float(r)!r}\n")


def main(argv=None):
    args = build_parser().parse_args(argv)
    penalty_imag = args.penalty_imag == "on"

    if args.command == "cm-table":
        table = xp.cm_table(m_list=args.m, n_cells=args.cells)
    elif args.command == "spectrum":
        table = xp.spectrum_report(args.n, args.m, args.k,
                                   eps_mode=args.eps, eta=args.eta)
        _dump_artifacts(args, args.k, args.m, args.n,
                        args.k ** 2 if args.eps == "ksq" else 0.0,
                        args.eta, penalty_imag)
    else:
        eps_mode = getattr(args, "eps", "zero")
        solution = "plane"
        if getattr(args, "expensive", False):
            solution = "bessel"
            if args.k == 5.0:
                args.k = 40.0
            if args.n == (10, 20, 40):
                args.n = (160,)
            if args.m == (2, 3):
                args.m = (2,)
        cfg = xp.ExperimentConfig(
            name=args.command, k=args.k, eps_mode=eps_mode,
            m_list=args.m, n_list=args.n, eta=args.eta,
            penalty_imag=penalty_imag, solution=solution, tol=args.tol,
            max_iter=args.max_iter, out=args.out, fmt=args.format)
        run = {"convergence": xp.run_convergence,
               "compare-dg": xp.run_dg_comparison,
               "precond-study": xp.run_precond_study}[args.command]
        table = run(cfg)
        _dump_artifacts(args, args.k, max(args.m), max(args.n),
                        cfg.eps, args.eta, penalty_imag)

    text = table.to_csv() if args.format == "csv" else table.to_json()
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)

    failed = table.failed_rows
    if failed:
        for row in failed:
            print(f"failed row: {row}", file=sys.stderr)
        print(f"{len(failed)} row(s) failed", file=sys.stderr)
        return len(failed)
    return 0


if __name__ == "__main__":
    sys.exit(main())
