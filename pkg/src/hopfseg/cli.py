"""Command-line surface: check | reconstruct | trace | index | desingularize
| simulate | render.

Each run reads one JSON function spec, writes a JSON report (plus optional
SVG/CSV artifacts) into the output directory, and exits 0 iff all requested
checks pass.  All numeric defaults are echoed into the report.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import desingularize as desing
from . import diffusion
from .errors import HopfSegError
from .nodal import trace as trace_graph
from .nodal import verify_index
from .serialize import dump_report, emit_function, parse_function, render_svg
from .states import admissibility, export_grid_csv, find_base_point, hopf_l1, reconstruct
from .states import dirichlet_energy

COMMANDS = ("check", "reconstruct", "trace", "index", "desingularize", "simulate", "render")


def build_parser():
    p = argparse.ArgumentParser(prog="hopfseg", description=__doc__)
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", "-i", required=True, help="JSON function spec file")
    p.add_argument("--out", "-o", default="out", help="output directory")
    p.add_argument("--resolution", type=int, default=256)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--mu", type=float, default=1e4)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--branch", type=int, default=0)
    p.add_argument("--samples", type=int, default=1024)
    p.add_argument("--base", type=str, default=None,
                   help="base point as 're,im' (default: automatic)")
    return p


def _defaults(args) -> dict:
    return {
        "resolution": args.resolution,
        "tol": args.tol,
        "mu": args.mu,
        "eps": args.eps,
        "branch": args.branch,
        "samples": args.samples,
    }


def _pick_base(f, args):
    if args.base is not None:
        re, im = (float(x) for x in args.base.split(","))
        return complex(re, im)
    base = find_base_point(f)
    if base is None:
        raise HopfSegError("no admissible base point found (try --base)")
    return base


def run(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    f = parse_function(Path(args.input).read_text())
    report: dict = {"command": args.command, "defaults": _defaults(args)}
    ok = True

    if args.command == "check":
        base = _pick_base(f, args)
        rep = admissibility(f, base)
        report["base"] = base
        report["admissible"] = rep.admissible
        report["tolerance"] = rep.tolerance
        report["residuals"] = [[z, v] for z, v in rep.residuals]
        ok = rep.admissible

    elif args.command in ("reconstruct", "trace", "index", "render", "simulate"):
        base = _pick_base(f, args)
        st = reconstruct(f, base, resolution=args.resolution)
        report["base"] = base
        report["n_species"] = st.n_species
        report["criticals"] = [
            {"z": z, "order": n, "multiplicity": m} for z, n, m in st.criticals
        ]
        report["residuals"] = [[z, v] for z, v in st.residuals]
        if args.command == "reconstruct":
            report["dirichlet_energy"] = dirichlet_energy(st)
            report["hopf_l1"] = hopf_l1(f)
            export_grid_csv(st, out / "grid.csv")
            report["artifacts"] = ["grid.csv"]
        else:
            g = trace_graph(st)
            rep = verify_index(g)
            report["M"], report["N"], report["T"] = g.M, g.N, g.T
            report["index_sum"] = rep.index_sum
            report["euler_check"] = rep.euler_check
            report["formula_check"] = rep.formula_check
            report["clean_trace"] = g.clean
            if args.command == "trace":
                (out / "graph.json").write_text(dump_report(g.to_dict()))
                report["artifacts"] = ["graph.json"]
            elif args.command == "index":
                ok = rep.formula_check and rep.euler_check
            elif args.command == "render":
                (out / "state.svg").write_text(render_svg(graph=g))
                report["artifacts"] = ["state.svg"]
            elif args.command == "simulate":
                cfg = diffusion.boundary_from_state(st, samples=args.samples)
                fld = diffusion.solve(cfg, mu=args.mu)
                report["mu"] = args.mu
                report["sweeps"] = fld.sweeps
                report["segregation_defect"] = fld.defect
                report["interface_distance_cells"] = diffusion.interface_distance(fld, st, g)
                _export_fields_csv(fld, out / "fields.csv")
                report["artifacts"] = ["fields.csv"]

    elif args.command == "desingularize":
        roots = sorted(f.interior_roots, key=lambda p: (-p[1], abs(p[0])))
        if not roots or roots[0][1] < 2:
            raise HopfSegError("no zero of order >= 2 to split")
        z0 = roots[0][0]
        res = desing.split_zero(f, z0, eps_target=1e9, branch=args.branch, eps0=args.eps)
        report["z0"] = res.z0
        report["omega0"] = res.omega0
        report["new_zero"] = res.new_zero
        report["epsilon"] = res.epsilon
        report["theta"] = res.theta
        report["branch"] = res.branch
        report["R"] = res.R
        report["W"] = list(res.W)
        report["sup_dist"] = res.sup_dist
        report["h1_dist"] = res.h1_dist
        report["residuals"] = [[z, v] for z, v in res.admissibility.residuals]
        (out / "f_new.json").write_text(emit_function(res.f_new))
        base = find_base_point(res.f_new)
        st = reconstruct(res.f_new, base, resolution=args.resolution)
        (out / "f_new.svg").write_text(render_svg(graph=trace_graph(st)))
        report["artifacts"] = ["f_new.json", "f_new.svg"]
        ok = res.admissibility.admissible

    (out / "report.json").write_text(dump_report(report))
    print(dump_report(report), end="")
    return 0 if ok else 1


def _export_fields_csv(fld, path):
    G = fld.resolution
    h = 2.0 / G
    c = -1.0 + (np.arange(G) + 0.5) * h
    n = fld.u.shape[0]
    header = "x,y," + ",".join(f"u{j + 1}" for j in range(n))
    lines = [header]
    for iy in range(G):
        for ix in range(G):
            if not fld.inside[iy, ix]:
                continue
            vals = ",".join(f"{fld.u[j, iy, ix]:.17g}" for j in range(n))
            lines.append(f"{c[ix]:.17g},{c[iy]:.17g},{vals}")
    Path(path).write_text("\n".join(lines) + "\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except HopfSegError as exc:
        print(dump_report({"error": type(exc).__name__, "message": str(exc)}), end="")
        return 1


if __name__ == "__main__":
    sys.exit(main())
