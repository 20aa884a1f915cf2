"""Command-line harness.

Subcommands: attractor | radius | check | eigen | converge | paper-example
| all.  Each runs its prerequisites in dependency order (attractor ->
radius -> check -> eigen -> converge), reuses a single spectral estimate per
run, and writes one report file per executed stage into the output
directory.

Exit status is nonzero only for operational errors (bad config, parse
failures, I/O); scientific FAILS or INCONCLUSIVE verdicts are data and exit
zero.
"""

from __future__ import annotations

import argparse
import sys

from . import conditions as cond
from . import measure as meas
from . import operator as oper
from .attractor import build_attractor, invariance_gap
from .config import ConfigError, RunConfig, load_config
from .convergence import convergence_experiment
from .exprlang import ExprError
from .funcs import ExprFunc
from .gridfn import GridFunction
from .reports import emit_report
from .system import SystemDefinitionError

_STAGES = ["attractor", "radius", "check", "eigen", "converge"]
_NEEDS = {
    "attractor": [],
    "radius": ["attractor"],
    "check": ["attractor", "radius"],
    "eigen": ["attractor", "radius"],
    "converge": ["attractor", "radius", "eigen"],
}


def _expand(commands):
    wanted = set()
    for c in commands:
        wanted.update(_NEEDS[c])
        wanted.add(c)
    return [s for s in _STAGES if s in wanted]


def run_pipeline(cfg: RunConfig, commands, system=None, emit=True, log=None):
    """Execute the requested stages and return {stage: report object}."""
    log = log or (lambda msg: None)
    if system is None:
        system = cfg.build_system()
    results = {}
    stages = _expand(commands)

    mesh = None
    spectral = None
    eigen = None
    eigen_measure = None
    h_normalized = None

    for stage in stages:
        log(f"[{stage}] running")
        if stage == "attractor":
            resolution = cfg.attractor_resolution
            if resolution is None:
                resolution = system.diameter / min(cfg.grid, 4096)
            mesh = build_attractor(system, depth=cfg.attractor_depth,
                                   resolution=resolution,
                                   seeds=cfg.attractor_seeds, seed=cfg.seed)
            results["attractor"] = mesh
            log(f"[attractor] {mesh.size} points, hull {mesh.hull}, "
                f"gap {invariance_gap(system, mesh):.3g}, method {mesh.method}")
        elif stage == "radius":
            spectral = oper.spectral_radius(system, n_max=cfg.radius_iters,
                                            grid_n=cfg.grid, hull=mesh.hull)
            results["radius"] = spectral
            log(f"[radius] rho = {spectral.rho!r}, bracket {spectral.bracket}")
        elif stage == "check":
            reports = [
                cond.main_theorem_check(system, spectral,
                                        grid_n=cfg.conditions_grid,
                                        hull=mesh.hull),
                cond.main_theorem_check(system, spectral,
                                        grid_n=cfg.conditions_grid,
                                        hull=mesh.hull, variant="global"),
                cond.corollary_check(system, grid_n=cfg.conditions_grid,
                                     hull=mesh.hull),
                cond.single_branch_check(system, grid_n=cfg.conditions_grid,
                                         hull=mesh.hull),
            ]
            if system.m ** cfg.depth_k <= 4096:
                reports.append(cond.depth_k_check(system, cfg.depth_k, spectral,
                                                  grid_n=cfg.conditions_grid,
                                                  hull=mesh.hull))
            results["check"] = reports
            for r in reports:
                log(f"[check] {r.condition_id}: {r.verdict} "
                    f"(lhs {r.lhs:.6g} vs {r.comparator:.6g})")
        elif stage == "eigen":
            eigen = oper.power_eigenfunction(system, tol=cfg.eigen_tol,
                                             n_max=cfg.eigen_iters,
                                             grid_n=cfg.grid, hull=mesh.hull)
            eigen_measure = meas.power_eigenmeasure(
                system, tol=max(cfg.eigen_tol, 1e-12), n_max=400,
                resolution=(mesh.hull[1] - mesh.hull[0]) / cfg.grid,
                hull=mesh.hull)
            h_normalized = meas.pair_normalize(eigen.h, eigen_measure.mu)
            results["eigen"] = {"function": eigen, "measure": eigen_measure}
            log(f"[eigen] rho = {eigen.rho!r} (residual {eigen.residual:.3g}, "
                f"converged {eigen.converged}); "
                f"rho_dual = {eigen_measure.rho!r} "
                f"(converged {eigen_measure.converged})")
        elif stage == "converge":
            fs = []
            labels = []
            for src in cfg.converge_functions:
                fn = ExprFunc(src)
                fs.append(GridFunction.from_callable(eigen.h.lo, eigen.h.hi,
                                                     eigen.h.n, fn))
                labels.append(src)
            fs.append(h_normalized)
            labels.append("h")
            report = convergence_experiment(system, h_normalized,
                                            eigen_measure.mu, eigen.rho,
                                            fs, n_max=cfg.converge_n_max,
                                            labels=labels)
            results["converge"] = report
            for tr in report.traces:
                rate = "at-floor" if tr.rate is None else f"{tr.rate:.4f}"
                log(f"[converge] {tr.label}: rate {rate}, floor {tr.floor:.3g}")

    if emit:
        for stage, obj in results.items():
            emit_report(stage, obj, cfg.format, cfg.out_dir)
    return results


def run_paper_example(cfg: RunConfig, emit=True, log=None):
    """Build the two-branch indifferent example and run the full pipeline."""
    log = log or (lambda msg: None)
    spec = cond.build_paper_example(cfg.paper_example_p1, grid_n=cfg.grid)
    log(f"[paper-example] delta = {spec.delta!r}")
    results = run_pipeline(cfg, _STAGES, system=spec.system, emit=emit, log=log)
    summary = {
        "delta": spec.delta,
        "p1": getattr(spec.p1, "source", repr(spec.p1)),
        "p2": getattr(spec.p2, "source", repr(spec.p2)),
        "conditions": results["check"],
        "rho": results["radius"].rho,
        "bracket_lo": results["radius"].bracket[0],
        "bracket_hi": results["radius"].bracket[1],
    }
    results["paper-example"] = summary
    if emit:
        emit_report("paper-example", summary, cfg.format, cfg.out_dir)
    return spec, results


def _build_argparser():
    ap = argparse.ArgumentParser(
        prog="ifslab",
        description="numerical laboratory for transfer operators of "
                    "nonexpansive iterated function systems")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in _STAGES + ["paper-example", "all"]:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None,
                       help="config file (required except for paper-example)")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--grid", type=int, default=None, help="grid size N")
        p.add_argument("--seed", type=int, default=None, help="random seed")
        p.add_argument("--format", choices=("tabular", "structured"),
                       default=None, help="report format")
        p.add_argument("--quiet", action="store_true")
    return ap


def main(argv=None):
    args = _build_argparser().parse_args(argv)
    log = (lambda msg: None) if args.quiet else (lambda msg: print(msg))
    try:
        if args.config is not None:
            cfg = load_config(args.config)
        elif args.command == "paper-example":
            cfg = RunConfig()
        else:
            print(f"error: {args.command} requires --config", file=sys.stderr)
            return 2
        if args.out is not None:
            cfg.out_dir = args.out
        if args.grid is not None:
            if not 2 <= args.grid <= 10_000_000:
                print(f"error: --grid {args.grid} out of range", file=sys.stderr)
                return 2
            cfg.grid = args.grid
        if args.seed is not None:
            cfg.seed = args.seed
        if args.format is not None:
            cfg.format = args.format

        if args.command == "paper-example":
            run_paper_example(cfg, log=log)
        elif args.command == "all":
            run_pipeline(cfg, _STAGES, log=log)
        else:
            run_pipeline(cfg, [args.command], log=log)
        return 0
    except (ConfigError, SystemDefinitionError, ExprError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
