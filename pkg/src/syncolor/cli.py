"""Command-line front end: ``syncolor <command> ...``.

Every command prints its effective configuration as one JSON line on
stderr, so a run can be repeated from that block alone. Exit codes:
0 confirmed / ok, 1 error, 2 counterexample, 3 truncated.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import analysis, builders, dynamics
from .network import (
    Coloring,
    Network,
    UnbalancedColoring,
    coarsest_balanced_refinement,
    dump_json,
    is_balanced,
    lift_coloring,
    load_coloring,
    load_network,
    quotient,
    to_dot,
)
from .perm import automorphism_group, is_orbit_coloring, orbits, partition_stabilizer

SUITES = ("fig3", "latin5", "fig7", "untrained", "trained2", "boundary", "latin-scan", "dynamics")
BUILDERS = ("gmn", "wilson", "wilson-trained", "fig3", "latin5", "fig7")


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _write_text(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    cfg["threads"] = int(os.environ.get("SYNCOLOR_THREADS", "1"))
    return cfg


def _load_patterns(path: str) -> list[list[int]]:
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data["patterns"]
    return [list(p) for p in data]


def _limits(args) -> analysis.EnumerationLimits:
    return analysis.EnumerationLimits(max_nodes=args.max_nodes, time_budget=args.time_budget,
                                      symmetry_reduction=getattr(args, "up_to_symmetry", False))


# ---- commands ----------------------------------------------------------------

def cmd_build(args) -> int:
    coloring = None
    if args.builder == "gmn":
        net = builders.group_network(args.m, args.n)
    elif args.builder == "wilson":
        net = builders.untrained_wilson(args.m, args.n)
    elif args.builder == "wilson-trained":
        if not args.patterns:
            raise ValueError("wilson-trained needs --patterns FILE")
        spec = builders.TrainedWilsonSpec(args.m, args.n, tuple(_load_patterns(args.patterns)))
        net = builders.train(spec)
    elif args.builder == "fig3":
        net, coloring = builders.fig3_coloring()
    elif args.builder == "latin5":
        net, coloring = builders.latin5_coloring()
    else:
        net, coloring = builders.fig7_coloring()
    if args.out:
        dump_json(net, args.out)
    else:
        print(dump_json(net))
    if coloring is not None:
        if args.coloring_out:
            dump_json(coloring, args.coloring_out)
        else:
            print(dump_json(coloring))
    print(f"# {net.node_count} nodes, {len(net.arrows)} arrows, {net.num_arrow_types} arrow types",
          file=sys.stderr)
    return 0


def cmd_check_balance(args) -> int:
    net, col = load_network(args.network), load_coloring(args.coloring)
    rep = is_balanced(net, col)
    out = {"balanced": rep.balanced}
    if rep.witness is not None:
        w = rep.witness
        out["witness"] = {"nodes": list(w.nodes), "arrow_type": w.arrow_type,
                          "profiles": [{f"{t}:{c}": k for (t, c), k in sorted(p.items())} for p in w.profiles]}
    _emit(out, args.out)
    return 0


def cmd_aut(args) -> int:
    net = load_network(args.network)
    _emit(automorphism_group(net).report(), args.out)
    return 0


def cmd_isotropy(args) -> int:
    net, col = load_network(args.network), load_coloring(args.coloring)
    sigma = partition_stabilizer(automorphism_group(net), col)
    _emit(sigma.report(), args.out)
    return 0


def cmd_orbit_coloring(args) -> int:
    net, col = load_network(args.network), load_coloring(args.coloring)
    sigma = partition_stabilizer(automorphism_group(net), col)
    _emit(orbits(sigma).to_json(), args.out)
    return 0


def cmd_exotic(args) -> int:
    net, col = load_network(args.network), load_coloring(args.coloring)
    balanced = is_balanced(net, col).balanced
    exotic = balanced and not is_orbit_coloring(net, col)
    _emit({"balanced": balanced, "exotic": exotic}, args.out)
    return 0


def cmd_enumerate(args) -> int:
    net = load_network(args.network)
    limits = _limits(args)
    try:
        found = analysis.enumerate_balanced_colorings(net, limits)
        truncated = None
    except analysis.TruncatedEnumeration as exc:
        found, truncated = exc.partial, exc.reason
    out = {"count": len(found), "colorings": [list(c) for c in found]}
    if args.coarsest:
        out["coarsest"] = list(coarsest_balanced_refinement(net))
    if truncated:
        out["truncated"] = truncated
    _emit(out, args.out)
    return 3 if truncated else 0


def cmd_quotient(args) -> int:
    net, col = load_network(args.network), load_coloring(args.coloring)
    qnet, reps = quotient(net, col)
    if args.format == "dot":
        _write_text(to_dot(qnet, Coloring.discrete(qnet.node_count), merge_parallel=True), args.out)
    else:
        _emit({"network": qnet.to_json(), "representatives": reps}, args.out)
    return 0


def cmd_lift(args) -> int:
    net, col = load_network(args.network), load_coloring(args.coloring)
    qcol = load_coloring(args.quotient_coloring)
    _emit(lift_coloring(net, col, qcol).to_json(), args.out)
    return 0


def _run_suite(args) -> analysis.TheoremReport:
    s = args.suite
    if s == "fig3":
        return analysis.analyze_fig3()
    if s == "latin5":
        return analysis.analyze_latin5()
    if s == "fig7":
        return analysis.analyze_fig7()
    if s == "untrained":
        return analysis.verify_untrained_theorem(args.m, args.n, _limits(args))
    if s == "trained2":
        return analysis.verify_trained_all(args.m, args.n)
    if s == "boundary":
        return analysis.boundary_table(args.m, args.n)
    if s == "latin-scan":
        return analysis.latin_square_scan(args.size)
    res = dynamics.run_suite(trials=args.trials, seed=args.seed, dim=args.dim, T=args.T, dt=args.dt,
                             tol=args.tol)
    verdict = analysis.CONFIRMED if res.pop("ok") else analysis.COUNTEREXAMPLE
    params = {"trials": args.trials, "seed": args.seed, "dim": args.dim, "T": args.T, "dt": args.dt,
              "tol": f"{args.tol:.1e}"}
    return analysis.TheoremReport("dynamics-invariance", params, verdict, res)


def cmd_verify(args) -> int:
    report = _run_suite(args).to_json()
    report["generated"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    _emit(report, args.out)
    return analysis.EXIT_CODES[report["verdict"]]


def cmd_simulate(args) -> int:
    net = load_network(args.network)
    col = load_coloring(args.coloring) if args.coloring else None
    if args.trials > 1 or args.report:
        if col is None:
            raise ValueError("invariance runs need --coloring")
        rep = dynamics.invariance_test(net, col, trials=args.trials, seed=args.seed, dim=args.dim,
                                       T=args.T, dt=args.dt, tol=args.tol, model=args.model)
        _emit(rep, args.out)
        return 0
    import numpy as np

    system = dynamics.random_admissible_system(net, args.dim, args.seed, args.model)
    x0 = np.random.default_rng([args.seed, 0, 1]).uniform(-1, 1, (net.node_count, args.dim))
    if col is not None:
        x0 = dynamics.project_to_synchrony(x0, col)
    traj = dynamics.integrate(system, x0, args.T, args.dt)
    if args.out:
        traj.to_csv(args.out)
    summary = {"steps": len(traj.times) - 1, "final": traj.states[-1].tolist()}
    if col is not None:
        summary["synchrony_deviation"] = dynamics.synchrony_deviation(traj, col)
    print(json.dumps(summary))
    return 0


def cmd_export(args) -> int:
    net = load_network(args.network)
    col = load_coloring(args.coloring) if args.coloring else None
    if args.format == "dot":
        _write_text(to_dot(net, col, merge_parallel=args.merge_parallel), args.out)
    elif args.format == "json":
        obj = {"network": net.to_json()}
        if col is not None:
            obj["coloring"] = col.to_json()
        _emit(obj, args.out)
    else:
        lines = ["tail,head,type"] + [f"{t},{h},{net.arrow_types[k]}" for t, h, k in net.arrows]
        _write_text("\n".join(lines) + "\n", args.out)
    return 0


# ---- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="syncolor", description="Balanced colorings of coupled cell networks.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, net=True, col=False):
        sp = sub.add_parser(name, help=help_text)
        if net:
            sp.add_argument("network", help="network JSON")
        if col:
            sp.add_argument("coloring", help="coloring JSON")
        sp.add_argument("-o", "--out", help="output path (default stdout)")
        sp.set_defaults(func=func)
        return sp

    sp = add("build", cmd_build, "build a named network", net=False)
    sp.add_argument("builder", choices=BUILDERS)
    sp.add_argument("m", type=int, nargs="?", default=3)
    sp.add_argument("n", type=int, nargs="?", default=3)
    sp.add_argument("--patterns", help="JSON list of patterns (row index per column)")
    sp.add_argument("--coloring-out", help="where to write the named coloring")

    add("check-balance", cmd_check_balance, "test a coloring for balance", col=True)
    add("aut", cmd_aut, "automorphism group")
    add("isotropy", cmd_isotropy, "isotropy subgroup of a coloring", col=True)
    add("orbit-coloring", cmd_orbit_coloring, "orbit coloring of the isotropy subgroup", col=True)
    add("exotic", cmd_exotic, "balanced but not an orbit coloring?", col=True)

    sp = add("enumerate", cmd_enumerate, "all balanced colorings")
    sp.add_argument("--max-nodes", type=int, default=20)
    sp.add_argument("--time-budget", type=float)
    sp.add_argument("--up-to-symmetry", action="store_true")
    sp.add_argument("--coarsest", action="store_true", help="also report the coarsest balanced coloring")

    sp = add("quotient", cmd_quotient, "quotient network", col=True)
    sp.add_argument("--format", choices=("json", "dot"), default="json")

    sp = add("lift", cmd_lift, "lift a quotient coloring", col=True)
    sp.add_argument("quotient_coloring", help="coloring of the quotient network")

    sp = add("verify", cmd_verify, "run a verification suite", net=False)
    sp.add_argument("suite", choices=SUITES)
    sp.add_argument("--m", type=int, default=3)
    sp.add_argument("--n", type=int, default=3)
    sp.add_argument("--size", type=int, default=4)
    sp.add_argument("--max-nodes", type=int, default=20)
    sp.add_argument("--time-budget", type=float)
    _dyn_flags(sp)

    sp = add("simulate", cmd_simulate, "integrate a random admissible system")
    sp.add_argument("--coloring")
    sp.add_argument("--model", choices=("generic", "rivalry"))
    sp.add_argument("--report", action="store_true", help="run the invariance test instead")
    _dyn_flags(sp)

    sp = add("export", cmd_export, "export a network")
    sp.add_argument("--format", choices=("dot", "json", "csv"), default="dot")
    sp.add_argument("--coloring")
    sp.add_argument("--merge-parallel", action="store_true")
    return p


def _dyn_flags(sp) -> None:
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--T", type=float, default=10.0)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--tol", type=float, default=dynamics.INVARIANCE_TOL)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--dim", type=int, choices=(1, 2), default=1)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    print(json.dumps({"config": _config(args)}, sort_keys=True), file=sys.stderr)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, UnbalancedColoring) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
