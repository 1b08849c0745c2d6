"""Command-line entry point ``xsurv``.

Results go to stdout as JSON (CSV/LP files for ``sweep``/``export-milp``);
diagnostics go to stderr. Exit codes: 0 success, 1 usage or input error,
2 infeasible instance, 3 search budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import experiments, failure_sim, milp
from .model import (
    AllPaths,
    InfeasibleError,
    InstanceError,
    KShortest,
    default_policy,
    load_instance,
)
from .optimizer import Budget, BudgetExceeded, solve_base_mapping, solve_max_prct_tree
from .survivability import critical_links, format_base_set, mapping_probability, tree_links

log = logging.getLogger("xsurv")

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _links(links):
    return [list(e) for e in sorted(links)]


def _emit(obj):
    print(json.dumps(obj, indent=2, sort_keys=False))


def _policy(args, inst):
    if args.paths == "ksp":
        return KShortest(args.k)
    if args.paths == "all":
        return AllPaths(args.max_hops or max(len(inst.physical.nodes) - 1, 1))
    return default_policy(inst)


def _sd(text: str) -> float:
    """``sd:X``, ``var:X`` or a bare number (standard deviation)."""
    kind, _, val = text.partition(":")
    if not val:
        return float(kind)
    if kind == "sd":
        return float(val)
    if kind == "var":
        return float(val) ** 0.5
    raise argparse.ArgumentTypeError(f"bad --variance {text!r}; use sd:X or var:X")


def _load(path):
    return load_instance(path)


def cmd_validate(args):
    inst, m = _load(args.file)
    _emit({
        "name": inst.name,
        "physical_nodes": len(inst.physical.nodes),
        "physical_links": len(inst.physical.links),
        "logical_nodes": len(inst.logical.nodes),
        "logical_links": len(inst.logical.links),
        "has_routes": m is not None,
    })


def _need_routes(m, args):
    if m is None:
        raise UsageError(f"{args.file} has no [routes] section")
    return m


def cmd_eval(args):
    inst, m = _load(args.file)
    m = _need_routes(m, args)
    _emit({
        "phi": mapping_probability(inst, m),
        "critical_links": _links(critical_links(inst, m)),
    })


def cmd_solve(args):
    inst, _ = _load(args.file)
    policy = _policy(args, inst)
    budget = Budget(time_limit=args.budget_s)
    if args.objective == "maxtree":
        res = solve_max_prct_tree(inst, policy, args.weights, budget)
        out = {
            "objective": res.objective,
            "phi": res.phi,
            "tree": {f"{s} {t}": list(p) for (s, t), p in sorted(res.tree.routes.items())},
            "tree_links": _links(tree_links(res.tree)),
            "nodes": res.stats.nodes,
        }
    else:
        res = solve_base_mapping(inst, policy, args.weights, budget)
        text = format_base_set(res.base_set)
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        out = {
            "objective": res.objective,
            "phi": res.phi,
            "unprotected": _links(res.unprotected),
            "routes": {f"{s} {t}": list(p) for (s, t), p in sorted(res.mapping.routes.items())},
            "num_trees": len(res.base_set.trees),
            "base_set": text,
            "nodes": res.stats.nodes,
        }
    _emit(out)


def cmd_sweep(args):
    inst, _ = _load(args.file)
    grid = experiments.rho_grid(args.rho_start, args.rho_end, args.rho_step)
    rows = experiments.run_sweep(
        inst, grid,
        mode="random" if args.random else "uniform",
        sd=args.variance, replicates=args.replicates, seed=args.seed,
        policy=_policy(args, inst), budget=Budget(time_limit=args.budget_s),
        timing=args.timing,
    )
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        experiments.write_csv(rows, fh)
    failed = sum(r.status != "ok" for r in rows)
    _emit({"rows": len(rows), "failed": failed, "out": str(args.out)})


def cmd_reliability(args):
    inst, m = _load(args.file)
    m = _need_routes(m, args)
    if args.method == "exact":
        try:
            rep = failure_sim.exact_reliability(inst, m)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        rep = failure_sim.mc_reliability(inst, m, args.samples, args.seed)
    _emit({
        "method": rep.method,
        "value": rep.value,
        "stderr": rep.stderr,
        "samples": rep.samples,
        "seed": rep.seed,
        "mapping_phi": mapping_probability(inst, m),
    })


def cmd_export(args):
    inst, _ = _load(args.file)
    text = milp.export_milp(inst, args.objective, args.weights)
    Path(args.out).write_text(text, encoding="utf-8")
    _emit({"out": str(args.out), "objective": args.objective, "weights": args.weights})


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="xsurv", description="Cross-layer survivable probability toolkit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def paths_opts(sp):
        sp.add_argument("--paths", choices=["all", "ksp"], default=None)
        sp.add_argument("--k", type=int, default=16)
        sp.add_argument("--max-hops", type=int, default=None)
        sp.add_argument("--budget-s", type=float, default=450.0)

    sp = sub.add_parser("validate", help="parse and validate an instance file")
    sp.add_argument("file")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("eval", help="survivable probability of the file's routes")
    sp.add_argument("file")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("solve", help="optimal tree or base mapping")
    sp.add_argument("--objective", choices=["maxtree", "baseset"], required=True)
    sp.add_argument("--weights", choices=["uniform", "random"], required=True)
    sp.add_argument("--out", help="write the base tree set text here (baseset only)")
    paths_opts(sp)
    sp.add_argument("file")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("sweep", help="failure-probability sweep to CSV")
    sp.add_argument("--rho-start", type=float, required=True)
    sp.add_argument("--rho-end", type=float, required=True)
    sp.add_argument("--rho-step", type=float, required=True)
    sp.add_argument("--random", action="store_true")
    sp.add_argument("--variance", type=_sd, default=0.02,
                    help="spread of random probabilities: sd:X, var:X or bare sd (default 0.02)")
    sp.add_argument("--replicates", type=int, default=5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--timing", action="store_true", help="fill the solve_ms column")
    sp.add_argument("--out", required=True)
    paths_opts(sp)
    sp.add_argument("file")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("reliability", help="exact or Monte Carlo reliability of the file's routes")
    sp.add_argument("--method", choices=["exact", "mc"], required=True)
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("file")
    sp.set_defaults(func=cmd_reliability)

    sp = sub.add_parser("export-milp", help="write the MILP model in LP format")
    sp.add_argument("--objective", choices=["maxtree", "baseset"], required=True)
    sp.add_argument("--weights", choices=["uniform", "random"], default="uniform")
    sp.add_argument("--out", required=True)
    sp.add_argument("file")
    sp.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        args.func(args)
    except (UsageError, InstanceError, OSError, ValueError) as exc:
        print(f"xsurv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleError as exc:
        print(f"xsurv: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except BudgetExceeded as exc:
        print(f"xsurv: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
