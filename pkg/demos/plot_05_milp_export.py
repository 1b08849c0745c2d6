"""
Exporting the MILP models
=========================

Write both optimization models in LP format for an external solver and
check that the search results are feasible points of each model.
"""

from xsurv import load_bundled, solve_base_mapping, solve_max_prct_tree
from xsurv.milp import baseset_solution, build_model, check_solution, maxtree_solution, to_lp

inst, _ = load_bundled("fig1")

model = build_model(inst, "baseset", "random")
text = to_lp(model)
print(f"baseset model: {len(model.variables)} variables, {len(model.constraints)} constraints")
print("\n".join(text.splitlines()[:8]))
print("...")

# The mapping found by search, with its witness trees turned into flows,
# satisfies every constraint and reproduces the objective.
res = solve_base_mapping(inst, weights="random")
rep = check_solution(model, baseset_solution(inst, res.mapping, res.base_set))
print(f"baseset: feasible={rep.feasible} objective={rep.objective:.6f} search={res.objective:.6f}")

model = build_model(inst, "maxtree", "random")
tree = solve_max_prct_tree(inst, weights="random")
rep = check_solution(model, maxtree_solution(inst, tree.tree))
print(f"maxtree: feasible={rep.feasible} objective={rep.objective:.6f} search={tree.objective:.6f}")
