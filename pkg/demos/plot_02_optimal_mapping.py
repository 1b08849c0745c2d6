"""
Optimal mapping and its base tree set
=====================================

Search for the routing of every logical link that leaves the cheapest set of
unprotected physical links, then list the witness trees that certify it.
"""

from xsurv import load_bundled, solve_base_mapping, solve_max_prct_tree
from xsurv.survivability import format_base_set

inst, _ = load_bundled("fig1")

# Random weights charge each link -ln(1 - rho), so the cheapest unprotected
# set is also the most reliable one.
res = solve_base_mapping(inst, weights="random")
print("routes:")
for u, path in sorted(res.mapping.routes.items()):
    print(f"  {u}: {path}")
print("unprotected links:", sorted(res.unprotected))
print(f"survivable probability {res.phi:.4f} after {res.stats.nodes} search nodes")

# Each tree in the base set avoids some physical link, and only the
# unprotected links are shared by all of them.
print(format_base_set(res.base_set))

# The best single tree is a lower bound on the same quantity.
tree = solve_max_prct_tree(inst, weights="random")
print(f"best single tree: {tree.phi:.4f} (ratio {tree.phi / res.phi:.3f})")
