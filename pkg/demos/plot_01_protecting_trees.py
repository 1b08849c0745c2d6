"""
Protecting spanning trees on a six-node ring
============================================

Two routed logical spanning trees on the bundled ``fig1`` instance, their
physical supports, and why protecting with both beats either alone.
"""

from xsurv import (
    load_bundled,
    make_tree,
    tree_links,
    tree_probability,
    treeset_common_links,
    treeset_probability,
)

inst, routes = load_bundled("fig1")
print("physical links and failure probabilities:")
for e in inst.physical.sorted_links:
    print(f"  {e}: {inst.rho(e)}")

# A tree is a logical spanning tree plus one physical route per branch.
# Route keys may be written in either orientation.
lam1 = make_tree(inst, {(2, 1): (2, 5, 1), (1, 3): (1, 4, 6, 3), (3, 4): (3, 6, 4)})
lam2 = make_tree(inst, {(1, 2): (1, 5, 2), (2, 4): (2, 3, 6, 4), (4, 3): (4, 6, 3)})

# A single tree survives when none of its supporting links fails.
for name, tree in (("lambda1", lam1), ("lambda2", lam2)):
    print(f"{name}: support {sorted(tree_links(tree))} -> {tree_probability(inst, tree):.5f}")

# Together the pair only fails when a link shared by both supports fails.
pair = [lam1, lam2]
print("common links:", sorted(treeset_common_links(pair)))
print(f"pair survives with probability {treeset_probability(inst, pair):.4f}")
