"""Survivable probability of cross-layer networks under random physical link failures."""

from .failure_sim import ReliabilityReport, exact_reliability, mc_reliability, single_failure_scan
from .model import (
    AllPaths,
    CrossLayerInstance,
    InfeasibleError,
    InstanceError,
    KShortest,
    LinkMapping,
    LogicalNetwork,
    NodeMapping,
    PathSet,
    PhysicalNetwork,
    enumerate_paths,
    load_bundled,
    load_instance,
    make_mapping,
    parse_instance,
    serialize_instance,
    surviving_logical_subgraph,
)
from .optimizer import (
    Budget,
    BudgetExceeded,
    MaxTreeResult,
    SolveResult,
    WeightModel,
    build_weights,
    solve_base_mapping,
    solve_max_prct_tree,
)
from .survivability import (
    BaseTreeSet,
    ProtectingTree,
    critical_links,
    extract_base_tree_set,
    make_tree,
    mapping_probability,
    tree_links,
    tree_probability,
    treeset_common_links,
    treeset_probability,
)

__version__ = "0.1.0"
