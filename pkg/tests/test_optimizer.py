import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xsurv import (
    AllPaths,
    Budget,
    BudgetExceeded,
    InfeasibleError,
    KShortest,
    WeightModel,
    build_weights,
    critical_links,
    load_bundled,
    parse_instance,
    solve_base_mapping,
    solve_max_prct_tree,
    treeset_probability,
)
from xsurv.survivability import tree_links, validate_tree

from oracles import best_mapping_cost, critical_scan, random_instance, steiner_cost


def small_instance(seed):
    return random_instance(seed, max_pnodes=6, max_plinks=8, max_llinks=4)


def test_weights(fig1_inst):
    w = build_weights(fig1_inst, "random")
    assert w.costs[(1, 4)] == pytest.approx(-math.log(0.8), rel=1e-15)
    assert all(c == 1.0 for c in build_weights(fig1_inst, "uniform").costs.values())
    with pytest.raises(ValueError):
        build_weights(fig1_inst, "gaussian")


def test_fig1_base_mapping(fig1_inst):
    res = solve_base_mapping(fig1_inst, weights="random")
    assert res.phi == pytest.approx(0.81, abs=1e-9)
    assert len(res.unprotected) == 2
    cost = build_weights(fig1_inst, "random").costs
    best, sets = best_mapping_cost(fig1_inst, cost)
    assert res.objective == pytest.approx(best, abs=1e-12)
    assert set(res.unprotected) in [set(s) for s in sets]
    assert critical_links(fig1_inst, res.mapping) == res.unprotected


@pytest.mark.parametrize("rho", [0.05, 0.10, 0.15])
def test_fig1_uniform_power(fig1_inst, rho):
    inst = fig1_inst.with_failure_probs(rho)
    res = solve_base_mapping(inst, weights="uniform")
    k, _ = best_mapping_cost(inst, build_weights(inst, "uniform").costs)
    assert k == 2
    assert res.phi == pytest.approx((1 - rho) ** k, abs=1e-9)


def test_fig1_max_tree(fig1_inst):
    res = solve_max_prct_tree(fig1_inst, weights="random")
    validate_tree(fig1_inst, res.tree)
    assert res.phi == pytest.approx(0.5832, abs=1e-9)
    flat = fig1_inst.with_failure_probs(0.1)
    assert solve_max_prct_tree(flat, weights="uniform").phi == pytest.approx(0.9 ** 4, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["random", "uniform"]))
def test_base_mapping_matches_exhaustive(seed, kind):
    inst = small_instance(seed)
    res = solve_base_mapping(inst, weights=kind)
    best, _ = best_mapping_cost(inst, build_weights(inst, kind).costs)
    assert res.objective == pytest.approx(best, abs=1e-9)
    assert critical_scan(inst, res.mapping.routes) == set(res.unprotected)
    assert treeset_probability(inst, res.base_set.trees) == pytest.approx(res.phi, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(["random", "uniform"]))
def test_max_tree_is_steiner_tree(seed, kind):
    inst = small_instance(seed)
    res = solve_max_prct_tree(inst, weights=kind)
    validate_tree(inst, res.tree)
    assert res.objective == pytest.approx(
        steiner_cost(inst, build_weights(inst, kind).costs), abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_duality_and_dominance(seed):
    inst = small_instance(seed)
    base = solve_base_mapping(inst, weights="random")
    assert base.phi == pytest.approx(math.exp(-base.objective), rel=1e-12)
    tree = solve_max_prct_tree(inst, weights="random")
    assert tree.phi <= base.phi + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.1, 10.0))
def test_uniform_solution_scale_invariant(seed, scale):
    inst = small_instance(seed)
    w = build_weights(inst, "uniform")
    scaled = WeightModel("uniform", {e: scale for e in w.costs})
    a = solve_base_mapping(inst, weights=w)
    b = solve_base_mapping(inst, weights=scaled)
    assert len(a.unprotected) == len(b.unprotected)
    assert b.objective == pytest.approx(scale * a.objective, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_more_candidates_never_worse(seed):
    inst = small_instance(seed)
    objs = [solve_base_mapping(inst, KShortest(k), "random").objective for k in (1, 2, 4, 64)]
    for a, b in zip(objs, objs[1:]):
        assert b <= a + 1e-12


def test_nsf_ln1_survivable():
    inst, _ = load_bundled("nsf-ln1")
    res = solve_base_mapping(inst, weights="random")
    assert res.phi == 1.0 and not res.unprotected


def test_budget_exceeded():
    inst, _ = load_bundled("nsf-ln2")
    with pytest.raises(BudgetExceeded):
        solve_base_mapping(inst, weights="uniform", budget=Budget(max_nodes=3))
    with pytest.raises(BudgetExceeded):
        solve_max_prct_tree(inst, weights="uniform", budget=Budget(max_nodes=1))


def test_infeasible():
    text = "[physical]\nlink 1 2 0.1\nlink 3 4 0.1\n[logical]\nlink 1 2\n[node_map]\n1 1\n2 3\n"
    inst, _ = parse_instance(text)
    with pytest.raises(InfeasibleError):
        solve_base_mapping(inst)
    with pytest.raises(InfeasibleError):
        solve_max_prct_tree(inst)


def test_hop_limit_restricts_candidates(fig1_inst):
    res = solve_base_mapping(fig1_inst, AllPaths(3), "uniform")
    assert all(len(p) <= 4 for p in res.mapping.routes.values())
    with pytest.raises(InfeasibleError):
        solve_base_mapping(fig1_inst, AllPaths(1), "uniform")


def test_deterministic(fig1_inst):
    a = solve_base_mapping(fig1_inst, weights="uniform")
    b = solve_base_mapping(fig1_inst, weights="uniform")
    assert a.mapping == b.mapping


def test_support_matches_tree(fig1_inst):
    res = solve_max_prct_tree(fig1_inst, weights="uniform")
    assert res.objective == len(tree_links(res.tree))
