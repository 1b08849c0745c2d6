import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xsurv import (
    AllPaths,
    InfeasibleError,
    InstanceError,
    KShortest,
    enumerate_paths,
    load_bundled,
    make_mapping,
    parse_instance,
    serialize_instance,
    surviving_logical_subgraph,
)
from xsurv.model import BUNDLED

from oracles import adjacency, random_instance, random_mapping, simple_paths

BASE = """\
[physical]
link 1 2 0.1
link 2 3 0.2
link 1 3 0.05
[logical]
link 1 2
[node_map]
1 1
2 3
"""


def test_parse_basic():
    inst, m = parse_instance(BASE)
    assert inst.physical.links == {(1, 2), (2, 3), (1, 3)}
    assert inst.rho((3, 2)) == 0.2
    assert inst.endpoints((1, 2)) == (1, 3)
    assert m is None


def test_parse_routes_reverse_orientation():
    inst, m = parse_instance(BASE + "[routes]\n2 1 : 3 2 1\n")
    assert m.routes[(1, 2)] == (1, 2, 3)


@pytest.mark.parametrize("bad, line", [
    ("link 1 1 0.1", 5),
    ("link 2 1 0.3", 5),
    ("link 3 4 1.0", 5),
    ("link 3 4 -0.1", 5),
    ("link 3 4 abc", 5),
])
def test_parse_physical_errors(bad, line):
    text = BASE.replace("link 1 3 0.05", "link 1 3 0.05\n" + bad)
    with pytest.raises(InstanceError) as exc:
        parse_instance(text)
    assert exc.value.line == line


def test_parse_non_injective_map():
    with pytest.raises(InstanceError, match="injective") as exc:
        parse_instance(BASE.replace("2 3\n", "2 1\n"))
    assert exc.value.line == 9


def test_parse_unknown_section():
    with pytest.raises(InstanceError, match="unknown section"):
        parse_instance("[bogus]\n" + BASE)


@pytest.mark.parametrize("route", ["1 2 : 1 3 2", "1 2 : 1 2 1 3", "1 2 : 1 2"])
def test_parse_bad_route(route):
    with pytest.raises(InstanceError):
        parse_instance(BASE + "[routes]\n" + route + "\n")


def test_parse_partial_routes_rejected():
    text = BASE.replace("link 1 2\n", "link 1 2\nlink 2 1\n")
    with pytest.raises(InstanceError, match="duplicate"):
        parse_instance(text)


def test_disconnected_logical_rejected():
    text = BASE.replace("link 1 2\n", "link 1 2\nnode 3\n").replace("2 3\n", "2 3\n3 2\n")
    with pytest.raises(InstanceError):
        parse_instance(text)


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_round_trip(name):
    inst, m = load_bundled(name)
    inst2, m2 = parse_instance(serialize_instance(inst, m), name=inst.name)
    assert inst2 == inst
    assert m2 == m


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_round_trip_random(seed):
    inst = random_instance(seed)
    m = random_mapping(inst, seed)
    inst2, m2 = parse_instance(serialize_instance(inst, m), name=inst.name)
    assert inst2 == inst and m2 == m
    assert [inst2.rho(e) for e in inst2.physical.sorted_links] == [
        inst.rho(e) for e in inst.physical.sorted_links]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_enumerate_all_paths_matches_dfs(seed):
    inst = random_instance(seed)
    adj = adjacency(inst)
    hops = len(inst.physical.nodes) - 1
    for u in inst.logical.sorted_links:
        s, t = inst.endpoints(u)
        got = enumerate_paths(inst, u, AllPaths(max(hops, 1))).paths
        assert list(got) == simple_paths(adj, s, t)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 6))
def test_kshortest_is_prefix_of_sorted_paths(seed, k):
    inst = random_instance(seed)
    adj = adjacency(inst)
    for u in inst.logical.sorted_links:
        s, t = inst.endpoints(u)
        got = enumerate_paths(inst, u, KShortest(k)).paths
        assert list(got) == simple_paths(adj, s, t)[:k]


def test_enumerate_hop_limit(fig1):
    inst, _ = fig1
    ps = enumerate_paths(inst, (1, 2), AllPaths(2))
    assert ps.paths == ((1, 5, 2),)
    assert len(enumerate_paths(inst, (1, 2), AllPaths(5))) == 2


def test_enumerate_no_path():
    text = BASE.replace("[physical]\n", "[physical]\nlink 4 5 0.1\n").replace("2 3\n", "2 4\n")
    inst, _ = parse_instance(text)
    with pytest.raises(InfeasibleError):
        enumerate_paths(inst, (1, 2))


def test_surviving_subgraph_examples(fig1):
    inst, m = fig1
    alive, ok = surviving_logical_subgraph(inst, m, [])
    assert alive == inst.logical.links and ok
    alive, ok = surviving_logical_subgraph(inst, m, [(6, 3)])
    assert alive == {(1, 2)} and not ok
    alive, ok = surviving_logical_subgraph(inst, m, [(1, 4)])
    assert alive == {(1, 2), (2, 4), (3, 4)} and ok
    alive, ok = surviving_logical_subgraph(inst, m, [(1, 4), (2, 3)])
    assert alive == {(1, 2), (3, 4)} and not ok


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), st.data())
def test_cascade_monotone(seed, data):
    inst = random_instance(seed)
    m = random_mapping(inst, seed)
    links = inst.physical.sorted_links
    small = data.draw(st.sets(st.sampled_from(links)))
    big = small | data.draw(st.sets(st.sampled_from(links)))
    a_small, ok_small = surviving_logical_subgraph(inst, m, small)
    a_big, ok_big = surviving_logical_subgraph(inst, m, big)
    assert a_big <= a_small
    assert ok_small or not ok_big


def test_make_mapping_rejects_foreign_link(fig1):
    inst, _ = fig1
    with pytest.raises(InstanceError):
        make_mapping(inst, {(1, 2): (1, 5, 2), (1, 4): (1, 4)})


def test_with_failure_probs(fig1_inst):
    flat = fig1_inst.with_failure_probs(0.05)
    assert all(flat.rho(e) == 0.05 for e in flat.physical.links)
    assert fig1_inst.rho((1, 4)) == 0.2
