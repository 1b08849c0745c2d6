import csv
import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xsurv import Budget, load_bundled
from xsurv.experiments import (
    CSV_HEADER,
    gen_random_probs,
    rho_grid,
    rows_to_csv,
    run_sweep,
    uniform_scenario,
)


def test_grid_inclusive():
    g = rho_grid(0.15, 0.0, 0.005)
    assert len(g) == 31
    assert g[0] == 0.15 and g[-1] == 0.0 and g[10] == 0.1
    assert rho_grid(0.0, 0.1, 0.05) == [0.0, 0.05, 0.1]
    with pytest.raises(ValueError):
        rho_grid(0, 1, 0)


def test_uniform_scenario(fig1_inst):
    s = uniform_scenario(fig1_inst, 0.1)
    assert set(s.prob.values()) == {0.1}
    with pytest.raises(ValueError):
        uniform_scenario(fig1_inst, 1.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 0.5), st.floats(0.001, 0.3), st.integers(0, 2**32))
def test_random_probs_contract(mean, sd, seed):
    inst, _ = load_bundled("nsf-ln2")
    s = gen_random_probs(inst, mean, sd, seed)
    assert set(s.prob) == set(inst.physical.links)
    assert all(0.0 < p < 1.0 for p in s.prob.values())
    assert gen_random_probs(inst, mean, sd, seed).prob == s.prob


def test_random_probs_distribution():
    inst, _ = load_bundled("nsf-ln2")
    vals = [p for r in range(200) for p in gen_random_probs(inst, 0.1, 0.02, r).prob.values()]
    mean = sum(vals) / len(vals)
    sd = (sum((v - mean) ** 2 for v in vals) / len(vals)) ** 0.5
    assert mean == pytest.approx(0.1, abs=0.003)
    assert sd == pytest.approx(0.02, abs=0.002)


def test_random_probs_zero_sd(fig1_inst):
    assert set(gen_random_probs(fig1_inst, 0.1, 0.0, 1).prob.values()) == {0.1}
    with pytest.raises(ValueError):
        gen_random_probs(fig1_inst, 0.0, 0.0, 1)


def test_fig1_uniform_rows(fig1_inst):
    rows = run_sweep(fig1_inst, [0.0, 0.1], mode="uniform")
    assert [r.scenario for r in rows] == ["uniform:0", "uniform:1"]
    zero, tenth = rows
    assert zero.base_phi == 1.0 and zero.maxtree_phi == 1.0 and zero.ratio == 1.0
    assert tenth.base_phi == pytest.approx(0.81)
    assert tenth.maxtree_phi == pytest.approx(0.6561)
    assert tenth.num_unprotected == 2
    assert tenth.solve_ms is None and tenth.status == "ok"


def test_random_rows_and_mean(fig1_inst):
    rows = run_sweep(fig1_inst, [0.1], mode="random", replicates=3, seed=5)
    assert [r.replicate for r in rows] == [0, 1, 2, "mean"]
    ok = rows[:3]
    assert rows[3].base_phi == pytest.approx(sum(r.base_phi for r in ok) / 3)
    for r in rows:
        assert r.maxtree_phi <= r.base_phi + 1e-12


def test_csv_format_deterministic(fig1_inst):
    a = rows_to_csv(run_sweep(fig1_inst, rho_grid(0.1, 0.0, 0.05), mode="random", replicates=2))
    b = rows_to_csv(run_sweep(fig1_inst, rho_grid(0.1, 0.0, 0.05), mode="random", replicates=2))
    assert a == b
    reader = list(csv.reader(io.StringIO(a)))
    assert tuple(reader[0]) == CSV_HEADER
    assert len(reader) == 1 + 3 * 3
    assert all(row[7] == "" for row in reader[1:])


def test_timing_fills_column(fig1_inst):
    rows = run_sweep(fig1_inst, [0.1], mode="uniform", timing=True)
    assert rows[0].solve_ms is not None and rows[0].solve_ms >= 0


def test_budget_marks_rows(fig1_inst):
    rows = run_sweep(fig1_inst, [0.1, 0.05], mode="uniform", budget=Budget(max_nodes=1))
    assert [r.status for r in rows] == ["budget", "budget"]
    assert rows_to_csv(rows).splitlines()[1].endswith(",budget")


def test_unknown_mode(fig1_inst):
    with pytest.raises(ValueError):
        run_sweep(fig1_inst, [0.1], mode="sinusoidal")
