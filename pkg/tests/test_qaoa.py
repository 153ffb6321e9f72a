import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from quc import sim
from quc.grid import Grid, Line, Node
from quc.layout import allocate
from quc.qaoa import (
    AnsatzConfig, BudgetError, QAOAParams, build_ansatz, cost_layer, exact_expected_cost,
    expected_cost, gamma_scale, layer_budget, layer_diagonal, mixer_layer, optimize,
    _prod_start_stop, phase_error, width_depth_report,
)
from quc.uc import GenCost, Schedule, UCInstance, brute_force, classical_cost, cost_table, dispatch_init

ORACLE = AnsatzConfig(backend="diagonal_oracle")
TOY_P = np.array([[200.0], [200.0]])


def one_gen(T=1, penalty=1e6, on=0.0, off=0.0, c=0.01, demand=50.0):
    grid = Grid(
        (Node("g", "generator", 10, 100), Node("l", "load", demand=(demand,) * T)),
        (Line("g", "l", 1.0, 0.0),),
    )
    return UCInstance(grid, (GenCost(1.0, 2.0, c, 1.0, on, off),), T, penalty)


# --- mixer ------------------------------------------------------------------

def test_mixer_zero_is_identity():
    assert np.allclose(sim.circuit_unitary(mixer_layer(0.0, [0, 1])), np.eye(4))


def test_mixer_pi_flips_all_qubits():
    out = sim.run(mixer_layer(math.pi, [0, 1, 2]), sim.zero_state(3))
    assert abs(out[7]) == pytest.approx(1.0)


def test_mixer_matches_rx_matrix():
    b = math.pi / 2
    rx = np.array([[math.cos(b / 2), -1j * math.sin(b / 2)], [-1j * math.sin(b / 2), math.cos(b / 2)]])
    assert np.allclose(sim.circuit_unitary(mixer_layer(b, [0])), rx)


# --- cost layer -------------------------------------------------------------

def test_gamma_zero_is_identity(toy2):
    params = QAOAParams([0.0], [0.0], dispatch_init(toy2).P)
    U = sim.circuit_unitary(cost_layer(toy2, params, 0, ORACLE))
    assert np.allclose(U, np.eye(16))


@given(st.floats(-1e-3, 1e-3))
def test_oracle_diagonal_is_exact(toy2, gamma):
    P = dispatch_init(toy2).P
    diag = layer_diagonal(toy2, P, gamma, ORACLE)
    assert phase_error(diag.phases, gamma * cost_table(toy2, P)["total"]).max() < 1e-9
    assert diag.leakage < 1e-12


def test_start_stop_gates_match_classical_cost():
    # only start/stop costs: zero production and no transmission tariff
    grid = one_gen(T=2).grid
    inst = UCInstance(grid, (GenCost(0.0, 0.0, 0.0, 1.0, 3.0, 2.0),), 2, 0.0)
    P = np.full((1, 2), 50.0)
    gamma = 0.21
    lay = allocate(1, 2)
    circ = sim.Circuit(2, tuple(_prod_start_stop(inst, P, gamma, lay)))
    U = sim.circuit_unitary(circ)
    table = cost_table(inst, P)["total"]
    assert np.allclose(np.diag(U), np.exp(1j * gamma * table))
    # u = (0, 1): off at t=0, on at t=1 pays one start
    assert table[0b10] == 3.0 and table[0b01] == 3.0 + 2.0


def test_faithful_layer_within_budget_small(toy):
    # small registers keep this fast; the acceptance suite runs k_hhl = k_qadc = 5
    cfg = AnsatzConfig(backend="faithful_circuit", k_pen=2, k_hhl=3, k_qadc=3)
    gamma = 1e-5
    diag = layer_diagonal(toy, TOY_P, gamma, cfg)
    err = phase_error(diag.phases, gamma * cost_table(toy, TOY_P)["total"])
    budget = layer_budget(toy, TOY_P, gamma, cfg)
    assert np.all(budget < 1.0)
    assert np.all(err <= budget + 1e-9)


def test_budget_shrinks_with_gamma(toy):
    cfg = AnsatzConfig(backend="faithful_circuit", k_pen=3, k_hhl=5, k_qadc=5)
    small = layer_budget(toy, TOY_P, 1e-6, cfg)
    large = layer_budget(toy, TOY_P, 1e-5, cfg)
    assert np.all(small < large)


def test_faithful_budget_refusal(appendix):
    cfg = AnsatzConfig(backend="faithful_circuit", k_pen=5, k_hhl=7, k_qadc=6, qubit_cap=26)
    params = QAOAParams([0.1], [0.1], dispatch_init(appendix).P)
    with pytest.raises(BudgetError, match="31 qubits"):
        build_ansatz(appendix, params, cfg)


def test_qubit_cap_from_environment(monkeypatch):
    monkeypatch.setenv("QUC_QUBIT_CAP", "12")
    assert AnsatzConfig().qubit_cap == 12


@pytest.mark.parametrize("kwargs", [{"layers": -1}, {"backend": "x"}, {"shots": 0},
                                    {"backend": "faithful_circuit", "k_qadc": 1}])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        AnsatzConfig(**kwargs)


def test_params_validation(toy):
    with pytest.raises(ValueError):
        QAOAParams([0.1, 0.2], [0.1], TOY_P)
    with pytest.raises(ValueError):
        QAOAParams([0.1], [0.1], np.array([[500.0], [200.0]])).check_bounds(toy)


# --- expectation --------------------------------------------------------------

def test_zero_layers_is_uniform(toy2):
    P = dispatch_init(toy2).P
    params = QAOAParams(np.zeros(0), np.zeros(0), P)
    cfg = AnsatzConfig(layers=0, shots=20000, seed=3)
    value, hist = expected_cost(toy2, params, cfg)
    total = cost_table(toy2, P)["total"]
    assert exact_expected_cost(toy2, params, cfg) == pytest.approx(total.mean())
    assert value == pytest.approx(total.mean(), rel=0.02)
    assert len(hist) == 16


def test_sampled_expectation_converges_to_exact(toy):
    params = QAOAParams([3e-4], [0.7], TOY_P)
    exact = exact_expected_cost(toy, params, ORACLE)
    errs = []
    for shots in (100, 1600, 25600):
        trials = [
            expected_cost(toy, params, AnsatzConfig(shots=shots), seed=s)[0] - exact for s in range(30)
        ]
        errs.append(np.sqrt(np.mean(np.square(trials))))
    # 16x more shots should cut the rms error by about 4
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.5)
    assert errs[1] / errs[2] == pytest.approx(4, rel=0.5)


def test_exact_expectation_oracle(toy):
    params = QAOAParams([3e-4], [0.7], TOY_P)
    lay = allocate(2, 1)
    circ = build_ansatz(toy, params, ORACLE)
    probs = np.abs(sim.run(circ, sim.zero_state(lay.width))) ** 2
    ref = float(probs @ cost_table(toy, TOY_P)["total"])
    assert exact_expected_cost(toy, params, ORACLE) == pytest.approx(ref, rel=1e-12)


def test_expected_cost_is_seeded(toy2):
    params = QAOAParams([1e-4], [0.3], dispatch_init(toy2).P)
    cfg = AnsatzConfig(shots=100, seed=5)
    assert expected_cost(toy2, params, cfg) == expected_cost(toy2, params, cfg)


def test_penalty_dominates_expectation(toy):
    params = QAOAParams(np.zeros(0), np.zeros(0), TOY_P)
    cfg = AnsatzConfig(layers=0, shots=4000)
    low = exact_expected_cost(toy, params, cfg)
    big = UCInstance(toy.grid, toy.gen_costs, 1, toy.penalty * 100)
    assert exact_expected_cost(big, params, cfg) > low


# --- optimiser ----------------------------------------------------------------

def test_optimizer_single_generator_turns_on():
    inst = one_gen(penalty=1e6)
    wins = 0
    for seed in range(20):
        rep = optimize(inst, AnsatzConfig(layers=1, shots=64, seed=seed), budget=30)
        wins += rep.best_bitstring == "1"
    assert wins >= 19


def test_optimizer_zero_penalty_keeps_generator_off():
    # zero tariff and no penalty: any commitment only adds production cost
    inst = one_gen(penalty=0.0)
    wins = sum(
        optimize(inst, AnsatzConfig(layers=1, shots=64, seed=s), budget=30).best_bitstring == "0"
        for s in range(20)
    )
    assert wins >= 19


def test_report_cost_matches_classical(toy2):
    rep = optimize(toy2, AnsatzConfig(layers=2, shots=128, seed=4), budget=40)
    sched = Schedule.from_bits(int(rep.best_bitstring, 2), rep.best_P)
    assert classical_cost(toy2, sched).total == pytest.approx(rep.best_cost.total)
    assert rep.evaluations == len(rep.trace) <= 40
    assert rep.params.P.shape == (2, 2)


def test_optimizer_is_deterministic(toy2):
    cfg = AnsatzConfig(layers=2, shots=128, seed=11)
    a = optimize(toy2, cfg, budget=30).to_dict()
    b = optimize(toy2, cfg, budget=30).to_dict()
    assert a == b


def test_optimizer_near_brute_force(toy2):
    _, best = brute_force(toy2, dispatch_init(toy2).P)
    rep = optimize(toy2, AnsatzConfig(layers=2, shots=256, seed=0), budget=60)
    assert rep.best_cost.total <= 1.05 * best.total


def test_gamma_scale_ignores_penalty(toy2):
    P = dispatch_init(toy2).P
    table = cost_table(toy2, P)
    feasible = table["total"][table["penalty"] == 0]
    assert gamma_scale(toy2, P) == pytest.approx(feasible.max() - feasible.min())


# --- width and depth ------------------------------------------------------------

def test_width_matches_formula(appendix):
    cfg = AnsatzConfig(backend="faithful_circuit", k_pen=5, k_hhl=7, k_qadc=6)
    lay = allocate(3, 2, 5, 5, 7, 6)
    assert lay.width == 3 * 2 + 3 + 7 + 6 + 5 + 4
    rep = width_depth_report(appendix, cfg)
    assert rep.width == rep.width_formula == lay.width
    assert rep.layer_depth > 0 and rep.layer_gates >= rep.layer_depth


@given(st.integers(1, 4), st.integers(1, 4), st.integers(2, 9))
def test_doubling_horizon_adds_only_main_qubits(n, T, m):
    a = allocate(n, T, m, 3, 4, 5)
    b = allocate(n, 2 * T, m, 3, 4, 5)
    assert b.width - a.width == n * T


def test_width_report_needs_faithful(toy):
    with pytest.raises(ValueError):
        width_depth_report(toy, ORACLE)
