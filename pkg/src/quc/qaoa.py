"""QAOA ansatz assembly, sampled cost evaluation and the parameter search.

The cost layer applies ``e^{+i gamma cost(u)}`` to every commitment pattern
``u``. Two backends build it: ``faithful_circuit`` composes the gate-level
production, start/stop, penalty and transmission blocks (with ancillas), while
``diagonal_oracle`` writes the exact classical cost as one diagonal gate on
the main register.
"""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import sim
from .layout import Layout, allocate
from .qsubs.arith import penalty_layer
from .qsubs.trans import cost_layer_budget, u_trans
from .uc import CostBreakdown, Schedule, UCInstance, classical_cost, cost_table, dispatch_init, prod_cost

BACKENDS = ("faithful_circuit", "diagonal_oracle")
DEFAULT_QUBIT_CAP = 26


class BudgetError(RuntimeError):
    """The requested circuit does not fit the simulator qubit budget."""


def _default_cap() -> int:
    return int(os.environ.get("QUC_QUBIT_CAP", DEFAULT_QUBIT_CAP))


@dataclass(frozen=True)
class AnsatzConfig:
    layers: int = 1
    backend: str = "diagonal_oracle"
    k_pen: int = 3
    k_hhl: int = 5
    k_qadc: int = 5
    shots: int = 1024
    seed: int = 0
    qubit_cap: int = field(default_factory=_default_cap)

    def __post_init__(self):
        if self.layers < 0:
            raise ValueError("layers must be >= 0")
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.backend == "faithful_circuit":
            if self.k_pen < 1 or self.k_hhl < 1 or self.k_qadc < 2:
                raise ValueError("faithful backend needs k_pen >= 1, k_hhl >= 1, k_qadc >= 2")

    @property
    def faithful(self) -> bool:
        return self.backend == "faithful_circuit"


@dataclass(frozen=True, eq=False)
class QAOAParams:
    gammas: np.ndarray
    betas: np.ndarray
    P: np.ndarray  # [i][t] MW

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.gammas, dtype=float))
        b = np.atleast_1d(np.asarray(self.betas, dtype=float))
        if g.shape != b.shape or g.ndim != 1:
            raise ValueError("gammas and betas must be vectors of equal length")
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "betas", b)
        object.__setattr__(self, "P", np.asarray(self.P, dtype=float))

    @property
    def layers(self) -> int:
        return self.gammas.size

    def check_bounds(self, instance: UCInstance) -> None:
        for i, (lo, hi) in enumerate(instance.bounds()):
            row = self.P[i]
            if np.any(row < lo - 1e-9) or np.any(row > hi + 1e-9):
                raise ValueError(f"P[{i}] outside [{lo}, {hi}]")

    def to_dict(self) -> dict:
        return {"gammas": self.gammas.tolist(), "betas": self.betas.tolist(), "P": self.P.tolist()}


@dataclass
class RunReport:
    best_bitstring: str
    best_cost: CostBreakdown
    best_P: np.ndarray
    params: QAOAParams
    trace: list[tuple[int, float]]
    width: int
    depth: int
    evaluations: int
    converged: bool
    histogram: dict[str, int]
    gamma_scale: float

    def to_dict(self) -> dict:
        return {
            "best_bitstring": self.best_bitstring,
            "best_cost": self.best_cost.as_dict(),
            "best_P": self.best_P.tolist(),
            "params": self.params.to_dict(),
            "gamma_scale": self.gamma_scale,
            "width": self.width,
            "depth": self.depth,
            "evaluations": self.evaluations,
            "converged": self.converged,
            "trace": [list(row) for row in self.trace],
            "histogram": dict(sorted(self.histogram.items())),
        }


# --- circuit assembly ------------------------------------------------------

def layout_for(instance: UCInstance, config: AnsatzConfig) -> Layout:
    n, T = instance.n_gens, instance.timesteps
    if not config.faithful:
        return allocate(n, T)
    return allocate(
        n, T, len(instance.bmat.order), config.k_pen, config.k_hhl, config.k_qadc
    )


def check_budget(instance: UCInstance, config: AnsatzConfig) -> Layout:
    lay = layout_for(instance, config)
    if lay.width > config.qubit_cap:
        acct = ", ".join(f"{k}={len(v)}" for k, v in lay.registers().items())
        raise BudgetError(
            f"circuit needs {lay.width} qubits, cap is {config.qubit_cap} ({acct})"
        )
    return lay


def mixer_layer(beta: float, main_reg, qubit_count: int | None = None) -> sim.Circuit:
    main_reg = list(main_reg)
    width = qubit_count if qubit_count is not None else max(main_reg, default=-1) + 1
    return sim.Circuit(width, tuple(sim.rx(beta, q) for q in main_reg))


def _prod_start_stop(instance: UCInstance, P: np.ndarray, gamma: float, lay: Layout) -> list[sim.Gate]:
    ops: list[sim.Gate] = []
    for t in range(instance.timesteps):
        cur = lay.main_at(t)
        for i, gc in enumerate(instance.gen_costs):
            ops.append(sim.phase(gamma * prod_cost(gc, P[i, t]), cur[i]))
    for t in range(instance.timesteps):
        cur = lay.main_at(t)
        for i, gc in enumerate(instance.gen_costs):
            if t == 0:
                # everything is off before the horizon, so u = 1 at t = 0 is a start
                if gc.on_cost:
                    ops.append(sim.phase(gamma * gc.on_cost, cur[i]))
                continue
            prev = lay.main_at(t - 1)[i]
            if gc.on_cost:
                ops += [sim.x(prev), sim.cphase(gamma * gc.on_cost, prev, cur[i]), sim.x(prev)]
            if gc.off_cost:
                ops += [sim.x(cur[i]), sim.cphase(gamma * gc.off_cost, prev, cur[i]), sim.x(cur[i])]
    return ops


def cost_layer(
    instance: UCInstance, params: QAOAParams, gamma_index: int, config: AnsatzConfig,
    layout: Layout | None = None,
) -> sim.Circuit:
    gamma = float(params.gammas[gamma_index])
    P = params.P
    lay = layout if layout is not None else check_budget(instance, config)
    w = lay.width
    if not config.faithful:
        total = cost_table(instance, P)["total"]
        return sim.Circuit(w, (sim.diagonal(np.exp(1j * gamma * total), lay.main),))
    ops = _prod_start_stop(instance, P, gamma, lay)
    for t in range(instance.timesteps):
        main_t = lay.main_at(t)
        ops += penalty_layer(instance, P, t, gamma, main_t, lay.pen, w).ops
        # the adder marks the satisfied branch; shift so the penalty lands on the rest
        ops += sim.global_phase(gamma * instance.penalty, main_t[0])
        for line in range(len(instance.grid.lines)):
            ops += u_trans(instance, P, line, t, gamma, lay, config.k_hhl, config.k_qadc).ops
    return sim.Circuit(w, tuple(ops))


def build_ansatz(instance: UCInstance, params: QAOAParams, config: AnsatzConfig) -> sim.Circuit:
    """Hadamards on the main register, then ``p`` cost/mixer alternations."""
    lay = check_budget(instance, config)
    w = lay.width
    ops = [sim.h(q) for q in lay.main]
    for k in range(params.layers):
        ops += cost_layer(instance, params, k, config, lay).ops
        ops += mixer_layer(params.betas[k], lay.main, w).ops
    return sim.Circuit(w, tuple(ops), {"layout": lay})


def run_ansatz(instance: UCInstance, params: QAOAParams, config: AnsatzConfig) -> tuple[np.ndarray, Layout]:
    circ = build_ansatz(instance, params, config)
    lay = circ.meta["layout"]
    return sim.run(circ, sim.zero_state(lay.width), copy=False), lay


def main_distribution(instance: UCInstance, params: QAOAParams, config: AnsatzConfig) -> np.ndarray:
    """Exact probability of every commitment pattern (index = bit value)."""
    state, lay = run_ansatz(instance, params, config)
    probs = sim.marginal_probabilities(state, lay.main)
    return probs / probs.sum()


@dataclass
class LayerDiagonal:
    amplitudes: np.ndarray  # <u,0|U_C|u,0> per bit value u
    phases: np.ndarray
    leakage: float  # weight that left the |u>|0_anc> subspace


def layer_diagonal(
    instance: UCInstance, P: np.ndarray, gamma: float, config: AnsatzConfig
) -> LayerDiagonal:
    """Diagonal of one cost layer from a single run on the uniform main superposition.

    The main register only ever acts as a control (or inside X-conjugated
    pairs), so the layer is block diagonal in ``u`` and the component on
    ``|u>|0_anc>`` is ``2^{-nT/2} <0|V_u|0>``.
    """
    params = QAOAParams([gamma], [0.0], P)
    lay = check_budget(instance, config)
    circ = cost_layer(instance, params, 0, config, lay)
    n_main = len(lay.main)
    state = sim.zero_state(lay.width)
    state[: 2**n_main] = 2 ** (-n_main / 2)  # main occupies the low qubits
    state = sim.run(circ, state, copy=False)
    amps = state[: 2**n_main] * 2 ** (n_main / 2)
    leak = float(max(0.0, 1.0 - np.sum(np.abs(amps) ** 2) / 2**n_main))
    return LayerDiagonal(amps, np.angle(amps), leak)


def phase_error(phases: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Wrapped distance on the circle, in [0, pi]."""
    d = np.mod(np.asarray(phases) - np.asarray(target) + np.pi, 2 * np.pi) - np.pi
    return np.abs(d)


def layer_budget(instance: UCInstance, P: np.ndarray, gamma: float, config: AnsatzConfig) -> np.ndarray:
    """Per-pattern phase-error bound of the faithful cost layer (see qsubs.trans)."""
    n, T = instance.n_gens, instance.timesteps
    out = np.empty(2 ** (n * T))
    for v in range(out.size):
        u = Schedule.from_bits(v, P).u
        out[v] = cost_layer_budget(instance, P, u, gamma, config.k_pen, config.k_hhl, config.k_qadc)
    return out


# --- evaluation ------------------------------------------------------------

def histogram_cost(instance: UCInstance, P: np.ndarray, hist: dict[str, int]) -> float:
    total = cost_table(instance, P)["total"]
    shots = sum(hist.values())
    return float(sum(c * total[int(b, 2)] for b, c in hist.items()) / shots)


def expected_cost(
    instance: UCInstance, params: QAOAParams, config: AnsatzConfig, seed: int | None = None
) -> tuple[float, dict[str, int]]:
    """Mean classical cost over ``config.shots`` sampled commitment patterns."""
    params.check_bounds(instance)
    state, lay = run_ansatz(instance, params, config)
    hist = sim.sample(state, lay.main, config.shots, config.seed if seed is None else seed)
    return histogram_cost(instance, params.P, hist), hist


def exact_expected_cost(instance: UCInstance, params: QAOAParams, config: AnsatzConfig) -> float:
    probs = main_distribution(instance, params, config)
    return float(probs @ cost_table(instance, params.P)["total"])


# --- optimisation ----------------------------------------------------------

def gamma_scale(instance: UCInstance, P: np.ndarray) -> float:
    """Cost spread used to make gamma dimensionless.

    Penalty-free patterns set the scale when there are any, so the penalty
    does not flatten the phases of the costs that matter.
    """
    table = cost_table(instance, P)
    total = table["total"]
    feasible = total[table["penalty"] == 0]
    ref = feasible if feasible.size > 1 else total
    spread = float(ref.max() - ref.min())
    return spread if spread > 0 else max(1.0, float(abs(ref.max())))


@dataclass
class _Tracker:
    instance: UCInstance
    trace: list = field(default_factory=list)
    best_cost: float = math.inf
    best_bits: str = ""
    best_P: np.ndarray | None = None
    best_params: QAOAParams | None = None
    best_value: float = math.inf
    best_hist: dict = field(default_factory=dict)

    def record(self, params: QAOAParams, value: float, hist: dict[str, int]):
        self.trace.append((len(self.trace), value))
        total = cost_table(self.instance, params.P)["total"]
        # lowest cost first, then the smaller bit value, so ties resolve deterministically
        bits = min(hist, key=lambda b: (total[int(b, 2)], int(b, 2)))
        if total[int(bits, 2)] < self.best_cost:
            self.best_cost = float(total[int(bits, 2)])
            self.best_bits = bits
            self.best_P = params.P.copy()
        if value < self.best_value:
            self.best_value = value
            self.best_params = params
            self.best_hist = hist


def optimize(instance: UCInstance, config: AnsatzConfig, budget: int = 200, restarts: int = 2) -> RunReport:
    """Nelder-Mead over (gamma, beta, P) with box bounds and seeded restarts.

    gamma is searched in units of 1 / gamma_scale; P enters normalised to its
    generator bounds. ``budget`` counts expected-cost evaluations over all
    restarts.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    lay = check_budget(instance, config)
    n, T, p = instance.n_gens, instance.timesteps, config.layers
    lo = np.array([b[0] for b in instance.bounds()])[:, None] * np.ones((1, T))
    hi = np.array([b[1] for b in instance.bounds()])[:, None] * np.ones((1, T))
    span = np.where(hi > lo, hi - lo, 1.0)
    P0 = np.clip(dispatch_init(instance).P, lo, hi)
    scale = gamma_scale(instance, P0)
    rng = np.random.default_rng(config.seed)
    tracker = _Tracker(instance)
    sample_seed = int(rng.integers(2**31))

    def unpack(x: np.ndarray) -> QAOAParams:
        x = np.asarray(x, dtype=float)
        g, b = x[:p] / scale, x[p : 2 * p]
        P = lo + np.clip(x[2 * p :].reshape(n, T), 0.0, 1.0) * span
        return QAOAParams(g, b, P)

    def objective(x: np.ndarray) -> float:
        params = unpack(x)
        value, hist = expected_cost(instance, params, config, seed=sample_seed)
        tracker.record(params, value, hist)
        return value

    bounds = [(-math.pi, math.pi)] * (2 * p) + [(0.0, 1.0)] * (n * T)
    converged = False
    per_run = max(1, budget // max(1, restarts))
    for _ in range(max(1, restarts)):
        left = budget - len(tracker.trace)
        if left <= 0:
            break
        angles = rng.uniform(0.0, math.pi / 2, size=2 * p)
        # later restarts start from the best powers seen so far
        P_start = P0 if tracker.best_params is None else tracker.best_params.P
        x0 = np.concatenate([angles, ((P_start - lo) / span).ravel()])
        res = minimize(
            objective, x0, method="Nelder-Mead", bounds=bounds,
            options={"maxfev": min(per_run, left), "xatol": 1e-4, "fatol": 1e-6},
        )
        converged = converged or bool(res.success)

    sched = Schedule.from_bits(int(tracker.best_bits, 2), tracker.best_P)
    breakdown = classical_cost(instance, sched)
    final = tracker.best_params
    circ_depth = build_ansatz(instance, final, config).depth() if not config.faithful else -1
    return RunReport(
        tracker.best_bits, breakdown, tracker.best_P, final, tracker.trace, lay.width,
        circ_depth, len(tracker.trace), converged, tracker.best_hist, scale,
    )


# --- reporting -------------------------------------------------------------

@dataclass(frozen=True)
class WidthDepth:
    width: int
    width_formula: int
    layer_depth: int
    layer_gates: int
    gate_counts: dict
    scaling_term: int  # k_pen T + n T (n + log m + k_hhl + k_qadc), no constant
    registers: dict

    def to_dict(self) -> dict:
        return asdict(self)


def width_depth_report(instance: UCInstance, config: AnsatzConfig, P: np.ndarray | None = None) -> WidthDepth:
    """Qubit count and gate-layer depth of one faithful QAOA layer (no simulation)."""
    if not config.faithful:
        raise ValueError("width/depth report needs the faithful_circuit backend")
    n, T = instance.n_gens, instance.timesteps
    m = len(instance.bmat.order)
    lay = layout_for(instance, config)
    P = dispatch_init(instance).P if P is None else np.asarray(P, dtype=float)
    params = QAOAParams([0.1], [0.1], P)
    log_m = math.ceil(math.log2(m))
    formula = n * T + log_m + config.k_hhl + config.k_qadc + config.k_pen + 4
    frontier = [0] * lay.width
    depth = 0
    counts: dict[str, int] = {}
    gates = 0

    def consume(ops):
        nonlocal depth, gates
        depth = sim.depth_of(ops, lay.width, frontier)
        gates += len(ops)
        for g in ops:
            counts[g.kind] = counts.get(g.kind, 0) + 1

    consume(_prod_start_stop(instance, P, 0.1, lay))
    for t in range(T):
        consume(penalty_layer(instance, P, t, 0.1, lay.main_at(t), lay.pen, lay.width).ops)
        consume(sim.global_phase(0.1 * instance.penalty, lay.main_at(t)[0]))
        for line in range(len(instance.grid.lines)):
            consume(u_trans(instance, P, line, t, 0.1, lay, config.k_hhl, config.k_qadc).ops)
    consume(mixer_layer(params.betas[0], lay.main, lay.width).ops)
    scaling = config.k_pen * T + n * T * (n + log_m + config.k_hhl + config.k_qadc)
    regs = {k: len(v) for k, v in lay.registers().items()}
    return WidthDepth(lay.width, formula, depth, gates, dict(sorted(counts.items())), scaling, regs)
