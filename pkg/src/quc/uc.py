"""Unit-commitment objective, exhaustive oracle and priority-list dispatch.

Commitment bits are indexed like the QAOA main register: bit ``t * n + i`` is
generator ``i`` (grid generator order) at timestep ``t``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Mapping, Sequence

import numpy as np

from .grid import BMatrix, Grid, build_b_matrix, injection_vector, solve_dcpf

MAX_BRUTE_BITS = 20


class UCError(ValueError):
    pass


@dataclass(frozen=True)
class GenCost:
    a: float
    b: float
    c: float
    fuel: float = 1.0
    on_cost: float = 0.0
    off_cost: float = 0.0

    def __post_init__(self):
        if any(getattr(self, f.name) < 0 for f in fields(self)):
            raise UCError("generator cost coefficients must be non-negative")

    def marginal(self, p):
        return self.fuel * (self.b + 2.0 * self.c * p)


def prod_cost(gen: GenCost, p: float) -> float:
    return gen.fuel * (gen.a + gen.b * p + gen.c * p * p)


@dataclass(frozen=True, eq=False)
class UCInstance:
    grid: Grid
    gen_costs: tuple[GenCost, ...]
    timesteps: int
    penalty: float

    def __post_init__(self):
        object.__setattr__(self, "gen_costs", tuple(self.gen_costs))
        if self.timesteps < 1:
            raise UCError("need at least one timestep")
        if len(self.gen_costs) != len(self.grid.generators):
            raise UCError("every generator needs a GenCost")
        for ld in self.grid.loads:
            if len(ld.demand) < self.timesteps:
                raise UCError(f"load {ld.id} has fewer demands than timesteps")
        object.__setattr__(self, "_bmat", build_b_matrix(self.grid))

    @property
    def n_gens(self) -> int:
        return len(self.gen_costs)

    @property
    def n_bits(self) -> int:
        return self.n_gens * self.timesteps

    @property
    def bmat(self) -> BMatrix:
        return self._bmat

    def demand(self, t: int) -> float:
        return self.grid.demand(t)

    def bounds(self) -> list[tuple[float, float]]:
        return [(g.p_min, g.p_max) for g in self.grid.generators]

    @classmethod
    def from_dict(cls, data: Mapping, grid: Grid) -> UCInstance:
        costs = []
        for g in grid.generators:
            rec = data["gen_costs"][g.id]
            costs.append(
                GenCost(
                    float(rec["a"]), float(rec["b"]), float(rec["c"]),
                    float(rec.get("fuel", 1.0)),
                    float(rec.get("on_cost", 0.0)), float(rec.get("off_cost", 0.0)),
                )
            )
        return cls(grid, tuple(costs), int(data["timesteps"]), float(data["penalty"]))


@dataclass(frozen=True, eq=False)
class Schedule:
    u: np.ndarray  # [i][t] in {0, 1}
    P: np.ndarray  # [i][t] MW

    def bits(self) -> int:
        n, T = self.u.shape
        return int(sum(int(self.u[i, t]) << (t * n + i) for t in range(T) for i in range(n)))

    def bitstring(self) -> str:
        return format(self.bits(), f"0{self.u.size}b")

    @classmethod
    def from_bits(cls, value: int, P: np.ndarray) -> Schedule:
        P = np.asarray(P, dtype=float)
        n, T = P.shape
        u = np.array([[(value >> (t * n + i)) & 1 for t in range(T)] for i in range(n)], dtype=int)
        return cls(u, P)


@dataclass(frozen=True)
class CostBreakdown:
    prod: float
    start: float
    stop: float
    trans: float
    penalty: float

    @property
    def total(self) -> float:
        return self.prod + self.start + self.stop + self.trans + self.penalty

    def as_dict(self) -> dict[str, float]:
        return {
            "prod": self.prod, "start": self.start, "stop": self.stop,
            "trans": self.trans, "penalty": self.penalty, "total": self.total,
        }


def _check_shape(instance: UCInstance, arr: np.ndarray, what: str):
    if arr.shape != (instance.n_gens, instance.timesteps):
        raise UCError(
            f"{what} has shape {arr.shape}, expected {(instance.n_gens, instance.timesteps)}"
        )


def trans_cost_at(instance: UCInstance, P_t: Sequence[float], active: Sequence[int], t: int) -> float:
    bmat = instance.bmat
    flow = solve_dcpf(bmat, injection_vector(bmat, P_t, t, active))
    return float(np.sum(flow.trans_costs))


def classical_cost(instance: UCInstance, sched: Schedule) -> CostBreakdown:
    u = np.asarray(sched.u, dtype=int)
    P = np.asarray(sched.P, dtype=float)
    _check_shape(instance, u, "commitment matrix")
    _check_shape(instance, P, "power matrix")
    n, T = u.shape
    prod = start = stop = trans = penalty = 0.0
    for t in range(T):
        for i, gc in enumerate(instance.gen_costs):
            prev = u[i, t - 1] if t > 0 else 0  # all generators off before t = 0
            if u[i, t]:
                prod += prod_cost(gc, P[i, t])
            if u[i, t] and not prev:
                start += gc.on_cost
            if prev and not u[i, t]:
                stop += gc.off_cost
        trans += trans_cost_at(instance, P[:, t], u[:, t], t)
        if float(np.dot(u[:, t], P[:, t])) < instance.demand(t):
            penalty += instance.penalty
    return CostBreakdown(prod, start, stop, trans, penalty)


def cost_table(instance: UCInstance, P: np.ndarray) -> dict[str, np.ndarray]:
    """Every cost component for all ``2**(n*T)`` commitment bit patterns.

    Timestep-local terms are tabulated once per ``(t, u_t)`` and then gathered,
    so the DC power flow runs ``T * 2**n`` times rather than ``2**(n*T)``.
    """
    P = np.asarray(P, dtype=float)
    _check_shape(instance, P, "power matrix")
    n, T = P.shape
    if n * T > 26:
        raise UCError("cost table too large")
    local = np.arange(2**n)
    bits = (local[:, None] >> np.arange(n)[None, :]) & 1  # [pattern, i]
    on = np.array([gc.on_cost for gc in instance.gen_costs])
    off = np.array([gc.off_cost for gc in instance.gen_costs])
    values = np.arange(2 ** (n * T))
    out = {k: np.zeros(values.size) for k in ("prod", "start", "stop", "trans", "penalty")}
    prev = np.zeros(values.size, dtype=int)
    for t in range(T):
        pc = np.array([prod_cost(gc, P[i, t]) for i, gc in enumerate(instance.gen_costs)])
        prod_t = bits @ pc
        trans_t = np.array([trans_cost_at(instance, P[:, t], bits[k], t) for k in local])
        pen_t = np.where(bits @ P[:, t] < instance.demand(t), instance.penalty, 0.0)
        cur = (values >> (t * n)) & (2**n - 1)
        out["prod"] += prod_t[cur]
        out["trans"] += trans_t[cur]
        out["penalty"] += pen_t[cur]
        ub, pb = bits[cur], bits[prev]
        out["start"] += ((1 - pb) * ub) @ on
        out["stop"] += (pb * (1 - ub)) @ off
        prev = cur
    out["total"] = out["prod"] + out["start"] + out["stop"] + out["trans"] + out["penalty"]
    return out


def brute_force(instance: UCInstance, P: np.ndarray) -> tuple[Schedule, CostBreakdown]:
    """Cheapest commitment for fixed powers; ties go to the smallest bit value."""
    if instance.n_bits > MAX_BRUTE_BITS:
        raise UCError(f"n*T = {instance.n_bits} exceeds the brute-force limit {MAX_BRUTE_BITS}")
    table = cost_table(instance, P)
    best = int(np.argmin(table["total"]))  # argmin returns the first minimum
    sched = Schedule.from_bits(best, P)
    return sched, classical_cost(instance, sched)


def flapc(gen: GenCost, p_max: float) -> float:
    return prod_cost(gen, p_max) / p_max


def economic_dispatch(
    costs: Sequence[GenCost], bounds: Sequence[tuple[float, float]], demand: float,
    rtol: float = 1e-9,
) -> tuple[np.ndarray, float]:
    """Equal-marginal-cost dispatch by bisection on lambda, clamped to bounds."""

    def output(lam):
        return np.array(
            [
                min(max((lam / gc.fuel - gc.b) / (2 * gc.c) if gc.c > 0 else
                        (hi if lam >= gc.marginal(0) else lo), lo), hi)
                for gc, (lo, hi) in zip(costs, bounds)
            ]
        )

    lo_lam = min(gc.marginal(lo) for gc, (lo, _) in zip(costs, bounds))
    hi_lam = max(gc.marginal(hi) for gc, (_, hi) in zip(costs, bounds))
    if output(lo_lam).sum() >= demand:
        return output(lo_lam), lo_lam
    if output(hi_lam).sum() <= demand:
        return output(hi_lam), hi_lam
    for _ in range(200):
        mid = 0.5 * (lo_lam + hi_lam)
        if output(mid).sum() < demand:
            lo_lam = mid
        else:
            hi_lam = mid
        if hi_lam - lo_lam <= rtol * max(abs(hi_lam), 1.0):
            break
    lam = 0.5 * (lo_lam + hi_lam)
    out = output(lam)
    # put the bisection residual on a unit strictly inside its bounds
    resid = demand - out.sum()
    for k, (lo, hi) in enumerate(bounds):
        if lo < out[k] + resid < hi and lo < out[k] < hi:
            out[k] += resid
            break
    return out, lam


def dispatch_init(instance: UCInstance) -> Schedule:
    """Priority list by full-load average production cost, then lambda dispatch.

    Uncommitted generators are given their output at the system lambda so that
    the QAOA power parameters start inside their bounds.
    """
    gens = instance.grid.generators
    n, T = instance.n_gens, instance.timesteps
    bounds = instance.bounds()
    rank = sorted(range(n), key=lambda i: (flapc(instance.gen_costs[i], gens[i].p_max), i))
    u = np.zeros((n, T), dtype=int)
    P = np.zeros((n, T))
    for t in range(T):
        demand = instance.demand(t)
        if sum(hi for _, hi in bounds) < demand:
            raise UCError(f"timestep {t}: demand {demand} exceeds total capacity")
        committed: list[int] = []
        cap = 0.0
        for i in rank:
            if cap >= demand:
                break
            committed.append(i)
            cap += bounds[i][1]
        committed.sort()
        lam = min(instance.gen_costs[i].marginal(bounds[i][0]) for i in range(n))
        if committed:
            out, lam = economic_dispatch(
                [instance.gen_costs[i] for i in committed], [bounds[i] for i in committed], demand
            )
            for i, p in zip(committed, out):
                u[i, t] = 1
                P[i, t] = p
        for i in range(n):
            if not u[i, t]:
                gc, (lo, hi) = instance.gen_costs[i], bounds[i]
                p = (lam / gc.fuel - gc.b) / (2 * gc.c) if gc.c > 0 else lo
                P[i, t] = min(max(p, lo), hi)
    return Schedule(u, P)
