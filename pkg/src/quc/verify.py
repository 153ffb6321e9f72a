"""Oracle-comparison suites shared by the CLI ``verify`` command and the tests.

Each function returns a flat dict of diagnostics with a boolean ``pass``.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from . import sim
from .grid import solve_dcpf
from .qaoa import AnsatzConfig, layer_budget, layer_diagonal, phase_error
from .qsubs.arith import AdderWeights, weighted_adder
from .qsubs.cosphase import cos_phase_circuit, cos_phase_table
from .qsubs.getdiff import get_diff
from .qsubs.hhl import HHLConfig, hhl_circuit, pad_system, success_branch
from .qsubs.qadc import QADCConfig, amplitude_prep, g_eigencheck, qadc_circuit
from .uc import UCInstance, cost_table


def verify_getdiff(trials: int = 1000, seed: int = 0, widths: Sequence[int] = (3, 4, 5)) -> dict:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.choice(widths))
        vec = rng.normal(size=2**n)
        vec /= np.linalg.norm(vec)
        i, j = rng.choice(2**n, size=2, replace=False)
        out = sim.run(get_diff(sim.Circuit(n, ()), int(i), int(j)), vec.astype(complex))
        worst = max(worst, abs(out[0] - (vec[i] - vec[j]) / math.sqrt(2)))
    return {"trials": trials, "max_error": worst, "pass": worst < 1e-10}


def random_dyadic_weights(rng: np.random.Generator, n: int, width: int) -> AdderWeights:
    """n non-negative m-bit weights whose sum stays below one."""
    scale = 2**width
    while True:
        k = rng.integers(0, scale // max(1, n) + 1, size=n)
        if k.sum() < scale:
            return AdderWeights(tuple(k / scale), width)


def adder_readout(weights: AdderWeights) -> tuple[float, int]:
    """Exhaustive check over all control patterns: (max readout deviation, MSB mismatches)."""
    n, m = len(weights.a), weights.width
    w = n + m
    circ = weighted_adder(weights, list(range(n)), list(range(n, w)), w)
    worst, mismatches = 0.0, 0
    for u in range(2**n):
        out = sim.run(circ, sim.basis_state(w, u))
        total = sum(a for k, a in enumerate(weights.a) if (u >> k) & 1)
        expect = round(total * 2**m) % 2**m
        worst = max(worst, 1.0 - abs(out[u | (expect << n)]) ** 2)
        probs = sim.marginal_probabilities(out, [n + m - 1])
        if (probs[1] > 0.5) != (total >= 0.5):
            mismatches += 1
    return worst, mismatches


def verify_adder(max_controls: int = 6, width: int = 4, sets: int = 5, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    worst, mism, cases = 0.0, 0, 0
    for n in range(1, max_controls + 1):
        for _ in range(sets):
            err, bad = adder_readout(random_dyadic_weights(rng, n, width))
            worst, mism, cases = max(worst, err), mism + bad, cases + 2**n
    return {"cases": cases, "max_readout_error": worst, "msb_mismatches": mism,
            "pass": worst < 1e-10 and mism == 0}


def hhl_solution(matrix: np.ndarray, injections: np.ndarray, k_hhl: int) -> tuple[np.ndarray, HHLConfig]:
    """Success-branch estimate of the angle vector, rescaled to physical units."""
    n = matrix.shape[0]
    A, b = pad_system(matrix, injections / np.linalg.norm(injections))
    cfg = HHLConfig.for_matrix(A, k_hhl, rotation_constant=float(np.linalg.eigvalsh(matrix).min()))
    s = int(math.log2(A.shape[0]))
    system, phase, anc = list(range(s)), list(range(s, s + k_hhl)), s + k_hhl
    state = np.zeros(2 ** (anc + 1), dtype=complex)
    state[: A.shape[0]] = b
    out = sim.run(hhl_circuit(cfg, system, phase, anc, anc + 1), state)
    x = success_branch(out, system, phase, anc)[:n].real
    return x * np.linalg.norm(injections) / cfg.rotation_constant, cfg


def verify_hhl(instance: UCInstance, injections: np.ndarray, ks: Sequence[int] = (6, 7, 8)) -> dict:
    bmat = instance.bmat
    theta = solve_dcpf(bmat, injections).theta
    out: dict = {}
    for k in ks:
        est, _ = hhl_solution(bmat.matrix, injections, k)
        cos = abs(est @ theta) / (np.linalg.norm(est) * np.linalg.norm(theta))
        out[f"cosine_k{k}"] = float(cos)
        out[f"relative_error_k{k}"] = float(np.linalg.norm(theta - est) / np.linalg.norm(theta))
    ok = all(out[f"cosine_k{k}"] >= 0.99 for k in ks)
    if len(ks) > 1:
        ok = ok and out[f"relative_error_k{max(ks)}"] <= out[f"relative_error_k{min(ks)}"]
    out["pass"] = bool(ok)
    return out


def qadc_distribution(a: float, precision: int) -> np.ndarray:
    cfg = QADCConfig(amplitude_prep(a, 1, 2), (0,), 1, tuple(range(2, 2 + precision)), 0)
    circ = qadc_circuit(cfg)
    return sim.marginal_probabilities(sim.run(circ, sim.zero_state(circ.qubit_count)), cfg.phase)


def verify_qadc(a: float, precision: int = 6) -> dict:
    """Two modal outcomes near 2^k arccos(-a)/2pi and its mirror, mass within one step >= 0.8."""
    probs = qadc_distribution(a, precision)
    n = 2**precision
    target = n * math.acos(-a) / (2 * math.pi)
    mirror = n - target
    y = np.arange(n)

    def circ_dist(v):
        d = np.abs(y - v) % n
        return np.minimum(d, n - d)

    near = (circ_dist(target) <= 1) | (circ_dist(mirror) <= 1)
    modes = [int(v) for v in np.argsort(-probs, kind="stable")[:2]]
    mode_ok = all(min(circ_dist(target)[m], circ_dist(mirror)[m]) <= 1 for m in modes)
    mass = float(probs[near].sum())
    return {"a": a, "precision": precision, "target": target, "mirror": mirror, "modes": modes,
            "mode_probability": float(probs[modes].sum()), "window_probability": mass,
            "pass": bool(mode_ok and mass >= 0.8)}


def verify_geigen(a: float) -> dict:
    rep = g_eigencheck(QADCConfig(amplitude_prep(a, 1, 2), (0,), 1, (2,), 0))
    s = math.sqrt(max(0.0, 1 - a * a))
    # <Psi_pm|Psi> in the two-branch basis; (1 -/+ i)/2 at a = 0
    alpha = math.sqrt((1 + a) / 2)
    beta = math.sqrt((1 - a) / 2)
    expect = ((alpha - 1j * beta) / math.sqrt(2), (alpha + 1j * beta) / math.sqrt(2))
    coef_err = max(abs(c - e) for c, e in zip(rep.coefficients, expect))
    mag_err = max(abs(abs(c) - math.sqrt(0.5)) for c in rep.coefficients)
    return {
        "a": a,
        "eigenvalues": [[z.real, z.imag] for z in rep.eigenvalues],
        "predicted": [[-a, s], [-a, -s]],
        "eigenvalue_error": rep.eigenvalue_error,
        "coefficients": [[c.real, c.imag] for c in rep.coefficients],
        "coefficient_error": coef_err,
        "magnitude_error": mag_err,
        "eigenvector_residual": rep.eigvec_residual,
        "pass": bool(
            rep.eigenvalue_error < 1e-8 and coef_err < 1e-8 and mag_err < 1e-8
            and rep.eigvec_residual < 1e-8
        ),
    }


def verify_cosphase(width: int, gamma_prime: float = 1.0) -> dict:
    table = cos_phase_table(gamma_prime, width)
    table_err = float(np.abs(table.reconstruct() - table.target()).max())
    circ = cos_phase_circuit(table, list(range(width)), width)
    state = np.full(2**width, 2 ** (-width / 2), dtype=complex)
    diag = sim.run(circ, state) * 2 ** (width / 2)
    circ_err = float(phase_error(np.angle(diag), table.target()).max())
    return {"width": width, "table_error": table_err, "circuit_error": circ_err,
            "pass": table_err < 1e-9 and circ_err < 1e-9}


def verify_costdiag(
    instance: UCInstance, P: np.ndarray, gamma: float, k_pen: int, k_hhl: int, k_qadc: int,
    faithful: bool = True,
) -> dict:
    total = cost_table(instance, P)["total"]
    target = gamma * total
    oracle = layer_diagonal(instance, P, gamma, AnsatzConfig(backend="diagonal_oracle"))
    oracle_err = float(phase_error(oracle.phases, target).max())
    out = {"gamma": gamma, "oracle_max_error": oracle_err, "oracle_leakage": oracle.leakage}
    ok = oracle_err < 1e-9
    if faithful:
        cfg = AnsatzConfig(backend="faithful_circuit", k_pen=k_pen, k_hhl=k_hhl, k_qadc=k_qadc)
        diag = layer_diagonal(instance, P, gamma, cfg)
        err = phase_error(diag.phases, target)
        budget = layer_budget(instance, P, gamma, cfg)
        out.update(
            faithful_errors=err.tolist(), budget=budget.tolist(),
            faithful_leakage=diag.leakage, within_budget=bool(np.all(err <= budget + 1e-9)),
        )
        ok = ok and out["within_budget"]
    out["pass"] = bool(ok)
    return out
