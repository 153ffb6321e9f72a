"""Transmission-cost phase oracle for one line at one timestep.

Composition: injection prep -> HHL -> success flag to |0> -> GetDiff gives a
prep circuit whose amplitude 0 is ``a = C (theta_i - theta_j) / (sqrt2 r)``.
Real-QADC writes arccos(-a) into a register, a |cos| diagonal with
``gamma' = gamma C_L |B_ij| sqrt2 r / C`` turns it into the phase
``gamma C_L |P_ij|``, and the inverse QADC clears the register.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .. import sim
from ..grid import injection_vector, solve_dcpf
from ..layout import Layout
from ..uc import UCInstance
from .arith import penalty_weights
from .cosphase import cos_phase_circuit, cos_phase_table
from .getdiff import get_diff
from .hhl import HHLConfig, effective_solution, hhl_circuit, pad_system, qpe_distribution
from .prep import injections_all_on, prep_power_state
from .qadc import QADCConfig, qadc_circuit, readout_distribution


@dataclass(frozen=True)
class TransProvenance:
    line: int
    t: int
    norm: float  # r
    rotation_constant: float  # C
    amplitude_scale: float  # C / (sqrt2 r): encoded amplitude per unit angle difference
    gamma_prime: float


def hhl_config_for(instance: UCInstance, k_hhl: int) -> HHLConfig:
    mat = instance.bmat.matrix
    return _hhl_config(mat.tobytes(), mat.shape[0], k_hhl)


@lru_cache(maxsize=32)
def _hhl_config(raw: bytes, n: int, k_hhl: int) -> HHLConfig:
    mat = np.frombuffer(raw).reshape(n, n)
    cfg = HHLConfig.for_matrix(pad_system(mat), k_hhl)
    # C from the unpadded system; padding rows sit at eigenvalue 1 with zero weight
    return HHLConfig(cfg.matrix, cfg.evolution_time, k_hhl, float(np.linalg.eigvalsh(mat).min()))


def provenance(
    instance: UCInstance, P: np.ndarray, line: int, t: int, gamma: float, cfg: HHLConfig
) -> TransProvenance:
    ln = instance.grid.lines[line]
    r = float(np.linalg.norm(injections_all_on(instance, P, t, cfg.size)))
    C = cfg.rotation_constant
    scale = C / (math.sqrt(2) * r)
    return TransProvenance(line, t, r, C, scale, gamma * ln.tariff * ln.susceptance / scale)


def trans_prep_circuit(
    instance: UCInstance, P: np.ndarray, line: int, t: int, layout: Layout, cfg: HHLConfig
) -> sim.Circuit:
    w = layout.width
    ln = instance.grid.lines[line]
    prep = prep_power_state(
        instance, P, t, layout.main_at(t), layout.hhl_vec, layout.prep_b, layout.prep_c, w
    )
    hhl = hhl_circuit(cfg, layout.hhl_vec, layout.hhl_phase, layout.hhl_anc, w)
    body = sim.compose(prep, hhl, sim.Circuit(w, (sim.x(layout.hhl_anc),)))
    i, j = instance.bmat.position(ln.a), instance.bmat.position(ln.b)
    return get_diff(body, i, j, layout.hhl_vec)


def u_trans(
    instance: UCInstance, P: np.ndarray, line: int, t: int, gamma: float,
    layout: Layout, k_hhl: int | None = None, k_qadc: int | None = None,
) -> sim.Circuit:
    """Diagonal on the main register: e^{i gamma C_L |P_line(u_t)|} up to QADC/HHL error."""
    k_hhl = k_hhl if k_hhl is not None else len(layout.hhl_phase)
    k_qadc = k_qadc if k_qadc is not None else len(layout.qadc_phase)
    if k_hhl != len(layout.hhl_phase) or k_qadc != len(layout.qadc_phase):
        raise ValueError("layout registers do not match k_hhl / k_qadc")
    cfg = hhl_config_for(instance, k_hhl)
    prov = provenance(instance, P, line, t, gamma, cfg)
    prep = trans_prep_circuit(instance, P, line, t, layout, cfg)
    qcfg = QADCConfig(prep, layout.data, layout.qadc_b, layout.qadc_phase, 0, layout.width)
    qadc = qadc_circuit(qcfg)
    phase = cos_phase_circuit(cos_phase_table(prov.gamma_prime, k_qadc), layout.qadc_phase, layout.width)
    circ = sim.compose(qadc, phase, sim.inverse(qadc))
    return circ.with_meta(provenance=prov)


# --- error model -----------------------------------------------------------

def _unit_phasor_gap(z: complex, phi: float) -> float:
    """Norm of V|0> - e^{i phi}|0> for a block whose <0|V|0> is z."""
    return math.sqrt(max(0.0, 2.0 - 2.0 * (z * complex(math.cos(phi), -math.sin(phi))).real))


def trans_block_model(
    instance: UCInstance, P: np.ndarray, line: int, t: int, u_t, gamma: float,
    k_hhl: int, k_qadc: int,
) -> tuple[complex, float]:
    """Predicted <0|U_trans|0> for commitment ``u_t`` and the exact target phase.

    The HHL readout is modelled eigencomponent by eigencomponent, and the QADC
    block as the two-branch QPE distribution at that amplitude.
    """
    cfg = hhl_config_for(instance, k_hhl)
    prov = provenance(instance, P, line, t, gamma, cfg)
    bmat = instance.bmat
    ln = instance.grid.lines[line]
    p = injection_vector(bmat, P[:, t], t, u_t)
    exact = solve_dcpf(bmat, p)
    target = gamma * ln.tariff * abs(exact.line_flows[line])
    _, b = pad_system(bmat.matrix, p / prov.norm)
    x = effective_solution(cfg, b)
    i, j = bmat.position(ln.a), bmat.position(ln.b)
    a_hat = (x[i] - x[j]) / math.sqrt(2)
    dist = readout_distribution(a_hat, k_qadc)
    y = np.arange(2**k_qadc)
    phases = prov.gamma_prime * np.abs(np.cos(2 * np.pi * y / 2**k_qadc))
    z = complex(np.sum(dist * np.exp(1j * phases)))
    return z, target


def penalty_block_model(instance: UCInstance, P: np.ndarray, t: int, u_t, gamma: float, k_pen: int):
    """Predicted <0|U_penalty|0> (with the satisfied-branch convention) and its target."""
    demand = instance.demand(t)
    angle = -gamma * instance.penalty
    if demand <= 0:
        return complex(math.cos(angle), math.sin(angle)), angle
    wts = penalty_weights(instance, P, t, k_pen)
    total = sum(a for a, on in zip(wts.a, u_t) if on)
    dist = qpe_distribution(total % 1.0, k_pen)
    msb = (np.arange(2**k_pen) >> (k_pen - 1)) & 1
    z = complex(np.sum(dist * np.exp(1j * angle * msb)))
    satisfied = float(np.dot(u_t, P[:, t])) >= demand
    return z, angle if satisfied else 0.0


def cost_layer_budget(
    instance: UCInstance, P: np.ndarray, u: np.ndarray, gamma: float,
    k_pen: int, k_hhl: int, k_qadc: int,
) -> float:
    """Bound on |arg <u,0|U_C|u,0> - gamma * cost(u)| for the faithful cost layer.

    Each ancilla block V satisfies ||V|0> - e^{i phi}|0>|| = delta, computable
    from its predicted <0|V|0>. Deviations add along the sequence (unitaries
    preserve norm), and an amplitude within D of a unit phasor has argument
    within arcsin(D) of it.
    """
    total = 0.0
    for t in range(instance.timesteps):
        u_t = u[:, t]
        z, phi = penalty_block_model(instance, P, t, u_t, gamma, k_pen)
        total += _unit_phasor_gap(z, phi)
        for line in range(len(instance.grid.lines)):
            z, phi = trans_block_model(instance, P, line, t, u_t, gamma, k_hhl, k_qadc)
            total += _unit_phasor_gap(z, phi)
    return math.asin(min(1.0, total)) if total < 1 else math.pi
