"""Real-part quantum analog-to-digital conversion.

A Hadamard test between |k> and prep|0> builds |Psi>; phase estimation on
G = (1 - 2|Psi><Psi|) Z_B then reads arccos(-a)/2pi or its mirror, where
``a = Re <k| prep |0>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import schur

from .. import sim
from .hhl import qpe_distribution


@dataclass(frozen=True, eq=False)
class QADCConfig:
    prep_circuit: sim.Circuit
    data: tuple[int, ...]  # data[0] is the LSB of target_index
    b: int
    phase: tuple[int, ...]
    target_index: int = 0
    qubit_count: int = field(default=0)

    def __post_init__(self):
        object.__setattr__(self, "data", tuple(self.data))
        object.__setattr__(self, "phase", tuple(self.phase))
        width = max(
            [self.prep_circuit.qubit_count, self.b + 1, max(self.phase) + 1, self.qubit_count]
        )
        object.__setattr__(self, "qubit_count", width)
        if not 0 <= self.target_index < 2 ** len(self.data):
            raise ValueError("target index outside the data register")
        if self.b in self.data or set(self.phase) & (set(self.data) | {self.b}):
            raise ValueError("QADC registers overlap")

    @property
    def precision(self) -> int:
        return len(self.phase)


def psi_circuit(cfg: QADCConfig) -> sim.Circuit:
    prep = sim.Circuit(cfg.qubit_count, cfg.prep_circuit.ops)
    ops = [sim.h(cfg.b)]
    ops += sim.controlled_embed(prep, [(cfg.b, 1)]).ops
    ops.append(sim.x(cfg.b))
    ops += [sim.x(q, ((cfg.b, 1),)) for k, q in enumerate(cfg.data) if (cfg.target_index >> k) & 1]
    ops.append(sim.h(cfg.b))
    return sim.Circuit(cfg.qubit_count, tuple(ops))


def g_circuit(cfg: QADCConfig, psi: sim.Circuit | None = None) -> sim.Circuit:
    psi = psi if psi is not None else psi_circuit(cfg)
    flips = [sim.x(q) for q in cfg.data + (cfg.b,)]
    ops = [sim.z(cfg.b)]
    ops += sim.inverse(psi).ops
    ops += flips
    ops.append(sim.z(cfg.b, tuple((q, 1) for q in cfg.data)))
    ops += flips
    ops += psi.ops
    return sim.Circuit(cfg.qubit_count, tuple(ops))


def qadc_circuit(cfg: QADCConfig) -> sim.Circuit:
    psi = psi_circuit(cfg)
    return sim.qpe(g_circuit(cfg, psi), psi, cfg.phase, cfg.qubit_count)


def readout_distribution(a: float, precision: int) -> np.ndarray:
    """Predicted phase-register distribution: half on m/2pi, half on 1 - m/2pi."""
    m = math.acos(max(-1.0, min(1.0, -a)))
    turn = m / (2 * math.pi)
    return 0.5 * qpe_distribution(turn, precision) + 0.5 * qpe_distribution(1 - turn, precision)


def _compact(circuit: sim.Circuit, qubits: Sequence[int]) -> sim.Circuit:
    mapping = {q: k for k, q in enumerate(qubits)}
    lookup = [mapping.get(q, -1) for q in range(circuit.qubit_count)]
    return circuit.remap(lookup, len(qubits))


@dataclass
class GEigenReport:
    a: float
    eigenvalues: tuple[complex, complex]  # (+m, -m) branch
    predicted: tuple[complex, complex]
    eigenvalue_error: float
    weights: tuple[float, float]  # |<e_k|Psi>|^2 per branch eigenspace
    coefficients: tuple[complex, complex]  # <Psi_pm|Psi> with Psi_pm = (Psi0 pm i Psi1)/sqrt2
    eigvec_residual: float


def g_eigencheck(cfg: QADCConfig, tol: float = 1e-8) -> GEigenReport:
    """Dense check of the two-dimensional invariant subspace of G holding |Psi>.

    Only the ``data`` and ``b`` qubits are kept, so ``prep_circuit`` must not
    use any other qubit.
    """
    qubits = list(cfg.data) + [cfg.b]
    psi_c = _compact(psi_circuit(cfg), qubits)
    g_c = _compact(g_circuit(cfg), qubits)
    nq = len(qubits)
    G = sim.circuit_unitary(g_c)
    psi = sim.run(psi_c, sim.zero_state(nq))
    T, Z = schur(G, output="complex")
    lam = np.diag(T)
    over = Z.conj().T @ psi
    # group eigenvalues into clusters and collect the weight of |Psi> in each
    clusters: list[list[int]] = []
    for k in np.argsort(-np.abs(over)):
        for cl in clusters:
            if abs(lam[cl[0]] - lam[k]) < 1e-6:
                cl.append(k)
                break
        else:
            clusters.append([k])
    weighted = []
    for cl in clusters:
        w = float(np.sum(np.abs(over[cl]) ** 2))
        if w > tol:
            weighted.append((complex(lam[cl[0]]), w))
    if len(weighted) == 1:
        weighted.append(weighted[0])
    weighted.sort(key=lambda p: -p[0].imag)
    (lp, wp), (lm, wm) = weighted[0], weighted[-1]

    a = float(np.real(sim.run(_compact(sim.Circuit(cfg.qubit_count, cfg.prep_circuit.ops), qubits),
                              sim.zero_state(nq))[cfg.target_index]))
    s = math.sqrt(max(0.0, 1 - a * a))
    pred = (complex(-a, s), complex(-a, -s))
    err = max(abs(lp - pred[0]), abs(lm - pred[1]))

    bmask = 1 << (nq - 1)
    idx = np.arange(2**nq)
    psi0 = np.where(idx & bmask, 0, psi)
    psi1 = np.where(idx & bmask, psi, 0)
    n0, n1 = np.linalg.norm(psi0), np.linalg.norm(psi1)
    coeffs: list[complex] = []
    resid = 0.0
    if n0 > tol and n1 > tol:
        psi0, psi1 = psi0 / n0, psi1 / n1
        for sign, ev in ((1, pred[0]), (-1, pred[1])):
            vec = (psi0 + sign * 1j * psi1) / math.sqrt(2)
            resid = max(resid, float(np.linalg.norm(G @ vec - ev * vec)))
            coeffs.append(complex(np.vdot(vec, psi)))
    else:
        coeffs = [complex(math.sqrt(0.5)), complex(math.sqrt(0.5))]
    return GEigenReport(a, (lp, lm), pred, float(err), (wp, wm), tuple(coeffs), resid)


def amplitude_prep(a: float, data_width: int = 1, qubit_count: int | None = None) -> sim.Circuit:
    """Single RY preparing cos-amplitude ``a`` at index 0 (test and CLI helper)."""
    a = max(-1.0, min(1.0, a))
    width = qubit_count if qubit_count is not None else data_width
    return sim.Circuit(width, (sim.ry(2 * math.acos(a), 0),))
