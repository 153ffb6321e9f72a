"""HHL linear solver with an exact dense Hamiltonian evolution."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .. import sim


class HHLError(ValueError):
    pass


def pad_system(matrix: np.ndarray, vector: np.ndarray | None = None):
    """Pad to the next power of two with identity rows and zero entries."""
    n = matrix.shape[0]
    size = 1 << max(1, math.ceil(math.log2(n)))
    out = np.eye(size)
    out[:n, :n] = matrix
    if vector is None:
        return out
    vec = np.zeros(size, dtype=np.result_type(vector, float))
    vec[:n] = vector
    return out, vec


def gershgorin_bound(matrix: np.ndarray) -> float:
    return float(np.max(np.sum(np.abs(matrix), axis=1)))


@dataclass(frozen=True, eq=False)
class HHLConfig:
    matrix: np.ndarray
    evolution_time: float
    phase_width: int
    rotation_constant: float

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        n = m.shape[0]
        if m.shape != (n, n) or n & (n - 1) or n < 2:
            raise HHLError("matrix must be square with a power-of-two size")
        if not np.allclose(m, m.T, atol=1e-12):
            raise HHLError("matrix must be symmetric")
        if self.phase_width < 1:
            raise HHLError("phase register needs at least one qubit")
        lam = np.linalg.eigvalsh(m)
        window = lam * self.evolution_time / (2 * math.pi)
        if window.min() <= 0 or window.max() >= 1:
            raise HHLError("eigenvalue outside the phase window (0, 1)")
        if self.rotation_constant > lam.min() * (1 + 1e-12):
            raise HHLError("rotation constant exceeds the minimum eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def for_matrix(
        cls, matrix: np.ndarray, phase_width: int,
        evolution_time: float | None = None, rotation_constant: float | None = None,
    ) -> HHLConfig:
        """Evolution time puts every eigenphase in (0, 0.9]; C is the true minimum eigenvalue."""
        m = np.asarray(matrix, dtype=float)
        if evolution_time is None:
            evolution_time = 0.9 * 2 * math.pi / gershgorin_bound(m)
        if rotation_constant is None:
            rotation_constant = float(np.linalg.eigvalsh(m).min())
        return cls(m, evolution_time, phase_width, rotation_constant)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def decoded_eigenvalue(self, y: int) -> float:
        return 2 * math.pi * y / (self.evolution_time * 2**self.phase_width)

    def rotation_ratio(self, y: int) -> float:
        """Success amplitude for phase readout y; y = 0 is left unrotated."""
        if y == 0:
            return 0.0
        return min(1.0, self.rotation_constant / self.decoded_eigenvalue(y))


def _qpe_block(cfg: HHLConfig, system, phase, qubit_count) -> sim.Circuit:
    a, t = cfg.matrix, cfg.evolution_time

    def power(p: int) -> sim.Circuit:
        return sim.Circuit(qubit_count, (sim.unitary(expm(1j * a * t * p), system),))

    return sim.qpe(power, None, phase, qubit_count)


def hhl_circuit(
    cfg: HHLConfig, system: Sequence[int], phase: Sequence[int], ancilla: int,
    qubit_count: int,
) -> sim.Circuit:
    """QPE on e^{iAt}, eigenvalue-conditioned RY on ``ancilla``, inverse QPE.

    On the ancilla-|1> branch with the phase register back at zero, the
    system register holds ``C * A^{-1} b`` up to eigenphase rounding.
    """
    system, phase = list(system), list(phase)
    if 2 ** len(system) != cfg.size:
        raise HHLError("system register does not match the matrix size")
    if len(phase) != cfg.phase_width:
        raise HHLError("phase register does not match phase_width")
    est = _qpe_block(cfg, system, phase, qubit_count)
    ops = list(est.ops)
    w = cfg.phase_width
    for y in range(1, 2**w):
        ratio = cfg.rotation_ratio(y)
        if ratio == 0.0:
            continue
        controls = tuple((q, (y >> k) & 1) for k, q in enumerate(phase))
        ops.append(sim.ry(2 * math.asin(ratio), ancilla, controls))
    ops.extend(sim.inverse(est).ops)
    return sim.Circuit(qubit_count, tuple(ops))


def qpe_distribution(phi: float, width: int) -> np.ndarray:
    """Readout distribution of textbook QPE for eigenphase ``phi`` (in turns)."""
    n = 2**width
    y = np.arange(n)
    x = np.arange(n)
    amp = np.exp(2j * np.pi * np.outer(phi - y / n, x)).sum(axis=1) / n
    return np.abs(amp) ** 2


def effective_solution(cfg: HHLConfig, b: np.ndarray) -> np.ndarray:
    """What the circuit leaves on the success branch with the phase register at 0.

    Each eigencomponent is weighted by the mean rotation ratio under its QPE
    readout distribution, so the result is real. Equals ``C A^{-1} b`` in the
    limit of exact phase readout.
    """
    lam, vecs = np.linalg.eigh(cfg.matrix)
    ratios = np.array([cfg.rotation_ratio(y) for y in range(2**cfg.phase_width)])
    gain = np.array(
        [qpe_distribution(l * cfg.evolution_time / (2 * math.pi), cfg.phase_width) @ ratios for l in lam]
    )
    return vecs @ (gain * (vecs.T @ np.asarray(b, dtype=float)))


def success_branch(state: np.ndarray, system, phase, ancilla) -> np.ndarray:
    """System amplitudes with ancilla = 1 and phase register = 0 (other qubits at 0)."""
    vec = []
    for k in range(2 ** len(system)):
        idx = 1 << ancilla
        for b, q in enumerate(system):
            if (k >> b) & 1:
                idx |= 1 << q
        vec.append(state[idx])
    return np.array(vec)
