"""Independent dense reference: every gate becomes a full 2^n x 2^n matrix.

Built from Kronecker products and control projectors, with no code shared
with the simulator beyond the gate record (kind, targets, controls, theta,
matrix).
"""

from __future__ import annotations

import numpy as np

I2 = np.eye(2, dtype=complex)
P0 = np.array([[1, 0], [0, 0]], dtype=complex)
P1 = np.array([[0, 0], [0, 1]], dtype=complex)


def base_matrix(kind: str, theta, matrix) -> np.ndarray:
    c = np.cos(theta / 2) if theta is not None else None
    s = np.sin(theta / 2) if theta is not None else None
    table = {
        "X": lambda: np.array([[0, 1], [1, 0]], dtype=complex),
        "H": lambda: np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
        "Z": lambda: np.array([[1, 0], [0, -1]], dtype=complex),
        "RX": lambda: np.array([[c, -1j * s], [-1j * s, c]]),
        "RY": lambda: np.array([[c, -s], [s, c]], dtype=complex),
        "RZ": lambda: np.array([[np.exp(-1j * theta / 2), 0], [0, np.exp(1j * theta / 2)]]),
        "PHASE": lambda: np.array([[1, 0], [0, np.exp(1j * theta)]]),
        "SWAP": lambda: np.array(
            [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
        ),
        "UNITARY": lambda: np.asarray(matrix, dtype=complex),
        "DIAGONAL": lambda: np.diag(np.asarray(matrix, dtype=complex)),
    }
    return table[kind]()


def embed(local: np.ndarray, targets, n: int) -> np.ndarray:
    """Full matrix of ``local`` on ``targets`` (targets[0] = least significant local bit)."""
    dim = 2**n
    k = len(targets)
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        lc = sum(((col >> q) & 1) << b for b, q in enumerate(targets))
        base = col
        for q in targets:
            base &= ~(1 << q)
        for lr in range(2**k):
            row = base
            for b, q in enumerate(targets):
                row |= ((lr >> b) & 1) << q
            full[row, col] += local[lr, lc]
    return full


def gate_matrix(gate, n: int) -> np.ndarray:
    local = base_matrix(gate.kind, gate.theta, gate.matrix)
    U = embed(local, list(gate.targets), n)
    if not gate.controls:
        return U
    # projector onto the control pattern, identity elsewhere
    ops = []
    for q in range(n):
        pol = dict(gate.controls).get(q)
        ops.append(I2 if pol is None else (P1 if pol else P0))
    proj = ops[n - 1]
    for q in range(n - 2, -1, -1):
        proj = np.kron(proj, ops[q])
    return proj @ U + (np.eye(2**n) - proj)


def circuit_matrix(circuit) -> np.ndarray:
    n = circuit.qubit_count
    U = np.eye(2**n, dtype=complex)
    for g in circuit.ops:
        U = gate_matrix(g, n) @ U
    return U


def dft(n_qubits: int) -> np.ndarray:
    N = 2**n_qubits
    j, k = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    return np.exp(2j * np.pi * j * k / N) / np.sqrt(N)
