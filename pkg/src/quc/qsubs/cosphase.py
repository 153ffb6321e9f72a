"""Diagonal |cos| phase from a basis-encoded angle register.

The target diagonal f(m) = gamma' |cos(2 pi m / 2^w)| is expanded exactly over
bit products, f(m) = sum over subsets S of set bits of m of b_S, by an
inclusion-exclusion (Moebius) transform. Each b_S becomes one
multi-controlled phase on the qubits of S.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import sim


@dataclass(frozen=True)
class CosPhaseTable:
    gamma_prime: float
    width: int
    coefficients: dict[tuple[int, ...], float]

    def target(self) -> np.ndarray:
        m = np.arange(2**self.width)
        return self.gamma_prime * np.abs(np.cos(2 * np.pi * m / 2**self.width))

    def reconstruct(self) -> np.ndarray:
        out = np.zeros(2**self.width)
        for S, b in self.coefficients.items():
            mask = sum(1 << q for q in S)
            hits = (np.arange(2**self.width) & mask) == mask
            out[hits] += b
        return out


def moebius(values: np.ndarray) -> np.ndarray:
    """Subset-sum inverse: out[S] = sum over T subset of S of (-1)^{|S-T|} values[T]."""
    out = np.array(values, dtype=float)
    w = int(out.size).bit_length() - 1
    for k in range(w):
        bit = 1 << k
        idx = np.arange(out.size)
        hi = idx[(idx & bit) != 0]
        out[hi] -= out[hi ^ bit]
    return out


def cos_phase_table(gamma_prime: float, width: int) -> CosPhaseTable:
    if width < 2:
        raise ValueError("width must be >= 2")
    m = np.arange(2**width)
    f = gamma_prime * np.abs(np.cos(2 * np.pi * m / 2**width))
    b = moebius(f)
    coeffs = {
        tuple(q for q in range(width) if (mask >> q) & 1): float(b[mask]) for mask in range(2**width)
    }
    return CosPhaseTable(float(gamma_prime), width, coeffs)


def cos_phase_circuit(
    table: CosPhaseTable, target: Sequence[int], qubit_count: int | None = None, tol: float = 1e-15
) -> sim.Circuit:
    """U|m> = exp(i f(m))|m>, including the constant term as a true global phase."""
    target = list(target)
    if len(target) != table.width:
        raise ValueError("register width does not match the table")
    width = qubit_count if qubit_count is not None else max(target) + 1
    ops: list[sim.Gate] = []
    for S, b in table.coefficients.items():
        if abs(b) <= tol:
            continue
        if not S:
            ops.extend(sim.global_phase(b, target[0]))
            continue
        qs = [target[q] for q in S]
        ops.append(sim.phase(b, qs[-1], tuple((q, 1) for q in qs[:-1])))
    return sim.Circuit(width, tuple(ops))


def quadrant_folded(values: np.ndarray) -> np.ndarray:
    """Re-index ``values`` with the MSB flipped wherever the two top bits differ.

    This moves angles in the second and third quadrants by pi. Only used to
    cross-check that the folded cos equals |cos| taken directly.
    """
    n = values.size
    w = int(n).bit_length() - 1
    m = np.arange(n)
    top, nxt = (m >> (w - 1)) & 1, (m >> (w - 2)) & 1
    folded = np.where(top != nxt, m ^ (1 << (w - 1)), m)
    return values[folded]


def _cos_over_register(width: int) -> np.ndarray:
    m = np.arange(2**width)
    return np.cos(2 * np.pi * m / 2**width)


def folded_abs_cos(width: int) -> np.ndarray:
    """cos evaluated on quadrant-folded angles."""
    return quadrant_folded(_cos_over_register(width))


def abs_cos_exact(width: int) -> np.ndarray:
    return np.abs(_cos_over_register(width))

