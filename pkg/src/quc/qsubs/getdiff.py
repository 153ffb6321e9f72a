from __future__ import annotations

from typing import Sequence

from .. import sim


def get_diff(
    circuit: sim.Circuit, i: int, j: int, register: Sequence[int] | None = None
) -> sim.Circuit:
    """Append gates so amplitude 0 of ``register`` becomes (a_i - a_j)/sqrt(2).

    X gates carry index ``i`` to 0, a CX fan-in collapses the remapped ``j``
    onto its most significant set bit ``k``, then H and X on ``k`` put the
    difference at index 0 (and the sum at ``2**k``).
    """
    if i == j:
        raise ValueError("get_diff needs two distinct indices")
    reg = list(register) if register is not None else list(range(circuit.qubit_count))
    n = len(reg)
    if not (0 <= i < 2**n and 0 <= j < 2**n):
        raise ValueError("index outside the register")
    ops = list(circuit.ops)
    jj = j
    for k in range(n):
        if (i >> k) & 1:
            ops.append(sim.x(reg[k]))
            jj ^= 1 << k
    top = jj.bit_length() - 1
    for l in range(top):
        if (jj >> l) & 1:
            ops.append(sim.cx(reg[top], reg[l]))
    ops.append(sim.h(reg[top]))
    ops.append(sim.x(reg[top]))
    return sim.Circuit(circuit.qubit_count, tuple(ops), circuit.meta)
