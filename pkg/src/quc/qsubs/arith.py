"""Weighted QFT adder and the demand-penalty layer built on it."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import sim
from ..uc import UCInstance


class AdderError(ValueError):
    pass


@dataclass(frozen=True)
class AdderWeights:
    a: tuple[float, ...]
    width: int

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        if self.width < 1:
            raise AdderError("adder register needs at least one qubit")
        if any(not -1 < v < 1 for v in self.a):
            raise AdderError("adder weights must lie in (-1, 1)")
        if sum(max(v, 0.0) for v in self.a) >= 1:
            raise AdderError("positive weights sum to >= 1; the register would wrap")

    def is_dyadic(self) -> bool:
        scale = 2**self.width
        return all(abs(v * scale - round(v * scale)) < 1e-12 for v in self.a)


def weighted_adder(
    weights: AdderWeights, controls: Sequence[int], target: Sequence[int], qubit_count: int
) -> sim.Circuit:
    """Add ``sum_i u_i a_i`` (mod 1, fixed point) into ``target`` (LSB first).

    The register must start in |0...0>. Qubit ``target[j]`` picks up the phase
    ``2 pi a_i 2^j`` for every set control, between a QFT and an inverse QFT.
    """
    if len(controls) != len(weights.a):
        raise AdderError("one control qubit per weight")
    m = len(target)
    if m != weights.width:
        raise AdderError("target width does not match the weights")
    ops = list(sim.qft(m, target, qubit_count).ops)
    for c, a in zip(controls, weights.a):
        for j, q in enumerate(target):
            angle = math.remainder(2 * math.pi * a * 2**j, 2 * math.pi)
            if angle != 0.0:
                ops.append(sim.cphase(angle, c, q))
    ops.extend(sim.iqft(m, target, qubit_count).ops)
    return sim.Circuit(qubit_count, tuple(ops))


def penalty_weights(instance: UCInstance, P: np.ndarray, t: int, width: int) -> AdderWeights:
    """a_i = P_i / (2 * demand): the sum reaches 1/2 exactly when demand is met."""
    demand = instance.demand(t)
    return AdderWeights(tuple(float(P[i, t]) / (2 * demand) for i in range(instance.n_gens)), width)


def penalty_layer(
    instance: UCInstance, P: np.ndarray, t: int, gamma: float,
    main_t: Sequence[int], pen: Sequence[int], qubit_count: int,
) -> sim.Circuit:
    """Phase e^{-i gamma penalty} on every u_t whose output meets demand.

    The adder is uncomputed afterwards, so the penalty register returns to
    |0...0> on every branch where the readout was exact.
    """
    angle = -gamma * instance.penalty
    if instance.demand(t) <= 0:
        return sim.Circuit(qubit_count, tuple(sim.global_phase(angle, main_t[0])))
    adder = weighted_adder(penalty_weights(instance, P, t, len(pen)), main_t, pen, qubit_count)
    ops = list(adder.ops) + [sim.phase(angle, pen[-1])] + list(sim.inverse(adder).ops)
    return sim.Circuit(qubit_count, tuple(ops))
