"""Amplitude encoding of nodal injections, conditioned on the commitment bits."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .. import sim
from ..uc import UCInstance


def injections_all_on(instance: UCInstance, P: np.ndarray, t: int, size: int) -> np.ndarray:
    """Injection vector in B-matrix order with every generator on, zero-padded."""
    bmat = instance.bmat
    vec = np.zeros(size)
    for i, g in enumerate(instance.grid.generators):
        vec[bmat.position(g.id)] = P[i, t]
    for ld in instance.grid.loads:
        vec[bmat.position(ld.id)] = -ld.demand[t]
    return vec


def amplitude_tree(
    vec: np.ndarray, register: Sequence[int], extra_controls: Sequence[tuple[int, int]] = ()
) -> list[sim.Gate]:
    """Multi-controlled RY tree loading the real unit vector ``vec`` into ``register``.

    Splits on the most significant qubit first; the last level uses atan2 of
    the signed leaf pair, so negative amplitudes come out with their sign.
    """
    w = len(register)
    vec = np.asarray(vec, dtype=float)
    ops: list[sim.Gate] = []
    for level in reversed(range(w)):
        span = 1 << level  # entries below this qubit
        for prefix in range(2 ** (w - 1 - level)):
            base = prefix << (level + 1)
            lo = vec[base : base + span]
            hi = vec[base + span : base + 2 * span]
            if level == 0:
                x0, x1 = lo[0], hi[0]
            else:
                x0, x1 = np.linalg.norm(lo), np.linalg.norm(hi)
            if x0 == 0 and x1 == 0:
                continue
            angle = 2 * math.atan2(x1, x0)
            if angle == 0.0:
                continue
            controls = tuple(
                (register[level + 1 + k], (prefix >> k) & 1) for k in range(w - 1 - level)
            ) + tuple(extra_controls)
            ops.append(sim.ry(angle, register[level], controls))
    return ops


def prep_power_state(
    instance: UCInstance, P: np.ndarray, t: int, main_t: Sequence[int],
    hhl_vec: Sequence[int], b: int, c: int, qubit_count: int, norm: float | None = None,
) -> sim.Circuit:
    """Load injections on the |0>_B|0>_C branch, with off generators moved to |1>_C.

    ``norm`` defaults to the all-generators-on norm, so the encoding scale does
    not depend on the commitment pattern. A larger ``norm`` parks the excess
    weight on the |1>_B branch.
    """
    size = 2 ** len(hhl_vec)
    if size < len(instance.bmat.order):
        raise ValueError("hhl_vec register too small for the node count")
    if len(main_t) != instance.n_gens:
        raise ValueError("one main-register qubit per generator expected")
    vec = injections_all_on(instance, P, t, size)
    full = float(np.linalg.norm(vec))
    r = full if norm is None else float(norm)
    if r < full * (1 - 1e-12) or r == 0:
        raise ValueError("normalisation smaller than the injection norm")
    ops: list[sim.Gate] = []
    extra: tuple[tuple[int, int], ...] = ()
    if r > full * (1 + 1e-12):
        ops.append(sim.ry(2 * math.acos(full / r), b))
        extra = ((b, 0),)
    ops += amplitude_tree(vec / full, hhl_vec, extra)
    for i, g in enumerate(instance.grid.generators):
        k = instance.bmat.position(g.id)
        controls = ((main_t[i], 0),) + tuple((q, (k >> j) & 1) for j, q in enumerate(hhl_vec))
        ops.append(sim.x(c, controls))
    return sim.Circuit(qubit_count, tuple(ops), {"norm": r})
