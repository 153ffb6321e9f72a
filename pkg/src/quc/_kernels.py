"""Compiled single-target and swap kernels for the statevector simulator.

Only indices that satisfy the controls are visited: the loop counter runs
over the free bits, and zeros are inserted at every fixed (control or
target) position before the control values are OR-ed in.
"""

from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True, nogil=True, inline="always")
def _spread(j, fixed):
    for p in fixed:
        low = (1 << p) - 1
        j = ((j & ~low) << 1) | (j & low)
    return j


@numba.njit(cache=True, nogil=True)
def apply_1q(state, q, fixed, cval, m00, m01, m10, m11):
    bit = 1 << q
    for j in range(state.size >> fixed.size):
        i0 = _spread(j, fixed) | cval
        i1 = i0 | bit
        a0 = state[i0]
        a1 = state[i1]
        state[i0] = m00 * a0 + m01 * a1
        state[i1] = m10 * a0 + m11 * a1


@numba.njit(cache=True, nogil=True)
def apply_x(state, q, fixed, cval):
    bit = 1 << q
    for j in range(state.size >> fixed.size):
        i0 = _spread(j, fixed) | cval
        i1 = i0 | bit
        tmp = state[i0]
        state[i0] = state[i1]
        state[i1] = tmp


@numba.njit(cache=True, nogil=True)
def apply_diag1(state, q, fixed, cval, d0, d1):
    bit = 1 << q
    skip0 = d0 == 1.0
    for j in range(state.size >> fixed.size):
        i0 = _spread(j, fixed) | cval
        state[i0 | bit] *= d1
        if not skip0:
            state[i0] *= d0


@numba.njit(cache=True, nogil=True)
def apply_swap(state, a, b, fixed, cval):
    """``fixed`` holds a, b and the controls; swaps |..1_a 0_b..> with |..0_a 1_b..>."""
    ba = 1 << a
    bb = 1 << b
    for j in range(state.size >> fixed.size):
        i = _spread(j, fixed) | cval
        tmp = state[i | ba]
        state[i | ba] = state[i | bb]
        state[i | bb] = tmp


def fixed_bits(targets, controls) -> tuple[np.ndarray, int]:
    """Sorted fixed bit positions (ascending) and the OR-mask of control values."""
    cval = 0
    for q, p in controls:
        cval |= p << q
    pos = sorted(list(targets) + [q for q, _ in controls])
    return np.array(pos, dtype=np.int64), cval
