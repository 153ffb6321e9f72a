"""Qubit register allocation for the QAOA circuit.

Ancillas are reused sequentially: one penalty register for all timesteps and
one transmission bank for every (line, timestep) block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Layout:
    n_gens: int
    timesteps: int
    main: tuple[int, ...]
    pen: tuple[int, ...] = ()
    hhl_vec: tuple[int, ...] = ()
    prep_b: int | None = None
    prep_c: int | None = None
    hhl_phase: tuple[int, ...] = ()
    hhl_anc: int | None = None
    qadc_b: int | None = None
    qadc_phase: tuple[int, ...] = ()
    width: int = 0

    def main_at(self, t: int) -> tuple[int, ...]:
        n = self.n_gens
        return self.main[t * n : (t + 1) * n]

    @property
    def data(self) -> tuple[int, ...]:
        """Data register of the transmission prep circuit (index 0 = all zero)."""
        return self.hhl_vec + (self.prep_b, self.prep_c) + self.hhl_phase + (self.hhl_anc,)

    def registers(self) -> dict[str, list[int]]:
        regs = {"main": list(self.main), "pen": list(self.pen)}
        if self.hhl_vec:
            regs.update(
                hhl_vec=list(self.hhl_vec), prep_b=[self.prep_b], prep_c=[self.prep_c],
                hhl_phase=list(self.hhl_phase), hhl_anc=[self.hhl_anc],
                qadc_b=[self.qadc_b], qadc_phase=list(self.qadc_phase),
            )
        return regs


def vec_width(n_nodes: int) -> int:
    return max(1, math.ceil(math.log2(n_nodes)))


def allocate(
    n_gens: int, timesteps: int, n_nodes: int = 0,
    k_pen: int = 0, k_hhl: int = 0, k_qadc: int = 0,
) -> Layout:
    """Main register first, then the penalty register, then the transmission bank.

    With ``k_hhl == k_qadc == 0`` no transmission bank is allocated.
    """
    nxt = 0

    def take(k):
        nonlocal nxt
        reg = tuple(range(nxt, nxt + k))
        nxt += k
        return reg

    main = take(n_gens * timesteps)
    pen = take(k_pen)
    if not (k_hhl or k_qadc):
        return Layout(n_gens, timesteps, main, pen, width=nxt)
    hhl_vec = take(vec_width(n_nodes))
    (prep_b,), (prep_c,) = take(1), take(1)
    hhl_phase = take(k_hhl)
    (hhl_anc,) = take(1)
    (qadc_b,) = take(1)
    qadc_phase = take(k_qadc)
    return Layout(
        n_gens, timesteps, main, pen, hhl_vec, prep_b, prep_c,
        hhl_phase, hhl_anc, qadc_b, qadc_phase, width=nxt,
    )
