"""Dense statevector simulator and the circuit IR every builder emits.

Qubit 0 is the least significant bit of a basis-state index. States are plain
``complex128`` numpy vectors of length ``2**n``; gates are applied in place
through a ``(2,)*n`` tensor view, so a controlled gate only touches the
sub-block selected by its control polarities.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

try:
    from . import _kernels
except ImportError:  # pragma: no cover - numba missing
    _kernels = None

ONE_QUBIT = frozenset({"X", "H", "Z", "RX", "RY", "RZ", "PHASE"})
PARAMETRIC = frozenset({"RX", "RY", "RZ", "PHASE"})
KINDS = ONE_QUBIT | {"SWAP", "UNITARY", "DIAGONAL"}

UNITARY_TOL = 1e-10
MAX_DENSE_QUBITS = 10

_SQRT_HALF = 1.0 / math.sqrt(2.0)


class SimulationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Gate:
    """One gate record.

    ``targets[0]`` is the least significant bit of the gate's local matrix.
    ``controls`` holds ``(qubit, polarity)`` pairs; the gate fires only on
    basis states whose control bits equal the polarities. ``matrix`` is the
    dense matrix for ``UNITARY`` and the vector of diagonal entries for
    ``DIAGONAL``.
    """

    kind: str
    targets: tuple[int, ...]
    controls: tuple[tuple[int, int], ...] = ()
    theta: float | None = None
    matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SimulationError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        object.__setattr__(
            self, "controls", tuple((int(q), int(p)) for q, p in self.controls)
        )
        qubits = list(self.targets) + [q for q, _ in self.controls]
        if any(q < 0 for q in qubits):
            raise SimulationError("negative qubit index")
        if len(set(qubits)) != len(qubits):
            raise SimulationError("targets and controls must be disjoint")
        if any(p not in (0, 1) for _, p in self.controls):
            raise SimulationError("control polarity must be 0 or 1")
        k = len(self.targets)
        if self.kind in ONE_QUBIT and k != 1:
            raise SimulationError(f"{self.kind} acts on exactly one qubit")
        if self.kind == "SWAP" and k != 2:
            raise SimulationError("SWAP acts on exactly two qubits")
        if self.kind in PARAMETRIC:
            if self.theta is None or not math.isfinite(self.theta):
                raise SimulationError(f"{self.kind} needs a finite angle")
            object.__setattr__(self, "theta", float(self.theta))
        if self.kind == "UNITARY":
            if k > MAX_DENSE_QUBITS:
                raise SimulationError("dense unitary too wide")
            m = np.asarray(self.matrix, dtype=complex)
            if m.shape != (2**k, 2**k):
                raise SimulationError(f"matrix shape {m.shape} does not fit {k} targets")
            if np.linalg.norm(m.conj().T @ m - np.eye(2**k), ord=2) > UNITARY_TOL:
                raise SimulationError("matrix is not unitary")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)
        if self.kind == "DIAGONAL":
            d = np.asarray(self.matrix, dtype=complex).ravel()
            if d.shape != (2**k,):
                raise SimulationError("diagonal length does not fit targets")
            if np.max(np.abs(np.abs(d) - 1.0)) > UNITARY_TOL:
                raise SimulationError("diagonal entries must have modulus 1")
            d.setflags(write=False)
            object.__setattr__(self, "matrix", d)

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + tuple(q for q, _ in self.controls)

    def local_matrix(self) -> np.ndarray:
        """Matrix on the target qubits (ignoring controls)."""
        t = self.theta
        if self.kind == "X":
            return np.array([[0, 1], [1, 0]], dtype=complex)
        if self.kind == "H":
            return np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT_HALF
        if self.kind == "Z":
            return np.diag([1, -1]).astype(complex)
        if self.kind == "RX":
            c, s = math.cos(t / 2), math.sin(t / 2)
            return np.array([[c, -1j * s], [-1j * s, c]])
        if self.kind == "RY":
            c, s = math.cos(t / 2), math.sin(t / 2)
            return np.array([[c, -s], [s, c]], dtype=complex)
        if self.kind == "RZ":
            return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])
        if self.kind == "PHASE":
            return np.diag([1, np.exp(1j * t)])
        if self.kind == "SWAP":
            return np.array(
                [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
            )
        if self.kind == "UNITARY":
            return np.array(self.matrix)
        return np.diag(self.matrix)

    def inverse(self) -> Gate:
        if self.kind in PARAMETRIC:
            return Gate(self.kind, self.targets, self.controls, theta=-self.theta)
        if self.kind == "UNITARY":
            return Gate(self.kind, self.targets, self.controls, matrix=self.matrix.conj().T)
        if self.kind == "DIAGONAL":
            return Gate(self.kind, self.targets, self.controls, matrix=self.matrix.conj())
        return self

    def with_controls(self, extra: Iterable[tuple[int, int]]) -> Gate:
        return Gate(
            self.kind, self.targets, self.controls + tuple(extra), self.theta, self.matrix
        )

    def remapped(self, mapping: Sequence[int]) -> Gate:
        return Gate(
            self.kind,
            tuple(mapping[q] for q in self.targets),
            tuple((mapping[q], p) for q, p in self.controls),
            self.theta,
            self.matrix,
        )

    def to_record(self) -> dict:
        rec: dict = {
            "kind": self.kind,
            "targets": list(self.targets),
            "controls": [list(c) for c in self.controls],
        }
        if self.theta is not None:
            rec["angle"] = self.theta
        if self.matrix is not None:
            m = np.asarray(self.matrix)
            rec["matrix"] = [m.real.tolist(), m.imag.tolist()]
        return rec

    @classmethod
    def from_record(cls, rec: Mapping) -> Gate:
        matrix = None
        if "matrix" in rec:
            re, im = rec["matrix"]
            matrix = np.asarray(re) + 1j * np.asarray(im)
        return cls(
            rec["kind"],
            tuple(rec["targets"]),
            tuple(tuple(c) for c in rec.get("controls", ())),
            rec.get("angle"),
            matrix,
        )


# Gate constructors. Controlled rotations are the base kind plus one control.

def x(q, controls=()):
    return Gate("X", (q,), tuple(controls))


def h(q, controls=()):
    return Gate("H", (q,), tuple(controls))


def z(q, controls=()):
    return Gate("Z", (q,), tuple(controls))


def rx(theta, q, controls=()):
    return Gate("RX", (q,), tuple(controls), theta)


def ry(theta, q, controls=()):
    return Gate("RY", (q,), tuple(controls), theta)


def rz(theta, q, controls=()):
    return Gate("RZ", (q,), tuple(controls), theta)


def phase(theta, q, controls=()):
    return Gate("PHASE", (q,), tuple(controls), theta)


def cx(control, target):
    return x(target, ((control, 1),))


def crx(theta, control, target):
    return rx(theta, target, ((control, 1),))


def cry(theta, control, target):
    return ry(theta, target, ((control, 1),))


def crz(theta, control, target):
    return rz(theta, target, ((control, 1),))


def cphase(theta, control, target):
    return phase(theta, target, ((control, 1),))


def swap(a, b, controls=()):
    return Gate("SWAP", (a, b), tuple(controls))


def unitary(matrix, targets, controls=()):
    return Gate("UNITARY", tuple(targets), tuple(controls), matrix=matrix)


def diagonal(entries, targets, controls=()):
    return Gate("DIAGONAL", tuple(targets), tuple(controls), matrix=entries)


def global_phase(theta, q) -> list[Gate]:
    """e^{i theta} on every basis state, written as Phase . X . Phase . X on ``q``."""
    return [phase(theta, q), x(q), phase(theta, q), x(q)]


@dataclass(frozen=True, eq=False)
class Circuit:
    qubit_count: int
    ops: tuple[Gate, ...] = ()
    meta: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        for g in self.ops:
            if max(g.qubits) >= self.qubit_count:
                raise SimulationError(
                    f"{g.kind} on qubits {g.qubits} outside a {self.qubit_count}-qubit circuit"
                )

    def __len__(self):
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def __add__(self, other: Circuit) -> Circuit:
        return compose(self, other)

    def with_meta(self, **meta) -> Circuit:
        return Circuit(self.qubit_count, self.ops, {**self.meta, **meta})

    def remap(self, mapping: Sequence[int], qubit_count: int) -> Circuit:
        """Relabel local qubit ``q`` as ``mapping[q]`` inside a wider circuit."""
        return Circuit(qubit_count, tuple(g.remapped(mapping) for g in self.ops), self.meta)

    def depth(self) -> int:
        return depth_of(self.ops, self.qubit_count)

    def gate_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for g in self.ops:
            counts[g.kind] = counts.get(g.kind, 0) + 1
        return dict(sorted(counts.items()))

    def to_json(self) -> str:
        return json.dumps(
            {"qubit_count": self.qubit_count, "ops": [g.to_record() for g in self.ops]}
        )

    @classmethod
    def from_json(cls, text: str) -> Circuit:
        data = json.loads(text)
        return cls(data["qubit_count"], tuple(Gate.from_record(r) for r in data["ops"]))


def compose(*circuits: Circuit) -> Circuit:
    width = max(c.qubit_count for c in circuits)
    ops: list[Gate] = []
    for c in circuits:
        ops.extend(c.ops)
    return Circuit(width, tuple(ops))


def depth_of(ops: Iterable[Gate], qubit_count: int, frontier: list[int] | None = None) -> int:
    """Greedy layer count; pass ``frontier`` to keep counting across calls."""
    level = frontier if frontier is not None else [0] * qubit_count
    for g in ops:
        qs = g.qubits
        d = max(level[q] for q in qs) + 1
        for q in qs:
            level[q] = d
    return max(level, default=0)


def inverse(circuit: Circuit) -> Circuit:
    return Circuit(
        circuit.qubit_count, tuple(g.inverse() for g in reversed(circuit.ops)), circuit.meta
    )


def controlled_embed(circuit: Circuit, controls: Sequence[tuple[int, int]]) -> Circuit:
    controls = tuple((int(q), int(p)) for q, p in controls)
    used = {q for g in circuit.ops for q in g.qubits}
    clash = used & {q for q, _ in controls}
    if clash:
        raise SimulationError(f"control qubits {sorted(clash)} are used inside the circuit")
    width = max([circuit.qubit_count] + [q + 1 for q, _ in controls])
    return Circuit(width, tuple(g.with_controls(controls) for g in circuit.ops))


# --- state handling -------------------------------------------------------

def zero_state(n: int) -> np.ndarray:
    return basis_state(n, 0)


def basis_state(n: int, index: int) -> np.ndarray:
    psi = np.zeros(2**n, dtype=complex)
    psi[index] = 1.0
    return psi


def qubit_count_of(state: np.ndarray) -> int:
    n = int(state.size).bit_length() - 1
    if state.ndim != 1 or 2**n != state.size:
        raise SimulationError("state length is not a power of two")
    return n


def apply_gate(state: np.ndarray, gate: Gate) -> np.ndarray:
    """Apply ``gate`` to ``state`` in place and return it."""
    n = qubit_count_of(state)
    if max(gate.qubits) >= n:
        raise SimulationError(f"gate on qubits {gate.qubits} but state has {n} qubits")
    if (
        _kernels is not None
        and n >= KERNEL_MIN_QUBITS
        and state.dtype == np.complex128
        and state.flags.c_contiguous
        and (len(gate.targets) == 1 or gate.kind == "SWAP")
    ):
        return _apply_kernel(state, gate)
    return _apply_numpy(state, gate, n)


KERNEL_MIN_QUBITS = 8


def _apply_kernel(state: np.ndarray, gate: Gate) -> np.ndarray:
    fixed, cval = _kernels.fixed_bits(gate.targets, gate.controls)
    kind = gate.kind
    if kind == "SWAP":
        _kernels.apply_swap(state, gate.targets[0], gate.targets[1], fixed, cval)
        return state
    q = gate.targets[0]
    if kind == "X":
        _kernels.apply_x(state, q, fixed, cval)
        return state
    m = gate.local_matrix()
    if kind in ("Z", "PHASE", "RZ", "DIAGONAL"):
        _kernels.apply_diag1(state, q, fixed, cval, complex(m[0, 0]), complex(m[1, 1]))
        return state
    _kernels.apply_1q(
        state, q, fixed, cval, complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1])
    )
    return state


def _apply_numpy(state: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    psi = state.reshape((2,) * n)
    view = psi
    if gate.controls:
        index: list = [slice(None)] * n
        for q, p in gate.controls:
            index[n - 1 - q] = p
        view = psi[tuple(index)]
    ctrl_axes = sorted(n - 1 - q for q, _ in gate.controls)

    def axis(q: int) -> int:
        a = n - 1 - q
        return a - sum(1 for c in ctrl_axes if c < a)

    kind = gate.kind
    if len(gate.targets) == 1:
        ax = axis(gate.targets[0])
        i0: list = [slice(None)] * view.ndim
        i1: list = [slice(None)] * view.ndim
        i0[ax], i1[ax] = 0, 1
        i0, i1 = tuple(i0), tuple(i1)
        if kind == "X":
            tmp = view[i0].copy()
            view[i0] = view[i1]
            view[i1] = tmp
            return state
        if kind in ("Z", "PHASE", "RZ", "DIAGONAL"):
            m = gate.local_matrix()
            if m[0, 0] != 1:
                view[i0] *= m[0, 0]
            view[i1] *= m[1, 1]
            return state
        m = gate.local_matrix()
        a0 = view[i0].copy()
        a1 = view[i1]
        view[i0] = m[0, 0] * a0 + m[0, 1] * a1
        view[i1] = m[1, 0] * a0 + m[1, 1] * a1
        return state

    k = len(gate.targets)
    axes = [axis(q) for q in reversed(gate.targets)]  # most significant local bit first
    if kind == "DIAGONAL":
        moved = np.moveaxis(view, axes, list(range(k)))
        moved *= gate.matrix.reshape((2,) * k + (1,) * (view.ndim - k))
        return state
    m = gate.local_matrix().reshape((2,) * (2 * k))
    out = np.tensordot(m, view, axes=(list(range(k, 2 * k)), axes))
    view[...] = np.moveaxis(out, list(range(k)), axes)
    return state


def run(circuit: Circuit, initial: np.ndarray, copy: bool = True) -> np.ndarray:
    n = qubit_count_of(initial)
    if n != circuit.qubit_count:
        raise SimulationError(
            f"circuit has {circuit.qubit_count} qubits, state has {n}"
        )
    state = np.array(initial, dtype=complex, copy=copy)
    for g in circuit.ops:
        apply_gate(state, g)
    return state


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense matrix of a small circuit, built column by column through ``run``."""
    n = circuit.qubit_count
    if n > MAX_DENSE_QUBITS + 2:
        raise SimulationError("circuit too wide for a dense matrix")
    dim = 2**n
    cols = [run(circuit, basis_state(n, j), copy=False) for j in range(dim)]
    return np.stack(cols, axis=1)


# --- standard sub-circuits -------------------------------------------------

def qft(width: int, qubits: Sequence[int] | None = None, qubit_count: int | None = None) -> Circuit:
    """Textbook DFT, F[y, x] = exp(2 pi i x y / 2^w) / 2^{w/2}, qubit 0 = LSB.

    With ``qubits`` the transform is placed on that register inside a
    ``qubit_count``-qubit circuit.
    """
    if width < 1:
        raise SimulationError("QFT width must be >= 1")
    ops: list[Gate] = []
    for j in reversed(range(width)):
        ops.append(h(j))
        for k in reversed(range(j)):
            ops.append(cphase(math.pi / 2 ** (j - k), k, j))
    for j in range(width // 2):
        ops.append(swap(j, width - 1 - j))
    c = Circuit(width, tuple(ops))
    if qubits is None:
        return c
    return c.remap(list(qubits), qubit_count if qubit_count is not None else max(qubits) + 1)


def iqft(width: int, qubits: Sequence[int] | None = None, qubit_count: int | None = None) -> Circuit:
    return inverse(qft(width, qubits, qubit_count))


def qpe(
    unitary: Circuit | Callable[[int], Circuit],
    eigenstate_prep: Circuit | None,
    phase_register: Sequence[int],
    qubit_count: int | None = None,
) -> Circuit:
    """Phase estimation circuit.

    ``unitary`` is either a circuit (its powers are built by repetition) or a
    callable ``power -> circuit`` returning ``U**power``. Phase qubit ``k``
    controls ``U**(2**k)``; the register ends holding ``round(phi * 2**w)``
    with qubit ``phase_register[0]`` as the LSB.
    """
    phase_register = list(phase_register)
    w = len(phase_register)
    if w < 1:
        raise SimulationError("phase register must have at least one qubit")
    if callable(unitary) and not isinstance(unitary, Circuit):
        power = unitary
        base = power(1)
    else:
        base = unitary
        power = None
    sys_qubits = {q for g in base.ops for q in g.qubits}
    if sys_qubits & set(phase_register):
        raise SimulationError("unitary acts on the phase register")
    width = max(
        [base.qubit_count, max(phase_register) + 1]
        + ([eigenstate_prep.qubit_count] if eigenstate_prep is not None else [])
        + ([qubit_count] if qubit_count else [])
    )
    ops: list[Gate] = []
    if eigenstate_prep is not None:
        ops.extend(eigenstate_prep.ops)
    ops.extend(h(q) for q in phase_register)
    for k, q in enumerate(phase_register):
        if power is not None:
            ops.extend(controlled_embed(power(2**k), [(q, 1)]).ops)
        else:
            one = controlled_embed(base, [(q, 1)]).ops
            for _ in range(2**k):
                ops.extend(one)
    ops.extend(iqft(w, phase_register, width).ops)
    return Circuit(width, tuple(ops))


# --- measurement --------------------------------------------------------------

def marginal_probabilities(state: np.ndarray, register: Sequence[int]) -> np.ndarray:
    """Distribution of the register value (``register[0]`` is its LSB)."""
    n = qubit_count_of(state)
    probs = (np.abs(state) ** 2).reshape((2,) * n)
    keep = [n - 1 - q for q in register]
    drop = tuple(a for a in range(n) if a not in keep)
    marg = probs.sum(axis=drop) if drop else probs
    remaining = [a for a in range(n) if a in keep]  # ascending axis order
    order = [remaining.index(a) for a in reversed(keep)]  # MSB of register first
    marg = np.transpose(marg, order)
    return np.asarray(marg).reshape(-1)


def sample(
    state: np.ndarray, register: Sequence[int], shots: int, seed: int
) -> dict[str, int]:
    """Histogram of register bitstrings (written MSB first) over ``shots`` draws."""
    if shots < 1:
        raise SimulationError("shots must be >= 1")
    probs = marginal_probabilities(state, register)
    probs = probs / probs.sum()
    counts = np.random.default_rng(seed).multinomial(shots, probs)
    w = len(register)
    return {format(i, f"0{w}b"): int(c) for i, c in enumerate(counts) if c}
