"""Minimal pure-state simulator for one- to few-qubit registers.

Qubits live in a :class:`RegisterPool`. Each qubit has an integer position
id; the pool maps a position to the register (a small statevector) that
holds it and to its local index inside that register. Entangled pair
halves can therefore sit anywhere in a transmitted sequence while still
sharing one state.

Local qubit order inside a register is big-endian: the first member is the
most significant bit of the amplitude index, so ``|01>`` has amplitude
index 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import count
from typing import Iterable, Sequence

import numpy as np

from .rng import Rng

TOL = 1e-9
MAX_REGISTER_QUBITS = 4

_S = 1 / np.sqrt(2)

LABEL_VECTORS: dict[str, np.ndarray] = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([_S, _S], dtype=complex),
    "-": np.array([_S, -_S], dtype=complex),
    "00": np.array([1, 0, 0, 0], dtype=complex),
    "01": np.array([0, 1, 0, 0], dtype=complex),
    "10": np.array([0, 0, 1, 0], dtype=complex),
    "11": np.array([0, 0, 0, 1], dtype=complex),
    "Phi+": np.array([_S, 0, 0, _S], dtype=complex),
    "Phi-": np.array([_S, 0, 0, -_S], dtype=complex),
    "Psi+": np.array([0, _S, _S, 0], dtype=complex),
    "Psi-": np.array([0, _S, -_S, 0], dtype=complex),
}
LABELS = tuple(LABEL_VECTORS)
SINGLE_QUBIT_LABELS = ("0", "1", "+", "-")
TWO_QUBIT_LABELS = ("00", "01", "10", "11", "Phi+", "Phi-", "Psi+", "Psi-")

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * _S
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


class QuantumStateError(ValueError):
    """Raised on malformed states, bases, unitaries or pool operations."""


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        n = amps.size.bit_length() - 1
        if amps.size < 2 or 2**n != amps.size or n > MAX_REGISTER_QUBITS:
            raise QuantumStateError(f"bad amplitude vector length {amps.size}")
        if abs(np.linalg.norm(amps) - 1) > TOL:
            raise QuantumStateError("state is not normalised")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def qubit_count(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    @property
    def dim(self) -> int:
        return self.amplitudes.size


def state_from_label(label: str) -> PureState:
    try:
        vec = LABEL_VECTORS[label]
    except KeyError:
        raise QuantumStateError(f"unknown state label {label!r}") from None
    return PureState(vec.copy())


def label_qubits(label: str) -> int:
    if label not in LABEL_VECTORS:
        raise QuantumStateError(f"unknown state label {label!r}")
    return 1 if len(LABEL_VECTORS[label]) == 2 else 2


@dataclass(frozen=True)
class Basis:
    """A named orthonormal measurement basis; ``vectors[i]`` belongs to ``labels[i]``."""

    name: str
    labels: tuple[str, ...]
    vectors: np.ndarray = field(repr=False)

    def __post_init__(self):
        vecs = np.asarray(self.vectors, dtype=complex)
        if vecs.shape != (len(self.labels), len(self.labels)):
            raise QuantumStateError("basis must be square and complete")
        if not np.allclose(vecs.conj() @ vecs.T, np.eye(len(self.labels)), atol=TOL):
            raise QuantumStateError(f"basis {self.name} is not orthonormal")
        object.__setattr__(self, "vectors", vecs)

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def qubit_count(self) -> int:
        return self.dim.bit_length() - 1

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def projector_sum(self) -> np.ndarray:
        return sum(np.outer(v, v.conj()) for v in self.vectors)


def _basis(name: str, labels: Sequence[str]) -> Basis:
    return Basis(name, tuple(labels), np.array([LABEL_VECTORS[l] for l in labels]))


Z = _basis("Z", ("0", "1"))
X = _basis("X", ("+", "-"))
ZZ = _basis("ZZ", ("00", "01", "10", "11"))
BELL = _basis("Bell", ("Phi+", "Phi-", "Psi+", "Psi-"))
BASES: dict[str, Basis] = {b.name: b for b in (Z, X, ZZ, BELL)}


def born_distribution(state: PureState, basis: Basis) -> dict[str, float]:
    if state.dim != basis.dim:
        raise QuantumStateError(
            f"basis {basis.name} has dimension {basis.dim}, state has {state.dim}"
        )
    probs = np.abs(basis.vectors.conj() @ state.amplitudes) ** 2
    return {label: float(p) for label, p in zip(basis.labels, probs)}


def states_equal_up_to_phase(a: PureState, b: PureState, tol: float = TOL) -> bool:
    if a.dim != b.dim:
        raise QuantumStateError("cannot compare states of different dimension")
    return bool(abs(np.vdot(a.amplitudes, b.amplitudes)) >= 1 - tol)


def is_unitary(u: np.ndarray, tol: float = TOL) -> bool:
    u = np.asarray(u, dtype=complex)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and np.allclose(
        u.conj().T @ u, np.eye(u.shape[0]), atol=tol
    )


class RegisterPool:
    """Collection of registers with a position -> (register, local index) map.

    Measured qubits are split off into their own register, so registers stay
    small no matter how many operations a run performs.
    """

    def __init__(self):
        self._regs: dict[int, np.ndarray] = {}
        self._members: dict[int, list[int]] = {}
        self._where: dict[int, int] = {}
        self._next_pos = count()
        self._next_reg = count()

    # construction ---------------------------------------------------------

    def add(self, state: PureState | str) -> tuple[int, ...]:
        """Add a fresh register; returns the new positions in local order."""
        if isinstance(state, str):
            if state not in LABEL_VECTORS:
                raise QuantumStateError(f"unknown state label {state!r}")
            amps = LABEL_VECTORS[state].astype(complex)
        else:
            amps = state.amplitudes.copy()
        positions = tuple(next(self._next_pos) for _ in range(int(amps.size).bit_length() - 1))
        self._install(amps, list(positions))
        return positions

    def _install(self, amps: np.ndarray, members: list[int]) -> int:
        rid = next(self._next_reg)
        self._regs[rid] = amps
        self._members[rid] = members
        for p in members:
            self._where[p] = rid
        return rid

    def _drop(self, rid: int) -> None:
        del self._regs[rid]
        del self._members[rid]

    # inspection -----------------------------------------------------------

    def __contains__(self, position: int) -> bool:
        return position in self._where

    @property
    def positions(self) -> list[int]:
        return sorted(self._where)

    @property
    def register_ids(self) -> list[int]:
        return sorted(self._regs)

    def placement(self, position: int) -> tuple[int, int]:
        rid = self._rid(position)
        return rid, self._members[rid].index(position)

    def register_of(self, position: int) -> int:
        return self._rid(position)

    def members(self, rid: int) -> tuple[int, ...]:
        return tuple(self._members[rid])

    def state(self, rid: int) -> PureState:
        return PureState(self._regs[rid].copy())

    def state_of(self, positions: Sequence[int]) -> PureState:
        """State of exactly ``positions`` in that order.

        The positions must form a whole register, possibly after merging
        registers that are in a product state.
        """
        rids = {self._rid(p) for p in positions}
        members = [m for r in sorted(rids) for m in self._members[r]]
        if sorted(members) != sorted(positions):
            raise QuantumStateError("positions share a register with other qubits")
        amps = np.array([1], dtype=complex)
        for r in sorted(rids):
            amps = np.kron(amps, self._regs[r])
        return PureState(_reorder(amps, members, list(positions)))

    def _rid(self, position: int) -> int:
        try:
            return self._where[position]
        except KeyError:
            raise QuantumStateError(f"position {position} is not in the pool") from None

    def check_normalised(self, tol: float = TOL) -> bool:
        return all(abs(np.linalg.norm(v) - 1) <= tol for v in self._regs.values())

    # register algebra -----------------------------------------------------

    def _merge(self, positions: Iterable[int]) -> int:
        rids = sorted({self._rid(p) for p in positions})
        if len(rids) == 1:
            return rids[0]
        members: list[int] = []
        amps = np.array([1], dtype=complex)
        for r in rids:
            members += self._members[r]
            amps = np.kron(amps, self._regs[r])
        if len(members) > MAX_REGISTER_QUBITS:
            raise QuantumStateError(
                f"merged register would hold {len(members)} qubits "
                f"(limit {MAX_REGISTER_QUBITS})"
            )
        for r in rids:
            self._drop(r)
        return self._install(amps, members)

    def _targets_first(self, rid: int, targets: Sequence[int]) -> tuple[np.ndarray, list[int]]:
        members = self._members[rid]
        if members == list(targets):
            return self._regs[rid].reshape(-1, 1), []
        local = [members.index(p) for p in targets]
        n = len(members)
        psi = self._regs[rid].reshape((2,) * n)
        psi = np.moveaxis(psi, local, range(len(local)))
        rest = [m for m in members if m not in targets]
        return psi.reshape(2 ** len(local), -1), rest

    def apply_unitary(self, u: np.ndarray, positions: Sequence[int]) -> None:
        u = np.asarray(u, dtype=complex)
        if len(set(positions)) != len(positions):
            raise QuantumStateError("target positions must be distinct")
        if u.shape != (2 ** len(positions),) * 2:
            raise QuantumStateError("unitary size does not match target count")
        if not is_unitary(u):
            raise QuantumStateError("matrix is not unitary")
        rid = self._merge(positions)
        mat, rest = self._targets_first(rid, positions)
        out = (u @ mat).reshape(-1)
        order = list(positions) + rest
        self._regs[rid] = _reorder(out, order, self._members[rid])

    def apply_two_qubit_unitary(self, u: np.ndarray, positions: Sequence[int]) -> None:
        if len(positions) != 2:
            raise QuantumStateError("need exactly two positions")
        self.apply_unitary(u, positions)

    def probabilities(self, positions: Sequence[int], basis: Basis) -> dict[str, float]:
        """Outcome distribution for measuring ``positions`` in ``basis`` (no collapse)."""
        probs, _, _ = self._project(positions, basis, merge=False)
        return {l: float(p) for l, p in zip(basis.labels, probs)}

    def _project(self, positions: Sequence[int], basis: Basis, merge: bool = True):
        if basis.qubit_count != len(positions):
            raise QuantumStateError(
                f"basis {basis.name} measures {basis.qubit_count} qubit(s), "
                f"got {len(positions)} position(s)"
            )
        if len(set(positions)) != len(positions):
            raise QuantumStateError("target positions must be distinct")
        if merge:
            rid = self._merge(positions)
            mat, rest = self._targets_first(rid, positions)
        else:
            rids = sorted({self._rid(p) for p in positions})
            members = [m for r in rids for m in self._members[r]]
            amps = np.array([1], dtype=complex)
            for r in rids:
                amps = np.kron(amps, self._regs[r])
            local = [members.index(p) for p in positions]
            psi = np.moveaxis(amps.reshape((2,) * len(members)), local, range(len(local)))
            mat = psi.reshape(2 ** len(local), -1)
            rid, rest = None, [m for m in members if m not in positions]
        amps = basis.vectors.conj() @ mat
        probs = np.sum(np.abs(amps) ** 2, axis=1)
        return probs, amps, (rid, rest)

    def measure(self, positions: Sequence[int], basis: Basis, rng: Rng) -> str:
        """Projectively measure ``positions`` jointly; returns the outcome label.

        The measured qubits end up in their own register holding the basis
        element; the remaining qubits of the old register keep the
        conditional state.
        """
        positions = list(positions)
        probs, amps, (rid, rest) = self._project(positions, basis)
        k = rng.outcome(probs)
        self._drop(rid)
        self._install(basis.vectors[k].copy(), positions)
        if rest:
            cond = amps[k] / np.sqrt(probs[k])
            self._install(cond / np.linalg.norm(cond), rest)
        return basis.labels[k]

    def measure_position(self, position: int, basis: Basis, rng: Rng) -> str:
        if basis.qubit_count != 1:
            raise QuantumStateError("single-position measurement needs a one-qubit basis")
        return self.measure([position], basis, rng)

    def measure_register(self, rid: int, basis: Basis, rng: Rng) -> str:
        if rid not in self._regs:
            raise QuantumStateError(f"no register {rid}")
        return self.measure(self._members[rid], basis, rng)


def _reorder(amps: np.ndarray, have: list[int], want: list[int]) -> np.ndarray:
    if have == want:
        return amps
    n = len(have)
    psi = amps.reshape((2,) * n)
    psi = np.transpose(psi, [have.index(p) for p in want])
    return psi.reshape(-1)


def pool_of(labels: Iterable[str]) -> tuple[RegisterPool, list[tuple[int, ...]]]:
    """Pool holding one register per label, plus the positions of each."""
    pool = RegisterPool()
    return pool, [pool.add(label) for label in labels]
