"""Eavesdropper strategies, written as channel interceptors.

Every attack sees only a :class:`~qsdc.channel.Transit` (the pool and the
slot order) plus whatever was announced publicly. None of them can reach
the senders' private records.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .channel import Transit, as_bits
from .qsim import BELL, PAULI_X, TOL, X, Z, ZZ, Basis, QuantumStateError, is_unitary
from .rng import Rng

# ---------------------------------------------------------------------------
# original protocol


def eve_bit_from_outcome(basis: str | Basis, outcome: str) -> int:
    """Bit of Eve's string ``m`` for one pair measurement."""
    name = basis.name if isinstance(basis, Basis) else basis
    table = {
        "ZZ": {"01": 0, "10": 0, "00": 1, "11": 1},
        "Bell": {"Psi+": 0, "Psi-": 0, "Phi+": 1, "Phi-": 1},
    }
    try:
        return table[name][outcome]
    except KeyError:
        raise ValueError(f"outcome {outcome!r} cannot come from basis {name!r}") from None


@dataclass
class EveRecordYzcss:
    bases: list[str] = field(default_factory=list)
    outcomes: list[str] = field(default_factory=list)
    m: list[int] = field(default_factory=list)
    recovered_message: list[int] | None = None
    recovered_id_a: list[int] | None = None

    @property
    def chunks(self) -> list[tuple[int, int]]:
        return [(self.m[2 * i], self.m[2 * i + 1]) for i in range(len(self.m) // 2)]


def _measure_pairs(transit: Transit, rng: Rng, record: EveRecordYzcss) -> list[str]:
    outcomes = []
    for slot in transit.slots:
        basis = ZZ if rng.bit() == 0 else BELL
        outcome = transit.pool.measure(slot, basis, rng)
        record.bases.append(basis.name)
        record.outcomes.append(outcome)
        record.m.append(eve_bit_from_outcome(basis, outcome))
        outcomes.append(outcome)
    return outcomes


def intercept_resend_yzcss(transit: Transit, rng: Rng) -> tuple[Transit, EveRecordYzcss]:
    """Measure each pair in a random basis and forward a same-class state.

    A product outcome in ZZ or an entangled outcome in Bell is forwarded as
    the collapsed pair itself. Otherwise Eve knows she picked the wrong
    basis and forwards a random member of the other class.
    """
    record = EveRecordYzcss()
    pool = transit.pool
    slots = []
    for slot in transit.slots:
        basis = ZZ if rng.bit() == 0 else BELL
        outcome = pool.measure(slot, basis, rng)
        record.bases.append(basis.name)
        record.outcomes.append(outcome)
        record.m.append(eve_bit_from_outcome(basis, outcome))
        if outcome in ("00", "11"):
            slot = pool.add(("Phi+", "Phi-")[rng.bit()])
        elif outcome in ("Psi+", "Psi-"):
            slot = pool.add(("01", "10")[rng.bit()])
        slots.append(slot)
    return Transit(pool, slots), record


def eve_recover(m: Sequence[int], announced_sa: Sequence[str]) -> tuple[list[int], list[int]]:
    """Recover ``M`` and ``ID_A`` from Eve's string and Alice's decoy announcement.

    Chunk ``i`` of ``m`` always holds the bits of ``M_i`` and ``ID_A_i`` in
    some order. Equal bits settle both; unequal bits are settled by the
    class of the announced decoy state.
    """
    m = as_bits(m)
    if len(m) % 2:
        raise ValueError("m must have even length")
    n = len(m) // 2
    message, id_a = [], []
    for i in range(n):
        a, b = m[2 * i], m[2 * i + 1]
        if a == b:
            message.append(a)
            id_a.append(a)
            continue
        if len(announced_sa) != n:
            raise ValueError("need the announced decoy state for every unequal chunk")
        if announced_sa[i] in ("01", "10"):
            id_a.append(0)
            message.append(1)
        else:
            id_a.append(1)
            message.append(0)
    return message, id_a


def impersonate_bob_yzcss(
    transit: Transit, announce: Callable[[], Sequence[str]], rng: Rng
) -> EveRecordYzcss:
    """Eve stands in for Bob, measures everything, then asks for the decoy states.

    Alice has no way to check who asked, so nothing here can flag Eve.
    """
    record = EveRecordYzcss()
    _measure_pairs(transit, rng, record)
    announced = list(announce()) if any(a != b for a, b in record.chunks) else []
    record.recovered_message, record.recovered_id_a = eve_recover(record.m, announced)
    return record


# ---------------------------------------------------------------------------
# modified protocol

_BIT_OF = {"0": 0, "+": 0, "1": 1, "-": 1}


@dataclass
class EveRecordSingles:
    bases: list[str] = field(default_factory=list)
    outcomes: list[str] = field(default_factory=list)

    def message_guess(self, n: int) -> list[int]:
        """Pair-mode guess: consecutive outcomes paired in transmission order.

        Equal values read as 1 (like 00/11), unequal as 0. Eve does not know
        the pairing, so this is as good as any fixed rule.
        """
        vals = [_BIT_OF[o] for o in self.outcomes]
        guess = [int(vals[2 * i] == vals[2 * i + 1]) for i in range(min(n, len(vals) // 2))]
        return guess + [0] * (n - len(guess))


def intercept_resend_modified(transit: Transit, rng: Rng) -> tuple[Transit, EveRecordSingles]:
    record = EveRecordSingles()
    for slot in transit.slots:
        basis = Z if rng.bit() == 0 else X
        record.bases.append(basis.name)
        record.outcomes.append(transit.pool.measure(slot, basis, rng))
    return transit, record


def guess_info_bits(k: int, rng: Rng) -> list[int]:
    """Impostor Bob's answer at authentication: uniformly random info bits.

    Eve does not know where the decoys sit or which basis each uses, so a
    coin flip per bit is all her measurements buy her. ``k`` is handed to
    her for free, which only helps her.
    """
    return rng.bits(k)


def dos(transit: Transit, p: float, rng: Rng) -> Transit:
    """Flip each physical qubit with probability ``p``."""
    if not 0 <= p <= 1:
        raise ValueError("p must be in [0, 1]")
    for q in transit.qubits():
        if rng.random() < p:
            transit.pool.apply_unitary(PAULI_X, [q])
    return transit


def mitm(transit: Transit, rng: Rng) -> tuple[Transit, list[tuple[int, ...]]]:
    """Keep every incoming slot and forward fresh random states in their place."""
    kept = list(transit.slots)
    pair_states = ("01", "10", "Phi+", "Phi-")
    single_states = ("0", "1", "+", "-")
    slots = []
    for slot in kept:
        choices = single_states if len(slot) == 1 else pair_states
        slots.append(transit.pool.add(choices[rng.index(4)]))
    return Transit(transit.pool, slots), kept


# ---------------------------------------------------------------------------
# entangle-measure

_KET0 = np.array([1, 0], dtype=complex)
_KET1 = np.array([0, 1], dtype=complex)


@dataclass(frozen=True)
class EntangleParams:
    """Coefficients of ``U_E`` acting on ``|x>|E>`` with ``|E> = |0>``.

    ``U_E|0>|E> = a0|0>|E00> + b0|1>|E01>`` and
    ``U_E|1>|E> = a1|0>|E10> + b1|1>|E11>``. Construction rejects
    coefficients violating the unitarity conditions.
    """

    alpha0: complex
    beta0: complex
    alpha1: complex
    beta1: complex
    e00: np.ndarray = field(default_factory=lambda: _KET0.copy())
    e01: np.ndarray = field(default_factory=lambda: _KET0.copy())
    e10: np.ndarray = field(default_factory=lambda: _KET0.copy())
    e11: np.ndarray = field(default_factory=lambda: _KET0.copy())
    name: str = "custom"

    def __post_init__(self):
        a0, b0, a1, b1 = self.alpha0, self.beta0, self.alpha1, self.beta1
        if abs(abs(a0) ** 2 + abs(b0) ** 2 - 1) > TOL:
            raise ValueError("|alpha0|^2 + |beta0|^2 must equal 1")
        if abs(abs(a1) ** 2 + abs(b1) ** 2 - 1) > TOL:
            raise ValueError("|alpha1|^2 + |beta1|^2 must equal 1")
        if abs(a0 * np.conj(a1) + b0 * np.conj(b1)) > TOL:
            raise ValueError("alpha0 alpha1* + beta0 beta1* must vanish")
        for name in ("e00", "e01", "e10", "e11"):
            v = np.asarray(getattr(self, name), dtype=complex)
            if v.shape != (2,) or abs(np.linalg.norm(v) - 1) > TOL:
                raise ValueError(f"ancilla state {name} must be a unit 2-vector")
            object.__setattr__(self, name, v)

    @property
    def predicted_z_error(self) -> float:
        return float(abs(self.beta0) ** 2)

    def x_ancillas(self) -> dict[str, np.ndarray]:
        """Unnormalised ancilla states multiplying |+> and |-> after ``U_E``."""
        a0, b0, a1, b1 = self.alpha0, self.beta0, self.alpha1, self.beta1
        t00, t01 = a0 * self.e00, b0 * self.e01
        t10, t11 = a1 * self.e10, b1 * self.e11
        s = 1 / np.sqrt(2)
        return {
            "++": s * (t00 + t01 + t10 + t11),
            "+-": s * (t00 - t01 + t10 - t11),
            "-+": s * (t00 + t01 - t10 - t11),
            "--": s * (t00 - t01 - t10 + t11),
        }

    @property
    def predicted_x_error(self) -> float:
        """Mean wrong-outcome probability over |+> and |-> decoys."""
        e = self.x_ancillas()
        return float((np.linalg.norm(e["+-"]) ** 2 + np.linalg.norm(e["-+"]) ** 2) / 4)

    def unitary(self) -> np.ndarray:
        """Full 4x4 unitary on (system, ancilla); ancilla-|1> columns completed orthonormally."""
        c0 = self.alpha0 * np.kron(_KET0, self.e00) + self.beta0 * np.kron(_KET1, self.e01)
        c2 = self.alpha1 * np.kron(_KET0, self.e10) + self.beta1 * np.kron(_KET1, self.e11)
        if abs(np.vdot(c0, c2)) > TOL:
            raise ValueError("ancilla states make U_E non-unitary for these coefficients")
        cols = [c0, c2]
        for e in np.eye(4, dtype=complex):
            v = e - sum(np.vdot(c, e) * c for c in cols)
            if np.linalg.norm(v) > 1e-6:
                cols.append(v / np.linalg.norm(v))
            if len(cols) == 4:
                break
        u = np.column_stack([cols[0], cols[2], cols[1], cols[3]])
        if not is_unitary(u):
            raise QuantumStateError("failed to complete U_E")
        return u


def identity_params() -> EntangleParams:
    return EntangleParams(1, 0, 0, 1, name="identity")


def cnot_params() -> EntangleParams:
    return EntangleParams(1, 0, 0, 1, _KET0, _KET1, _KET0, _KET1, name="cnot")


def rotation_params(theta: float) -> EntangleParams:
    c, s = np.cos(theta), np.sin(theta)
    return EntangleParams(c, s, -s, c, _KET0, _KET1, _KET0, _KET1, name=f"rot:{theta:g}")


def params_from_id(ident: str) -> EntangleParams:
    """``identity``, ``cnot`` or ``rot:<theta in radians>``."""
    if ident == "identity":
        return identity_params()
    if ident == "cnot":
        return cnot_params()
    if ident.startswith("rot:"):
        return rotation_params(float(ident[4:]))
    raise ValueError(f"unknown U_E id {ident!r}")


def entangle_measure(transit: Transit, params: EntangleParams) -> tuple[Transit, list[int]]:
    """Attach a fresh |0> ancilla to every transmitted qubit and apply ``U_E``.

    Returns the forwarded transit and Eve's ancilla positions, in the same
    order as the qubits they are attached to.
    """
    u = params.unitary()
    ancillas = []
    for q in transit.qubits():
        (anc,) = transit.pool.add("0")
        transit.pool.apply_two_qubit_unitary(u, [q, anc])
        ancillas.append(anc)
    return transit, ancillas


def read_ancillas(transit: Transit, ancillas: Sequence[int], rng: Rng) -> EveRecordSingles:
    """Eve's later Z readout of her ancillas."""
    record = EveRecordSingles()
    for a in ancillas:
        record.bases.append("Z")
        record.outcomes.append(transit.pool.measure([a], Z, rng))
    return record
