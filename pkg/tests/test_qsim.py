import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsdc.qsim import (
    BASES,
    BELL,
    CNOT,
    LABEL_VECTORS,
    LABELS,
    PAULI_X,
    SINGLE_QUBIT_LABELS,
    TWO_QUBIT_LABELS,
    X,
    Z,
    ZZ,
    PureState,
    QuantumStateError,
    RegisterPool,
    born_distribution,
    state_from_label,
    states_equal_up_to_phase,
)
from qsdc.rng import Rng

S = 1 / np.sqrt(2)


def compatible_bases(label):
    return ("Z", "X") if label in SINGLE_QUBIT_LABELS else ("ZZ", "Bell")


# state_from_label ----------------------------------------------------------


def test_phi_plus_amplitudes():
    assert np.allclose(state_from_label("Phi+").amplitudes, [S, 0, 0, S], atol=1e-15)


def test_computational_label():
    assert np.array_equal(state_from_label("01").amplitudes, [0, 1, 0, 0])


def test_plus_amplitudes():
    assert np.allclose(state_from_label("+").amplitudes, [S, S], atol=1e-15)


def test_bell_and_x_definitions_exact():
    k = {l: state_from_label(l).amplitudes for l in ("00", "01", "10", "11", "0", "1")}
    assert np.allclose(state_from_label("Phi-").amplitudes, (k["00"] - k["11"]) * S)
    assert np.allclose(state_from_label("Psi+").amplitudes, (k["01"] + k["10"]) * S)
    assert np.allclose(state_from_label("Psi-").amplitudes, (k["01"] - k["10"]) * S)
    assert np.allclose(state_from_label("-").amplitudes, (k["0"] - k["1"]) * S)


@pytest.mark.parametrize("label", LABELS)
def test_every_label_unit_norm(label):
    amps = state_from_label(label).amplitudes
    assert amps.size in (2, 4)
    assert abs(np.linalg.norm(amps) - 1) < 1e-12


def test_unknown_label_rejected():
    with pytest.raises(QuantumStateError):
        state_from_label("Omega")


def test_pure_state_rejects_unnormalised():
    with pytest.raises(QuantumStateError):
        PureState(np.array([1, 1], dtype=complex))


# bases -----------------------------------------------------------------------


@pytest.mark.parametrize("name", list(BASES))
def test_basis_completeness(name):
    basis = BASES[name]
    assert np.allclose(basis.projector_sum(), np.eye(basis.dim), atol=1e-9)
    gram = basis.vectors.conj() @ basis.vectors.T
    assert np.allclose(gram, np.eye(basis.dim), atol=1e-9)


# born_distribution -------------------------------------------------------


def test_born_phi_plus_zz():
    d = born_distribution(state_from_label("Phi+"), ZZ)
    assert d == pytest.approx({"00": 0.5, "01": 0.0, "10": 0.0, "11": 0.5})


def test_born_01_bell():
    d = born_distribution(state_from_label("01"), BELL)
    assert d == pytest.approx({"Phi+": 0, "Phi-": 0, "Psi+": 0.5, "Psi-": 0.5})


def test_born_plus_x():
    assert born_distribution(state_from_label("+"), X) == pytest.approx({"+": 1.0, "-": 0.0})


def test_born_dimension_mismatch():
    with pytest.raises(QuantumStateError):
        born_distribution(state_from_label("0"), ZZ)


@pytest.mark.parametrize("label", LABELS)
def test_born_sums_to_one(label):
    for b in compatible_bases(label):
        assert sum(born_distribution(state_from_label(label), BASES[b]).values()) == pytest.approx(1, abs=1e-9)


# measure_register --------------------------------------------------------


def test_phi_plus_in_bell_is_eigenstate():
    for seed in range(50):
        pool = RegisterPool()
        pos = pool.add("Phi+")
        rid = pool.register_of(pos[0])
        assert pool.measure_register(rid, BELL, Rng(seed)) == "Phi+"


def test_phi_plus_in_zz_is_even_split():
    counts = {"00": 0, "11": 0}
    rng = Rng(3)
    for _ in range(4000):
        pool = RegisterPool()
        pos = pool.add("Phi+")
        counts[pool.measure(pos, ZZ, rng)] += 1
    assert counts["00"] / 4000 == pytest.approx(0.5, abs=0.03)


def test_ten_in_zz_is_eigenstate():
    pool = RegisterPool()
    pos = pool.add("10")
    assert pool.measure(pos, ZZ, Rng(0)) == "10"


def test_measure_register_size_mismatch():
    pool = RegisterPool()
    pos = pool.add("Phi+")
    with pytest.raises(QuantumStateError):
        pool.measure_register(pool.register_of(pos[0]), Z, Rng(0))


def test_register_replaced_by_basis_element():
    pool = RegisterPool()
    pos = pool.add("01")
    out = pool.measure(pos, BELL, Rng(5))
    assert states_equal_up_to_phase(pool.state_of(pos), state_from_label(out))


# measure_position -------------------------------------------------------


def test_partial_z_on_phi_plus():
    seen = set()
    for seed in range(40):
        pool = RegisterPool()
        a, b = pool.add("Phi+")
        assert pool.probabilities([a], Z) == pytest.approx({"0": 0.5, "1": 0.5})
        out = pool.measure_position(a, Z, Rng(seed))
        seen.add(out)
        expect = "00" if out == "0" else "11"
        assert states_equal_up_to_phase(pool.state_of([a, b]), state_from_label(expect))
    assert seen == {"0", "1"}


def _x_basis_oracle_phi_plus():
    # rewrite Phi+ in the X x X product basis by brute force
    plus, minus = LABEL_VECTORS["+"], LABEL_VECTORS["-"]
    phi = LABEL_VECTORS["Phi+"]
    return {
        (x, y): np.vdot(np.kron(vx, vy), phi)
        for x, vx in (("+", plus), ("-", minus))
        for y, vy in (("+", plus), ("-", minus))
    }


def test_partial_x_on_phi_plus():
    coeffs = _x_basis_oracle_phi_plus()
    # oracle: Phi+ = (|++> + |-->)/sqrt2
    assert abs(coeffs[("+", "+")]) ** 2 == pytest.approx(0.5)
    assert abs(coeffs[("+", "-")]) < 1e-12
    pool = RegisterPool()
    a, b = pool.add("Phi+")
    assert pool.probabilities([a], X)["+"] == pytest.approx(0.5)
    for seed in range(30):
        pool = RegisterPool()
        a, b = pool.add("Phi+")
        out = pool.measure_position(a, X, Rng(seed))
        post = np.kron(LABEL_VECTORS[out], LABEL_VECTORS[out])
        assert states_equal_up_to_phase(pool.state_of([a, b]), PureState(post))


def test_one_in_z():
    pool = RegisterPool()
    (q,) = pool.add("1")
    assert pool.measure_position(q, Z, Rng(0)) == "1"


def test_unmapped_position():
    with pytest.raises(QuantumStateError):
        RegisterPool().measure_position(7, Z, Rng(0))


def test_measure_position_needs_single_qubit_basis():
    pool = RegisterPool()
    a, _ = pool.add("Phi+")
    with pytest.raises(QuantumStateError):
        pool.measure_position(a, ZZ, Rng(0))


# unitaries ---------------------------------------------------------------


def test_cnot_makes_bell_pair():
    pool = RegisterPool()
    (a,) = pool.add("+")
    (b,) = pool.add("0")
    pool.apply_two_qubit_unitary(CNOT, [a, b])
    assert states_equal_up_to_phase(pool.state_of([a, b]), state_from_label("Phi+"))
    assert pool.register_of(a) == pool.register_of(b)


@pytest.mark.parametrize("label", TWO_QUBIT_LABELS)
def test_identity_leaves_state(label):
    pool = RegisterPool()
    pos = pool.add(label)
    pool.apply_two_qubit_unitary(np.eye(4), pos)
    assert states_equal_up_to_phase(pool.state_of(pos), state_from_label(label))


def test_x_on_first_qubit_of_phi_plus():
    oracle = np.kron(PAULI_X, np.eye(2)) @ LABEL_VECTORS["Phi+"]
    assert states_equal_up_to_phase(PureState(oracle), state_from_label("Psi+"))
    pool = RegisterPool()
    a, b = pool.add("Phi+")
    pool.apply_two_qubit_unitary(np.kron(PAULI_X, np.eye(2)), [a, b])
    assert states_equal_up_to_phase(pool.state_of([a, b]), state_from_label("Psi+"))


def test_unitary_on_swapped_positions():
    # CNOT with control b, target a acting on |0>_a |1>_b gives |11>
    pool = RegisterPool()
    a, b = pool.add("01")
    pool.apply_two_qubit_unitary(CNOT, [b, a])
    assert states_equal_up_to_phase(pool.state_of([a, b]), state_from_label("11"))


def test_non_unitary_rejected():
    pool = RegisterPool()
    pos = pool.add("00")
    with pytest.raises(QuantumStateError):
        pool.apply_two_qubit_unitary(np.ones((4, 4)), pos)


def test_unitary_needs_distinct_positions():
    pool = RegisterPool()
    a, _ = pool.add("00")
    with pytest.raises(QuantumStateError):
        pool.apply_two_qubit_unitary(CNOT, [a, a])


# equality ----------------------------------------------------------------


def test_global_phase_equal():
    minus = state_from_label("-")
    assert states_equal_up_to_phase(minus, PureState(-minus.amplitudes))


def test_orthogonal_not_equal():
    assert not states_equal_up_to_phase(state_from_label("0"), state_from_label("1"))
    assert not states_equal_up_to_phase(state_from_label("Phi+"), state_from_label("Phi-"))


def test_equality_dimension_mismatch():
    with pytest.raises(QuantumStateError):
        states_equal_up_to_phase(state_from_label("0"), state_from_label("00"))


# pool invariants ---------------------------------------------------------


def test_placement_injective_and_scattered():
    pool = RegisterPool()
    pairs = [pool.add("Phi+") for _ in range(3)]
    seen = set()
    for pos in pool.positions:
        rid, local = pool.placement(pos)
        assert (rid, local) not in seen
        seen.add((rid, local))
    a, b = pairs[1]
    assert pool.register_of(a) == pool.register_of(b)
    assert pool.placement(a)[1] == 0 and pool.placement(b)[1] == 1


def test_register_cap_enforced():
    pool = RegisterPool()
    regs = [pool.add("Phi+") for _ in range(3)]
    pool.apply_two_qubit_unitary(CNOT, [regs[0][0], regs[1][0]])
    with pytest.raises(QuantumStateError):
        pool.apply_two_qubit_unitary(CNOT, [regs[0][1], regs[2][0]])


ops = st.lists(
    st.tuples(st.sampled_from(["measure_z", "measure_x", "cnot", "x", "bell"]), st.integers(0, 5), st.integers(0, 5)),
    max_size=25,
)


@settings(max_examples=60, deadline=None)
@given(labels=st.lists(st.sampled_from(LABELS), min_size=2, max_size=4), program=ops, seed=st.integers(0, 2**32))
def test_pool_stays_normalised(labels, program, seed):
    pool = RegisterPool()
    for label in labels:
        pool.add(label)
    positions = pool.positions
    rng = Rng(seed)
    for op, i, j in program:
        a, b = positions[i % len(positions)], positions[j % len(positions)]
        try:
            if op == "measure_z":
                pool.measure_position(a, Z, rng)
            elif op == "measure_x":
                pool.measure_position(a, X, rng)
            elif op == "x":
                pool.apply_unitary(PAULI_X, [a])
            elif op == "cnot" and a != b:
                pool.apply_two_qubit_unitary(CNOT, [a, b])
            elif op == "bell" and a != b:
                pool.measure([a, b], BELL, rng)
        except QuantumStateError as exc:
            assert "limit" in str(exc)
        assert pool.check_normalised()
        for pos in pool.positions:
            rid, local = pool.placement(pos)
            assert pool.members(rid)[local] == pos


@settings(max_examples=40, deadline=None)
@given(label=st.sampled_from(LABELS), seed=st.integers(0, 2**32))
def test_repeat_measurement_stable(label, seed):
    rng = Rng(seed)
    for b in compatible_bases(label):
        pool = RegisterPool()
        pos = pool.add(label)
        first = pool.measure(pos, BASES[b], rng)
        assert pool.measure(pos, BASES[b], rng) == first


@pytest.mark.parametrize("label", ["Phi+", "Phi-", "Psi+", "Psi-"])
def test_partial_measurement_reproduces_joint_zz(label):
    joint = born_distribution(state_from_label(label), ZZ)
    # exhaustive over first-qubit outcome, then conditional second outcome
    seq = {}
    for first in ("0", "1"):
        pool = RegisterPool()
        a, b = pool.add(label)
        p1 = pool.probabilities([a], Z)[first]
        if p1 == 0:
            continue
        from qsdc.rng import ScriptedRng

        pool.measure_position(a, Z, ScriptedRng(outcomes=[Z.index(first)]))
        for second, p2 in pool.probabilities([b], Z).items():
            seq[first + second] = p1 * p2
    for outcome, p in joint.items():
        assert seq.get(outcome, 0.0) == pytest.approx(p, abs=1e-12)


# Born-rule sampling ---------------------------------------------------------

BORN_CASES = [(label, b) for label in LABELS for b in compatible_bases(label)]


@pytest.mark.parametrize("label,basis", BORN_CASES)
def test_born_rule_frequencies(label, basis):
    shots = 100_000
    dist = born_distribution(state_from_label(label), BASES[basis])
    draws = Rng(BORN_CASES.index((label, basis))).outcomes(list(dist.values()), shots)
    freq = np.bincount(draws, minlength=len(dist)) / shots
    for f, p in zip(freq, dist.values()):
        assert abs(f - p) <= 0.01
        if p == 0:
            assert f == 0


@pytest.mark.parametrize("label,basis", BORN_CASES[::3])
def test_measure_uses_the_same_sampler(label, basis):
    # pool.measure draws exactly what the vectorised sampler would draw
    dist = born_distribution(state_from_label(label), BASES[basis])
    expected = Rng(17).outcomes(list(dist.values()), 500)
    rng = Rng(17)
    got = []
    for _ in range(500):
        pool = RegisterPool()
        got.append(BASES[basis].index(pool.measure(pool.add(label), BASES[basis], rng)))
    assert got == list(expected)
