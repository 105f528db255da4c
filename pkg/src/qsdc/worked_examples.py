"""The three worked examples, replayed with their fixed random choices."""

from __future__ import annotations

from dataclasses import dataclass

from .adversaries import impersonate_bob_yzcss
from .channel import bit_string
from .modified import (
    ModifiedInputs,
    ModifiedSession,
    apply_permutation,
    auth_decoy_positions,
    compute_lambda,
    insert_auth_decoys,
)
from .qsim import BELL, ZZ
from .rng import ScriptedRng
from .yzcss import YzcssInputs, alice_encode_yzcss

YZCSS_INPUTS = dict(message="10110", id_a="01101", id_b="01001")
# encoding choices: message pairs first, then identity pairs (0 = first option)
YZCSS_CHOICES = [0, 0, 0, 1, 0] + [1, 1, 1, 0, 0]
YZCSS_EXPECTED_S = ["10", "Phi+", "01", "Phi-", "Phi-", "Phi+", "01", "Phi-", "01", "Phi+"]

EVE_BASES = ["ZZ", "ZZ", "Bell", "ZZ", "Bell", "Bell", "Bell", "ZZ", "ZZ", "Bell"]
EVE_OUTCOMES = ["10", "00", "Psi-", "11", "Phi-", "Phi+", "Psi+", "11", "01", "Phi+"]
EVE_EXPECTED_M = "0101110101"

MODIFIED_INPUTS = dict(message="1011010", id_a="011", id_b="010")
MODIFIED_MESSAGE_CHOICES = [0, 0, 0, 1, 0, 0, 1]
MODIFIED_AUTH_CHOICES = [0, 1, 1]
# Q_M listed as (pair, half), both 1-based
MODIFIED_Q_M = [(6, 1), (4, 2), (2, 2), (4, 1), (3, 2), (1, 1), (2, 1),
                (7, 1), (1, 2), (5, 1), (6, 2), (3, 1), (5, 2), (7, 2)]


def modified_example_permutation() -> list[int]:
    pi = [0] * len(MODIFIED_Q_M)
    for j, (pair, half) in enumerate(MODIFIED_Q_M):
        pi[2 * (pair - 1) + (half - 1)] = j
    return pi


@dataclass
class ExampleResult:
    name: str
    ok: bool
    detail: str


def example_yzcss_sequence() -> ExampleResult:
    rng = ScriptedRng(bits=YZCSS_CHOICES, strict=True)
    transit, record = alice_encode_yzcss(YzcssInputs(**YZCSS_INPUTS), rng)
    ok = (
        record.sequence_states == YZCSS_EXPECTED_S
        and record.message_states == ["Phi+", "01", "Phi+", "Phi-", "01"]
        and record.auth_states == ["10", "Phi-", "Phi-", "01", "Phi+"]
        and [s + 1 for s in record.decoy_slots] == [1, 4, 5, 7, 10]
    )
    return ExampleResult("yzcss-sequence", ok, "S = " + ", ".join(record.sequence_states))


def example_impersonation() -> ExampleResult:
    transit, record = alice_encode_yzcss(
        YzcssInputs(**YZCSS_INPUTS), ScriptedRng(bits=YZCSS_CHOICES, strict=True)
    )
    basis_bits = [0 if b == "ZZ" else 1 for b in EVE_BASES]
    outcome_idx = [
        (ZZ if b == "ZZ" else BELL).index(o) for b, o in zip(EVE_BASES, EVE_OUTCOMES)
    ]
    eve_draws = ScriptedRng(bits=basis_bits, outcomes=outcome_idx, strict=True)
    eve = impersonate_bob_yzcss(transit, lambda: record.auth_states, eve_draws)
    m = bit_string(eve.m)
    ok = (
        eve.bases == EVE_BASES
        and eve.outcomes == EVE_OUTCOMES
        and m == EVE_EXPECTED_M
        and bit_string(eve.recovered_message) == "10110"
        and bit_string(eve.recovered_id_a) == "01101"
    )
    detail = (
        f"m = {m}, M = {bit_string(eve.recovered_message)}, "
        f"ID_A = {bit_string(eve.recovered_id_a)}"
    )
    return ExampleResult("yzcss-impersonation", ok, detail)


def example_modified_layout() -> ExampleResult:
    inputs = ModifiedInputs(**MODIFIED_INPUTS)
    pi = modified_example_permutation()
    alice = ScriptedRng(bits=MODIFIED_MESSAGE_CHOICES + MODIFIED_AUTH_CHOICES, strict=True)
    session = ModifiedSession(inputs, ScriptedRng(), channel_decoy_count=0, alice_rng=alice)
    session.prepare(pi=pi)
    layout = session.layout

    lam = compute_lambda(inputs.n, inputs.k)
    q_m = apply_permutation([f"S{i // 2 + 1}^{i % 2 + 1}" for i in range(14)], pi)
    s = insert_auth_decoys(q_m, layout.auth_states, inputs.id_b, lam)
    expected = (
        ["0"] + [f"S{p}^{h}" for p, h in MODIFIED_Q_M[:8]] + ["-", "-"]
        + [f"S{p}^{h}" for p, h in MODIFIED_Q_M[8:]]
    )
    positions = [p + 1 for p in auth_decoy_positions(inputs.k, lam, inputs.id_b)]
    ok = (
        lam == 4
        and layout.message_states == ["Phi+", "01", "Phi+", "Phi-", "01", "Phi+", "10"]
        and layout.auth_states == ["0", "-", "-"]
        and s == expected
        and positions == [1, 10, 11]
        and [p + 1 for p in layout.auth_positions] == positions
    )
    return ExampleResult("modified-layout", ok, f"lambda = {lam}, decoy positions = {positions}")


def verify_worked_examples() -> list[ExampleResult]:
    return [example_yzcss_sequence(), example_impersonation(), example_modified_layout()]
