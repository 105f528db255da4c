"""The original YZCSS direct-communication protocol.

Alice encodes every message bit and every bit of her identity into a
two-qubit state, slots each identity pair before or after the matching
message pair according to Bob's identity, and sends the whole sequence of
2N pairs. Bob measures the identity pairs in the basis fixed by Alice's
identity, the message pairs in a random basis, and the identity pairs are
then used as a security check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from .channel import Channel, ProtocolError, Transcript, Transit, as_bits, passthrough
from .qsim import BELL, ZZ, Basis, RegisterPool
from .rng import Rng

# bit -> the two equally likely encodings
PAIR_ENCODING: dict[int, tuple[str, str]] = {0: ("01", "10"), 1: ("Phi+", "Phi-")}

_DECODE = {
    "01": 0, "10": 0, "Psi+": 0, "Psi-": 0,
    "00": 1, "11": 1, "Phi+": 1, "Phi-": 1,
}

DEFAULT_THRESHOLD = 0.05
DEFAULT_INTEGRITY_FRACTION = 0.1


def decode_bit(outcome: str) -> int:
    """Message bit for a two-qubit outcome, whichever basis produced it."""
    try:
        return _DECODE[outcome]
    except KeyError:
        raise ValueError(f"{outcome!r} is not a two-qubit outcome label") from None


def encode_pair(bit: int, rng: Rng) -> str:
    return PAIR_ENCODING[bit][rng.bit()]


def decoy_slots_yzcss(id_b: str | Sequence[int]) -> list[int]:
    """0-based slots of the identity pairs: ``2i`` if ``ID_B[i] == 0`` else ``2i + 1``."""
    return [2 * i + b for i, b in enumerate(as_bits(id_b))]


@dataclass
class YzcssInputs:
    message: list[int]
    id_a: list[int]
    id_b: list[int]

    def __post_init__(self):
        self.message = as_bits(self.message)
        self.id_a = as_bits(self.id_a)
        self.id_b = as_bits(self.id_b)
        n = len(self.message)
        if n < 1:
            raise ValueError("message must have at least one bit")
        if len(self.id_a) != n or len(self.id_b) != n:
            raise ValueError("YZCSS needs |ID_A| = |ID_B| = |M|")

    @property
    def n(self) -> int:
        return len(self.message)


@dataclass
class AliceRecordYzcss:
    """Alice's private view of what she sent."""

    message_states: list[str]
    auth_states: list[str]
    decoy_slots: list[int]
    message_slots: list[int]
    sequence_states: list[str]


def alice_encode_yzcss(inputs: YzcssInputs, rng: Rng) -> tuple[Transit, AliceRecordYzcss]:
    """Prepare the 2N-pair sequence ``S``.

    Draw order is all message choices first, then all identity choices.
    """
    s_m = [encode_pair(b, rng) for b in inputs.message]
    s_a = [encode_pair(b, rng) for b in inputs.id_a]
    decoys = decoy_slots_yzcss(inputs.id_b)
    states: list[str] = []
    for i, b in enumerate(inputs.id_b):
        states += [s_a[i], s_m[i]] if b == 0 else [s_m[i], s_a[i]]
    pool = RegisterPool()
    transit = Transit(pool, [pool.add(label) for label in states])
    decoy_set = set(decoys)
    record = AliceRecordYzcss(
        message_states=s_m,
        auth_states=s_a,
        decoy_slots=decoys,
        message_slots=[j for j in range(2 * inputs.n) if j not in decoy_set],
        sequence_states=states,
    )
    return transit, record


@dataclass
class BobYzcssResult:
    decoy_outcomes: list[str]
    decoy_bases: list[str]
    message_outcomes: list[str]
    message_bases: list[str]
    bits: list[int]


def bob_run_yzcss(transit: Transit, id_a: Sequence[int], id_b: Sequence[int], rng: Rng) -> BobYzcssResult:
    id_a, id_b = as_bits(id_a), as_bits(id_b)
    if len(transit) != 2 * len(id_b):
        raise ProtocolError(f"expected {2 * len(id_b)} pairs, received {len(transit)}")
    decoys = decoy_slots_yzcss(id_b)
    decoy_set = set(decoys)
    decoy_bases = [ZZ if b == 0 else BELL for b in id_a]
    decoy_outcomes = [
        transit.pool.measure(transit.slots[slot], basis, rng)
        for slot, basis in zip(decoys, decoy_bases)
    ]
    message_outcomes, message_bases = [], []
    for slot in range(len(transit)):
        if slot in decoy_set:
            continue
        basis = ZZ if rng.bit() == 0 else BELL
        message_bases.append(basis.name)
        message_outcomes.append(transit.pool.measure(transit.slots[slot], basis, rng))
    return BobYzcssResult(
        decoy_outcomes=decoy_outcomes,
        decoy_bases=[b.name for b in decoy_bases],
        message_outcomes=message_outcomes,
        message_bases=message_bases,
        bits=[decode_bit(o) for o in message_outcomes],
    )


def security_check_yzcss(
    announced: Sequence[str], outcomes: Sequence[str], threshold: float = DEFAULT_THRESHOLD
) -> tuple[float, str]:
    """Exact-label comparison of announced decoy states with Bob's outcomes."""
    if len(announced) != len(outcomes):
        raise ValueError("announcement and outcomes differ in length")
    if not announced:
        return 0.0, "continue"
    errors = sum(a != o for a, o in zip(announced, outcomes))
    rate = errors / len(announced)
    return rate, "abort" if rate > threshold else "continue"


def integrity_check(
    sent: Sequence[int], received: Sequence[int], fraction: float, rng: Rng
) -> tuple[list[int], int]:
    """Publicly compare a random ``fraction`` of message positions.

    Returns the compared positions and the mismatch count. At least one
    position is compared whenever ``fraction > 0``.
    """
    n = len(sent)
    if fraction <= 0 or n == 0:
        return [], 0
    count = min(n, max(1, round(fraction * n)))
    positions = rng.subset(n, count)
    return positions, sum(sent[p] != received[p] for p in positions)


@dataclass
class YzcssTranscript:
    announced_sa: list[str]
    decoy_outcomes: list[str]
    message_outcomes: list[str]
    error_rate: float
    verdict: str
    delivered: list[int] | None
    integrity_positions: list[int] = field(default_factory=list)
    integrity_mismatches: int = 0
    public: Transcript = field(default_factory=Transcript)


def run_yzcss(
    inputs: YzcssInputs,
    rng: Rng,
    channel: Channel = passthrough,
    threshold: float = DEFAULT_THRESHOLD,
    integrity_fraction: float = DEFAULT_INTEGRITY_FRACTION,
    on_announce_sa: Callable[[list[str]], None] | None = None,
) -> tuple[YzcssTranscript, AliceRecordYzcss, BobYzcssResult]:
    """One session over ``channel``; measurements all happen before the check.

    ``on_announce_sa`` lets a listener see Alice's public decoy announcement.
    """
    alice_rng, bob_rng = rng.spawn(1), rng.spawn(2)
    transit, record = alice_encode_yzcss(inputs, alice_rng)
    received = channel(transit)
    bob = bob_run_yzcss(received, inputs.id_a, inputs.id_b, bob_rng)

    public = Transcript()
    public.announce("security", "bob", "request_decoy_states", None)
    public.announce("security", "alice", "decoy_states", record.auth_states)
    if on_announce_sa is not None:
        on_announce_sa(list(record.auth_states))
    rate, verdict = security_check_yzcss(record.auth_states, bob.decoy_outcomes, threshold)
    public.announce("security", "bob", "verdict", {"error_rate": rate, "verdict": verdict})

    result = YzcssTranscript(
        announced_sa=list(record.auth_states),
        decoy_outcomes=bob.decoy_outcomes,
        message_outcomes=bob.message_outcomes,
        error_rate=rate,
        verdict=verdict,
        delivered=None,
        public=public,
    )
    if verdict == "continue":
        positions, mismatches = integrity_check(
            inputs.message, bob.bits, integrity_fraction, bob_rng.spawn(3)
        )
        public.announce("integrity", "bob", "integrity_positions", positions)
        public.announce("integrity", "alice", "integrity_bits", [inputs.message[p] for p in positions])
        result.integrity_positions = positions
        result.integrity_mismatches = mismatches
        result.delivered = list(bob.bits)
    return result, record, bob
