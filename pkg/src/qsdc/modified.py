"""The modified protocol with a secret permutation and mutual authentication.

Layout of the transmitted sequence, built by Alice in three layers:

1. message pairs are flattened to 2N single qubits and shuffled by a
   secret permutation ``pi`` (``Q_M``);
2. k single-photon authentication decoys, one per identity bit, are
   inserted at positions fixed by ``ID_B`` and ``lam = floor(2N / k)``;
3. channel decoys drawn from {0, 1, +, -} are inserted at random positions.

All positions are 0-based. ``pi[i]`` is the ``Q_M`` position of flattened
message qubit ``i`` (qubit ``2j`` and ``2j + 1`` are the halves of pair ``j``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence, TypeVar

from .channel import Channel, ProtocolError, Transcript, Transit, as_bits, passthrough
from .qsim import BELL, X, Z, ZZ, RegisterPool
from .rng import Rng
from .yzcss import DEFAULT_INTEGRITY_FRACTION, DEFAULT_THRESHOLD, decode_bit, encode_pair, integrity_check

T = TypeVar("T")

AUTH_ENCODING: dict[int, tuple[str, str]] = {0: ("0", "1"), 1: ("+", "-")}
CHANNEL_DECOY_STATES = ("0", "1", "+", "-")
BASIS_OF_STATE = {"0": "Z", "1": "Z", "+": "X", "-": "X"}
_INFO = {"0": 0, "+": 0, "1": 1, "-": 1}


def encode_message_pairs(message: str | Sequence[int], rng: Rng) -> list[str]:
    return [encode_pair(b, rng) for b in as_bits(message)]


def check_permutation(pi: Sequence[int]) -> list[int]:
    pi = [int(p) for p in pi]
    if sorted(pi) != list(range(len(pi))):
        raise ValueError("permutation is not a bijection on its index set")
    return pi


def apply_permutation(items: Sequence[T], pi: Sequence[int]) -> list[T]:
    """Place ``items[i]`` at position ``pi[i]``."""
    pi = check_permutation(pi)
    if len(pi) != len(items):
        raise ValueError("permutation size does not match sequence")
    out: list = [None] * len(items)
    for i, j in enumerate(pi):
        out[j] = items[i]
    return out


def invert_permutation(pi: Sequence[int]) -> list[int]:
    pi = check_permutation(pi)
    inv = [0] * len(pi)
    for i, j in enumerate(pi):
        inv[j] = i
    return inv


def prepare_auth_decoys(id_a: str | Sequence[int], rng: Rng) -> list[str]:
    return [AUTH_ENCODING[b][rng.bit()] for b in as_bits(id_a)]


def compute_lambda(n: int, k: int) -> int:
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= N, got k={k}, N={n}")
    return (2 * n) // k


def _auth_gaps(k: int, lam: int, id_b: Sequence[int]) -> list[int]:
    # gap g = "after the first g qubits of Q_M"
    id_b = as_bits(id_b)
    if len(id_b) != k:
        raise ValueError("ID_B must have k bits")
    return [lam * i if b == 0 else lam * (i + 1) for i, b in enumerate(id_b)]


def auth_decoy_positions(k: int, lam: int, id_b: str | Sequence[int]) -> list[int]:
    """Positions of the authentication decoys inside ``S`` (before channel decoys).

    Gaps are non-decreasing in ``i`` and ties keep lower ``i`` first, so
    decoy ``i`` lands at its gap plus the ``i`` decoys placed before it.
    """
    return [g + i for i, g in enumerate(_auth_gaps(k, lam, id_b))]


def insert_auth_decoys(q_m: Sequence[T], s_a: Sequence[T], id_b: str | Sequence[int], lam: int) -> list[T]:
    id_b = as_bits(id_b)
    k = len(s_a)
    if len(id_b) != k:
        raise ValueError("need one ID_B bit per decoy")
    if 2 * k > len(q_m):
        raise ValueError("k must not exceed N")
    gaps = _auth_gaps(k, lam, id_b)
    if gaps and gaps[-1] > len(q_m):
        raise ValueError("lambda too large for this sequence")
    out: list = []
    d = 0
    for g in range(len(q_m) + 1):
        while d < k and gaps[d] == g:
            out.append(s_a[d])
            d += 1
        if g < len(q_m):
            out.append(q_m[g])
    return out


@dataclass
class ChannelDecoyRecord:
    positions: list[int]
    states: list[str]

    @property
    def bases(self) -> list[str]:
        return [BASIS_OF_STATE[s] for s in self.states]


def insert_channel_decoys(seq: Sequence[T], decoys: Sequence[T], rng: Rng) -> tuple[list[T], list[int]]:
    """Insert ``decoys`` at uniformly random positions of the extended sequence."""
    total = len(seq) + len(decoys)
    positions = rng.subset(total, len(decoys)) if decoys else []
    marks = set(positions)
    it_seq, it_dec = iter(seq), iter(decoys)
    out = [next(it_dec) if j in marks else next(it_seq) for j in range(total)]
    return out, positions


def remove_positions(seq: Sequence[T], positions: Sequence[int]) -> list[T]:
    drop = set(positions)
    if any(not 0 <= p < len(seq) for p in drop):
        raise ValueError("position out of range")
    return [x for j, x in enumerate(seq) if j not in drop]


def draw_channel_decoy_states(count: int, rng: Rng) -> list[str]:
    return [CHANNEL_DECOY_STATES[rng.index(4)] for _ in range(count)]


def info_bits(labels: Sequence[str]) -> list[int]:
    out = []
    for label in labels:
        if label not in _INFO:
            raise ValueError(f"{label!r} is not a single-qubit decoy label")
        out.append(_INFO[label])
    return out


def default_channel_decoys(sequence_length: int) -> int:
    return math.ceil(sequence_length / 4)


@dataclass
class AuthResult:
    reveal: list[int]
    complement: list[int]
    bob_accepts_alice: bool
    alice_accepts_bob: bool
    alice_mismatches: int
    bob_mismatches: int


def mutual_authenticate(
    alice_info: Sequence[int],
    bob_info: Sequence[int],
    rng: Rng,
    tolerance: int = 0,
) -> AuthResult:
    """Split ``info(S_A)`` into a reveal set and its complement.

    Bob picks ``floor(k/2)`` positions; Alice reveals her bits there and Bob
    checks them. Bob then reveals his bits on the other ``ceil(k/2)``
    positions and Alice checks those. ``tolerance`` is the mismatch budget
    on each side.
    """
    alice_info, bob_info = as_bits(alice_info), as_bits(bob_info)
    k = len(alice_info)
    if len(bob_info) != k:
        raise ValueError("info strings differ in length")
    reveal = rng.subset(k, k // 2)
    rs = set(reveal)
    complement = [i for i in range(k) if i not in rs]
    bob_side = sum(alice_info[i] != bob_info[i] for i in reveal)
    alice_side = sum(alice_info[i] != bob_info[i] for i in complement)
    return AuthResult(
        reveal=reveal,
        complement=complement,
        bob_accepts_alice=bob_side <= tolerance,
        alice_accepts_bob=alice_side <= tolerance,
        alice_mismatches=alice_side,
        bob_mismatches=bob_side,
    )


@dataclass
class ModifiedInputs:
    message: list[int]
    id_a: list[int]
    id_b: list[int]

    def __post_init__(self):
        self.message = as_bits(self.message)
        self.id_a = as_bits(self.id_a)
        self.id_b = as_bits(self.id_b)
        if len(self.id_a) != len(self.id_b):
            raise ValueError("ID_A and ID_B must both have k bits")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= N, got k={self.k}, N={self.n}")

    @property
    def n(self) -> int:
        return len(self.message)

    @property
    def k(self) -> int:
        return len(self.id_a)


@dataclass
class ModifiedLayout:
    lam: int
    pi: list[int]
    auth_positions: list[int]
    channel_decoys: ChannelDecoyRecord
    message_states: list[str]
    auth_states: list[str]


# Session stages, in order.
STAGES = ("new", "sent", "received", "checked", "authenticated", "permuted", "decoded", "aborted")


@dataclass
class ModifiedSession:
    """Single-owner state machine for one run of the modified protocol.

    Alice's private layout and Bob's private measurements are held here;
    only :attr:`transit` crosses the channel.
    """

    inputs: ModifiedInputs
    rng: Rng
    channel_decoy_count: int | None = None
    threshold: float = DEFAULT_THRESHOLD
    auth_tolerance: int = 0
    integrity_fraction: float = DEFAULT_INTEGRITY_FRACTION
    transcript: Transcript = field(default_factory=Transcript)
    stage: str = "new"
    alice_rng: Rng | None = None
    bob_rng: Rng | None = None

    def __post_init__(self):
        self._alice_rng = self.alice_rng or self.rng.spawn(1)
        self._bob_rng = self.bob_rng or self.rng.spawn(2)
        self.layout: ModifiedLayout | None = None
        self.transit: Transit | None = None
        self.channel_error_rate: float | None = None
        self.channel_outcomes: list[str] = []
        self.bob_auth_outcomes: list[str] = []
        self.auth: AuthResult | None = None
        self.decoded: list[int] | None = None
        self.integrity_positions: list[int] = []
        self.integrity_mismatches = 0
        self.abort_stage: str | None = None

    def _require(self, *stages: str) -> None:
        if self.stage not in stages:
            raise ProtocolError(f"step not allowed in stage {self.stage!r}")

    # Alice ----------------------------------------------------------------

    def prepare(self, pi: Sequence[int] | None = None) -> Transit:
        self._require("new")
        rng, inp = self._alice_rng, self.inputs
        s_m = encode_message_pairs(inp.message, rng)
        if pi is None:
            pi = rng.permutation(2 * inp.n)
        pi = check_permutation(pi)
        s_a = prepare_auth_decoys(inp.id_a, rng)
        lam = compute_lambda(inp.n, inp.k)

        pool = RegisterPool()
        flat = [q for label in s_m for q in pool.add(label)]
        q_m = apply_permutation([(q,) for q in flat], pi)
        auth_slots = [pool.add(label) for label in s_a]
        s = insert_auth_decoys(q_m, auth_slots, inp.id_b, lam)

        count = self.channel_decoy_count
        if count is None:
            count = default_channel_decoys(len(s))
        c_states = draw_channel_decoy_states(count, rng)
        c_slots = [pool.add(label) for label in c_states]
        s_prime, c_pos = insert_channel_decoys(s, c_slots, rng)

        self.layout = ModifiedLayout(
            lam=lam,
            pi=pi,
            auth_positions=auth_decoy_positions(inp.k, lam, inp.id_b),
            channel_decoys=ChannelDecoyRecord(c_pos, c_states),
            message_states=s_m,
            auth_states=s_a,
        )
        self.transit = Transit(pool, s_prime)
        self.stage = "sent"
        return self.transit

    # Bob ------------------------------------------------------------------

    def receive(self, transit: Transit) -> None:
        self._require("sent")
        self.transit = transit
        self.stage = "received"

    def channel_check(self) -> tuple[float, str]:
        """Alice announces positions and bases, Bob measures, Alice reveals states."""
        self._require("received")
        rec = self.layout.channel_decoys
        self.transcript.announce("channel", "alice", "channel_decoy_positions", rec.positions)
        self.transcript.announce("channel", "alice", "channel_decoy_bases", rec.bases)
        if any(p >= len(self.transit) for p in rec.positions):
            raise ProtocolError("announced decoy position beyond received sequence")
        outcomes = []
        for pos, basis_name in zip(rec.positions, rec.bases):
            basis = Z if basis_name == "Z" else X
            outcomes.append(self.transit.pool.measure(self.transit.slots[pos], basis, self._bob_rng))
        self.channel_outcomes = outcomes
        self.transcript.announce("channel", "alice", "channel_decoy_states", rec.states)
        errors = sum(o != s for o, s in zip(outcomes, rec.states))
        rate = errors / len(outcomes) if outcomes else 0.0
        verdict = "abort" if rate > self.threshold else "continue"
        self.channel_error_rate = rate
        self.transcript.announce("channel", "bob", "verdict", {"error_rate": rate, "verdict": verdict})
        if verdict == "abort":
            self._abort("channel")
        else:
            self.stage = "checked"
        return rate, verdict

    def bob_measure_auth_decoys(self) -> list[int]:
        """Bob locates the auth decoys from ``ID_B`` and ``k`` and measures them."""
        self._require("checked")
        inp = self.inputs
        lam = compute_lambda(self._bob_message_length(), inp.k)
        s = remove_positions(self.transit.slots, self.layout.channel_decoys.positions)
        positions = auth_decoy_positions(inp.k, lam, inp.id_b)
        outcomes = []
        for pos, b in zip(positions, inp.id_a):
            outcomes.append(self.transit.pool.measure(s[pos], Z if b == 0 else X, self._bob_rng))
        self.bob_auth_outcomes = outcomes
        return info_bits(outcomes)

    def _bob_message_length(self) -> int:
        n2 = len(self.transit) - len(self.layout.channel_decoys.positions) - self.inputs.k
        if n2 < 2 or n2 % 2:
            raise ProtocolError("received sequence length inconsistent with k")
        return n2 // 2

    def authenticate(self, bob_info: Sequence[int] | None = None, bob_verdict: bool | None = None) -> AuthResult:
        """Run the two-way info-bit exchange.

        ``bob_info`` overrides Bob's measurement-derived bits and
        ``bob_verdict`` his announced verdict on Alice; together they let an
        impostor sit in Bob's seat.
        """
        self._require("checked")
        if bob_info is None:
            bob_info = self.bob_measure_auth_decoys()
        alice_info = info_bits(self.layout.auth_states)
        auth = mutual_authenticate(alice_info, bob_info, self._bob_rng, self.auth_tolerance)
        if bob_verdict is not None:
            auth = replace(auth, bob_accepts_alice=bob_verdict)
        t = self.transcript
        t.announce("auth", "bob", "reveal_set", auth.reveal)
        t.announce("auth", "alice", "info_bits_alice", [alice_info[i] for i in auth.reveal])
        t.announce("auth", "bob", "info_bits_bob", [int(bob_info[i]) for i in auth.complement])
        t.announce("auth", "alice", "verdict", {
            "bob_accepts_alice": auth.bob_accepts_alice,
            "alice_accepts_bob": auth.alice_accepts_bob,
        })
        self.auth = auth
        if auth.bob_accepts_alice and auth.alice_accepts_bob:
            self.stage = "authenticated"
        else:
            self._abort("authentication")
        return auth

    def announce_permutation(self) -> list[int]:
        self._require("authenticated")
        self.transcript.announce("decode", "alice", "permutation", self.layout.pi)
        self.stage = "permuted"
        return list(self.layout.pi)

    def decode(self, pi: Sequence[int] | None = None) -> list[int]:
        if pi is None:
            self._require("permuted")
            event = self.transcript.first("permutation")
            if event is None:
                raise ProtocolError("permutation was never announced")
            pi = event.payload
        self.decoded = bob_decode_modified(
            self.transit,
            self.layout.channel_decoys.positions,
            pi,
            self.inputs.k,
            self.inputs.id_b,
            self._bob_rng,
        )
        positions, mismatches = integrity_check(
            self.inputs.message, self.decoded, self.integrity_fraction, self._bob_rng.spawn(3)
        )
        self.transcript.announce("integrity", "bob", "integrity_positions", positions)
        self.transcript.announce("integrity", "alice", "integrity_bits", [self.inputs.message[p] for p in positions])
        self.integrity_positions, self.integrity_mismatches = positions, mismatches
        self.stage = "decoded"
        return self.decoded

    def _abort(self, stage: str) -> None:
        self.abort_stage = stage
        self.stage = "aborted"

    def run(self, channel: Channel = passthrough) -> "ModifiedSession":
        """Drive every step in order, stopping at the first abort."""
        transit = self.prepare()
        self.receive(channel(transit))
        self.channel_check()
        if self.stage == "aborted":
            return self
        self.authenticate()
        if self.stage == "aborted":
            return self
        self.announce_permutation()
        self.decode()
        return self


def bob_decode_modified(
    transit: Transit,
    channel_decoy_positions: Sequence[int],
    pi: Sequence[int] | None,
    k: int,
    id_b: Sequence[int],
    rng: Rng,
) -> list[int]:
    """Strip both decoy layers, undo the permutation, measure pairs in random bases."""
    if pi is None:
        raise ProtocolError("cannot decode without the permutation")
    s = remove_positions(transit.slots, channel_decoy_positions)
    n2 = len(s) - k
    if n2 < 2 or n2 % 2:
        raise ProtocolError("sequence length inconsistent with k")
    lam = compute_lambda(n2 // 2, k)
    q_m = remove_positions(s, auth_decoy_positions(k, lam, id_b))
    pi = check_permutation(pi)
    if len(pi) != len(q_m):
        raise ProtocolError("permutation size does not match message qubits")
    flat = [q_m[j] for j in pi]
    bits = []
    for i in range(0, len(flat), 2):
        basis = ZZ if rng.bit() == 0 else BELL
        pair = [flat[i][0], flat[i + 1][0]]
        bits.append(decode_bit(transit.pool.measure(pair, basis, rng)))
    return bits


PRE_DECODE_KINDS = frozenset({
    "channel_decoy_positions",
    "channel_decoy_bases",
    "channel_decoy_states",
    "reveal_set",
    "info_bits_alice",
    "info_bits_bob",
    "verdict",
})


def audit_transcript(transcript: Transcript) -> list[str]:
    """Problems with what was said publicly, empty if the log is clean.

    Before the permutation only decoy bookkeeping, reveal sets and info-bit
    subsets may appear; the permutation itself never follows an abort.
    """
    problems = []
    perm_at = transcript.index_of("permutation")
    end = perm_at if perm_at is not None else len(transcript.events)
    for e in transcript.events[:end]:
        if e.kind not in PRE_DECODE_KINDS:
            problems.append(f"{e.kind} announced before the permutation")
        if e.kind == "verdict" and (
            e.payload.get("verdict") == "abort"
            or e.payload.get("bob_accepts_alice") is False
            or e.payload.get("alice_accepts_bob") is False
        ):
            if perm_at is not None:
                problems.append("permutation announced after an abort")
    return problems
