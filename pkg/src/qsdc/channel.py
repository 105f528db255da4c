"""What travels over the quantum channel, and the public transcript.

A :class:`Transit` is all an eavesdropper ever gets: the pool and the
ordered slots. Which slot is a message half or a decoy lives only in the
sender's private record, never here.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from .qsim import RegisterPool


class ProtocolError(RuntimeError):
    """A protocol step was invoked out of order or with inconsistent inputs."""


@dataclass
class Transit:
    pool: RegisterPool
    slots: list[tuple[int, ...]]

    def __len__(self) -> int:
        return len(self.slots)

    def qubits(self) -> list[int]:
        return [p for slot in self.slots for p in slot]


Channel = Callable[[Transit], Transit]


def passthrough(transit: Transit) -> Transit:
    return transit


@dataclass(frozen=True)
class Announcement:
    stage: str
    speaker: str
    kind: str
    payload: Any


@dataclass
class Transcript:
    """Ordered log of every classical message sent over the public channel."""

    events: list[Announcement] = field(default_factory=list)

    def announce(self, stage: str, speaker: str, kind: str, payload: Any) -> None:
        self.events.append(Announcement(stage, speaker, kind, _freeze(payload)))

    def kinds(self) -> list[str]:
        return [e.kind for e in self.events]

    def first(self, kind: str) -> Announcement | None:
        return next((e for e in self.events if e.kind == kind), None)

    def index_of(self, kind: str) -> int | None:
        return next((i for i, e in enumerate(self.events) if e.kind == kind), None)

    def to_jsonable(self) -> list[dict]:
        return [
            {"stage": e.stage, "speaker": e.speaker, "kind": e.kind, "payload": e.payload}
            for e in self.events
        ]

    def digest(self) -> str:
        blob = json.dumps(self.to_jsonable(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _freeze(payload: Any) -> Any:
    if isinstance(payload, (list, tuple)):
        return [_freeze(p) for p in payload]
    if isinstance(payload, dict):
        return {str(k): _freeze(v) for k, v in payload.items()}
    if hasattr(payload, "item"):
        return payload.item()
    return payload


def as_bits(bits: str | Sequence[int]) -> list[int]:
    """Normalise ``"0110"`` or ``[0, 1, 1, 0]`` to a list of ints."""
    if isinstance(bits, str):
        if any(c not in "01" for c in bits):
            raise ValueError(f"not a bit string: {bits!r}")
        return [int(c) for c in bits]
    out = [int(b) for b in bits]
    if any(b not in (0, 1) for b in out):
        raise ValueError(f"not a bit sequence: {bits!r}")
    return out


def bit_string(bits: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in bits)
