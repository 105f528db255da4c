"""Seeded Monte Carlo scenarios joining a protocol with an attack."""

from __future__ import annotations

import math
from functools import lru_cache
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Sequence

from scipy.stats import norm

from . import adversaries as adv
from .channel import Transit
from .modified import ModifiedInputs, ModifiedSession, audit_transcript
from .rng import Rng, trial_seed
from .yzcss import (
    DEFAULT_INTEGRITY_FRACTION,
    DEFAULT_THRESHOLD,
    YzcssInputs,
    alice_encode_yzcss,
    run_yzcss,
)

PROTOCOLS = ("yzcss", "modified")
ATTACKS = ("none", "intercept-resend", "impersonation", "entangle-measure", "dos", "mitm")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    protocol: str = "yzcss"
    attack: str = "none"
    n: int = 8
    k: int | None = None
    channel_decoys: int | None = None
    threshold: float = DEFAULT_THRESHOLD
    auth_tolerance: int = 0
    integrity_fraction: float = DEFAULT_INTEGRITY_FRACTION
    dos_p: float = 0.0
    ue: str = "cnot"
    trials: int = 100
    base_seed: int = 0

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {PROTOCOLS}")
        if self.attack not in ATTACKS:
            raise ConfigError(f"attack must be one of {ATTACKS}")
        if self.n < 1:
            raise ConfigError("message length must be at least 1")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.protocol == "modified" and not 1 <= self.id_bits <= self.n:
            raise ConfigError(f"modified protocol needs 1 <= k <= N (k={self.id_bits}, N={self.n})")
        if self.channel_decoys is not None and self.channel_decoys < 0:
            raise ConfigError("channel decoy count must be non-negative")
        if not 0 <= self.dos_p <= 1:
            raise ConfigError("dos p must lie in [0, 1]")
        if not 0 <= self.threshold <= 1:
            raise ConfigError("threshold must lie in [0, 1]")
        adv.params_from_id(self.ue)

    @property
    def id_bits(self) -> int:
        if self.protocol == "yzcss":
            return self.n
        return self.k if self.k is not None else min(self.n, 8)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["k"] = self.id_bits
        return d


METRICS = (
    "detected",
    "channel_error_rate",
    "decoy_error_rate",
    "z_decoy_error_rate",
    "x_decoy_error_rate",
    "eve_bit_accuracy",
    "eve_exact_recovery",
    "bob_message_correct",
    "message_bit_error_rate",
    "bob_accepts_alice",
    "alice_accepts_bob",
    "alice_detects",
)


@dataclass
class TrialReport:
    """One trial. ``None`` marks a metric that does not apply to the run.

    ``decoy_error_rate`` is the rate the security check acted on.
    ``channel_error_rate`` pools every decoy Bob measured, which for the
    modified protocol adds the authentication decoys once they are read.
    """

    scenario: tuple
    seed: int
    detected: bool
    abort_stage: str
    channel_error_rate: float | None = None
    decoy_error_rate: float | None = None
    z_decoy_error_rate: float | None = None
    x_decoy_error_rate: float | None = None
    eve_bit_accuracy: float | None = None
    eve_exact_recovery: bool | None = None
    bob_message_correct: bool | None = None
    message_bit_error_rate: float | None = None
    bob_accepts_alice: bool | None = None
    alice_accepts_bob: bool | None = None
    alice_detects: bool | None = None
    eve_recovered_pairings: int = 0
    transcript_digest: str = ""
    transcript_problems: list[str] = field(default_factory=list)

    def metric(self, name: str) -> float | None:
        v = getattr(self, name)
        return None if v is None else float(v)


def _accuracy(guess: Sequence[int], truth: Sequence[int]) -> float:
    return sum(g == t for g, t in zip(guess, truth)) / len(truth)


def _split_errors(outcomes: Sequence[str], states: Sequence[str]) -> tuple[float | None, float | None]:
    z = [(o, s) for o, s in zip(outcomes, states) if s in ("0", "1")]
    x = [(o, s) for o, s in zip(outcomes, states) if s in ("+", "-")]
    rate = lambda pairs: sum(o != s for o, s in pairs) / len(pairs) if pairs else None
    return rate(z), rate(x)


def run_trial(config: ScenarioConfig, trial_index: int) -> TrialReport:
    seed = trial_seed(config.base_seed, trial_index)
    rng = Rng(seed)
    if config.protocol == "yzcss":
        return _run_yzcss_trial(config, rng, seed)
    return _run_modified_trial(config, rng, seed)


@lru_cache(maxsize=64)
def _scenario_key(config: ScenarioConfig) -> tuple:
    d = config.to_dict()
    d.pop("base_seed")
    d.pop("trials")
    return tuple(sorted(d.items()))


def _random_inputs(config: ScenarioConfig, rng: Rng) -> tuple[list[int], list[int], list[int]]:
    setup = rng.spawn(0)
    k = config.id_bits
    return setup.bits(config.n), setup.bits(k), setup.bits(k)


def _run_yzcss_trial(config: ScenarioConfig, rng: Rng, seed: int) -> TrialReport:
    message, id_a, id_b = _random_inputs(config, rng)
    inputs = YzcssInputs(message, id_a, id_b)
    eve_rng = rng.spawn(7)
    key = _scenario_key(config)

    if config.attack == "impersonation":
        transit, record = alice_encode_yzcss(inputs, rng.spawn(1))
        eve = adv.impersonate_bob_yzcss(transit, lambda: record.auth_states, eve_rng)
        return TrialReport(
            scenario=key,
            seed=seed,
            detected=False,
            abort_stage="none",
            eve_bit_accuracy=_accuracy(eve.recovered_message, message),
            eve_exact_recovery=eve.recovered_message == message,
            alice_detects=False,
            eve_recovered_pairings=config.n,
        )

    eve_state: dict = {}

    def channel(transit: Transit) -> Transit:
        if config.attack == "intercept-resend":
            transit, eve_state["record"] = adv.intercept_resend_yzcss(transit, eve_rng)
        elif config.attack == "dos":
            transit = adv.dos(transit, config.dos_p, eve_rng)
        elif config.attack == "mitm":
            transit, _ = adv.mitm(transit, eve_rng)
        elif config.attack == "entangle-measure":
            transit, _ = adv.entangle_measure(transit, adv.params_from_id(config.ue))
        return transit

    announced: list = []
    result, record, bob = run_yzcss(
        inputs,
        rng,
        channel,
        threshold=config.threshold,
        integrity_fraction=config.integrity_fraction,
        on_announce_sa=announced.extend,
    )
    detected = result.verdict == "abort"
    report = TrialReport(
        scenario=key,
        seed=seed,
        detected=detected,
        abort_stage="channel" if detected else "none",
        channel_error_rate=result.error_rate,
        decoy_error_rate=result.error_rate,
        bob_message_correct=bob.bits == message,
        message_bit_error_rate=1 - _accuracy(bob.bits, message),
        alice_detects=False,
        transcript_digest=result.public.digest(),
    )
    if not detected and result.integrity_mismatches:
        report.detected, report.abort_stage = True, "integrity"
    if "record" in eve_state:
        eve = eve_state["record"]
        # Eve's knowledge is scored whether or not the run aborted.
        rec_m, _ = adv.eve_recover(eve.m, announced)
        report.eve_bit_accuracy = _accuracy(rec_m, message)
        report.eve_exact_recovery = rec_m == message
        report.eve_recovered_pairings = config.n
    return report


def _run_modified_trial(config: ScenarioConfig, rng: Rng, seed: int) -> TrialReport:
    message, id_a, id_b = _random_inputs(config, rng)
    inputs = ModifiedInputs(message, id_a, id_b)
    eve_rng = rng.spawn(7)
    session = ModifiedSession(
        inputs,
        rng,
        channel_decoy_count=config.channel_decoys,
        threshold=config.threshold,
        auth_tolerance=config.auth_tolerance,
        integrity_fraction=config.integrity_fraction,
    )
    eve_singles: adv.EveRecordSingles | None = None
    ancillas: list[int] = []

    transit = session.prepare()
    if config.attack == "intercept-resend":
        transit, eve_singles = adv.intercept_resend_modified(transit, eve_rng)
    elif config.attack == "dos":
        transit = adv.dos(transit, config.dos_p, eve_rng)
    elif config.attack == "mitm":
        transit, _ = adv.mitm(transit, eve_rng)
    elif config.attack == "entangle-measure":
        transit, ancillas = adv.entangle_measure(transit, adv.params_from_id(config.ue))
    session.receive(transit)
    session.channel_check()

    if session.stage != "aborted":
        if config.attack == "impersonation":
            # Eve sits in Bob's seat: the channel check passes (nobody touched
            # the qubits), she waves Alice through and must guess info bits.
            session.authenticate(adv.guess_info_bits(inputs.k, eve_rng), bob_verdict=True)
        else:
            session.authenticate()
    if session.stage == "authenticated":
        # an impostor who got this far is handed the permutation
        session.announce_permutation()
        if config.attack != "impersonation":
            session.decode()

    if ancillas:
        eve_singles = adv.read_ancillas(session.transit, ancillas, eve_rng)

    rec = session.layout.channel_decoys
    z_err, x_err = _split_errors(session.channel_outcomes, rec.states)
    decoy_outcomes = list(session.channel_outcomes)
    decoy_states = list(rec.states)
    if session.bob_auth_outcomes:
        decoy_outcomes += session.bob_auth_outcomes
        decoy_states += session.layout.auth_states
    decoy_rate = (
        sum(o != s for o, s in zip(decoy_outcomes, decoy_states)) / len(decoy_states)
        if decoy_states
        else None
    )
    auth = session.auth
    report = TrialReport(
        scenario=_scenario_key(config),
        seed=seed,
        detected=session.stage == "aborted",
        abort_stage=session.abort_stage or "none",
        channel_error_rate=decoy_rate,
        decoy_error_rate=session.channel_error_rate,
        z_decoy_error_rate=z_err,
        x_decoy_error_rate=x_err,
        bob_accepts_alice=None if auth is None else auth.bob_accepts_alice,
        alice_accepts_bob=None if auth is None else auth.alice_accepts_bob,
        alice_detects=None if auth is None else not auth.alice_accepts_bob,
        transcript_digest=session.transcript.digest(),
        transcript_problems=audit_transcript(session.transcript),
    )
    if session.decoded is not None:
        report.bob_message_correct = session.decoded == message
        report.message_bit_error_rate = 1 - _accuracy(session.decoded, message)
        if session.integrity_mismatches:
            report.detected, report.abort_stage = True, "integrity"
    if config.attack == "impersonation":
        # Only an announced permutation would tell Eve how qubits pair up.
        if session.transcript.first("permutation") is not None:
            report.eve_recovered_pairings = inputs.n
        report.eve_exact_recovery = report.eve_recovered_pairings == inputs.n
    elif eve_singles is not None:
        guess = eve_singles.message_guess(inputs.n)
        report.eve_bit_accuracy = _accuracy(guess, message)
        report.eve_exact_recovery = guess == message
    return report


# ---------------------------------------------------------------------------
# aggregation


def wilson_interval(successes: float, n: int, confidence: float = 0.95) -> tuple[float, float]:
    if n < 1:
        raise ValueError("need at least one observation")
    if not 0 <= successes <= n:
        raise ValueError("successes must lie in [0, n]")
    z = float(norm.ppf(0.5 + confidence / 2))
    p = successes / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo, hi = max(0.0, centre - half), min(1.0, centre + half)
    # guard rounding at the boundaries so lo <= p <= hi always holds
    return min(lo, p), max(hi, p)


@dataclass(frozen=True)
class MetricSummary:
    total: float
    n: int

    @property
    def mean(self) -> float | None:
        return self.total / self.n if self.n else None

    def interval(self) -> tuple[float | None, float | None]:
        if not self.n:
            return None, None
        return wilson_interval(min(max(self.total, 0.0), self.n), self.n)


@dataclass(frozen=True)
class AggregateReport:
    scenario: dict
    seed: int
    trials: int
    metrics: dict[str, MetricSummary]
    abort_stages: dict[str, int]
    transcript_problems: int = 0

    def mean(self, name: str) -> float | None:
        return self.metrics[name].mean

    def merge(self, other: "AggregateReport") -> "AggregateReport":
        if _strip(self.scenario) != _strip(other.scenario):
            raise ValueError("cannot merge aggregates of different scenarios")
        metrics = {
            k: MetricSummary(self.metrics[k].total + other.metrics[k].total, self.metrics[k].n + other.metrics[k].n)
            for k in METRICS
        }
        stages = dict(self.abort_stages)
        for s, c in other.abort_stages.items():
            stages[s] = stages.get(s, 0) + c
        return AggregateReport(
            scenario=self.scenario,
            seed=self.seed,
            trials=self.trials + other.trials,
            metrics=metrics,
            abort_stages=dict(sorted(stages.items())),
            transcript_problems=self.transcript_problems + other.transcript_problems,
        )


def _strip(scenario: dict) -> dict:
    return {k: v for k, v in scenario.items() if k not in ("base_seed", "trials")}


def aggregate(reports: Sequence[TrialReport], config: ScenarioConfig | None = None) -> AggregateReport:
    if not reports:
        raise ValueError("need at least one report")
    key = reports[0].scenario
    if any(r.scenario != key for r in reports):
        raise ValueError("reports come from different scenarios")
    metrics = {}
    for name in METRICS:
        vals = [v for v in (r.metric(name) for r in reports) if v is not None]
        metrics[name] = MetricSummary(math.fsum(vals), len(vals))
    stages: dict[str, int] = {}
    for r in reports:
        stages[r.abort_stage] = stages.get(r.abort_stage, 0) + 1
    scenario = config.to_dict() if config is not None else dict(key)
    return AggregateReport(
        scenario=scenario,
        seed=scenario.get("base_seed", reports[0].seed),
        trials=len(reports),
        metrics=metrics,
        abort_stages=dict(sorted(stages.items())),
        transcript_problems=sum(bool(r.transcript_problems) for r in reports),
    )


def _run_chunk(args: tuple[ScenarioConfig, int, int]) -> list[TrialReport]:
    config, start, stop = args
    return [run_trial(config, i) for i in range(start, stop)]


def run_trials(config: ScenarioConfig, workers: int = 1) -> list[TrialReport]:
    if workers <= 1 or config.trials < 2 * workers:
        return [run_trial(config, i) for i in range(config.trials)]
    step = math.ceil(config.trials / workers)
    chunks = [(config, s, min(s + step, config.trials)) for s in range(0, config.trials, step)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return [r for chunk in pool.map(_run_chunk, chunks) for r in chunk]


def run_scenario(config: ScenarioConfig, workers: int = 1) -> AggregateReport:
    return aggregate(run_trials(config, workers), config)


def sweep(configs: Iterable[ScenarioConfig], workers: int = 1) -> list[AggregateReport]:
    return [run_scenario(c, workers) for c in configs]


def config_fields() -> list[str]:
    return [f.name for f in fields(ScenarioConfig)]
