import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qsdc.harness import (
    METRICS,
    AggregateReport,
    ConfigError,
    MetricSummary,
    ScenarioConfig,
    aggregate,
    run_scenario,
    run_trial,
    run_trials,
    sweep,
    wilson_interval,
)
from qsdc.rng import trial_seed


def wilson_by_roots(successes, n, z=1.959963984540054):
    """Interval endpoints as the roots of (p_hat - p)^2 = z^2 p (1 - p) / n."""
    p_hat = successes / n
    a = 1 + z * z / n
    b = -(2 * p_hat + z * z / n)
    c = p_hat * p_hat
    lo, hi = sorted(np.roots([a, b, c]).real)
    return lo, hi


# config ---------------------------------------------------------------------


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(protocol="bb84"),
        dict(attack="photon-splitting"),
        dict(protocol="modified", n=4, k=5),
        dict(trials=0),
        dict(n=0),
        dict(dos_p=1.2),
        dict(channel_decoys=-1),
        dict(ue="swap"),
    ],
)
def test_invalid_configs(kwargs):
    with pytest.raises((ConfigError, ValueError)):
        ScenarioConfig(**kwargs)


def test_id_bits_defaults():
    assert ScenarioConfig(protocol="yzcss", n=5).id_bits == 5
    assert ScenarioConfig(protocol="modified", n=16).id_bits == 8
    assert ScenarioConfig(protocol="modified", n=4).id_bits == 4
    assert ScenarioConfig(protocol="modified", n=16, k=3).to_dict()["k"] == 3


def test_trial_seed_is_xor():
    assert trial_seed(7, 3) == 4
    assert trial_seed(0, 12) == 12


# run_trial ----------------------------------------------------------------


def test_yzcss_honest_trial():
    r = run_trial(ScenarioConfig(protocol="yzcss", n=6), 0)
    assert r.bob_message_correct and r.decoy_error_rate == 0 and not r.detected


def test_yzcss_intercept_resend_recovers():
    cfg = ScenarioConfig(protocol="yzcss", attack="intercept-resend", n=8)
    assert all(run_trial(cfg, i).eve_exact_recovery for i in range(50))


def test_modified_mitm_detected_at_channel():
    cfg = ScenarioConfig(protocol="modified", attack="mitm", n=8, channel_decoys=16)
    for i in range(50):
        r = run_trial(cfg, i)
        assert r.detected and r.abort_stage == "channel"
        assert r.bob_message_correct is None


def test_impersonation_abort_leaks_nothing():
    cfg = ScenarioConfig(protocol="modified", attack="impersonation", n=8, k=8)
    for i in range(200):
        r = run_trial(cfg, i)
        if r.detected:
            assert r.eve_recovered_pairings == 0 and not r.eve_exact_recovery
        assert not r.transcript_problems


@pytest.mark.parametrize("protocol", ["yzcss", "modified"])
@pytest.mark.parametrize("attack", ["none", "intercept-resend", "impersonation", "entangle-measure", "dos", "mitm"])
def test_report_invariants(protocol, attack):
    cfg = ScenarioConfig(protocol=protocol, attack=attack, n=4, k=2, dos_p=0.3)
    for i in range(15):
        r = run_trial(cfg, i)
        for name in METRICS:
            v = r.metric(name)
            assert v is None or 0.0 <= v <= 1.0
        assert r.detected == (r.abort_stage != "none")
        assert r.seed == trial_seed(cfg.base_seed, i)
        if protocol == "modified":
            assert r.transcript_problems == []


def test_honest_grid():
    for protocol in ("yzcss", "modified"):
        for n in (4, 8, 16):
            for k in (2, 4, 8):
                if protocol == "modified" and k > n:
                    continue
                agg = run_scenario(ScenarioConfig(protocol=protocol, n=n, k=k, trials=10))
                assert agg.mean("bob_message_correct") == 1.0
                assert agg.mean("channel_error_rate") == 0.0
                assert agg.mean("detected") == 0.0


def test_stage_order_audit_under_attacks():
    for attack in ("intercept-resend", "mitm", "dos", "impersonation", "entangle-measure"):
        agg = run_scenario(ScenarioConfig(protocol="modified", attack=attack, n=6, k=3, dos_p=0.1, trials=40))
        assert agg.transcript_problems == 0


def test_impostor_with_two_id_bits():
    agg = run_scenario(ScenarioConfig(protocol="modified", attack="impersonation", n=4, k=2, trials=2000))
    assert agg.mean("alice_accepts_bob") == pytest.approx(0.5, abs=0.04)


# aggregate -----------------------------------------------------------------


def test_aggregate_yzcss_intercept_resend_rate():
    agg = run_scenario(ScenarioConfig(protocol="yzcss", attack="intercept-resend", n=2, trials=10_000))
    assert 0.23 <= agg.mean("decoy_error_rate") <= 0.27


def test_single_report():
    cfg = ScenarioConfig(protocol="yzcss", n=3, trials=1)
    r = run_trial(cfg, 0)
    agg = aggregate([r], cfg)
    assert agg.trials == 1
    assert agg.mean("bob_message_correct") == 1.0
    lo, hi = agg.metrics["bob_message_correct"].interval()
    assert lo <= 1.0 == hi


def test_aggregate_rejects_mixed_and_empty():
    a = run_trial(ScenarioConfig(n=3), 0)
    b = run_trial(ScenarioConfig(n=4), 0)
    with pytest.raises(ValueError):
        aggregate([a, b])
    with pytest.raises(ValueError):
        aggregate([])


def _split_config(trials):
    return ScenarioConfig(protocol="modified", attack="intercept-resend", n=4, k=2, channel_decoys=4, trials=trials)


def test_merge_matches_union():
    cfg = _split_config(30)
    reports = run_trials(cfg)
    a, b, c = aggregate(reports[:7], cfg), aggregate(reports[7:19], cfg), aggregate(reports[19:], cfg)
    whole = aggregate(reports, cfg)
    left, right = a.merge(b).merge(c), a.merge(b.merge(c))
    swapped = c.merge(a).merge(b)
    for name in METRICS:
        for m in (left, right, swapped):
            assert m.metrics[name].n == whole.metrics[name].n
            if whole.metrics[name].n:
                assert m.mean(name) == pytest.approx(whole.mean(name), abs=1e-12)
    assert left.trials == whole.trials and left.abort_stages == whole.abort_stages


def test_merge_rejects_other_scenarios():
    a = run_scenario(ScenarioConfig(n=3, trials=2))
    b = run_scenario(ScenarioConfig(n=4, trials=2))
    with pytest.raises(ValueError):
        a.merge(b)


def test_determinism():
    cfg = ScenarioConfig(protocol="modified", attack="entangle-measure", ue="rot:0.4", n=5, k=3, trials=30, base_seed=99)
    assert run_scenario(cfg) == run_scenario(cfg)
    assert [r.transcript_digest for r in run_trials(cfg)] == [r.transcript_digest for r in run_trials(cfg)]


def test_seed_changes_results():
    a = run_trials(ScenarioConfig(protocol="modified", n=5, trials=5, base_seed=1))
    b = run_trials(ScenarioConfig(protocol="modified", n=5, trials=5, base_seed=2))
    assert [r.transcript_digest for r in a] != [r.transcript_digest for r in b]


def test_parallel_matches_serial():
    cfg = ScenarioConfig(protocol="yzcss", attack="intercept-resend", n=4, trials=40)
    assert run_scenario(cfg, workers=2) == run_scenario(cfg, workers=1)


def test_sweep_lengths():
    out = sweep([ScenarioConfig(n=n, trials=2) for n in (2, 3)])
    assert [a.scenario["n"] for a in out] == [2, 3]


# wilson ---------------------------------------------------------------------


def test_wilson_boundaries():
    assert wilson_interval(0, 20)[0] == 0.0
    assert wilson_interval(20, 20)[1] == 1.0


def test_wilson_quarter():
    lo, hi = wilson_interval(25, 100)
    olo, ohi = wilson_by_roots(25, 100)
    assert (lo, hi) == pytest.approx((olo, ohi), abs=1e-12)
    assert (lo, hi) == pytest.approx((0.175452, 0.343045), abs=1e-6)
    assert (lo, hi) == pytest.approx((0.175, 0.344), abs=1.5e-3)


def test_wilson_rejects_bad_input():
    with pytest.raises(ValueError):
        wilson_interval(0, 0)
    with pytest.raises(ValueError):
        wilson_interval(5, 4)


@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, 10_000), frac=st.floats(0, 1))
def test_wilson_contains_estimate(n, frac):
    s = round(frac * n)
    lo, hi = wilson_interval(s, n)
    assert 0 <= lo <= s / n <= hi <= 1
    if 0 < s < n:
        olo, ohi = wilson_by_roots(s, n)
        assert lo == pytest.approx(olo, abs=1e-9) and hi == pytest.approx(ohi, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(parts=st.lists(st.tuples(st.floats(0, 50), st.integers(50, 100)), min_size=1, max_size=6))
def test_metric_summary_merge_is_exact(parts):
    total = math.fsum(t for t, _ in parts)
    n = sum(c for _, c in parts)
    merged = MetricSummary(0.0, 0)
    for t, c in parts:
        merged = MetricSummary(merged.total + t, merged.n + c)
    assert merged.n == n
    assert merged.mean == pytest.approx(total / n)
    lo, hi = merged.interval()
    assert lo <= merged.mean <= hi


def test_empty_metric_summary():
    assert MetricSummary(0.0, 0).mean is None
    assert MetricSummary(0.0, 0).interval() == (None, None)


def test_aggregate_is_frozen():
    agg = run_scenario(ScenarioConfig(n=2, trials=2))
    assert isinstance(agg, AggregateReport)
    with pytest.raises(Exception):
        agg.trials = 3
