import itertools
import json

import numpy as np
import pytest
from scipy import stats

from bfcert.codes import build_qc2
from bfcert.bounds import dfr_bound_qc
from bfcert.errors import ConfigError, DomainError, NoKeyFound
from bfcert.keysearch import (KeygenPolicy, KeyRecord, acceptance_rate_experiment, certify_supports,
                              rejection_sample_key, sample_circulant_support, verify_key)


def test_policy_validation():
    with pytest.raises(ConfigError):
        KeygenPolicy(5, 6, 2, -1)
    with pytest.raises(ConfigError):
        KeygenPolicy(50, 5, 2, 3)
    with pytest.raises(ConfigError):
        KeygenPolicy(50, 5, 2, -1, threshold=6)
    with pytest.raises(ConfigError):
        KeygenPolicy(50, 5, 2, -1, max_attempts=0)


def test_support_sampler_edges():
    rng = np.random.default_rng(0)
    assert sample_circulant_support(7, 7, rng) == tuple(range(7))
    assert len(sample_circulant_support(7, 1, rng)) == 1
    with pytest.raises(DomainError):
        sample_circulant_support(4, 5, rng)


def test_support_sampler_uniform():
    rng = np.random.default_rng(1)
    index = {c: k for k, c in enumerate(itertools.combinations(range(10), 3))}
    counts = np.zeros(120)
    for _ in range(12_000):
        counts[index[sample_circulant_support(10, 3, rng)]] += 1
    assert np.all(np.abs(counts - 100) <= 3 * np.sqrt(100 * (1 - 1 / 120)) + 6)
    assert stats.chisquare(counts).pvalue > 1e-4


def test_certify_matches_matrix_bound():
    rng = np.random.default_rng(2)
    S0, S1 = sample_circulant_support(53, 5, rng), sample_circulant_support(53, 5, rng)
    H = build_qc2(53, S0, S1)
    rep = certify_supports(53, 8, S0, S1, 3)
    assert rep.numerator == dfr_bound_qc(H, 8, 3).numerator


def test_repeated_column_is_rejected():
    # equal supports make column j of both blocks identical
    assert certify_supports(31, 3, (0, 1, 5), (0, 1, 5)) is None


def test_loose_target_accepts_first_draw():
    rec = rejection_sample_key(KeygenPolicy(3001, 9, 4, -1, seed=3))
    assert rec.accepted and rec.attempts == 1
    assert verify_key(rec)


def test_zero_target_accepts_bound_below_one():
    rec = rejection_sample_key(KeygenPolicy(997, 7, 2, 0.0, seed=4))
    assert rec.accepted and rec.log2_bound < 0


def test_impossible_target_returns_no_key():
    pol = KeygenPolicy(211, 9, 30, -10 ** 6, max_attempts=4, seed=1)
    rec = rejection_sample_key(pol)
    assert not rec.accepted and rec.attempts == 4
    with pytest.raises(NoKeyFound):
        rejection_sample_key(pol, raise_on_failure=True)


def test_determinism_and_worker_independence():
    pol = KeygenPolicy(401, 9, 12, -12, max_attempts=30, seed=8)
    a = rejection_sample_key(pol)
    assert a == rejection_sample_key(pol)
    assert a == rejection_sample_key(pol, workers=2)


def test_acceptance_monotone_in_target():
    strict = KeygenPolicy(401, 9, 12, -14, seed=5)
    loose = KeygenPolicy(401, 9, 12, -8, seed=5)
    _, rs = acceptance_rate_experiment(strict, 25)
    _, rl = acceptance_rate_experiment(loose, 25)
    for a, b in zip(rs, rl):
        assert (a.S0, a.S1) == (b.S0, b.S1)
        assert not a.accepted or b.accepted


def test_smoke_acceptance_rate_at_guaranteed_weight():
    # weight-9 supports at p ~ 3000 are almost surely free of 4-cycles, so t = 4 certifies 0
    rate, records = acceptance_rate_experiment(KeygenPolicy(3001, 9, 4, -1, seed=6), 10)
    assert rate == 1.0
    assert all(verify_key(r) for r in records)


def test_fixed_threshold_strategy():
    rec = rejection_sample_key(KeygenPolicy(3001, 9, 6, -1, seed=2, threshold=5))
    assert rec.b == 5 and verify_key(rec)


def test_record_json_round_trip():
    rec = rejection_sample_key(KeygenPolicy(3001, 9, 6, -1, seed=2))
    back = KeyRecord.from_dict(json.loads(json.dumps(rec.as_dict())))
    assert back == rec
    zero = rejection_sample_key(KeygenPolicy(3001, 9, 1, -1, seed=2))
    assert KeyRecord.from_dict(json.loads(json.dumps(zero.as_dict()))) == zero
