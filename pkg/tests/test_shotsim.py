import io
import math

import numpy as np
import pytest

from conftest import SPEC_617_713
from dphav.exceptions import EmptyConditionError
from dphav.fock import poisson_pmf
from dphav.shotsim import (
    RunConfig,
    fidelity,
    read_records_csv,
    reconstruct_conditional,
    records_to_csv,
    simulate_shots,
    write_records_csv,
)
from dphav.splitcond import AcceptanceRule, conditional_detected_dist, phase_distribution, split
from dphav.states import DphavSpec


@pytest.fixture(scope="module")
def records_617_713():
    return simulate_shots(RunConfig(SPEC_617_713, eta=0.5, n_shots=400_000, seed=11))


def test_vacuum_records():
    rec = simulate_shots(RunConfig(DphavSpec(0.0, 0.0), n_shots=1000, seed=3))
    assert rec.shape == (1000, 2) and not rec.any()


def test_reproducible_across_jobs():
    config = RunConfig(SPEC_617_713, eta=0.7, n_shots=200_003, seed=2**63 + 5)
    a = simulate_shots(config, n_jobs=1)
    b = simulate_shots(config, n_jobs=3)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(a, simulate_shots(config))


def test_prefix_stability():
    # shot i depends on (seed, i) only, not on the run length
    short = simulate_shots(RunConfig(SPEC_617_713, n_shots=70_000, seed=9))
    long = simulate_shots(RunConfig(SPEC_617_713, n_shots=150_000, seed=9))
    np.testing.assert_array_equal(short, long[:70_000])


def test_seeds_differ():
    a = simulate_shots(RunConfig(SPEC_617_713, n_shots=1000, seed=1))
    b = simulate_shots(RunConfig(SPEC_617_713, n_shots=1000, seed=2))
    assert not np.array_equal(a, b)


@pytest.mark.parametrize("kwargs", [{"n_shots": 0}, {"eta": 1.5}, {"seed": -1}, {"seed": 2**64}])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        RunConfig(SPEC_617_713, **kwargs)


def test_marginal_fidelity(records_617_713):
    amps = split(SPEC_617_713)
    theory = conditional_detected_dist(amps, phase_distribution(amps, AcceptanceRule.all(), 0.5), 0.5)
    hist = reconstruct_conditional(records_617_713, AcceptanceRule.all())
    assert hist.acceptance == 1.0
    assert np.array_equal(np.bincount(records_617_713[:, 1]) / records_617_713.shape[0], hist.distribution.probs)
    assert fidelity(hist.distribution, theory) > 0.9999


@pytest.mark.parametrize("m1", [0, 2, 5, 8])
def test_acceptance_fraction_within_three_sigma(records_617_713, m1):
    amps = split(SPEC_617_713)
    rule = AcceptanceRule.eq(m1)
    expected = phase_distribution(amps, rule, 0.5).norm_constant
    hist = reconstruct_conditional(records_617_713, rule)
    se = math.sqrt(expected * (1 - expected) / records_617_713.shape[0])
    assert abs(hist.acceptance - expected) < 3 * se


def test_conditional_histogram_matches_theory(records_617_713):
    amps = split(SPEC_617_713)
    rule = AcceptanceRule.eq(3)
    theory = conditional_detected_dist(amps, phase_distribution(amps, rule, 0.5), 0.5)
    hist = reconstruct_conditional(records_617_713, rule)
    n = hist.n_accepted
    p = theory.padded(len(hist.distribution))[: len(hist.distribution)]
    band = 4 * np.sqrt(p * (1 - p) / n) + 1e-12
    assert np.all(np.abs(hist.distribution.probs - p) < band)


def test_empty_condition():
    rec = np.zeros((10, 2), dtype=int)
    with pytest.raises(EmptyConditionError) as info:
        reconstruct_conditional(rec, AcceptanceRule.eq(4))
    assert info.value.n_accepted == 0


def test_fidelity_examples():
    p = poisson_pmf(np.arange(60), 5.0)
    q = poisson_pmf(np.arange(60), 5.1)
    assert fidelity(p, p) == pytest.approx(1.0)
    assert fidelity([1.0, 0.0], [0.0, 0.0, 1.0]) == 0.0
    direct = sum(math.sqrt(a * b) for a, b in zip(p, q))
    assert fidelity(p, q) == pytest.approx(direct, rel=1e-14)
    assert 0 < fidelity(p, q) < 1


def test_csv_round_trip():
    rec = simulate_shots(RunConfig(SPEC_617_713, n_shots=50, seed=4))
    text = records_to_csv(rec)
    assert text.startswith("shot,m1,m2\n0,") and "\r" not in text
    np.testing.assert_array_equal(read_records_csv(io.StringIO(text)), rec)
    buf = io.StringIO()
    write_records_csv(rec, buf)
    assert buf.getvalue() == text


def test_csv_bad_header():
    with pytest.raises(ValueError):
        read_records_csv(io.StringIO("a,b,c\n1,2,3\n"))
