import math

import numpy as np
import pytest

from aisbn.generate import random_network
from aisbn.oracle import exact_event_probability
from aisbn.rng import generator
from aisbn.sampler import (ScoredBatch, draw_sample, draw_samples, floor_rows, initial_importance,
                           lw_bound)
from helpers import enumerate_expectation, random_importance


def test_floor_keeps_cpt_rows_bitwise():
    cpt = np.array([[1e-6, 1 - 1e-6], [0.3, 0.7], [0.0, 1.0]])
    out = floor_rows(cpt, cpt, 1e-4)
    assert np.array_equal(out, cpt)


def test_floor_lifts_small_entries_and_respects_zeros():
    cpt = np.array([[0.2, 0.3, 0.5], [0.0, 0.5, 0.5]])
    icpt = np.array([[1e-9, 0.5, 0.5 - 1e-9], [0.3, 0.0, 0.7]])
    out = floor_rows(icpt, cpt, 1e-3)
    assert np.allclose(out.sum(axis=1), 1.0, atol=1e-15)
    assert out[0, 0] >= 1e-3 * (1 - 1e-12)
    assert out[1, 0] == 0.0
    assert out[1, 1] >= 1e-3 * (1 - 1e-12)


@pytest.mark.parametrize("strategy", ["cpt-clamp", "uniform-evidence-parents"])
def test_unbiased_by_enumeration(strategy, sprinkler_net):
    w = {"WetGrass": "wet"}
    imp = initial_importance(sprinkler_net, w, strategy)
    total, _ = enumerate_expectation(sprinkler_net, imp)
    assert total == pytest.approx(exact_event_probability(sprinkler_net, w).probability, abs=1e-14)


def test_unbiased_with_structural_zeros(ternary_net, rng):
    w = {"C": "c2"}
    imp = random_importance(ternary_net, w, rng)
    assert not imp.check()
    total, _ = enumerate_expectation(ternary_net, imp)
    assert total == pytest.approx(exact_event_probability(ternary_net, w).probability, abs=1e-14)


def test_empty_evidence_scores_are_one(ternary_net):
    imp = initial_importance(ternary_net, {})
    batch = draw_samples(ternary_net, imp, 500, generator(3))
    assert np.all(batch.scores == 1.0)


def test_lw_bound_dominates_cpt_clamp_scores():
    net = random_network(10, 4)
    w = {9: 1, 6: 0, 3: 1}
    imp = initial_importance(net, w)
    _, batch = enumerate_expectation(net, imp)
    live = batch.importance_probs > 0
    assert np.all(batch.scores[live] <= lw_bound(net, w) * (1 + 1e-12))


def test_lw_bound_simple(sprinkler_net):
    assert lw_bound(sprinkler_net, {"Rain": "yes", "WetGrass": "wet"}) == pytest.approx(0.8 * 0.99)
    assert lw_bound(sprinkler_net, {}) == 1.0


def test_draws_reproducible(sprinkler_net):
    imp = initial_importance(sprinkler_net, {"WetGrass": "wet"})
    a = draw_samples(sprinkler_net, imp, 200, generator(7, 1))
    b = draw_samples(sprinkler_net, imp, 200, generator(7, 1))
    c = draw_samples(sprinkler_net, imp, 200, generator(7, 2))
    assert np.array_equal(a.states, b.states) and np.array_equal(a.scores, b.scores)
    assert not np.array_equal(a.states, c.states)


def test_chunked_draws_equal_one_draw(sprinkler_net):
    imp = initial_importance(sprinkler_net, {"WetGrass": "wet"})
    whole = draw_samples(sprinkler_net, imp, 1000, generator(11))
    g = generator(11)
    parts = [draw_samples(sprinkler_net, imp, n, g) for n in (1, 299, 400, 300)]
    joined = ScoredBatch.concat(parts)
    assert np.array_equal(whole.states, joined.states)
    assert np.array_equal(whole.scores, joined.scores)


def test_empirical_frequencies_follow_icpt(sprinkler_net):
    imp = initial_importance(sprinkler_net, {"WetGrass": "wet"})
    batch = draw_samples(sprinkler_net, imp, 40000, generator(1))
    # Cloudy is a root with ICPT [0.5, 0.5]
    frac = batch.states[:, 0].mean()
    assert abs(frac - 0.5) < 4 * math.sqrt(0.25 / 40000)
    assert np.all(batch.states[:, 3] == 1)


def test_draw_sample_fields(sprinkler_net):
    imp = initial_importance(sprinkler_net, {"WetGrass": "wet"})
    s = draw_sample(sprinkler_net, imp, generator(5))
    assert s.assignment[3] == 1 and s.score >= 0 and 0 < s.importance_prob <= 1


def test_from_learned_requires_function(sprinkler_net):
    with pytest.raises(ValueError):
        initial_importance(sprinkler_net, {}, "from-learned")
    with pytest.raises(ValueError):
        initial_importance(sprinkler_net, {}, "bogus")
