import itertools
import math

import pytest
from mpmath import mp, mpf

from aisbn.generate import random_network
from aisbn.oracle import (ImpossibleEvidenceError, OracleCapacityError, exact_event_probability,
                          exact_posterior)


def recursive_probability(net, w):
    """Independent oracle: extended-precision sum over a recursive product."""
    mp.dps = 40
    order = list(net.topo_order)

    def go(k, s):
        if k == len(order):
            return mpf(1)
        i = order[k]
        row = net.row_of(i, s)
        total = mpf(0)
        states = [w[i]] if i in w else range(net.cards[i])
        for v in states:
            p = net.nodes[i].cpt[row, v]
            if p:
                s[i] = v
                total += mpf(float(p)) * go(k + 1, s)
                del s[i]
        return total

    return go(0, {})


@pytest.mark.parametrize("seed", range(6))
def test_matches_recursive_enumeration(seed):
    net = random_network(9, seed)
    w = {8: 1, 5: 0, 2: 1} if seed % 2 else {7: 0}
    got = exact_event_probability(net, w).probability
    want = float(recursive_probability(net, w))
    assert got == pytest.approx(want, rel=1e-13)


def test_sprinkler_known_value(sprinkler_net):
    # Pr(WetGrass=wet) = 0.6471 for this textbook parameterization
    assert exact_event_probability(sprinkler_net, {"WetGrass": "wet"}).probability == pytest.approx(0.6471, abs=1e-12)
    post = exact_posterior(sprinkler_net, {"Rain": "yes"}, {"WetGrass": "wet"})
    assert post == pytest.approx(0.4581 / 0.6471, rel=1e-12)


def test_empty_event_is_one(ternary_net):
    r = exact_event_probability(ternary_net, {})
    assert r.probability == pytest.approx(1.0, abs=1e-15)
    assert r.terms_enumerated == math.prod(ternary_net.cards)


def test_chunking_does_not_change_the_sum(ternary_net):
    from aisbn.oracle import completions
    w = ternary_net.resolve({"C": "c1"})
    all_rows = [row for chunk in completions(ternary_net, w, chunk=1) for row in chunk.tolist()]
    expected = [dict(zip(range(3), r)) for r in all_rows]
    assert len(expected) == 6
    assert all(e[2] == 1 for e in expected)
    assert len({tuple(r) for r in all_rows}) == len(all_rows)
    brute = sorted(itertools.product(range(3), range(2)))
    assert sorted((r[0], r[1]) for r in all_rows) == brute


def test_capacity_guard():
    net = random_network(12, 0)
    with pytest.raises(OracleCapacityError):
        exact_event_probability(net, {}, cap=100)


def test_impossible_evidence(sprinkler_net):
    e = {"Sprinkler": "off", "Rain": "no", "WetGrass": "wet"}
    assert exact_event_probability(sprinkler_net, e).probability == 0.0
    with pytest.raises(ImpossibleEvidenceError, match="impossible evidence"):
        exact_posterior(sprinkler_net, {"Cloudy": "yes"}, e)


def test_conflicting_query_is_zero(sprinkler_net):
    assert exact_posterior(sprinkler_net, {"Rain": "no"}, {"Rain": "yes"}) == 0.0
