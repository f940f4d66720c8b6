"""Exact inference by exhaustive enumeration, for desk-scale networks."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .network import BayesNet, joint_probabilities

DEFAULT_STATE_CAP = 2**24
_CHUNK = 1 << 16


class OracleCapacityError(ValueError):
    pass


class ImpossibleEvidenceError(ValueError):
    pass


@dataclass(frozen=True)
class ExactResult:
    probability: float
    terms_enumerated: int


def completions(net: BayesNet, w: Mapping[int, int], chunk: int = _CHUNK):
    """Yield (n, n_nodes) state arrays covering every completion of `w`."""
    free = [i for i in range(len(net)) if i not in w]
    cards = [int(net.cards[i]) for i in free]
    total = math.prod(cards)
    base = np.zeros(len(net), dtype=np.int64)
    for i, s in w.items():
        base[i] = s
    for start in range(0, total, chunk):
        flat = np.arange(start, min(start + chunk, total), dtype=np.int64)
        states = np.tile(base, (flat.size, 1))
        # mixed-radix decode, last free node fastest
        for j in range(len(free) - 1, -1, -1):
            states[:, free[j]] = flat % cards[j]
            flat = flat // cards[j]
        yield states


def exact_event_probability(net: BayesNet, w: Mapping | None = None,
                            cap: int = DEFAULT_STATE_CAP) -> ExactResult:
    """Pr(W = w), summing the joint over all completions with `math.fsum`."""
    w = net.resolve(w)
    free = [i for i in range(len(net)) if i not in w]
    total = math.prod(int(net.cards[i]) for i in free)
    if total > cap:
        raise OracleCapacityError(
            f"network too large for exact oracle: {total} joint states exceed cap {cap}"
        )
    terms = itertools.chain.from_iterable(
        joint_probabilities(net, states).tolist() for states in completions(net, w)
    )
    return ExactResult(probability=math.fsum(terms), terms_enumerated=total)


def exact_posterior(net: BayesNet, a: Mapping, e: Mapping | None = None,
                    cap: int = DEFAULT_STATE_CAP) -> float:
    """Pr(a | e) = Pr(a, e) / Pr(e)."""
    a = net.resolve(a)
    e = net.resolve(e)
    pe = exact_event_probability(net, e, cap).probability
    if pe <= 0.0:
        raise ImpossibleEvidenceError("impossible evidence")
    if any(e.get(i, s) != s for i, s in a.items()):
        return 0.0
    pae = exact_event_probability(net, {**e, **a}, cap).probability
    return pae / pe
