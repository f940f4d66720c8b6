"""Seeded synthetic networks and evidence for tests and benchmarks.

Outputs are a pure function of (GENERATOR_VERSION, arguments, seed); bump
the version whenever the draw sequence changes.
"""
from __future__ import annotations

import numpy as np

from .network import BayesNet, NodeSpec
from .oracle import exact_event_probability
from .rng import SeedLike, generator

GENERATOR_VERSION = 1


def random_network(n_nodes: int, seed: SeedLike, max_parents: int = 3, arity: int = 2,
                   concentration: float = 0.4) -> BayesNet:
    """DAG over nodes X0..X{n-1}; each node draws parents among earlier nodes.

    CPT rows are Dirichlet(concentration); values below 1 give the skewed
    tables that make evidence unlikely.
    """
    rng = generator(seed, GENERATOR_VERSION, 0)
    nodes = []
    for i in range(n_nodes):
        k = int(rng.integers(0, min(i, max_parents) + 1))
        parents = sorted(rng.choice(i, size=k, replace=False).tolist()) if k else []
        rows = arity ** len(parents)
        cpt = rng.dirichlet(np.full(arity, concentration), size=rows)
        cpt = np.clip(cpt, 1e-6, None)
        cpt /= cpt.sum(axis=1, keepdims=True)
        nodes.append(NodeSpec(f"X{i}", tuple(f"s{j}" for j in range(arity)),
                              tuple(f"X{p}" for p in parents), cpt))
    return BayesNet(nodes)


def finding_nodes(net: BayesNet) -> list[int]:
    """Childless nodes, the natural observation sites."""
    return [i for i in range(len(net)) if not net.children[i]]


def random_evidence(net: BayesNet, n_evidence: int, seed: SeedLike,
                    prob_range: tuple[float, float] = (0.0, 1.0), max_tries: int = 200,
                    candidates: list[int] | None = None) -> tuple[dict[int, int], float] | None:
    """Rejection-sample evidence whose exact probability lies in `prob_range`.

    Evidence nodes come from `candidates` (default: childless nodes, topped
    up with the latest nodes in topological order). Returns (evidence, Pr(e))
    or None if no draw qualified.
    """
    rng = generator(seed, GENERATOR_VERSION, 1)
    pool = list(candidates) if candidates is not None else finding_nodes(net)
    for i in reversed(net.topo_order):
        if len(pool) >= n_evidence:
            break
        if i not in pool:
            pool.append(i)
    lo, hi = prob_range
    for _ in range(max_tries):
        chosen = rng.choice(len(pool), size=n_evidence, replace=False)
        ev = {}
        for c in sorted(chosen.tolist()):
            node = pool[c]
            ev[node] = int(rng.integers(0, net.cards[node]))
        p = exact_event_probability(net, ev).probability
        if lo <= p <= hi:
            return ev, p
    return None


def rare_chain_network(length: int, p_root: float = 1e-3, fidelity: float = 0.999) -> BayesNet:
    """Chain X0 -> X1 -> ... where each node copies its parent with `fidelity`.

    Observing the rare root state at the far end of the chain makes the
    evidence improbable and the likelihood-weighting scores badly spread.
    """
    nodes = [NodeSpec("X0", ("s0", "s1"), (), [[1 - p_root, p_root]])]
    for i in range(1, length):
        nodes.append(NodeSpec(f"X{i}", ("s0", "s1"), (f"X{i - 1}",),
                              [[fidelity, 1 - fidelity], [1 - fidelity, fidelity]]))
    return BayesNet(nodes)
