"""Shared builders for tests."""
import itertools
import math

import numpy as np

from aisbn.sampler import ImportanceFunction, floor_rows, score_assignments


def random_importance(net, w, rng, p_floor=1e-4):
    w = net.resolve(w)
    icpts = {}
    for i in range(len(net)):
        if i in w:
            continue
        cpt = net.nodes[i].cpt
        raw = rng.dirichlet(np.ones(cpt.shape[1]), size=cpt.shape[0])
        icpts[i] = floor_rows(raw, cpt, p_floor)
    return ImportanceFunction(net, w, icpts, p_floor=p_floor)


def enumerate_expectation(net, imp):
    """sum_s Pr^(k)(s) Z(s) over every assignment of the free nodes."""
    free = imp.free_nodes
    grid = np.array(list(itertools.product(*[range(net.cards[i]) for i in free])), dtype=np.int64)
    states = np.zeros((len(grid), len(net)), dtype=np.int64)
    states[:, free] = grid
    batch = score_assignments(net, imp, states)
    return math.fsum((batch.importance_probs * batch.scores).tolist()), batch
