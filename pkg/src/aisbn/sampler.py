"""Importance functions, forward sampling and the score variable.

For a set of instantiated nodes W = w, an importance function holds one
ICPT for every free node. A sample is drawn forward in topological order
and scored as

    Z(s) = Pr(s, W = w) / Pr^(k)(s)

which is an unbiased estimate of Pr(W = w).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .network import BayesNet, max_consistent_cpt_value

P_FLOOR = 1e-4
STRATEGIES = ("cpt-clamp", "uniform-evidence-parents", "from-learned")


def floor_rows(icpt: np.ndarray, cpt: np.ndarray, p_floor: float = P_FLOOR) -> np.ndarray:
    """Floor ICPT entries and renormalize each row.

    Entries whose CPT entry is zero are forced to zero. Every other entry
    ends at least min(p_floor, cpt entry), so a row copied from the CPT is
    left exactly as it is.
    """
    support = cpt > 0
    floor = np.where(support, np.minimum(p_floor, cpt), 0.0)
    row = np.where(support, icpt, 0.0).astype(float)
    pinned = np.zeros_like(support)
    for _ in range(row.shape[1] + 1):
        low = support & ~pinned & (row < floor)
        if not low.any():
            break
        pinned |= low
        row[pinned] = floor[pinned]
        rest = support & ~pinned
        rest_sum = np.where(rest, row, 0.0).sum(axis=1, keepdims=True)
        target = 1.0 - np.where(pinned, row, 0.0).sum(axis=1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(rest_sum > 0, target / rest_sum, 1.0)
        row = np.where(rest, row * scale, row)
    touched = pinned.any(axis=1) | (np.where(support, icpt, 0.0) != icpt).any(axis=1)
    row[touched] /= row[touched].sum(axis=1, keepdims=True)
    return row


@dataclass(frozen=True)
class ScoredSample:
    assignment: dict[int, int]
    score: float
    importance_prob: float


@dataclass(frozen=True)
class ScoredBatch:
    states: np.ndarray
    scores: np.ndarray
    importance_probs: np.ndarray

    def __len__(self) -> int:
        return len(self.scores)

    @classmethod
    def concat(cls, parts: list[ScoredBatch]) -> ScoredBatch:
        if len(parts) == 1:
            return parts[0]
        return cls(np.concatenate([p.states for p in parts]),
                   np.concatenate([p.scores for p in parts]),
                   np.concatenate([p.importance_probs for p in parts]))


class ImportanceFunction:
    """ICPTs over the free nodes of `net` given instantiated nodes `clamped`.

    Instances are treated as values: learning produces a new instance
    through `adaptive.update_importance`.
    """

    def __init__(self, net: BayesNet, clamped: Mapping[int, int], icpts: Mapping[int, np.ndarray],
                 stage_index: int = 0, p_floor: float = P_FLOOR):
        self.net = net
        self.clamped = dict(clamped)
        self.p_floor = p_floor
        self.stage_index = stage_index
        self.icpts: dict[int, np.ndarray] = {}
        for i in range(len(net)):
            if i in self.clamped:
                continue
            table = np.array(icpts[i], dtype=float)
            table.flags.writeable = False
            self.icpts[i] = table
        self._tables = None

    @property
    def free_nodes(self) -> list[int]:
        return sorted(self.icpts)

    def check(self, tol: float = 1e-9) -> list[str]:
        problems = []
        for i, table in self.icpts.items():
            cpt = self.net.nodes[i].cpt
            if table.shape != cpt.shape:
                problems.append(f"node {i}: ICPT shape {table.shape} != CPT shape {cpt.shape}")
                continue
            if np.any(np.abs(table.sum(axis=1) - 1.0) > tol):
                problems.append(f"node {i}: ICPT row does not sum to 1")
            floor = np.minimum(self.p_floor, cpt)
            if np.any((cpt > 0) & (table < floor * (1 - 1e-9))):
                problems.append(f"node {i}: ICPT entry below p_floor")
        return problems

    def tables(self):
        """Per-node lookup tables used by the hot sampling loop (cached)."""
        if self._tables is None:
            log_q, cum, ratio = {}, {}, {}
            with np.errstate(divide="ignore", invalid="ignore"):
                for i, table in self.icpts.items():
                    log_q[i] = np.log(table)
                    r = np.log(self.net.nodes[i].cpt) - log_q[i]
                    r[np.isnan(r)] = -np.inf
                    ratio[i] = r
                    c = np.cumsum(table, axis=1)
                    k = table.shape[1]
                    # states at or after a row's last positive entry are never
                    # selected by overshoot of the cumulative sum
                    last = k - 1 - np.argmax(table[:, ::-1] > 0, axis=1)
                    c[np.arange(k)[None, :] >= last[:, None]] = np.inf
                    cum[i] = c[:, :-1]
            self._tables = (log_q, cum, ratio)
        return self._tables


def _log_cpts(net: BayesNet) -> tuple[np.ndarray, ...]:
    cached = getattr(net, "_log_cpt_cache", None)
    if cached is None:
        with np.errstate(divide="ignore"):
            cached = tuple(np.log(node.cpt) for node in net.nodes)
        net._log_cpt_cache = cached
    return cached


def initial_importance(net: BayesNet, w: Mapping | None, strategy: str = "cpt-clamp",
                       learned: ImportanceFunction | None = None,
                       p_floor: float = P_FLOOR) -> ImportanceFunction:
    """Build Pr^(0)(X \\ W).

    strategy
        ``cpt-clamp``: copy the CPTs of the free nodes (likelihood weighting).
        ``uniform-evidence-parents``: as cpt-clamp, but free parents of
        instantiated nodes get rows uniform over their CPT support.
        ``from-learned``: copy the ICPTs of `learned`, typically the function
        learned while estimating Pr(e), for a superset of its clamped nodes.
    """
    w = net.resolve(w)
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown initialization strategy {strategy!r}")
    icpts = {i: net.nodes[i].cpt for i in range(len(net)) if i not in w}
    if strategy == "uniform-evidence-parents":
        targets = {p for i in w for p in net.parents[i].tolist() if p not in w}
        for p in targets:
            support = (net.nodes[p].cpt > 0).astype(float)
            icpts[p] = support / support.sum(axis=1, keepdims=True)
    elif strategy == "from-learned":
        if learned is None:
            raise ValueError("from-learned strategy needs a learned importance function")
        if learned.net is not net and learned.net != net:
            raise ValueError("learned importance function belongs to a different network")
        for i in icpts:
            if i in learned.icpts:
                icpts[i] = learned.icpts[i]
    floored = {i: floor_rows(t, net.nodes[i].cpt, p_floor) for i, t in icpts.items()}
    return ImportanceFunction(net, w, floored, stage_index=0, p_floor=p_floor)


def _forward(net: BayesNet, imp: ImportanceFunction, states: np.ndarray,
             u: np.ndarray | None = None) -> ScoredBatch:
    # Sweeps nodes in topological order. With uniforms `u` the free nodes are
    # sampled into `states`; without, `states` is scored as given. log Z is
    # accumulated as log(cpt) - log(icpt) per node so that factors shared by
    # target and proposal cancel exactly.
    log_cpt = _log_cpts(net)
    log_q_tab, cum_tab, ratio_tab = imp.tables()
    n = states.shape[0]
    log_q = np.zeros(n)
    log_z = np.zeros(n)
    for i in net.topo_order:
        rows = net.config_index(i, states)
        if i in imp.clamped:
            states[:, i] = imp.clamped[i]
            log_z += log_cpt[i][rows, imp.clamped[i]]
            continue
        if u is not None:
            states[:, i] = (cum_tab[i][rows] <= u[:, i:i + 1]).sum(axis=1)
        s = states[:, i]
        log_q += log_q_tab[i][rows, s]
        log_z += ratio_tab[i][rows, s]
    return ScoredBatch(states, np.exp(log_z), np.exp(log_q))


def draw_samples(net: BayesNet, imp: ImportanceFunction, n: int,
                 rng: np.random.Generator) -> ScoredBatch:
    """Draw `n` independent scored samples from `imp`.

    Uniforms are drawn as a single (n, n_nodes) block, so a batch is a pure
    function of the generator state.
    """
    u = rng.random((n, len(net)))
    states = np.zeros((n, len(net)), dtype=np.int64)
    return _forward(net, imp, states, u)


def draw_sample(net: BayesNet, imp: ImportanceFunction, rng: np.random.Generator) -> ScoredSample:
    batch = draw_samples(net, imp, 1, rng)
    assignment = {i: int(s) for i, s in enumerate(batch.states[0])}
    return ScoredSample(assignment, float(batch.scores[0]), float(batch.importance_probs[0]))


def score_assignments(net: BayesNet, imp: ImportanceFunction,
                      states: np.ndarray) -> ScoredBatch:
    """Score given total assignments. Clamped columns are overwritten with w."""
    states = np.array(states, dtype=np.int64)
    return _forward(net, imp, states)


def lw_bound(net: BayesNet, w: Mapping | None) -> float:
    """Upper bound on the likelihood-weighting score: the product of u_i."""
    w = net.resolve(w)
    bound = 1.0
    for i in w:
        bound *= max_consistent_cpt_value(net, i, w)
    return bound
