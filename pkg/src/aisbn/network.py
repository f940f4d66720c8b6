"""Discrete Bayesian networks: validation, ordering and chain-rule evaluation.

CPT layout: one row per parent configuration, rows enumerated row-major in
declared parent order (the first parent varies slowest), one column per
child state.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

ROW_SUM_TOL = 1e-9


class NetworkError(ValueError):
    """Raised when a network violates one of its structural invariants."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class AssignmentError(ValueError):
    pass


@dataclass(frozen=True)
class NodeSpec:
    id: str
    states: tuple[str, ...]
    parents: tuple[str, ...]
    cpt: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(str(s) for s in self.states))
        object.__setattr__(self, "parents", tuple(self.parents))
        cpt = np.array(self.cpt, dtype=float)
        if cpt.ndim == 1:
            k = len(self.states)
            if k and cpt.size % k == 0:
                cpt = cpt.reshape(-1, k)
        cpt.flags.writeable = False
        object.__setattr__(self, "cpt", cpt)

    @property
    def cardinality(self) -> int:
        return len(self.states)


def _topological_order(n: int, parents: list[list[int]]) -> list[int] | None:
    # Kahn's algorithm; ties broken by declaration order so the order is stable.
    indeg = [len(p) for p in parents]
    children: list[list[int]] = [[] for _ in range(n)]
    for child, ps in enumerate(parents):
        for p in ps:
            children[p].append(child)
    ready = [i for i in range(n) if indeg[i] == 0]
    order = []
    while ready:
        ready.sort()
        i = ready.pop(0)
        order.append(i)
        for c in children[i]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    return order if len(order) == n else None


class BayesNet:
    """Immutable discrete Bayesian network.

    Parameters
    ----------
    nodes : sequence of NodeSpec
        Nodes in declaration order. Node indices used throughout the package
        refer to positions in this sequence.
    check : bool
        When True (default) the constructor raises `NetworkError` on any
        invariant violation. Pass False to build a net only to inspect
        `validate(net)`.
    """

    def __init__(self, nodes: Sequence[NodeSpec], check: bool = True):
        self.nodes: tuple[NodeSpec, ...] = tuple(nodes)
        self.index = {node.id: i for i, node in enumerate(self.nodes)}
        self.cards = np.array([n.cardinality for n in self.nodes], dtype=np.int64)
        self.cards.flags.writeable = False
        parent_idx = []
        for node in self.nodes:
            parent_idx.append([self.index.get(p, -1) for p in node.parents])
        self._parent_lists = parent_idx
        resolved = [[p for p in ps if p >= 0] for ps in parent_idx]
        self.topo_order: tuple[int, ...] | None
        order = _topological_order(len(self.nodes), resolved)
        self.topo_order = tuple(order) if order is not None else None
        if check:
            violations = validate(self)
            if violations:
                raise NetworkError(violations)
        self.parents = tuple(np.array(ps, dtype=np.int64) for ps in parent_idx)
        self.strides = tuple(self._strides(ps) for ps in parent_idx)
        self.children = tuple(
            tuple(c for c in range(len(self.nodes)) if i in parent_idx[c])
            for i in range(len(self.nodes))
        )

    def _strides(self, ps: list[int]) -> np.ndarray:
        strides = np.ones(len(ps), dtype=np.int64)
        for j in range(len(ps) - 2, -1, -1):
            strides[j] = strides[j + 1] * self.cards[ps[j + 1]]
        return strides

    def __len__(self) -> int:
        return len(self.nodes)

    def __repr__(self) -> str:
        return f"BayesNet({len(self.nodes)} nodes)"

    def __eq__(self, other) -> bool:
        if not isinstance(other, BayesNet) or len(self) != len(other):
            return False
        for a, b in zip(self.nodes, other.nodes):
            if (a.id, a.states, a.parents) != (b.id, b.states, b.parents):
                return False
            if a.cpt.shape != b.cpt.shape or not np.array_equal(a.cpt, b.cpt):
                return False
        return True

    __hash__ = object.__hash__

    def node_index(self, ref: str | int) -> int:
        if isinstance(ref, (int, np.integer)):
            if not 0 <= ref < len(self.nodes):
                raise AssignmentError(f"node index {ref} out of range")
            return int(ref)
        try:
            return self.index[ref]
        except KeyError:
            raise AssignmentError(f"unknown node {ref!r}") from None

    def state_index(self, node: int, state: str | int) -> int:
        spec = self.nodes[node]
        if isinstance(state, (int, np.integer)) and not isinstance(state, bool):
            if not 0 <= state < spec.cardinality:
                raise AssignmentError(f"state {state} out of range for node {spec.id!r}")
            return int(state)
        try:
            return spec.states.index(str(state))
        except ValueError:
            raise AssignmentError(f"node {spec.id!r} has no state {state!r}") from None

    def resolve(self, assignment: Mapping | None) -> dict[int, int]:
        """Map node ids/indices and state labels/indices to dense indices."""
        if not assignment:
            return {}
        out: dict[int, int] = {}
        for ref, state in assignment.items():
            i = self.node_index(ref)
            s = self.state_index(i, state)
            if out.get(i, s) != s:
                raise AssignmentError(f"conflicting states for node {self.nodes[i].id!r}")
            out[i] = s
        return out

    def labels(self, assignment: Mapping[int, int]) -> dict[str, str]:
        return {self.nodes[i].id: self.nodes[i].states[s] for i, s in sorted(assignment.items())}

    def n_rows(self, node: int) -> int:
        return int(np.prod(self.cards[self.parents[node]])) if len(self.parents[node]) else 1

    def config_index(self, node: int, states: np.ndarray) -> np.ndarray:
        """Row index of each sample's parent configuration for `node`.

        `states` has shape (n_samples, n_nodes).
        """
        ps = self.parents[node]
        if len(ps) == 0:
            return np.zeros(states.shape[0], dtype=np.int64)
        return states[:, ps] @ self.strides[node]

    def row_of(self, node: int, assignment: Mapping[int, int]) -> int:
        return int(sum(assignment[p] * s for p, s in zip(self.parents[node], self.strides[node])))

    def consistent_rows(self, node: int, evidence: Mapping[int, int]) -> np.ndarray:
        """Indices of CPT rows whose parent configuration agrees with `evidence`."""
        ps = self.parents[node]
        if len(ps) == 0:
            return np.zeros(1, dtype=np.int64)
        grids = [
            np.array([evidence[p]]) if p in evidence else np.arange(self.cards[p])
            for p in ps
        ]
        mesh = np.meshgrid(*grids, indexing="ij")
        configs = np.stack([m.ravel() for m in mesh], axis=1)
        return configs @ self.strides[node]


def validate(net: BayesNet) -> list[str]:
    """Return every invariant violation of `net`; an empty list means valid."""
    violations = []
    seen = set()
    for node in net.nodes:
        if node.id in seen:
            violations.append(f"duplicate node id {node.id!r}")
        seen.add(node.id)
    for i, node in enumerate(net.nodes):
        if node.cardinality < 1:
            violations.append(f"node {node.id!r}: needs at least one state")
            continue
        missing = [p for p in node.parents if p not in net.index]
        for p in missing:
            violations.append(f"node {node.id!r}: unknown parent {p!r}")
        if len(set(node.parents)) != len(node.parents):
            violations.append(f"node {node.id!r}: repeated parent")
        if missing:
            continue
        rows = 1
        for p in node.parents:
            rows *= net.nodes[net.index[p]].cardinality
        cpt = node.cpt
        if cpt.ndim != 2 or cpt.shape != (rows, node.cardinality):
            violations.append(
                f"node {node.id!r}: cpt arity mismatch, expected {rows}x{node.cardinality} "
                f"({rows * node.cardinality} entries), got {cpt.size} entries"
            )
            continue
        if not np.all(np.isfinite(cpt)) or np.any(cpt < 0) or np.any(cpt > 1):
            violations.append(f"node {node.id!r}: cpt entries outside [0, 1]")
        sums = cpt.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)
        for r in bad:
            violations.append(f"node {node.id!r}: row {r} row sum {sums[r]!r} != 1")
    if net.topo_order is None:
        violations.append("cycle in parent graph")
    return violations


def _total_states(net: BayesNet, s: Mapping) -> dict[int, int]:
    states = net.resolve(s)
    if len(states) != len(net):
        raise AssignmentError("incomplete assignment")
    return states


def joint_probability(net: BayesNet, s: Mapping) -> float:
    """Chain-rule probability of a total assignment."""
    states = _total_states(net, s)
    p = 1.0
    for i, node in enumerate(net.nodes):
        p *= node.cpt[net.row_of(i, states), states[i]]
    return float(p)


def joint_probabilities(net: BayesNet, states: np.ndarray) -> np.ndarray:
    """Vectorized chain-rule probability for an (n_samples, n_nodes) state array."""
    p = np.ones(states.shape[0])
    for i, node in enumerate(net.nodes):
        p *= node.cpt[net.config_index(i, states), states[:, i]]
    return p


def max_consistent_cpt_value(net: BayesNet, node: str | int, evidence: Mapping) -> float:
    """Largest CPT entry for the observed state of an evidence node.

    The maximum runs over the parent configurations that agree with the
    rest of the evidence.
    """
    ev = net.resolve(evidence)
    i = net.node_index(node)
    if i not in ev:
        raise AssignmentError(f"node {net.nodes[i].id!r} is not in the evidence")
    rows = net.consistent_rows(i, ev)
    return float(net.nodes[i].cpt[rows, ev[i]].max())
