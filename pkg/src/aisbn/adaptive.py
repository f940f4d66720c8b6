"""Importance-function learning from scored samples."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .network import BayesNet
from .sampler import ImportanceFunction, ScoredBatch, floor_rows

ETA_FLOOR = 0.1423


@dataclass
class ScoreTallies:
    """Score sums per (free node, parent configuration, child state)."""

    cells: dict[int, np.ndarray] = field(default_factory=dict)

    def row_totals(self, node: int) -> np.ndarray:
        return self.cells[node].sum(axis=1)

    def merge(self, other: ScoreTallies) -> ScoreTallies:
        out = {i: t.copy() for i, t in self.cells.items()}
        for i, t in other.cells.items():
            out[i] = out[i] + t if i in out else t.copy()
        return ScoreTallies(out)


@dataclass
class LearnState:
    k: int = 0
    b_prev: float | None = None
    eta: float = 0.5


def empty_tallies(imp: ImportanceFunction) -> ScoreTallies:
    return ScoreTallies({i: np.zeros_like(t) for i, t in imp.icpts.items()})


def tally(net: BayesNet, imp: ImportanceFunction, batch: ScoredBatch) -> ScoreTallies:
    """Deposit each sample's score at its (parent config, state) cell per free node."""
    out = {}
    for i, table in imp.icpts.items():
        rows, k = table.shape
        cell = net.config_index(i, batch.states) * k + batch.states[:, i]
        out[i] = np.bincount(cell, weights=batch.scores, minlength=rows * k).reshape(rows, k)
    return ScoreTallies(out)


def estimated_conditional(tallies: ScoreTallies, node: int, parent_config: int):
    """Normalized score sums of one row, or None when the row saw no mass."""
    row = tallies.cells[node][parent_config]
    total = row.sum()
    if not total > 0:
        return None
    return row / total


def learning_rate(k: int, lam: float) -> float:
    """Piecewise learning rate; `k` counts completed updates from zero."""
    if k < 3 or lam > 5:
        return 0.5
    if lam >= 0.5:
        return 0.25 * math.log(5.0 * lam, 5)
    return ETA_FLOOR


def lambda_ratio(b_prev: float | None, b_curr: float) -> float:
    """Ratio of consecutive stage bounds; infinite when there is no prior stage."""
    if b_prev is None or b_curr <= 0:
        return math.inf
    return b_prev / b_curr


def update_importance(imp: ImportanceFunction, tallies: ScoreTallies, eta: float) -> ImportanceFunction:
    """Move every observed ICPT row a fraction `eta` toward its estimated conditional."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta={eta} outside [0, 1]")
    new = {}
    for i, table in imp.icpts.items():
        cells = tallies.cells.get(i)
        if cells is None or eta == 0.0:
            new[i] = table
            continue
        totals = cells.sum(axis=1, keepdims=True)
        seen = totals[:, 0] > 0
        if not seen.any():
            new[i] = table
            continue
        estimate = np.divide(cells, totals, out=np.zeros_like(cells), where=totals > 0)
        rows = table.copy()
        rows[seen] = (1.0 - eta) * table[seen] + eta * estimate[seen]
        cpt = imp.net.nodes[i].cpt
        updated = floor_rows(rows[seen], cpt[seen], imp.p_floor)
        rows[seen] = updated / updated.sum(axis=1, keepdims=True)
        new[i] = rows
    return ImportanceFunction(imp.net, imp.clamped, new, imp.stage_index + 1, imp.p_floor)
