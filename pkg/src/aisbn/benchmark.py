"""Benchmark harness: synthetic suites scored against the exact oracle.

A suite document names the generator parameters, the engine configuration
and the number of repeated runs per case. The report mirrors the usual
summary of a confidence-inference experiment: the five-number relative
error summary, histograms of relative error and of required samples, and
the distribution of the AIS-BN-mu / AIS-BN-sigma required-sample ratio.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import stopping
from .engine import EngineConfig, infer_posteriors
from .formats import config_from_dict, config_to_dict
from .generate import GENERATOR_VERSION, random_evidence, random_network
from .network import BayesNet
from .oracle import DEFAULT_STATE_CAP, OracleCapacityError, exact_posterior
from .rng import generator, substream

DEFAULT_SUITE = {
    "seed": 0,
    "n_networks": 20,
    "n_nodes": [12, 16],
    "max_parents": 3,
    "arity": 2,
    "concentration": 0.4,
    "n_evidence": [3, 5],
    "evidence_probability": [1e-8, 1e-2],
    "n_queries": 5,
    "runs": 1,
    "oracle_cap": DEFAULT_STATE_CAP,
    "engine": {"epsilon_r": 0.05, "delta": 0.05},
}


@dataclass
class Case:
    index: int
    net: BayesNet
    evidence: dict[int, int]
    p_evidence: float
    queries: list[tuple[int, int, float]]


@dataclass
class CallRecord:
    """One Estimate_Prob call: evidence (query=None) or joint with a query."""

    case: int
    run: int
    query: int | None
    estimate: float
    exact: float
    n_required: float
    terminated_by: str
    restarts: int
    stages: list[tuple[float, float, float, float, float]]

    @property
    def relative_error(self) -> float:
        return abs(self.estimate - self.exact) / self.exact


@dataclass
class SuiteResult:
    cases: list[Case]
    calls: list[CallRecord] = field(default_factory=list)
    posteriors: list[tuple[int, int, int, float, float]] = field(default_factory=list)

    def posterior_errors(self) -> np.ndarray:
        """Signed relative errors (estimate - exact) / exact of all posteriors."""
        return np.array([(p - x) / x for *_, p, x in self.posteriors])

    def evidence_errors(self, case: int) -> np.ndarray:
        return np.array([c.relative_error for c in self.calls if c.case == case and c.query is None])

    def stage_ratios(self) -> np.ndarray:
        return np.array([n_mu / n_s for c in self.calls for (_, _, _, n_s, n_mu) in c.stages
                         if math.isfinite(n_s) and math.isfinite(n_mu)])


def _suite(suite: dict) -> dict:
    merged = {**DEFAULT_SUITE, **suite}
    cap = int(merged["oracle_cap"])
    worst = merged["arity"] ** max(merged["n_nodes"])
    if worst > cap:
        raise OracleCapacityError(
            f"generator may produce {worst} joint states, above the oracle cap {cap}"
        )
    return merged


def build_suite(suite: dict) -> list[Case]:
    """Generate networks, evidence in the target probability band and queries."""
    s = _suite(suite)
    cases = []
    attempt = 0
    lo_n, hi_n = s["n_nodes"]
    lo_e, hi_e = s["n_evidence"]
    while len(cases) < s["n_networks"]:
        if attempt > 50 * s["n_networks"]:
            raise RuntimeError("could not generate enough cases in the evidence probability band")
        pick = generator(s["seed"], GENERATOR_VERSION, 2, attempt)
        n_nodes = int(pick.integers(lo_n, hi_n + 1))
        n_ev = int(pick.integers(lo_e, hi_e + 1))
        net = random_network(n_nodes, substream(s["seed"], 3, attempt), s["max_parents"],
                             s["arity"], s["concentration"])
        found = random_evidence(net, n_ev, substream(s["seed"], 4, attempt),
                                tuple(s["evidence_probability"]), max_tries=50)
        attempt += 1
        if found is None:
            continue
        ev, pe = found
        free = [i for i in range(n_nodes) if i not in ev]
        chosen = pick.choice(free, size=min(s["n_queries"], len(free)), replace=False)
        queries = []
        for node in sorted(chosen.tolist()):
            state = int(pick.integers(0, net.cards[node]))
            queries.append((node, state, exact_posterior(net, {node: state}, ev)))
        cases.append(Case(len(cases), net, ev, pe, queries))
    return cases


def run_suite(suite: dict, cases: list[Case] | None = None, progress=None) -> SuiteResult:
    s = _suite(suite)
    cfg, _ = config_from_dict(s["engine"])
    cases = build_suite(s) if cases is None else cases
    out = SuiteResult(cases)
    for case in cases:
        for run in range(s["runs"]):
            seed = substream(s["seed"], 5, case.index, run)
            res = infer_posteriors(case.net, case.evidence, [(q, st) for q, st, _ in case.queries],
                                   cfg, seed)
            out.calls.append(_record(case.index, run, None, res.evidence_report, case.p_evidence))
            for j, (r, (q, st, exact)) in enumerate(zip(res.results, case.queries)):
                out.posteriors.append((case.index, run, j, r.posterior, exact))
                if r.report is not None and r.report is not res.evidence_report:
                    out.calls.append(_record(case.index, run, j, r.report,
                                             exact * case.p_evidence))
        if progress is not None:
            progress(case)
    return out


def _record(case, run, query, report, exact) -> CallRecord:
    stages = [(s.b_tilde, s.mu_tilde, s.sigma2_tilde, s.n_sigma, s.n_mu)
              for s in report.estimation_stages]
    return CallRecord(case, run, query, report.estimate, exact, report.n_required,
                      report.terminated_by, report.restarts, stages)


def five_number(values) -> dict:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return {"mean": None, "std": None, "min": None, "median": None, "max": None}
    return {"mean": float(v.mean()), "std": float(v.std(ddof=1)) if v.size > 1 else 0.0,
            "min": float(v.min()), "median": float(np.median(v)), "max": float(v.max())}


def histogram(values, bins) -> dict:
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins=bins)
    return {"edges": edges.tolist(), "counts": counts.tolist()}


def summarize(suite: dict, result: SuiteResult) -> dict:
    s = _suite(suite)
    cfg, _ = config_from_dict(s["engine"])
    bound = stopping.posterior_error_bounds(cfg.eps_r, cfg.delta)
    signed = result.posterior_errors()
    rel = np.abs(signed)
    outside = (signed < bound.lower) | (signed > bound.upper)
    n_req = np.array([c.n_required for c in result.calls if math.isfinite(c.n_required)])
    final_ratio = np.array([c.stages[-1][4] / c.stages[-1][3] for c in result.calls
                            if c.stages and math.isfinite(c.stages[-1][3])])
    stage_ratio = result.stage_ratios()
    per_case = []
    for case in result.cases:
        ev_err = result.evidence_errors(case.index)
        per_case.append({"case": case.index, "nodes": len(case.net),
                         "evidence": len(case.evidence), "p_evidence": case.p_evidence,
                         "evidence_failure_fraction": float(np.mean(ev_err > cfg.eps_r))})
    first_capped = [c for c in result.calls if c.restarts > 0 or c.terminated_by != "required-samples-met"]
    rescued = [c for c in first_capped if c.restarts == 1 and c.terminated_by == "required-samples-met"]
    return {
        "generator_version": GENERATOR_VERSION,
        "suite": {k: v for k, v in s.items() if k != "engine"},
        "config": config_to_dict(cfg),
        "cases": per_case,
        "posterior_relative_error": five_number(rel),
        "fraction_relative_error_above_eps": float(np.mean(rel > cfg.eps_r)) if rel.size else None,
        "fraction_outside_posterior_bound": float(np.mean(outside)) if rel.size else None,
        "posterior_bound": {"lower": bound.lower, "upper": bound.upper,
                            "confidence": bound.confidence},
        "relative_error_histogram": histogram(rel, np.linspace(0, max(0.2, float(rel.max(initial=0))), 21)),
        "required_samples_histogram": histogram(
            np.log10(n_req) if n_req.size else [], np.arange(0, 8.5, 0.5)),
        "mu_sigma_ratio_histogram": histogram(final_ratio, [0, 1, 2, 4, 8, 16, 32, 64, 1e9]),
        "mu_sigma_ratio_at_least_4": float(np.mean(final_ratio >= 4)) if final_ratio.size else None,
        "mu_sigma_stage_ratio_at_least_1": float(np.mean(stage_ratio >= 1)) if stage_ratio.size else None,
        "restart": {"calls": len(result.calls), "first_attempt_capped": len(first_capped),
                    "rescued_by_one_restart": len(rescued)},
    }


def run_benchmark(suite: dict) -> dict:
    """Build, run and summarize a suite; the returned report is JSON-ready."""
    return summarize(suite, run_suite(suite))
