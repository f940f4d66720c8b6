"""AIS-BN-sigma and AIS-BN-mu drivers.

`estimate_prob` runs the staged estimation loop for Pr(W = w):

* warm-up stages of `interval` samples learn the importance function and
  are discarded;
* estimation stages accumulate sum Z, sum Z^2 and the running maximum b~,
  and after `threshold` samples in a stage keep the required sample count
  N~ current;
* each completed stage is folded into gamma and the harmonic weights
  1/N~; sampling stops at the first i >= max(t, (1 - gamma) N~).

The estimate is the stage means weighted by w_k proportional to 1/N~_k.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import stopping
from .adaptive import LearnState, lambda_ratio, learning_rate, tally, update_importance
from .network import BayesNet
from .oracle import ImpossibleEvidenceError
from .rng import SeedLike, as_seed_sequence, generator, substream
from .sampler import ImportanceFunction, ScoredBatch, draw_samples, initial_importance, lw_bound

ALGORITHMS = ("ais-sigma", "ais-mu")
TERMINATIONS = ("required-samples-met", "sample-cap", "zero-mass")
_SWITCH = {
    "cpt-clamp": "uniform-evidence-parents",
    "uniform-evidence-parents": "cpt-clamp",
    "from-learned": "cpt-clamp",
}


class ConfigError(ValueError):
    pass


class ZeroMassError(RuntimeError):
    pass


@dataclass(frozen=True)
class EngineConfig:
    eps_r: float = 0.025
    delta: float = 0.025
    interval: int = 2500
    threshold: int = 1000
    warmup_stages: int = 10
    sample_cap: int = 100_000
    algorithm: str = "ais-sigma"
    interleave_learning: bool = False
    reuse_learned_importance: bool = True
    query_warmup_stages: int | None = None
    delta_s_table: Mapping[tuple[float, float], float] | None = None
    p_floor: float = 1e-4
    max_restarts: int = 2
    restart_strategy_switch: int | None = None
    init_strategy: str = "cpt-clamp"
    mu_bound: str = "running-max"
    fixed_eta: float | None = None

    def __post_init__(self):
        problems = []
        if not 0 < self.eps_r < 1:
            problems.append("eps_r must lie in (0, 1)")
        if not 0 < self.delta < 1:
            problems.append("delta must lie in (0, 1)")
        if self.interval < 2:
            problems.append("interval must be at least 2")
        if not 1 <= self.threshold < self.interval:
            problems.append("threshold t must satisfy 1 <= t < l")
        if self.sample_cap < self.interval:
            problems.append("sample_cap must be at least the updating interval")
        if self.warmup_stages < 0 or (self.query_warmup_stages or 0) < 0:
            problems.append("warm-up stage counts must be nonnegative")
        if self.algorithm not in ALGORITHMS:
            problems.append(f"algorithm must be one of {ALGORITHMS}")
        if self.max_restarts < 0:
            problems.append("max_restarts must be nonnegative")
        if self.mu_bound not in ("running-max", "analytic"):
            problems.append("mu_bound must be 'running-max' or 'analytic'")
        if self.init_strategy not in _SWITCH:
            problems.append(f"init_strategy must be one of {tuple(_SWITCH)}")
        if self.fixed_eta is not None and not 0 <= self.fixed_eta <= 1:
            problems.append("fixed_eta must lie in [0, 1]")
        if not 0 < self.p_floor < 1:
            problems.append("p_floor must lie in (0, 1)")
        if problems:
            raise ConfigError("; ".join(problems))

    @property
    def switch_after(self) -> int:
        return self.max_restarts if self.restart_strategy_switch is None else self.restart_strategy_switch


@dataclass
class StageAccumulator:
    i: int = 0
    z_total: float = 0.0
    zeta: float = 0.0
    b_tilde: float = 0.0
    mu_tilde: float = math.nan
    sigma2_tilde: float = math.nan
    n_tilde: float = math.inf


@dataclass(frozen=True)
class StageRecord:
    index: int
    phase: str
    count: int
    b_tilde: float
    mu_tilde: float
    sigma2_tilde: float
    n_tilde: float
    n_sigma: float
    n_mu: float
    eta: float | None
    degenerate: bool = False


@dataclass
class RunAccumulator:
    """gamma and the omega sums, plus the (mean, N~) pairs they summarize."""

    gamma: float = 0.0
    omega_total: float = 0.0
    omega_sum: float = 0.0
    k: int = 0
    folds: list[tuple[float, float]] = field(default_factory=list)

    def fold(self, count: int, z_total: float, n_tilde: float):
        mean = z_total / count
        self.gamma += count / n_tilde
        self.omega_total += mean / n_tilde
        self.omega_sum += 1.0 / n_tilde
        self.k += 1
        self.folds.append((mean, n_tilde))

    def weights(self) -> np.ndarray:
        n = np.array([f[1] for f in self.folds], dtype=float)
        finite = np.isfinite(n)
        if not finite.any():
            return np.zeros(len(n))
        # relative to the first finite N~ so one stage gets weight exactly 1
        r = np.where(finite, n[finite][0] / n, 0.0)
        return r / r.sum()

    def estimate(self) -> float:
        n = np.array([f[1] for f in self.folds], dtype=float)
        finite = np.isfinite(n)
        if not finite.any():
            return 0.0
        r = np.where(finite, n[finite][0] / n, 0.0)
        means = np.array([f[0] for f in self.folds])
        return float(np.dot(r, means) / r.sum())


@dataclass
class EstimateReport:
    estimate: float
    stages: list[StageRecord]
    restarts: int
    degenerate_flags: list[str]
    total_samples: int
    estimation_samples: int
    terminated_by: str
    n_required: float
    gamma: float
    init_strategy: str
    importance: ImportanceFunction | None = field(default=None, repr=False, compare=False)

    @property
    def estimation_stages(self) -> list[StageRecord]:
        return [s for s in self.stages if s.phase == "estimate"]


def _moments(batch_scores: np.ndarray):
    n = len(batch_scores)
    z_total = float(np.cumsum(batch_scores)[-1]) if n else 0.0
    zeta = float(np.cumsum(batch_scores * batch_scores)[-1]) if n else 0.0
    b = float(batch_scores.max()) if n else 0.0
    mu = z_total / n if n else math.nan
    s2 = stopping.variance_estimate(z_total, zeta, n) if n >= 2 else math.nan
    return z_total, zeta, b, mu, s2


class _Estimator:
    def __init__(self, net: BayesNet, w: dict[int, int], cfg: EngineConfig):
        self.net, self.w, self.cfg = net, w, cfg
        self.params = stopping.StoppingParams.from_delta(cfg.eps_r, cfg.delta, cfg.delta_s_table)
        self.log_term = math.log(2.0 / self.params.delta_s)
        self.analytic_b = lw_bound(net, w) if cfg.mu_bound == "analytic" else None

    def n_sigma(self, b, mu, s2):
        """Running N~ with the equal-score fallback; also returns the fallback mask."""
        b, mu, s2 = (np.asarray(v, dtype=float) for v in (b, mu, s2))
        degenerate = s2 <= 0
        s2 = np.where(degenerate, b * self.cfg.eps_r * mu, s2)
        n = np.ceil(stopping.staged_bound_array(self.params.alpha, self.cfg.eps_r, b, mu, s2))
        return n, degenerate

    def n_mu(self, b, mu):
        if self.analytic_b is not None:
            b = np.full_like(np.asarray(b, dtype=float), self.analytic_b)
        return np.ceil(stopping.mu_bound_array(self.log_term, self.cfg.eps_r, b, mu))

    def required(self, b, mu, s2):
        n_s, degenerate = self.n_sigma(b, mu, s2)
        if self.cfg.algorithm == "ais-mu":
            return self.n_mu(b, mu), np.zeros_like(degenerate)
        return n_s, degenerate

    def record(self, index, phase, scores, eta, n_tilde=None, degenerate=False):
        count = len(scores)
        _, _, b, mu, s2 = _moments(scores)
        if b > 0 and count >= 2:
            n_s = float(self.n_sigma(b, mu, s2)[0])
            n_m = float(self.n_mu(b, mu))
        else:
            n_s = n_m = math.inf
        if n_tilde is None:
            n_tilde = n_m if self.cfg.algorithm == "ais-mu" else n_s
        return StageRecord(index, phase, count, b, mu, s2, float(n_tilde), n_s, n_m, eta, bool(degenerate))

    def learn(self, imp, batch, state: LearnState):
        b = float(batch.scores.max())
        lam = lambda_ratio(state.b_prev, b)
        eta = self.cfg.fixed_eta if self.cfg.fixed_eta is not None else learning_rate(state.k, lam)
        imp = update_importance(imp, tally(self.net, imp, batch), eta)
        state.k += 1
        state.eta = eta
        if b > 0:
            state.b_prev = b
        return imp, eta


def estimate_prob(net: BayesNet, w: Mapping | None, cfg: EngineConfig = EngineConfig(),
                  seed: SeedLike = None, *, init_strategy: str | None = None,
                  learned: ImportanceFunction | None = None,
                  warmup_stages: int | None = None) -> EstimateReport:
    """Estimate Pr(W = w) to (eps_r, delta) relative precision.

    Stage s draws from substream (seed, s). `learned` seeds the importance
    function (strategy ``from-learned``); `init_strategy` overrides the
    configured initialization.
    """
    w = net.resolve(w)
    seq = as_seed_sequence(seed)
    est = _Estimator(net, w, cfg)
    strategy = init_strategy or ("from-learned" if learned is not None else cfg.init_strategy)
    imp = initial_importance(net, w, strategy, learned=learned, p_floor=cfg.p_floor)
    l, t = cfg.interval, cfg.threshold
    stages: list[StageRecord] = []
    flags: list[str] = []
    learn_state = LearnState()
    stage_no = 0

    n_warm = cfg.warmup_stages if warmup_stages is None else warmup_stages
    for _ in range(n_warm):
        batch = draw_samples(net, imp, l, generator(seq, stage_no))
        imp, eta = est.learn(imp, batch, learn_state)
        stages.append(est.record(stage_no, "warmup", batch.scores, eta))
        stage_no += 1

    run = RunAccumulator()
    acc = StageAccumulator()
    n_tilde = math.inf  # the loop's N~ register; stale until first computed
    est_samples = 0
    terminated = None
    while terminated is None:
        n_draw = min(l, cfg.sample_cap - est_samples)
        gen = generator(seq, stage_no)
        gamma_c = min(run.gamma, 1.0)
        parts: list[ScoredBatch] = []
        drawn, want = 0, min(n_draw, t)
        while True:
            # consecutive draws from one generator equal a single larger draw
            parts.append(draw_samples(net, imp, want, gen))
            drawn += want
            z = np.concatenate([b.scores for b in parts])
            i = np.arange(1, drawn + 1)
            cz = np.cumsum(z)
            cz2 = np.cumsum(z * z)
            cb = np.maximum.accumulate(z)
            n_arr = np.full(drawn, n_tilde)
            deg_arr = np.zeros(drawn, dtype=bool)
            live = (i > t) & (cb > 0)
            if live.any():
                ii = i[live]
                mu = cz[live] / ii
                s2 = np.maximum(0.0, (cz2[live] - ii * mu * mu) / (ii - 1))
                n_live, deg_live = est.required(cb[live], mu, s2)
                n_arr[live] = n_live
                deg_arr[live] = deg_live
                # a zero-score prefix beyond t keeps the stale N~ already in n_arr
            stop = (i >= t) & (i >= (1.0 - gamma_c) * n_arr) & (i < l)
            if stop.any() or drawn == n_draw:
                break
            target = (1.0 - gamma_c) * n_arr[-1]
            guess = int(min(target, n_draw)) - drawn + 32 if math.isfinite(target) else n_draw
            want = min(n_draw - drawn, max(guess, 256))
        batch = ScoredBatch.concat(parts)
        hit = np.flatnonzero(stop)
        if hit.size:
            count = int(hit[0]) + 1
            terminated = "required-samples-met"
        else:
            count = drawn
        n_fold = float(n_arr[count - 1])
        zs = z[:count]
        acc = StageAccumulator(count, float(cz[count - 1]), float(cz2[count - 1]), float(cb[count - 1]))
        if count >= 2:
            acc.mu_tilde = acc.z_total / count
            acc.sigma2_tilde = stopping.variance_estimate(acc.z_total, acc.zeta, count)
        acc.n_tilde = n_fold
        degenerate = bool(deg_arr[count - 1])
        if degenerate:
            flags.append(f"stage {stage_no}: equal scores, variance fallback used")
        run.fold(count, acc.z_total, n_fold)
        n_tilde = n_fold
        est_samples += count
        eta = None
        if terminated is None and count == l and cfg.interleave_learning:
            imp, eta = est.learn(imp, batch, learn_state)
        stages.append(est.record(stage_no, "estimate", zs, eta, n_fold, degenerate))
        stage_no += 1
        if terminated is None and est_samples >= cfg.sample_cap:
            terminated = "sample-cap"
    if terminated == "required-samples-met" and acc.i <= t:
        flags.append(f"final stage ended with i={acc.i} <= t; N~ carried from the previous stage")

    estimate = run.estimate()
    if terminated == "sample-cap" and not any(s.b_tilde > 0 for s in stages if s.phase == "estimate"):
        terminated = "zero-mass"
        estimate = 0.0
    return EstimateReport(
        estimate=estimate,
        stages=stages,
        restarts=0,
        degenerate_flags=flags,
        total_samples=sum(s.count for s in stages),
        estimation_samples=est_samples,
        terminated_by=terminated,
        n_required=n_tilde,
        gamma=run.gamma,
        init_strategy=strategy,
        importance=imp,
    )


def run_with_restart(net: BayesNet, w: Mapping | None, cfg: EngineConfig = EngineConfig(),
                     seed: SeedLike = None, *, learned: ImportanceFunction | None = None,
                     warmup_stages: int | None = None) -> EstimateReport:
    """Retry `estimate_prob` on fresh substreams while the sample cap binds.

    Attempt a uses substream (seed, a). From attempt `cfg.switch_after` on,
    the initialization strategy is switched. Returns the first report that
    met its required sample count, else the capped report with smallest N~.
    """
    seq = as_seed_sequence(seed)
    base = "from-learned" if learned is not None else cfg.init_strategy
    capped = []
    for attempt in range(cfg.max_restarts + 1):
        strategy = _SWITCH[base] if attempt > 0 and attempt >= cfg.switch_after else base
        report = estimate_prob(
            net, w, cfg, substream(seq, attempt), init_strategy=strategy,
            learned=learned if strategy == "from-learned" else None,
            warmup_stages=warmup_stages,
        )
        report.restarts = attempt
        if report.terminated_by == "required-samples-met":
            return report
        capped.append(report)
    best = min(capped, key=lambda r: r.n_required)
    best.restarts = len(capped) - 1
    return best


@dataclass
class PosteriorResult:
    node: str
    state: str
    posterior: float
    bounds: stopping.PosteriorBound
    report: EstimateReport | None


@dataclass
class PosteriorRun:
    evidence_report: EstimateReport
    results: list[PosteriorResult]


def infer_posteriors(net: BayesNet, evidence: Mapping | None, queries: Sequence[tuple],
                     cfg: EngineConfig = EngineConfig(), seed: SeedLike = None) -> PosteriorRun:
    """Posterior Pr(a_j | e) for each (node, state) query as phi_j / phi_e.

    Call 0 (the evidence) draws from substream (seed, 0), query j from
    (seed, j + 1). Each result carries the relative-error interval that
    holds with confidence at least 1 - 2*delta.
    """
    e = net.resolve(evidence)
    if not e and not queries:
        raise ValueError("nothing to infer: no evidence and no queries")
    if e and lw_bound(net, e) == 0.0:
        raise ImpossibleEvidenceError("impossible evidence")
    seq = as_seed_sequence(seed)
    bounds = stopping.posterior_error_bounds(cfg.eps_r, cfg.delta)
    ev = run_with_restart(net, e, cfg, substream(seq, 0))
    if ev.terminated_by == "zero-mass" or ev.estimate <= 0:
        raise ZeroMassError("evidence probability indistinguishable from zero")
    learned = ev.importance if cfg.reuse_learned_importance else None
    results = []
    for j, (node, state) in enumerate(queries):
        a = net.resolve({node: state})
        (qi, qs), = a.items()
        label = (net.nodes[qi].id, net.nodes[qi].states[qs])
        if qi in e:
            posterior = 1.0 if e[qi] == qs else 0.0
            report = ev if e[qi] == qs else None
        elif lw_bound(net, {**e, **a}) == 0.0:
            posterior, report = 0.0, None
        else:
            report = run_with_restart(net, {**e, **a}, cfg, substream(seq, j + 1),
                                      learned=learned, warmup_stages=cfg.query_warmup_stages)
            posterior = report.estimate / ev.estimate
        results.append(PosteriorResult(*label, posterior, bounds, report))
    return PosteriorRun(ev, results)
