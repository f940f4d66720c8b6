"""
Learning the importance function
================================

Each stage moves the ICPT rows toward the score-weighted conditionals
seen in its samples. The score spread, and with it the required sample
count, shrinks over the stages.
"""

from aisbn import EngineConfig, estimate_prob, exact_event_probability
from aisbn.generate import random_network

net = random_network(15, seed=11)
e = {"X14": "s0", "X12": "s1", "X10": "s1", "X8": "s0"}
exact = exact_event_probability(net, e).probability

cfg = EngineConfig(eps_r=0.05, delta=0.05, warmup_stages=8, interval=2500)
report = estimate_prob(net, e, cfg, seed=1)
print(f"{'stage':>5} {'phase':>8} {'eta':>6} {'b~':>10} {'cv':>8} {'N_sigma':>10} {'N_mu':>10}")
for s in report.stages:
    cv = (s.sigma2_tilde ** 0.5) / s.mu_tilde if s.mu_tilde > 0 else float("nan")
    eta = "" if s.eta is None else f"{s.eta:.3f}"
    print(f"{s.index:5d} {s.phase:>8} {eta:>6} {s.b_tilde:10.3e} {cv:8.3f} {s.n_sigma:10.0f} {s.n_mu:10.0f}")

print(f"\nestimate {report.estimate:.6e}  exact {exact:.6e}  "
      f"relative error {abs(report.estimate - exact) / exact:.4f}")
print("estimation samples:", report.estimation_samples, "terminated by:", report.terminated_by)
